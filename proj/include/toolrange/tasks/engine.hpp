#pragma once
// Task creation engine: seed sampling, retrieval recall, round-robin
// bundling across servers, and the draft -> critique -> revise loop that
// produces the final task spec.

#include <utility>

#include "toolrange/core/rng.hpp"
#include "toolrange/llm/gateway.hpp"
#include "toolrange/registry/registry.hpp"
#include "toolrange/retrieval/index.hpp"
#include "toolrange/tasks/types.hpp"

namespace toolrange::tasks {

struct EngineConfig {
    int recall_k = 40;
    std::pair<int, int> size_range = {6, 12};
    int min_servers = 3;
    int max_rounds = 4;
    int parse_retries = 1;
    std::string gateway_profile = "synth";

    static EngineConfig from_json(const Json& j);
};

// Raised when no feasible bundle exists even after recall widening.
struct InfeasibleBundle : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// 1-3 tools, uniform count, uniform without replacement.
std::vector<std::string> sample_seed_tools(const registry::Registry& registry, Rng& rng);

// Top-recall_k tools for the concatenated seed names+descriptions, seeds
// force-included, deduplicated. recall_k == 0 yields exactly the seeds.
std::vector<std::string> recall_candidates(const std::vector<std::string>& seeds,
                                           const registry::Registry& registry,
                                           const retrieval::ToolIndex& index, int recall_k);

struct BundleOutcome {
    bool feasible = false;
    std::string reason;  // set when infeasible
    CandidateBundle bundle;
};

// Balanced round-robin selection across server groups in rng-shuffled
// order. Guarantees, when feasible: size within size_range, servers >=
// min_servers, per-server count <= ceil(size / groups touched), seeds kept.
BundleOutcome assemble_bundle(const std::vector<std::string>& seeds,
                              const std::vector<std::string>& recalled,
                              const registry::Registry& registry,
                              std::pair<int, int> size_range, int min_servers, Rng& rng);

TaskSpec draft_task(const CandidateBundle& bundle, const registry::Registry& registry,
                    llm::Gateway& gateway, const EngineConfig& config,
                    const std::string& feedback, int round);

CritiqueResult critique_task(const TaskSpec& draft, const CandidateBundle& bundle,
                             llm::Gateway& gateway, const EngineConfig& config, int round);

// The full loop. Provenance records rounds used, convergence, and the
// critique history; a non-converged result still carries the best draft.
TaskSpec synthesize_task(const registry::Registry& registry, const retrieval::ToolIndex& index,
                         const EngineConfig& config, Rng& rng, llm::Gateway& gateway,
                         const std::string& task_id);

// n tasks with per-task rng streams derived from (master_seed, ordinal).
std::vector<TaskSpec> synthesize_tasks(const registry::Registry& registry,
                                       const retrieval::ToolIndex& index,
                                       const EngineConfig& config, std::uint64_t master_seed,
                                       int n, llm::Gateway& gateway);

} // namespace toolrange::tasks

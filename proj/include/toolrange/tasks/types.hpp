#pragma once
// Task synthesis domain types: candidate bundles, constraints, the task
// spec itself, and critique verdicts from the check-then-revise loop.

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "toolrange/core/json.hpp"

namespace toolrange::tasks {

struct Constraint {
    std::string constraint_id;
    std::string kind;  // order | diversity | format | tradeoff | other
    std::string text;
    Json machine_check;  // kind-specific params, e.g. {before,after} for order

    Json to_json() const;
    static Constraint from_json(const Json& j);
};

struct CandidateBundle {
    std::vector<std::string> seed_tool_ids;       // 1..3, subset of candidates
    std::vector<std::string> candidate_tool_ids;
    std::set<std::string> servers_covered;
    std::uint64_t rng_seed = 0;

    Json to_json() const;
    static CandidateBundle from_json(const Json& j);
};

struct TaskSpec {
    std::string task_id;
    std::string user_query;
    std::vector<Constraint> constraints;
    std::map<std::string, std::string> tool_rationales;  // tool_id -> role
    CandidateBundle bundle;
    std::vector<std::pair<std::string, std::string>> dependency_edges;  // (before, after)
    Json provenance;  // {rounds, converged, critiques: [...]}

    Json to_json() const;
    static TaskSpec from_json(const Json& j);
};

struct CritiqueResult {
    bool coverage_ok = false;
    bool constraint_ok = false;
    std::string feedback;
    std::map<std::string, bool> per_tool_coverage;

    bool passed() const { return coverage_ok && constraint_ok; }
    Json to_json() const;
    static CritiqueResult from_json(const Json& j);
};

} // namespace toolrange::tasks

#include "toolrange/tasks/engine.hpp"

#include <algorithm>
#include <map>
#include <set>

namespace toolrange::tasks {

EngineConfig EngineConfig::from_json(const Json& j) {
    EngineConfig c;
    c.recall_k = j.value("recall_k", c.recall_k);
    if (j.contains("size_range") && j["size_range"].is_array() && j["size_range"].size() == 2)
        c.size_range = {j["size_range"][0].get<int>(), j["size_range"][1].get<int>()};
    c.min_servers = j.value("min_servers", c.min_servers);
    c.max_rounds = j.value("max_rounds", c.max_rounds);
    c.parse_retries = j.value("parse_retries", c.parse_retries);
    c.gateway_profile = j.value("gateway_profile", c.gateway_profile);
    return c;
}

std::vector<std::string> sample_seed_tools(const registry::Registry& registry, Rng& rng) {
    const auto& tools = registry.tools();
    if (tools.empty()) throw std::invalid_argument("sample_seed_tools: empty registry");
    const auto max_count = std::min<std::size_t>(3, tools.size());
    const auto count = static_cast<std::size_t>(rng.range(1, static_cast<std::int64_t>(max_count)));
    auto picks = rng.sample_indices(tools.size(), count);
    std::vector<std::string> seeds;
    seeds.reserve(picks.size());
    for (auto i : picks) seeds.push_back(tools[i].tool_id);
    return seeds;
}

std::vector<std::string> recall_candidates(const std::vector<std::string>& seeds,
                                           const registry::Registry& registry,
                                           const retrieval::ToolIndex& index, int recall_k) {
    std::string query;
    for (const auto& seed_id : seeds) {
        const auto* tool = registry.find_tool(seed_id);
        if (!tool) continue;
        if (!query.empty()) query += "; ";
        query += tool->tool_name + " " + tool->description;
    }

    std::vector<std::string> out;
    std::set<std::string> seen;
    for (const auto& seed_id : seeds) {
        if (seen.insert(seed_id).second) out.push_back(seed_id);
    }
    if (recall_k > 0) {
        auto found = index.search(query, static_cast<std::size_t>(recall_k));
        for (const auto& hit : found.hits) {
            if (seen.insert(hit.tool_id).second) out.push_back(hit.tool_id);
        }
    }
    return out;
}

BundleOutcome assemble_bundle(const std::vector<std::string>& seeds,
                              const std::vector<std::string>& recalled,
                              const registry::Registry& registry,
                              std::pair<int, int> size_range, int min_servers, Rng& rng) {
    BundleOutcome out;
    if (recalled.empty()) {
        out.reason = "no recalled tools";
        return out;
    }

    // Group by server; within a group seeds come first, then recall order.
    std::map<std::string, std::vector<std::string>> groups;
    std::set<std::string> seed_set(seeds.begin(), seeds.end());
    for (const auto& tool_id : recalled) {
        const auto* tool = registry.find_tool(tool_id);
        if (!tool) continue;
        if (seed_set.count(tool_id))
            groups[tool->server_id].insert(groups[tool->server_id].begin(), tool_id);
        else
            groups[tool->server_id].push_back(tool_id);
    }

    if (static_cast<int>(groups.size()) < min_servers) {
        out.reason = "recalled tools span " + std::to_string(groups.size()) +
                     " servers, need " + std::to_string(min_servers);
        return out;
    }

    int target = static_cast<int>(rng.range(size_range.first, size_range.second));
    const int available = static_cast<int>(recalled.size());
    if (available < size_range.first) {
        out.reason = "only " + std::to_string(available) + " candidates, need at least " +
                     std::to_string(size_range.first);
        return out;
    }
    target = std::min(target, available);

    std::vector<std::string> order;
    order.reserve(groups.size());
    for (const auto& [server_id, _] : groups) order.push_back(server_id);
    rng.shuffle(order);

    // Seeds are committed up front (they sit at the front of their groups),
    // then a balanced round-robin fills the rest: each step takes from the
    // least-loaded group, walking groups in the shuffled order.
    std::map<std::string, std::size_t> taken;
    std::vector<std::string> chosen;
    for (const auto& server_id : order) {
        auto& pool = groups[server_id];
        auto& n = taken[server_id];
        while (n < pool.size() && seed_set.count(pool[n]) &&
               static_cast<int>(chosen.size()) < target) {
            chosen.push_back(pool[n]);
            ++n;
        }
    }
    while (static_cast<int>(chosen.size()) < target) {
        std::string best;
        std::size_t best_count = 0;
        for (const auto& server_id : order) {
            auto& pool = groups[server_id];
            const std::size_t n = taken[server_id];
            if (n >= pool.size()) continue;
            if (best.empty() || n < best_count) {
                best = server_id;
                best_count = n;
            }
        }
        if (best.empty()) break;  // every group exhausted
        chosen.push_back(groups[best][taken[best]]);
        ++taken[best];
    }

    if (static_cast<int>(chosen.size()) < target) {
        out.reason = "groups exhausted before reaching target size";
        return out;
    }

    std::set<std::string> covered;
    std::map<std::string, int> per_server;
    for (const auto& tool_id : chosen) {
        const auto* tool = registry.find_tool(tool_id);
        covered.insert(tool->server_id);
        ++per_server[tool->server_id];
    }
    if (static_cast<int>(covered.size()) < min_servers) {
        out.reason = "selection touched " + std::to_string(covered.size()) + " servers, need " +
                     std::to_string(min_servers);
        return out;
    }
    const int cap = (target + static_cast<int>(covered.size()) - 1) /
                    static_cast<int>(covered.size());
    for (const auto& [server_id, count] : per_server) {
        if (count > cap) {
            out.reason = "server " + server_id + " holds " + std::to_string(count) +
                         " tools, cap " + std::to_string(cap);
            return out;
        }
    }
    for (const auto& seed_id : seeds) {
        if (std::find(chosen.begin(), chosen.end(), seed_id) == chosen.end()) {
            out.reason = "seed tool " + seed_id + " fell out of the bundle";
            return out;
        }
    }

    out.feasible = true;
    out.bundle.seed_tool_ids = seeds;
    out.bundle.candidate_tool_ids = std::move(chosen);
    out.bundle.servers_covered = std::move(covered);
    return out;
}

namespace {

Json bundle_request_json(const CandidateBundle& bundle, const registry::Registry& registry) {
    Json tools = Json::array();
    for (const auto& tool_id : bundle.candidate_tool_ids) {
        const auto* tool = registry.find_tool(tool_id);
        if (!tool) continue;
        tools.push_back(Json{
            {"tool_id", tool->tool_id},
            {"tool_name", tool->tool_name},
            {"description", tool->description},
            {"server_id", tool->server_id},
            {"app_name", tool->app_name},
            {"input_schema", tool->input_schema},
        });
    }
    return Json{{"tools", tools}, {"seed_tool_ids", bundle.seed_tool_ids}};
}

const char* kSynthSystemPrompt =
    "You write realistic multi-app user tasks for a tool-using agent. "
    "Given a candidate tool bundle, produce one coherent request that "
    "plausibly needs those tools, with demanding but realistic constraints "
    "(ordering, multi-service diversity, output format, explicit trade-offs). "
    "Respond with only a JSON object: {\"user_query\": str, \"constraints\": "
    "[{\"constraint_id\": str, \"kind\": \"order|diversity|format|tradeoff|other\", "
    "\"text\": str, \"machine_check\": obj?}], \"tool_rationales\": {tool_id: str}, "
    "\"dependency_edges\": [[tool_id, tool_id]]}. Every bundle tool needs a rationale.";

const char* kCritiqueSystemPrompt =
    "You review drafted agent tasks on two axes: tool coverage (does the "
    "request motivate every candidate tool?) and constraint quality (are the "
    "constraints diverse, non-trivial, long-horizon?). Respond with only a "
    "JSON object: {\"coverage_ok\": bool, \"constraint_ok\": bool, \"feedback\": str, "
    "\"per_tool_coverage\": {tool_id: bool}}. Feedback must be actionable when "
    "either flag is false.";

} // namespace

TaskSpec draft_task(const CandidateBundle& bundle, const registry::Registry& registry,
                    llm::Gateway& gateway, const EngineConfig& config,
                    const std::string& feedback, int round) {
    if (bundle.candidate_tool_ids.empty())
        throw std::invalid_argument("draft_task: empty bundle");

    Json request{{"bundle", bundle_request_json(bundle, registry)},
                 {"feedback", feedback},
                 {"round", round},
                 {"min_servers", static_cast<int>(bundle.servers_covered.size())}};
    std::vector<llm::Message> messages{
        {"system", kSynthSystemPrompt},
        {"user", "[draft-request]\n```json\n" + request.dump(2) + "\n```"},
    };

    Json parsed = llm::chat_json(gateway, config.gateway_profile, messages, config.parse_retries);

    auto build = [&](const Json& body) {
        TaskSpec draft;
        draft.user_query = body.value("user_query", "");
        for (const auto& c : body.value("constraints", Json::array()))
            draft.constraints.push_back(Constraint::from_json(c));
        std::set<std::string> in_bundle(bundle.candidate_tool_ids.begin(),
                                        bundle.candidate_tool_ids.end());
        const Json rationales = body.value("tool_rationales", Json::object());
        for (const auto& [tool_id, why] : rationales.items()) {
            if (in_bundle.count(tool_id) && why.is_string())
                draft.tool_rationales[tool_id] = why.get<std::string>();
        }
        for (const auto& e : body.value("dependency_edges", Json::array())) {
            if (e.is_array() && e.size() == 2 && in_bundle.count(e[0].get<std::string>()) &&
                in_bundle.count(e[1].get<std::string>()))
                draft.dependency_edges.emplace_back(e[0].get<std::string>(),
                                                    e[1].get<std::string>());
        }
        draft.bundle = bundle;
        return draft;
    };

    TaskSpec draft = build(parsed);

    std::vector<std::string> missing;
    for (const auto& tool_id : bundle.candidate_tool_ids)
        if (!draft.tool_rationales.count(tool_id)) missing.push_back(tool_id);

    if (draft.user_query.empty() || draft.constraints.empty() || !missing.empty()) {
        // one targeted repair round, then give up
        Json repair{{"missing_rationales", missing},
                    {"needs_user_query", draft.user_query.empty()},
                    {"needs_constraints", draft.constraints.empty()}};
        messages.push_back({"assistant", parsed.dump()});
        messages.push_back({"user", "[draft-request] The draft is incomplete: " + repair.dump() +
                                        ". Respond again with the full JSON object."});
        parsed = llm::chat_json(gateway, config.gateway_profile, messages, config.parse_retries);
        draft = build(parsed);
        missing.clear();
        for (const auto& tool_id : bundle.candidate_tool_ids)
            if (!draft.tool_rationales.count(tool_id)) missing.push_back(tool_id);
        if (draft.user_query.empty() || draft.constraints.empty() || !missing.empty())
            throw std::runtime_error("draft_task: incomplete draft after repair");
    }
    return draft;
}

CritiqueResult critique_task(const TaskSpec& draft, const CandidateBundle& bundle,
                             llm::Gateway& gateway, const EngineConfig& config, int round) {
    Json request{{"draft", draft.to_json()},
                 {"bundle", Json{{"tools", bundle.candidate_tool_ids}}},
                 {"round", round}};
    std::vector<llm::Message> messages{
        {"system", kCritiqueSystemPrompt},
        {"user", "[critique-request]\n```json\n" + request.dump(2) + "\n```"},
    };
    Json parsed = llm::chat_json(gateway, config.gateway_profile, messages, config.parse_retries);
    CritiqueResult critique = CritiqueResult::from_json(parsed);

    // Consistency: a mostly-failing per-tool map cannot carry coverage_ok.
    if (!critique.per_tool_coverage.empty()) {
        std::size_t failing = 0;
        for (const auto& [_, ok] : critique.per_tool_coverage)
            if (!ok) ++failing;
        if (failing * 2 > critique.per_tool_coverage.size()) critique.coverage_ok = false;
    }
    if (!critique.passed() && critique.feedback.empty())
        critique.feedback = "critique flagged the draft without detail; revise and resubmit";
    return critique;
}

TaskSpec synthesize_task(const registry::Registry& registry, const retrieval::ToolIndex& index,
                         const EngineConfig& config, Rng& rng, llm::Gateway& gateway,
                         const std::string& task_id) {
    if (config.max_rounds < 1) throw std::invalid_argument("synthesize_task: max_rounds >= 1");

    auto seeds = sample_seed_tools(registry, rng);

    BundleOutcome outcome;
    int recall_k = config.recall_k;
    for (int widening = 0; widening < 3; ++widening) {
        auto recalled = recall_candidates(seeds, registry, index, recall_k);
        outcome = assemble_bundle(seeds, recalled, registry, config.size_range,
                                  config.min_servers, rng);
        if (outcome.feasible) break;
        recall_k = recall_k == 0 ? 16 : recall_k * 2;
    }
    if (!outcome.feasible)
        throw InfeasibleBundle("no feasible bundle for " + task_id + ": " + outcome.reason);

    TaskSpec best;
    int best_score = -1;
    Json critiques = Json::array();
    std::string feedback;
    bool converged = false;
    int rounds_used = 0;

    for (int round = 1; round <= config.max_rounds; ++round) {
        rounds_used = round;
        TaskSpec draft = draft_task(outcome.bundle, registry, gateway, config, feedback, round);
        CritiqueResult critique = critique_task(draft, outcome.bundle, gateway, config, round);
        critiques.push_back(critique.to_json());

        const int score = (critique.coverage_ok ? 1 : 0) + (critique.constraint_ok ? 1 : 0);
        if (score >= best_score) {
            best_score = score;
            best = std::move(draft);
        }
        if (critique.passed()) {
            converged = true;
            break;
        }
        feedback = critique.feedback;
    }

    best.task_id = task_id;
    best.provenance = Json{{"rounds", rounds_used},
                           {"converged", converged},
                           {"critiques", critiques}};
    return best;
}

std::vector<TaskSpec> synthesize_tasks(const registry::Registry& registry,
                                       const retrieval::ToolIndex& index,
                                       const EngineConfig& config, std::uint64_t master_seed,
                                       int n, llm::Gateway& gateway) {
    std::vector<TaskSpec> tasks;
    std::set<std::string> bundles_seen;
    for (int i = 0; i < n; ++i) {
        std::string task_id = "task-" + std::to_string(master_seed) + "-" + std::to_string(i);
        Rng rng = Rng::derive(master_seed, task_id);
        TaskSpec task = synthesize_task(registry, index, config, rng, gateway, task_id);
        task.bundle.rng_seed = master_seed;

        // identical bundles across the set add nothing; keep the first
        std::string key = canonical_dump(Json(task.bundle.candidate_tool_ids));
        if (!bundles_seen.insert(key).second) continue;
        tasks.push_back(std::move(task));
    }
    return tasks;
}

} // namespace toolrange::tasks

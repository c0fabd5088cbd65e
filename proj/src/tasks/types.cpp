#include "toolrange/tasks/types.hpp"

namespace toolrange::tasks {

Json Constraint::to_json() const {
    Json j{{"constraint_id", constraint_id}, {"kind", kind}, {"text", text}};
    if (!machine_check.is_null() && !machine_check.empty()) j["machine_check"] = machine_check;
    return j;
}

Constraint Constraint::from_json(const Json& j) {
    Constraint c;
    c.constraint_id = j.value("constraint_id", "");
    c.kind = j.value("kind", "other");
    c.text = j.value("text", "");
    c.machine_check = j.value("machine_check", Json());
    return c;
}

Json CandidateBundle::to_json() const {
    return Json{
        {"seed_tool_ids", seed_tool_ids},
        {"candidate_tool_ids", candidate_tool_ids},
        {"servers_covered", std::vector<std::string>(servers_covered.begin(),
                                                     servers_covered.end())},
        {"rng_seed", rng_seed},
    };
}

CandidateBundle CandidateBundle::from_json(const Json& j) {
    CandidateBundle b;
    b.seed_tool_ids = j.value("seed_tool_ids", std::vector<std::string>{});
    b.candidate_tool_ids = j.value("candidate_tool_ids", std::vector<std::string>{});
    for (const auto& s : j.value("servers_covered", std::vector<std::string>{}))
        b.servers_covered.insert(s);
    b.rng_seed = j.value("rng_seed", std::uint64_t{0});
    return b;
}

Json TaskSpec::to_json() const {
    Json constraints_json = Json::array();
    for (const auto& c : constraints) constraints_json.push_back(c.to_json());
    Json rationales = Json::object();
    for (const auto& [tool_id, why] : tool_rationales) rationales[tool_id] = why;
    Json edges = Json::array();
    for (const auto& [before, after] : dependency_edges)
        edges.push_back(Json::array({before, after}));
    return Json{
        {"task_id", task_id},
        {"user_query", user_query},
        {"constraints", constraints_json},
        {"tool_rationales", rationales},
        {"bundle", bundle.to_json()},
        {"dependency_edges", edges},
        {"provenance", provenance},
    };
}

TaskSpec TaskSpec::from_json(const Json& j) {
    TaskSpec t;
    t.task_id = j.value("task_id", "");
    t.user_query = j.value("user_query", "");
    for (const auto& c : j.value("constraints", Json::array()))
        t.constraints.push_back(Constraint::from_json(c));
    const Json rationales = j.value("tool_rationales", Json::object());
    for (const auto& [tool_id, why] : rationales.items())
        t.tool_rationales[tool_id] = why.get<std::string>();
    t.bundle = CandidateBundle::from_json(j.value("bundle", Json::object()));
    for (const auto& e : j.value("dependency_edges", Json::array())) {
        if (e.is_array() && e.size() == 2)
            t.dependency_edges.emplace_back(e[0].get<std::string>(), e[1].get<std::string>());
    }
    t.provenance = j.value("provenance", Json::object());
    return t;
}

Json CritiqueResult::to_json() const {
    Json per_tool = Json::object();
    for (const auto& [tool_id, ok] : per_tool_coverage) per_tool[tool_id] = ok;
    return Json{
        {"coverage_ok", coverage_ok},
        {"constraint_ok", constraint_ok},
        {"feedback", feedback},
        {"per_tool_coverage", per_tool},
    };
}

CritiqueResult CritiqueResult::from_json(const Json& j) {
    CritiqueResult c;
    c.coverage_ok = j.value("coverage_ok", false);
    c.constraint_ok = j.value("constraint_ok", false);
    c.feedback = j.value("feedback", "");
    const Json per_tool = j.value("per_tool_coverage", Json::object());
    for (const auto& [tool_id, ok] : per_tool.items())
        c.per_tool_coverage[tool_id] = ok.get<bool>();
    return c;
}

} // namespace toolrange::tasks

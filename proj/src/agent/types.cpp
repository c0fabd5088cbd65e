#include "toolrange/agent/types.hpp"

#include <map>
#include <set>

namespace toolrange::agent {

bool SubGoalGraph::all_complete() const {
    for (const auto& node : nodes)
        if (node.status != "Complete") return false;
    return !nodes.empty();
}

SubGoal* SubGoalGraph::find(const std::string& goal_id) {
    for (auto& node : nodes)
        if (node.goal_id == goal_id) return &node;
    return nullptr;
}

Json SubGoalGraph::to_json() const {
    Json arr = Json::array();
    for (const auto& node : nodes) {
        arr.push_back(Json{{"goal_id", node.goal_id},
                           {"description", node.description},
                           {"depends_on", node.depends_on},
                           {"status", node.status}});
    }
    return Json{{"nodes", arr}};
}

SubGoalGraph SubGoalGraph::from_json(const Json& j) {
    SubGoalGraph g;
    for (const auto& n : j.value("nodes", Json::array())) {
        SubGoal node;
        node.goal_id = n.value("goal_id", "");
        node.description = n.value("description", "");
        node.depends_on = n.value("depends_on", std::vector<std::string>{});
        node.status = n.value("status", "Pending");
        g.nodes.push_back(std::move(node));
    }
    return g;
}

std::string SubGoalGraph::validate() const {
    if (nodes.empty()) return "graph has no nodes";
    std::set<std::string> ids;
    for (const auto& node : nodes) {
        if (node.goal_id.empty()) return "node with empty goal_id";
        if (!ids.insert(node.goal_id).second) return "duplicate goal_id " + node.goal_id;
    }
    for (const auto& node : nodes) {
        for (const auto& dep : node.depends_on)
            if (!ids.count(dep)) return "unresolved dependency " + dep;
    }
    // Kahn's algorithm; leftover nodes mean a cycle.
    std::map<std::string, int> indegree;
    for (const auto& node : nodes) indegree[node.goal_id] = 0;
    for (const auto& node : nodes) indegree[node.goal_id] += static_cast<int>(node.depends_on.size());
    std::vector<std::string> queue;
    for (const auto& [id, d] : indegree)
        if (d == 0) queue.push_back(id);
    std::size_t visited = 0;
    while (!queue.empty()) {
        std::string id = queue.back();
        queue.pop_back();
        ++visited;
        for (const auto& node : nodes) {
            for (const auto& dep : node.depends_on) {
                if (dep == id && --indegree[node.goal_id] == 0) queue.push_back(node.goal_id);
            }
        }
    }
    if (visited != nodes.size()) return "dependency cycle";
    return "";
}

Json Action::to_json() const {
    switch (type) {
        case Type::search:
            return Json{{"type", "search"}, {"query", query}, {"k", k}};
        case Type::invoke:
            return Json{{"type", "invoke"}, {"tool_id", tool_id}, {"arguments", arguments}};
        case Type::respond:
            return Json{{"type", "respond"}, {"text", text}};
    }
    return Json::object();
}

std::optional<Action> Action::from_json(const Json& j) {
    if (!j.is_object()) return std::nullopt;
    const std::string type = j.value("type", "");
    Action a;
    if (type == "search") {
        a.type = Type::search;
        if (!j.contains("query") || !j["query"].is_string()) return std::nullopt;
        a.query = j["query"].get<std::string>();
        a.k = j.value("k", 5);
    } else if (type == "invoke") {
        a.type = Type::invoke;
        if (!j.contains("tool_id") || !j["tool_id"].is_string()) return std::nullopt;
        a.tool_id = j["tool_id"].get<std::string>();
        a.arguments = j.value("arguments", Json::object());
    } else if (type == "respond") {
        a.type = Type::respond;
        a.text = j.value("text", "");
    } else {
        return std::nullopt;
    }
    return a;
}

Json ActorStep::to_json() const {
    Json j{{"step_index", step_index},
           {"thought", thought},
           {"action", action.to_json()},
           {"success", success},
           {"injected", injected}};
    if (!observation.is_null()) j["observation"] = observation;
    return j;
}

ActorStep ActorStep::from_json(const Json& j) {
    ActorStep s;
    s.step_index = j.value("step_index", 0);
    s.thought = j.value("thought", "");
    if (auto a = Action::from_json(j.value("action", Json::object()))) s.action = *a;
    s.observation = j.value("observation", Json());
    s.success = j.value("success", true);
    s.injected = j.value("injected", false);
    return s;
}

bool Turn::has_invoke() const {
    for (const auto& step : steps)
        if (step.action.type == Action::Type::invoke) return true;
    return false;
}

bool Turn::has_successful_invoke() const {
    for (const auto& step : steps)
        if (step.action.type == Action::Type::invoke && step.success) return true;
    return false;
}

Json Turn::to_json() const {
    Json steps_json = Json::array();
    for (const auto& step : steps) steps_json.push_back(step.to_json());
    return Json{{"turn_index", turn_index},
                {"planner_feedback", planner_feedback},
                {"steps", steps_json},
                {"graph_snapshot", graph_snapshot}};
}

Turn Turn::from_json(const Json& j) {
    Turn t;
    t.turn_index = j.value("turn_index", 0);
    t.planner_feedback = j.value("planner_feedback", "");
    for (const auto& s : j.value("steps", Json::array())) t.steps.push_back(ActorStep::from_json(s));
    t.graph_snapshot = j.value("graph_snapshot", Json::object());
    return t;
}

Json Trajectory::to_json() const {
    Json turns_json = Json::array();
    for (const auto& turn : turns) turns_json.push_back(turn.to_json());
    return Json{
        {"task_id", task_id},
        {"run_index", run_index},
        {"plan", plan},
        {"turns", turns_json},
        {"final_answer", final_answer},
        {"termination", termination},
        {"interventions", interventions},
        {"constraints", constraints},
        {"stats", stats},
    };
}

Trajectory Trajectory::from_json(const Json& j) {
    Trajectory t;
    t.task_id = j.value("task_id", "");
    t.run_index = j.value("run_index", 0);
    t.plan = j.value("plan", Json::object());
    for (const auto& turn : j.value("turns", Json::array())) t.turns.push_back(Turn::from_json(turn));
    t.final_answer = j.value("final_answer", "");
    t.termination = j.value("termination", "");
    t.interventions = j.value("interventions", Json::array());
    t.constraints = j.value("constraints", Json::array());
    t.stats = j.value("stats", Json::object());
    return t;
}

} // namespace toolrange::agent

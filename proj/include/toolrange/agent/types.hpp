#pragma once
// Episode record types: the planner's sub-goal graph, actor steps, turns,
// and the full trajectory. Everything serializes losslessly; a trajectory
// file is self-contained apart from the task it references.

#include <optional>
#include <string>
#include <vector>

#include "toolrange/core/json.hpp"
#include "toolrange/tasks/types.hpp"

namespace toolrange::agent {

struct SubGoal {
    std::string goal_id;
    std::string description;
    std::vector<std::string> depends_on;
    std::string status = "Pending";  // Pending | Complete
};

struct SubGoalGraph {
    std::vector<SubGoal> nodes;

    bool all_complete() const;
    SubGoal* find(const std::string& goal_id);

    Json to_json() const;
    static SubGoalGraph from_json(const Json& j);

    // Empty string when valid; otherwise the reason (duplicate id,
    // unresolved dependency, cycle, empty).
    std::string validate() const;
};

struct Action {
    enum class Type { search, invoke, respond };
    Type type = Type::respond;
    std::string query;  // search
    int k = 5;          // search
    std::string tool_id;  // invoke
    Json arguments;       // invoke
    std::string text;     // respond

    Json to_json() const;
    static std::optional<Action> from_json(const Json& j);
};

struct ActorStep {
    int step_index = 0;
    std::string thought;
    Action action;
    Json observation;  // tool/search observation; null for respond
    bool success = true;
    bool injected = false;

    Json to_json() const;
    static ActorStep from_json(const Json& j);
};

struct Turn {
    int turn_index = 0;  // 1-based, contiguous
    std::string planner_feedback;
    std::vector<ActorStep> steps;
    Json graph_snapshot;  // {goal_id: status} after this turn's feedback

    bool has_invoke() const;
    bool has_successful_invoke() const;

    Json to_json() const;
    static Turn from_json(const Json& j);
};

struct Trajectory {
    std::string task_id;
    int run_index = 0;
    Json plan;  // SubGoalGraph with final statuses
    std::vector<Turn> turns;
    std::string final_answer;
    std::string termination;  // Completed | MaxTurns | Laziness
    Json interventions = Json::array();
    Json constraints = Json::array();  // live constraint list at termination
    Json stats = Json::object();       // deterministic counters only

    Json to_json() const;
    static Trajectory from_json(const Json& j);
};

} // namespace toolrange::agent

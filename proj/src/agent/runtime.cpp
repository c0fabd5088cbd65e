#include "toolrange/agent/runtime.hpp"

#include <algorithm>
#include <set>

#include "toolrange/registry/schema.hpp"
#include "toolrange/retrieval/service.hpp"

namespace toolrange::agent {

namespace {

const char* kPlannerSystem =
    "You are the planner of a tool-using agent. You decompose tasks into a "
    "sub-goal graph and track execution progress against it. Always respond "
    "with only a JSON object in the requested shape.";

const char* kActorSystem =
    "You are the actor of a tool-using agent. Each step, emit exactly one "
    "JSON object: {\"thought\": str, \"action\": {\"type\": \"search\", \"query\": str, "
    "\"k\": int} | {\"type\": \"invoke\", \"tool_id\": str, \"arguments\": obj} | "
    "{\"type\": \"respond\", \"text\": str}}. Tools must be discovered through "
    "search before they can be invoked in the same turn.";

std::string fenced(const Json& j) { return "```json\n" + j.dump(2) + "\n```"; }

// Head+tail retention for long observations going into the actor context.
std::string clip(const std::string& text, int budget) {
    if (budget <= 0 || static_cast<int>(text.size()) <= budget) return text;
    const auto head = static_cast<std::size_t>(budget) * 3 / 4;
    const auto tail = static_cast<std::size_t>(budget) - head;
    return text.substr(0, head) + "\n...[truncated " +
           std::to_string(text.size() - head - tail) + " chars]...\n" +
           text.substr(text.size() - tail);
}

Json constraints_json(const std::vector<tasks::Constraint>& constraints) {
    Json arr = Json::array();
    for (const auto& c : constraints) arr.push_back(c.to_json());
    return arr;
}

struct EpisodeStats {
    std::int64_t tool_latency_ms = 0;
    int searches = 0;
    int invokes = 0;
    int responds = 0;
    int gateway_calls = 0;
    int monotonicity_warnings = 0;
    int turn_retries = 0;
    std::string runtime_error;

    Json to_json() const {
        Json j{{"tool_latency_ms", tool_latency_ms}, {"searches", searches},
               {"invokes", invokes},                 {"responds", responds},
               {"gateway_calls", gateway_calls},     {"monotonicity_warnings", monotonicity_warnings},
               {"turn_retries", turn_retries}};
        if (!runtime_error.empty()) j["runtime_error"] = runtime_error;
        return j;
    }
};

} // namespace

RuntimeConfig RuntimeConfig::from_json(const Json& j) {
    RuntimeConfig c;
    c.max_turns = j.value("max_turns", c.max_turns);
    c.step_cap = j.value("step_cap", c.step_cap);
    c.obs_char_budget = j.value("obs_char_budget", c.obs_char_budget);
    c.laziness_limit = j.value("laziness_limit", c.laziness_limit);
    c.session_recovery_turns = j.value("session_recovery_turns", c.session_recovery_turns);
    c.max_plan_nodes = j.value("max_plan_nodes", c.max_plan_nodes);
    c.parse_retries = j.value("parse_retries", c.parse_retries);
    c.planner_profile = j.value("planner_profile", c.planner_profile);
    c.actor_profile = j.value("actor_profile", c.actor_profile);
    return c;
}

SubGoalGraph plan(const tasks::TaskSpec& task, llm::Gateway& gateway,
                  const RuntimeConfig& config) {
    Json request{{"task",
                  Json{{"task_id", task.task_id},
                       {"user_query", task.user_query},
                       {"constraints", constraints_json(task.constraints)},
                       {"tool_ids", task.bundle.candidate_tool_ids}}},
                 {"max_nodes", config.max_plan_nodes}};
    std::vector<llm::Message> messages{
        {"system", kPlannerSystem},
        {"user", "[plan-request] Decompose the task into a dependency-ordered sub-goal "
                 "graph: {\"nodes\": [{\"goal_id\": str, \"description\": str, \"depends_on\": "
                 "[str]}]}.\n" +
                     fenced(request)},
    };

    for (int attempt = 0;; ++attempt) {
        Json parsed = llm::chat_json(gateway, config.planner_profile, messages,
                                     config.parse_retries);
        SubGoalGraph graph = SubGoalGraph::from_json(parsed);
        std::string problem = graph.validate();
        if (problem.empty() && static_cast<int>(graph.nodes.size()) > config.max_plan_nodes)
            problem = "too many nodes (" + std::to_string(graph.nodes.size()) + ")";
        if (problem.empty()) {
            for (auto& node : graph.nodes) node.status = "Pending";
            return graph;
        }
        if (attempt >= 1) throw std::runtime_error("plan: invalid sub-goal graph: " + problem);
        messages.push_back({"assistant", parsed.dump()});
        messages.push_back({"user", "[plan-request] The graph was invalid (" + problem +
                                        "). Respond again with a corrected JSON graph."});
    }
}

Trajectory run_episode(const tasks::TaskSpec& task, const RuntimeConfig& config,
                       llm::Gateway& gateway, const registry::Registry& registry,
                       const retrieval::ToolIndex& index,
                       const faults::InterventionPolicy* policy, int run_index) {
    if (config.max_turns < 1) throw std::invalid_argument("run_episode: max_turns >= 1");

    Trajectory trajectory;
    trajectory.task_id = task.task_id;
    trajectory.run_index = run_index;
    EpisodeStats stats;

    SubGoalGraph graph = plan(task, gateway, config);
    stats.gateway_calls += 1;

    std::optional<faults::StateController> controller;
    if (policy) controller.emplace(*policy, task.task_id, config.session_recovery_turns);

    std::vector<tasks::Constraint> live_constraints = task.constraints;

    std::vector<llm::Message> actor_messages{
        {"system", kActorSystem},
        {"user", "[task] Work on this task.\n" +
                     fenced(Json{{"task_id", task.task_id},
                                 {"user_query", task.user_query},
                                 {"constraints", constraints_json(live_constraints)}})},
    };

    auto summarize_turn = [](const Turn& turn) {
        Json steps = Json::array();
        for (const auto& step : turn.steps) {
            Json s{{"type", step.action.to_json()["type"]}, {"success", step.success}};
            if (step.action.type == Action::Type::invoke) s["tool_id"] = step.action.tool_id;
            steps.push_back(std::move(s));
        }
        return Json{{"turn_index", turn.turn_index},
                    {"steps", steps},
                    {"had_successful_invoke", turn.has_successful_invoke()},
                    {"responded", !turn.steps.empty() &&
                                      turn.steps.back().action.type == Action::Type::respond}};
    };

    std::string feedback = "Start with the first sub-goal.";
    std::string last_respond_text;
    int lazy_streak = 0;
    std::string termination;

    for (int turn_index = 1; turn_index <= config.max_turns; ++turn_index) {
        // Constraint-level interventions land before any actor step.
        if (controller) {
            for (const auto& event : controller->begin_turn(turn_index)) {
                bool replaced = false;
                for (auto& c : live_constraints) {
                    if (c.constraint_id == event.constraint.constraint_id) {
                        c = event.constraint;
                        replaced = true;
                        break;
                    }
                }
                if (!replaced) live_constraints.push_back(event.constraint);
                actor_messages.push_back(
                    {"user", "[constraint-update] The task requirements changed; honor this "
                             "from now on.\n" +
                                 fenced(event.constraint.to_json())});
            }
        }

        actor_messages.push_back(
            {"user", "[turn " + std::to_string(turn_index) + "] planner: " + feedback});

        Turn turn;
        turn.turn_index = turn_index;
        turn.planner_feedback = feedback;

        // One retry for a failing turn; the retry replays from the turn start.
        const std::size_t messages_checkpoint = actor_messages.size();
        bool turn_ok = false;
        for (int turn_attempt = 0; turn_attempt < 2 && !turn_ok; ++turn_attempt) {
            if (turn_attempt == 1) {
                actor_messages.resize(messages_checkpoint);
                turn.steps.clear();
                ++stats.turn_retries;
            }
            try {
                std::set<std::string> workspace;  // tools discovered this turn
                for (int step_index = 0; step_index < config.step_cap; ++step_index) {
                    actor_messages.push_back({"user", "[actor-turn] Decide your next action."});
                    Json reply = llm::chat_json(gateway, config.actor_profile, actor_messages,
                                                config.parse_retries);
                    ++stats.gateway_calls;
                    actor_messages.pop_back();  // marker is not part of the durable context
                    actor_messages.push_back({"assistant", reply.dump()});

                    ActorStep step;
                    step.step_index = step_index;
                    step.thought = reply.value("thought", "");
                    auto action = Action::from_json(reply.value("action", Json::object()));
                    if (!action) {
                        // Malformed action: surface it to the actor and move on.
                        actor_messages.push_back(
                            {"user", "[observation] Unrecognized action; use search, invoke, "
                                     "or respond."});
                        continue;
                    }
                    step.action = *action;

                    if (step.action.type == Action::Type::respond) {
                        ++stats.responds;
                        last_respond_text = step.action.text;
                        turn.steps.push_back(std::move(step));
                        break;
                    }

                    if (step.action.type == Action::Type::search) {
                        ++stats.searches;
                        auto found = index.search(step.action.query,
                                                  static_cast<std::size_t>(
                                                      std::max(step.action.k, 0)));
                        Json results = Json::array();
                        for (const auto& hit : found.hits) {
                            const auto* tool = registry.find_tool(hit.tool_id);
                            if (!tool) continue;
                            workspace.insert(hit.tool_id);
                            results.push_back(Json{{"tool_id", tool->tool_id},
                                                   {"score", hit.score},
                                                   {"tool_name", tool->tool_name},
                                                   {"description", tool->description},
                                                   {"server_id", tool->server_id},
                                                   {"input_schema", tool->input_schema}});
                        }
                        step.observation = Json{{"kind", "search"},
                                                {"query", step.action.query},
                                                {"results", results}};
                        if (found.empty_query) step.observation["warning"] = "empty query";
                        step.success = true;
                    } else {  // invoke
                        ++stats.invokes;
                        registry::ToolResult result;
                        bool injected = false;
                        if (!workspace.count(step.action.tool_id)) {
                            result = registry::ToolResult::make_error(
                                registry::ErrorKind::unavailable,
                                "tool not loaded in this turn's workspace; search for it first");
                        } else if (!registry.find_tool(step.action.tool_id)) {
                            result = registry::ToolResult::make_error(
                                registry::ErrorKind::unavailable,
                                "unknown tool: " + step.action.tool_id);
                        } else if (controller) {
                            auto guarded = controller->guarded_invoke(
                                registry, step.action.tool_id, step.action.arguments,
                                turn_index, step_index);
                            result = std::move(guarded.result);
                            injected = guarded.injected;
                        } else {
                            result = registry.invoke(
                                step.action.tool_id, step.action.arguments,
                                registry::CallContext{{}, turn_index, step_index});
                        }
                        stats.tool_latency_ms += result.latency_ms;
                        step.observation = Json{{"kind", "tool"},
                                                {"tool_id", step.action.tool_id},
                                                {"result", result.to_json()}};
                        step.success = result.ok();
                        step.injected = injected;
                    }

                    actor_messages.push_back(
                        {"user", "[observation]\n" +
                                     clip(fenced(step.observation), config.obs_char_budget)});
                    turn.steps.push_back(std::move(step));
                }
                turn_ok = true;
            } catch (const std::exception& e) {
                if (turn_attempt == 1) {
                    stats.runtime_error = e.what();
                }
            }
        }
        if (!turn_ok) {
            // Two failed attempts: close the episode as a turn-limit stop
            // with the diagnostic preserved in stats.
            trajectory.turns.push_back(std::move(turn));
            termination = "MaxTurns";
            break;
        }

        lazy_streak = turn.has_invoke() ? 0 : lazy_streak + 1;

        // Planner feedback: statuses may only move Pending -> Complete.
        Json feedback_request{{"graph", graph.to_json()}, {"turn", summarize_turn(turn)}};
        Json verdict = llm::chat_json(
            gateway, config.planner_profile,
            {{"system", kPlannerSystem},
             {"user",
              "[feedback-request] Update sub-goal statuses ({\"statuses\": {goal_id: "
              "\"Complete\"|\"Pending\"}, \"feedback\": str}). Completed goals stay "
              "completed.\n" +
                  fenced(feedback_request)}},
            config.parse_retries);
        ++stats.gateway_calls;

        const Json statuses = verdict.value("statuses", Json::object());
        for (const auto& [goal_id, status] : statuses.items()) {
            SubGoal* node = graph.find(goal_id);
            if (!node || !status.is_string()) continue;
            const std::string wanted = status.get<std::string>();
            if (node->status == "Complete" && wanted == "Pending") {
                ++stats.monotonicity_warnings;  // un-completing is ignored
                continue;
            }
            if (wanted == "Complete") node->status = "Complete";
        }
        feedback = verdict.value("feedback", "");

        Json snapshot = Json::object();
        for (const auto& node : graph.nodes) snapshot[node.goal_id] = node.status;
        turn.graph_snapshot = std::move(snapshot);
        trajectory.turns.push_back(std::move(turn));

        if (graph.all_complete()) {
            termination = "Completed";
            break;
        }
        if (lazy_streak >= config.laziness_limit) {
            termination = "Laziness";
            break;
        }
        if (turn_index == config.max_turns) {
            termination = "MaxTurns";
            break;
        }
    }
    if (termination.empty()) termination = "MaxTurns";

    trajectory.termination = termination;
    trajectory.plan = graph.to_json();
    if (controller) trajectory.interventions = controller->records_json();
    trajectory.constraints = constraints_json(live_constraints);

    // Final answer: the last respond text, or a forced summary when the
    // episode stopped without completing.
    trajectory.final_answer = last_respond_text;
    if (termination != "Completed" && stats.runtime_error.empty()) {
        try {
            actor_messages.push_back(
                {"user", "[actor-turn][summarize] The episode is ending (" + termination +
                             "). Respond now with your best final answer."});
            Json reply = llm::chat_json(gateway, config.actor_profile, actor_messages,
                                        config.parse_retries);
            ++stats.gateway_calls;
            if (auto action = Action::from_json(reply.value("action", Json::object()));
                action && action->type == Action::Type::respond && !action->text.empty()) {
                trajectory.final_answer = action->text;
            }
        } catch (const std::exception&) {
            // keep the last respond text
        }
    }

    trajectory.stats = stats.to_json();
    return trajectory;
}

} // namespace toolrange::agent

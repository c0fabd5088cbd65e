#pragma once
// The planner-actor episode loop. The planner owns a sub-goal graph and
// sees turn summaries; the actor runs search/invoke/respond steps through
// the state controller. Termination: Completed (all sub-goals done),
// MaxTurns, or Laziness (three consecutive turns without a tool call).

#include <optional>

#include "toolrange/agent/types.hpp"
#include "toolrange/faults/controller.hpp"
#include "toolrange/llm/gateway.hpp"
#include "toolrange/registry/registry.hpp"
#include "toolrange/retrieval/index.hpp"
#include "toolrange/tasks/types.hpp"

namespace toolrange::agent {

struct RuntimeConfig {
    int max_turns = 30;
    int step_cap = 20;             // actor steps per turn
    int obs_char_budget = 4000;    // observation chars kept in actor context
    int laziness_limit = 3;
    int session_recovery_turns = 3;
    int max_plan_nodes = 15;
    int parse_retries = 1;
    std::string planner_profile = "planner";
    std::string actor_profile = "actor";

    static RuntimeConfig from_json(const Json& j);
};

// Builds and validates the sub-goal graph from the planner model. A cyclic
// or unparseable graph earns one repair prompt, then an error.
SubGoalGraph plan(const tasks::TaskSpec& task, llm::Gateway& gateway,
                  const RuntimeConfig& config);

// Full episode. `policy` may be null: the controller then stays out of the
// loop entirely and calls go straight to the registry.
Trajectory run_episode(const tasks::TaskSpec& task, const RuntimeConfig& config,
                       llm::Gateway& gateway, const registry::Registry& registry,
                       const retrieval::ToolIndex& index,
                       const faults::InterventionPolicy* policy, int run_index = 0);

} // namespace toolrange::agent

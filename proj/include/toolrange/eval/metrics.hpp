#pragma once
// Deterministic trajectory metrics. Pure functions over the episode log;
// every empty denominator comes back absent (nullopt), never zero.

#include <optional>

#include "toolrange/agent/types.hpp"
#include "toolrange/eval/types.hpp"
#include "toolrange/registry/registry.hpp"
#include "toolrange/tasks/types.hpp"

namespace toolrange::eval {

enum class TurnOutcome { success, failure, no_tool };

// failure: at least one invoke and all invokes failed; success: at least
// one successful invoke; no_tool otherwise.
TurnOutcome classify_turn(const agent::Turn& turn);

// P(turn t+1 succeeds | turn t failed), over failures with a following
// turn, as a percentage.
std::optional<double> recovery_rate(const agent::Trajectory& trajectory);

// Share of injected failures after which the agent changed course: a
// different tool, same tool with different canonical arguments, or a fresh
// search before the next invoke (looking at the same and the next turn).
std::optional<double> flexibility(const agent::Trajectory& trajectory);

// Valid calls / all calls (invoke steps checked against their tool schema,
// search steps against the search_tools schema), as a percentage.
std::optional<double> schema_compliance(const agent::Trajectory& trajectory,
                                        const registry::Registry& registry);

struct OrderDiversity {
    std::optional<double> order;      // % of dependency edges honored
    std::optional<double> diversity;  // % of the required server minimum reached
};

OrderDiversity constraint_order_diversity(const agent::Trajectory& trajectory,
                                          const tasks::TaskSpec& task,
                                          const registry::Registry& registry);

int tool_call_count(const agent::Trajectory& trajectory);  // invoke steps

// True when any of the first k run verdicts is a success.
bool pass_at_k(const std::vector<bool>& run_verdicts, int k);

// Spearman rank correlation with average ranks for ties. Requires equal
// lengths >= 2.
double spearman(const std::vector<double>& a, const std::vector<double>& b);

// Order statistics used by verdict aggregation; exposed for property tests.
bool strict_majority(const std::vector<bool>& votes);
double median(std::vector<double> values);

} // namespace toolrange::eval

#pragma once
// The state controller: middleware between the agent and the registry.
// One instance per episode; it owns the episode's injection state (firing
// counters, downed servers, expired sessions) and the intervention log.
//
// The controller's randomness comes only from (policy seed, task_id), never
// from agent behavior, so every agent faces the same adversity.

#include <map>
#include <string>
#include <vector>

#include "toolrange/core/rng.hpp"
#include "toolrange/faults/policy.hpp"
#include "toolrange/registry/registry.hpp"

namespace toolrange::faults {

struct GuardedResult {
    registry::ToolResult result;
    bool injected = false;
};

struct ConstraintEvent {
    std::string rule_id;
    tasks::Constraint constraint;
};

struct ViabilityIssue {
    std::string rule_id;
    std::string server_id;
    std::string detail;
};

struct ViabilityReport {
    bool hard_fail = false;
    std::vector<ViabilityIssue> issues;
    Json to_json() const;
};

// Failure results synthesized without dispatch (timeout / rate limit /
// unavailable / auth). Exposed for direct tests.
registry::ToolResult synthesize_failure(const InterventionAction& action);

// Applies a corrupt_result mutator deterministically. Fills the pre/post
// digests of the payload. `stream` feeds mutators that need randomness.
registry::ToolResult corrupt_result(const registry::ToolResult& original, const Json& mutator,
                                    Rng& stream, std::string* pre_digest,
                                    std::string* post_digest);

class StateController {
public:
    StateController(const InterventionPolicy& policy, const std::string& task_id,
                    int session_recovery_turns = 3);

    // Turn lifecycle: constraint updates due at `turn`, in rule order.
    // Also ages out downed servers and expired sessions.
    std::vector<ConstraintEvent> begin_turn(int turn);

    // The full guarded path: standing failures (downed server, expired
    // session), then first-matching-rule interception, then dispatch.
    GuardedResult guarded_invoke(const registry::Registry& registry, const std::string& tool_id,
                                 const Json& arguments, int turn, int step);

    const std::vector<InterventionRecord>& records() const { return records_; }
    Json records_json() const;

private:
    struct RuleState {
        int matches = 0;  // calls that matched pattern+turn (feeds nth)
        int firings = 0;
    };

    bool trigger_fires(const InterventionRule& rule, RuleState& state,
                       const registry::ToolDescriptor& tool, int turn);

    InterventionPolicy policy_;
    std::string task_id_;
    Rng stream_;
    int session_recovery_turns_;

    std::vector<RuleState> rule_state_;
    std::map<std::string, int> down_until_;       // server_id -> last blocked turn
    std::map<std::string, int> expired_since_;    // server_id -> turn of expiry
    std::map<std::string, std::string> standing_rule_;  // server_id -> rule that caused it
    std::vector<InterventionRecord> records_;
};

// Flags rules that could permanently block every tool of a server the task
// bundle needs: p=1.0, no firing cap, no nth/turn bound, failure action.
ViabilityReport check_viability(const InterventionPolicy& policy,
                                const registry::Registry& registry,
                                const std::vector<std::string>& bundle_tool_ids);

} // namespace toolrange::faults

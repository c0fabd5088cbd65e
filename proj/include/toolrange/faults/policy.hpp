#pragma once
// Intervention policies: seeded rules that decide when a tool call gets a
// fault injected and what that fault is. Policies are immutable and shared;
// per-episode firing state lives in the controller.

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "toolrange/core/json.hpp"
#include "toolrange/tasks/types.hpp"

namespace toolrange::faults {

struct InterventionAction {
    enum class Type {
        timeout,           // fail after after_ms, no dispatch
        rate_limit,        // fail with retry_after_s, no dispatch
        unavailable,       // fail and mark the server down for for_turns
        corrupt_result,    // dispatch, then mutate the ok payload
        delay_result,      // dispatch, then add ms to the reported latency
        session_expire,    // auth failures on the server until re-auth
        constraint_update, // push a new constraint at at_turn
    };

    Type type = Type::timeout;
    std::int64_t after_ms = 0;
    std::int64_t retry_after_s = 0;
    int for_turns = 0;
    Json mutator;  // {"kind":"truncate","frac":F} | {"kind":"field_drop"} |
                   // {"kind":"text_scramble","seed":N}
    std::int64_t delay_ms = 0;
    std::string server_id;  // session_expire; empty = server of the matched call
    tasks::Constraint constraint;  // constraint_update
    int at_turn = 0;

    // True for the variants that turn the call into an error result.
    bool is_failure() const {
        return type == Type::timeout || type == Type::rate_limit ||
               type == Type::unavailable || type == Type::session_expire;
    }

    Json to_json() const;
    static InterventionAction from_json(const Json& j);
};

struct TriggerSpec {
    std::string tool_pattern = "*";  // glob over tool_id and tool_name
    std::optional<std::pair<int, int>> turn_range;  // inclusive
    std::optional<int> nth;  // fire exactly on the nth matching call
    double probability = 1.0;

    Json to_json() const;
    static TriggerSpec from_json(const Json& j);
};

struct InterventionRule {
    std::string rule_id;
    TriggerSpec trigger;
    InterventionAction action;
    std::optional<int> max_firings;

    Json to_json() const;
    static InterventionRule from_json(const Json& j);
};

struct InterventionPolicy {
    std::uint64_t seed = 0;
    std::vector<InterventionRule> rules;

    // Throws std::runtime_error when a rule is malformed (p outside [0,1],
    // inverted turn range, fractional mutator params outside [0,1]).
    void validate() const;

    Json to_json() const;
    static InterventionPolicy from_json(const Json& j);
    static InterventionPolicy load(const std::string& path);
};

struct InterventionRecord {
    std::string rule_id;
    int turn = 0;
    int step = 0;
    std::string tool_id;
    Json action;  // the action as applied (failure variants imply an error result)
    std::string pre_image_digest;   // mutating actions only
    std::string post_image_digest;

    Json to_json() const;
};

// '*' wildcard glob, anchored at both ends.
bool glob_match(const std::string& pattern, const std::string& text);

} // namespace toolrange::faults

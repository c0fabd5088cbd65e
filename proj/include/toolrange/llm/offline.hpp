#pragma once
// Offline backends: the matcher-driven scripted backend and the builtin
// deterministic role behaviors. Both are pure functions of the incoming
// message list (plus a strictly increasing call counter on the scripted
// one), which is what makes seeded runs replayable.

#include <atomic>

#include "toolrange/llm/gateway.hpp"

namespace toolrange::llm {

// Script format:
// {
//   "behaviors": [
//     {"match": {"role": "user", "contains": "plan", "turn_index": 3},
//      "response": "text"        // or "response_json": {...}
//     }, ...
//   ],
//   "default": "text"            // optional
// }
// Matchers test the last message (role/contains) and the message count
// (turn_index). First match wins; no match and no default is an error.
class ScriptedBackend : public Backend {
public:
    explicit ScriptedBackend(Json script);
    static Json load_script(const std::string& path);

    ChatResult chat(const std::vector<Message>& messages,
                    const std::string& schema_hint) override;

    std::uint64_t calls() const { return calls_; }

private:
    Json script_;
    std::atomic<std::uint64_t> calls_{0};
};

// Role-dispatched deterministic behaviors. The request's last user message
// carries a bracketed marker ([plan-request], [feedback-request],
// [actor-turn], [judge-request], [draft-request], [critique-request]) and a
// fenced JSON block; the builtin parses the block and produces a valid
// structured response. Knobs via profile params:
//   {"lazy": true}                 actor never uses tools
//   {"invokes_per_turn": N}        actor tool calls per turn (default 1)
//   {"respond_style": "summary"}
//   {"planner_nodes": N}           sub-goals in the plan (default 3)
//   {"critic_fail_rounds": N}      critique fails the first N rounds
//   {"judge_bias": F}              added to every judged score
//   {"seed": N}                    salt for deterministic variation
class BuiltinBackend : public Backend {
public:
    explicit BuiltinBackend(Json params);

    ChatResult chat(const std::vector<Message>& messages,
                    const std::string& schema_hint) override;

private:
    Json plan(const Json& request) const;
    Json feedback(const Json& request) const;
    Json actor(const std::vector<Message>& messages, const Json& request) const;
    Json judge(const Json& request) const;
    Json draft(const Json& request) const;
    Json critique(const Json& request) const;

    Json params_;
};

} // namespace toolrange::llm

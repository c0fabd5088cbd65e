#include "toolrange/faults/controller.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace toolrange::faults {

namespace {

Json payload_json(const registry::ToolResult& r) {
    Json arr = Json::array();
    for (const auto& block : r.payload) arr.push_back(block);
    return arr;
}

bool has_auth_tag(const registry::ToolDescriptor& tool) {
    return std::find(tool.tags.begin(), tool.tags.end(), "auth") != tool.tags.end();
}

} // namespace

registry::ToolResult synthesize_failure(const InterventionAction& action) {
    using Type = InterventionAction::Type;
    switch (action.type) {
        case Type::timeout:
            return registry::ToolResult::make_error(
                registry::ErrorKind::timeout,
                "request timed out after " + std::to_string(action.after_ms) + " ms",
                action.after_ms);
        case Type::rate_limit:
            return registry::ToolResult::make_error(
                registry::ErrorKind::rate_limited,
                "rate limited; retry_after_s=" + std::to_string(action.retry_after_s));
        case Type::unavailable:
            return registry::ToolResult::make_error(
                registry::ErrorKind::unavailable,
                "server temporarily unavailable (" + std::to_string(action.for_turns) +
                    " turns)");
        case Type::session_expire:
            return registry::ToolResult::make_error(registry::ErrorKind::auth,
                                                    "session expired; re-authenticate");
        default:
            break;
    }
    throw std::logic_error("synthesize_failure: action does not synthesize a failure");
}

registry::ToolResult corrupt_result(const registry::ToolResult& original, const Json& mutator,
                                    Rng& stream, std::string* pre_digest,
                                    std::string* post_digest) {
    if (!original.ok()) throw std::logic_error("corrupt_result: needs an ok result");
    if (pre_digest) *pre_digest = digest_json(payload_json(original));

    registry::ToolResult mutated = original;
    // Mutators operate on the first text block and leave the rest intact.
    std::size_t text_block = mutated.payload.size();
    for (std::size_t i = 0; i < mutated.payload.size(); ++i) {
        if (mutated.payload[i].is_object() && mutated.payload[i].value("type", "") == "text") {
            text_block = i;
            break;
        }
    }
    const std::string kind = mutator.is_object() ? mutator.value("kind", "") : "";
    if (text_block < mutated.payload.size()) {
        std::string text = mutated.payload[text_block].value("text", "");
        if (kind == "truncate") {
            const double frac = mutator.value("frac", 0.0);
            const auto keep = static_cast<std::size_t>(
                std::llround(static_cast<double>(text.size()) * (1.0 - frac)));
            text = text.substr(0, keep);
        } else if (kind == "field_drop") {
            Json parsed = Json::parse(text, nullptr, false);
            if (!parsed.is_discarded() && parsed.is_object() && !parsed.empty()) {
                auto victim = stream.below(parsed.size());
                auto it = parsed.begin();
                std::advance(it, static_cast<std::ptrdiff_t>(victim));
                parsed.erase(it.key());
                text = parsed.dump();
            } else {
                // unstructured payload: drop the trailing token
                auto end = text.find_last_not_of(" \t\r\n");
                if (end != std::string::npos) {
                    auto cut = text.find_last_of(" \t\r\n", end);
                    text = cut == std::string::npos ? "" : text.substr(0, cut);
                }
            }
        } else if (kind == "text_scramble") {
            std::vector<std::string> words;
            std::istringstream iss(text);
            std::string w;
            while (iss >> w) words.push_back(w);
            Rng scramble(mutator.value("seed", std::uint64_t{0}));
            scramble.shuffle(words);
            text.clear();
            for (std::size_t i = 0; i < words.size(); ++i) {
                if (i) text += ' ';
                text += words[i];
            }
        } else {
            throw std::logic_error("corrupt_result: unknown mutator kind '" + kind + "'");
        }
        mutated.payload[text_block]["text"] = text;
    }
    if (post_digest) *post_digest = digest_json(payload_json(mutated));
    return mutated;
}

Json ViabilityReport::to_json() const {
    Json issues_json = Json::array();
    for (const auto& issue : issues) {
        issues_json.push_back(Json{{"rule_id", issue.rule_id},
                                   {"server_id", issue.server_id},
                                   {"detail", issue.detail}});
    }
    return Json{{"hard_fail", hard_fail}, {"issues", issues_json}};
}

StateController::StateController(const InterventionPolicy& policy, const std::string& task_id,
                                 int session_recovery_turns)
    : policy_(policy),
      task_id_(task_id),
      stream_(Rng::derive(policy.seed, task_id)),
      session_recovery_turns_(session_recovery_turns),
      rule_state_(policy.rules.size()) {
    policy_.validate();
}

std::vector<ConstraintEvent> StateController::begin_turn(int turn) {
    // Age out recovered sessions; downed servers age out by comparison.
    for (auto it = expired_since_.begin(); it != expired_since_.end();) {
        if (turn > it->second + session_recovery_turns_)
            it = expired_since_.erase(it);
        else
            ++it;
    }

    std::vector<ConstraintEvent> events;
    for (std::size_t i = 0; i < policy_.rules.size(); ++i) {
        const InterventionRule& rule = policy_.rules[i];
        if (rule.action.type != InterventionAction::Type::constraint_update) continue;
        if (rule.action.at_turn != turn) continue;
        RuleState& state = rule_state_[i];
        if (rule.max_firings && state.firings >= *rule.max_firings) continue;
        ++state.firings;
        events.push_back(ConstraintEvent{rule.rule_id, rule.action.constraint});
        InterventionRecord record;
        record.rule_id = rule.rule_id;
        record.turn = turn;
        record.step = 0;
        record.action = rule.action.to_json();
        records_.push_back(std::move(record));
    }
    return events;
}

bool StateController::trigger_fires(const InterventionRule& rule, RuleState& state,
                                    const registry::ToolDescriptor& tool, int turn) {
    const TriggerSpec& trig = rule.trigger;
    if (!glob_match(trig.tool_pattern, tool.tool_id) &&
        !glob_match(trig.tool_pattern, tool.tool_name))
        return false;
    if (trig.turn_range && (turn < trig.turn_range->first || turn > trig.turn_range->second))
        return false;
    ++state.matches;
    if (trig.nth && state.matches != *trig.nth) return false;
    if (rule.max_firings && state.firings >= *rule.max_firings) return false;
    if (trig.probability < 1.0 && !stream_.chance(trig.probability)) return false;
    return true;
}

GuardedResult StateController::guarded_invoke(const registry::Registry& registry,
                                              const std::string& tool_id, const Json& arguments,
                                              int turn, int step) {
    const registry::ToolDescriptor* tool = registry.find_tool(tool_id);
    if (!tool) throw std::invalid_argument("unknown tool_id: " + tool_id);

    auto log = [&](const std::string& rule_id, Json action_json, std::string pre = "",
                   std::string post = "") {
        InterventionRecord record;
        record.rule_id = rule_id;
        record.turn = turn;
        record.step = step;
        record.tool_id = tool_id;
        record.action = std::move(action_json);
        record.pre_image_digest = std::move(pre);
        record.post_image_digest = std::move(post);
        records_.push_back(std::move(record));
    };

    // Standing failures from earlier injections.
    if (auto it = down_until_.find(tool->server_id);
        it != down_until_.end() && turn <= it->second) {
        auto result = registry::ToolResult::make_error(
            registry::ErrorKind::unavailable, "server temporarily unavailable");
        log(standing_rule_[tool->server_id],
            Json{{"type", "unavailable"}, {"standing", true}});
        return GuardedResult{std::move(result), true};
    }
    if (auto it = expired_since_.find(tool->server_id);
        it != expired_since_.end() && !has_auth_tag(*tool)) {
        auto result = registry::ToolResult::make_error(registry::ErrorKind::auth,
                                                       "session expired; re-authenticate");
        log(standing_rule_[tool->server_id],
            Json{{"type", "session_expire"}, {"standing", true}});
        return GuardedResult{std::move(result), true};
    }

    // First matching rule wins.
    const InterventionRule* fired = nullptr;
    RuleState* fired_state = nullptr;
    for (std::size_t i = 0; i < policy_.rules.size(); ++i) {
        const InterventionRule& rule = policy_.rules[i];
        if (rule.action.type == InterventionAction::Type::constraint_update) continue;
        if (trigger_fires(rule, rule_state_[i], *tool, turn)) {
            fired = &rule;
            fired_state = &rule_state_[i];
            break;
        }
    }

    if (!fired) {
        GuardedResult out;
        out.result = registry.invoke(tool_id, arguments,
                                     registry::CallContext{{}, turn, step});
        // A successful call to the server's auth-tagged tool restores its session.
        if (out.result.ok() && has_auth_tag(*tool)) expired_since_.erase(tool->server_id);
        return out;
    }

    ++fired_state->firings;
    const InterventionAction& action = fired->action;
    using Type = InterventionAction::Type;

    switch (action.type) {
        case Type::timeout:
        case Type::rate_limit: {
            auto result = synthesize_failure(action);
            log(fired->rule_id, action.to_json());
            return GuardedResult{std::move(result), true};
        }
        case Type::unavailable: {
            auto result = synthesize_failure(action);
            down_until_[tool->server_id] = turn + action.for_turns;
            standing_rule_[tool->server_id] = fired->rule_id;
            log(fired->rule_id, action.to_json());
            return GuardedResult{std::move(result), true};
        }
        case Type::session_expire: {
            const std::string target =
                action.server_id.empty() ? tool->server_id : action.server_id;
            expired_since_[target] = turn;
            standing_rule_[target] = fired->rule_id;
            auto result = synthesize_failure(action);
            log(fired->rule_id, action.to_json());
            return GuardedResult{std::move(result), true};
        }
        case Type::delay_result: {
            auto result = registry.invoke(tool_id, arguments,
                                          registry::CallContext{{}, turn, step});
            result.latency_ms += action.delay_ms;
            log(fired->rule_id, action.to_json());
            return GuardedResult{std::move(result), true};
        }
        case Type::corrupt_result: {
            auto result = registry.invoke(tool_id, arguments,
                                          registry::CallContext{{}, turn, step});
            if (!result.ok()) {
                // nothing to corrupt; the firing is refunded
                --fired_state->firings;
                return GuardedResult{std::move(result), false};
            }
            std::string pre, post;
            auto mutated = corrupt_result(result, action.mutator, stream_, &pre, &post);
            log(fired->rule_id, action.to_json(), pre, post);
            return GuardedResult{std::move(mutated), true};
        }
        case Type::constraint_update:
            break;  // handled in begin_turn
    }
    throw std::logic_error("unreachable intervention action");
}

Json StateController::records_json() const {
    Json arr = Json::array();
    for (const auto& r : records_) arr.push_back(r.to_json());
    return arr;
}

ViabilityReport check_viability(const InterventionPolicy& policy,
                                const registry::Registry& registry,
                                const std::vector<std::string>& bundle_tool_ids) {
    // bundle tools grouped by server
    std::map<std::string, std::vector<const registry::ToolDescriptor*>> by_server;
    for (const auto& tool_id : bundle_tool_ids) {
        if (const auto* tool = registry.find_tool(tool_id)) by_server[tool->server_id].push_back(tool);
    }

    ViabilityReport report;
    for (const auto& rule : policy.rules) {
        if (!rule.action.is_failure()) continue;
        const TriggerSpec& trig = rule.trigger;
        const bool unbounded = trig.probability >= 1.0 && !rule.max_firings && !trig.nth &&
                               !trig.turn_range;
        if (!unbounded) continue;

        for (const auto& [server_id, tools] : by_server) {
            bool covers_all = true;
            for (const auto* tool : tools) {
                if (!glob_match(trig.tool_pattern, tool->tool_id) &&
                    !glob_match(trig.tool_pattern, tool->tool_name)) {
                    covers_all = false;
                    break;
                }
            }
            if (covers_all && !tools.empty()) {
                report.hard_fail = true;
                report.issues.push_back(ViabilityIssue{
                    rule.rule_id, server_id,
                    "rule permanently blocks every bundle tool on " + server_id});
            }
        }
    }
    return report;
}

} // namespace toolrange::faults

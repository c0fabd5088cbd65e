#include "toolrange/faults/policy.hpp"

#include <fstream>
#include <stdexcept>

namespace toolrange::faults {

namespace {

const char* type_name(InterventionAction::Type t) {
    switch (t) {
        case InterventionAction::Type::timeout: return "timeout";
        case InterventionAction::Type::rate_limit: return "rate_limit";
        case InterventionAction::Type::unavailable: return "unavailable";
        case InterventionAction::Type::corrupt_result: return "corrupt_result";
        case InterventionAction::Type::delay_result: return "delay_result";
        case InterventionAction::Type::session_expire: return "session_expire";
        case InterventionAction::Type::constraint_update: return "constraint_update";
    }
    return "timeout";
}

InterventionAction::Type type_from(const std::string& s) {
    if (s == "timeout") return InterventionAction::Type::timeout;
    if (s == "rate_limit") return InterventionAction::Type::rate_limit;
    if (s == "unavailable") return InterventionAction::Type::unavailable;
    if (s == "corrupt_result") return InterventionAction::Type::corrupt_result;
    if (s == "delay_result") return InterventionAction::Type::delay_result;
    if (s == "session_expire") return InterventionAction::Type::session_expire;
    if (s == "constraint_update") return InterventionAction::Type::constraint_update;
    throw std::runtime_error("unknown intervention action type: " + s);
}

} // namespace

Json InterventionAction::to_json() const {
    Json j{{"type", type_name(type)}};
    switch (type) {
        case Type::timeout: j["after_ms"] = after_ms; break;
        case Type::rate_limit: j["retry_after_s"] = retry_after_s; break;
        case Type::unavailable: j["for_turns"] = for_turns; break;
        case Type::corrupt_result: j["mutator"] = mutator; break;
        case Type::delay_result: j["ms"] = delay_ms; break;
        case Type::session_expire:
            if (!server_id.empty()) j["server_id"] = server_id;
            break;
        case Type::constraint_update:
            j["constraint"] = constraint.to_json();
            j["at_turn"] = at_turn;
            break;
    }
    return j;
}

InterventionAction InterventionAction::from_json(const Json& j) {
    InterventionAction a;
    a.type = type_from(j.at("type").get<std::string>());
    a.after_ms = j.value("after_ms", std::int64_t{0});
    a.retry_after_s = j.value("retry_after_s", std::int64_t{0});
    a.for_turns = j.value("for_turns", 0);
    a.mutator = j.value("mutator", Json());
    a.delay_ms = j.value("ms", std::int64_t{0});
    a.server_id = j.value("server_id", "");
    if (j.contains("constraint")) a.constraint = tasks::Constraint::from_json(j["constraint"]);
    a.at_turn = j.value("at_turn", 0);
    return a;
}

Json TriggerSpec::to_json() const {
    Json j{{"tool_pattern", tool_pattern}, {"probability", probability}};
    if (turn_range) j["turn_range"] = Json::array({turn_range->first, turn_range->second});
    if (nth) j["nth"] = *nth;
    return j;
}

TriggerSpec TriggerSpec::from_json(const Json& j) {
    TriggerSpec t;
    t.tool_pattern = j.value("tool_pattern", "*");
    t.probability = j.value("probability", 1.0);
    if (j.contains("turn_range") && j["turn_range"].is_array() && j["turn_range"].size() == 2)
        t.turn_range = std::make_pair(j["turn_range"][0].get<int>(), j["turn_range"][1].get<int>());
    if (j.contains("nth")) t.nth = j["nth"].get<int>();
    return t;
}

Json InterventionRule::to_json() const {
    Json j{{"rule_id", rule_id}, {"trigger", trigger.to_json()}, {"action", action.to_json()}};
    if (max_firings) j["max_firings"] = *max_firings;
    return j;
}

InterventionRule InterventionRule::from_json(const Json& j) {
    InterventionRule r;
    r.rule_id = j.at("rule_id").get<std::string>();
    r.trigger = TriggerSpec::from_json(j.value("trigger", Json::object()));
    r.action = InterventionAction::from_json(j.at("action"));
    if (j.contains("max_firings")) r.max_firings = j["max_firings"].get<int>();
    return r;
}

void InterventionPolicy::validate() const {
    for (const auto& rule : rules) {
        if (rule.trigger.probability < 0.0 || rule.trigger.probability > 1.0)
            throw std::runtime_error("rule " + rule.rule_id + ": probability outside [0,1]");
        if (rule.trigger.turn_range && rule.trigger.turn_range->first > rule.trigger.turn_range->second)
            throw std::runtime_error("rule " + rule.rule_id + ": inverted turn range");
        if (rule.trigger.nth && *rule.trigger.nth < 1)
            throw std::runtime_error("rule " + rule.rule_id + ": nth must be >= 1");
        if (rule.action.type == InterventionAction::Type::corrupt_result) {
            const Json& m = rule.action.mutator;
            if (!m.is_object() || !m.contains("kind"))
                throw std::runtime_error("rule " + rule.rule_id + ": corrupt_result needs a mutator");
            if (m.value("kind", "") == "truncate") {
                double frac = m.value("frac", 0.0);
                if (frac < 0.0 || frac > 1.0)
                    throw std::runtime_error("rule " + rule.rule_id +
                                             ": truncate frac outside [0,1]");
            }
        }
    }
}

Json InterventionPolicy::to_json() const {
    Json rules_json = Json::array();
    for (const auto& r : rules) rules_json.push_back(r.to_json());
    return Json{{"seed", seed}, {"rules", rules_json}};
}

InterventionPolicy InterventionPolicy::from_json(const Json& j) {
    InterventionPolicy p;
    p.seed = j.value("seed", std::uint64_t{0});
    for (const auto& r : j.value("rules", Json::array()))
        p.rules.push_back(InterventionRule::from_json(r));
    p.validate();
    return p;
}

InterventionPolicy InterventionPolicy::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open policy file: " + path);
    return from_json(Json::parse(in));
}

Json InterventionRecord::to_json() const {
    Json j{
        {"rule_id", rule_id},
        {"turn", turn},
        {"step", step},
        {"tool_id", tool_id},
        {"action", action},
    };
    if (!pre_image_digest.empty()) {
        j["pre_image_digest"] = pre_image_digest;
        j["post_image_digest"] = post_image_digest;
    }
    return j;
}

bool glob_match(const std::string& pattern, const std::string& text) {
    // iterative *-wildcard match
    std::size_t p = 0, t = 0, star = std::string::npos, backtrack = 0;
    while (t < text.size()) {
        if (p < pattern.size() && (pattern[p] == text[t])) {
            ++p;
            ++t;
        } else if (p < pattern.size() && pattern[p] == '*') {
            star = p++;
            backtrack = t;
        } else if (star != std::string::npos) {
            p = star + 1;
            t = ++backtrack;
        } else {
            return false;
        }
    }
    while (p < pattern.size() && pattern[p] == '*') ++p;
    return p == pattern.size();
}

} // namespace toolrange::faults

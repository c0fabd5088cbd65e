#include "toolrange/eval/judge.hpp"

#include <stdexcept>

#include "toolrange/eval/metrics.hpp"

namespace toolrange::eval {

namespace {

const char* kJudgeSystem =
    "You are an impartial judge of tool-using agent episodes. Score the "
    "episode on a 10-point scale for: completeness (did the final answer "
    "resolve the request), grounding (is it supported by tool observations), "
    "format (does the output match the requested structure), tradeoff (were "
    "conflicting objectives resolved sensibly), goal_decomposition (plan vs "
    "reference rationales), progress_tracking (planner status labels vs the "
    "execution log). Also give boolean task_success and per-constraint "
    "verdicts. Respond with only a JSON object: {\"scores\": {...}, "
    "\"task_success\": bool, \"constraints\": {constraint_id: bool}}.";

} // namespace

JudgeConfig JudgeConfig::from_json(const Json& j) {
    JudgeConfig c;
    if (j.is_array()) {
        for (const auto& p : j) c.judge_profiles.push_back(p.get<std::string>());
    } else {
        c.judge_profiles = j.value("judge_profiles", std::vector<std::string>{});
        c.parse_retries = j.value("parse_retries", 1);
    }
    return c;
}

AggregatedVerdict aggregate_verdicts(std::vector<JudgeVerdict> verdicts) {
    if (verdicts.size() < 2)
        throw std::runtime_error("judge aggregation needs at least 2 verdicts, got " +
                                 std::to_string(verdicts.size()));

    AggregatedVerdict out;
    out.judges_reporting = static_cast<int>(verdicts.size());
    out.degraded = verdicts.size() < 3;

    // Booleans: strict majority (>= 2 of 3); a 1-1 tie in degraded mode
    // resolves to false.
    std::vector<bool> success_votes;
    for (const auto& v : verdicts) success_votes.push_back(v.task_success);
    out.task_success = strict_majority(success_votes);

    std::map<std::string, std::vector<bool>> constraint_votes;
    for (const auto& v : verdicts)
        for (const auto& [cid, ok] : v.constraint_satisfied) constraint_votes[cid].push_back(ok);
    for (const auto& [cid, votes] : constraint_votes)
        out.constraint_satisfied[cid] = strict_majority(votes);

    // Scalars: median of whoever reported the key (mean of two in
    // degraded mode, which is the even-count median).
    for (const auto& key : judged_score_keys()) {
        std::vector<double> values;
        for (const auto& v : verdicts) {
            auto it = v.scores.find(key);
            if (it != v.scores.end()) values.push_back(it->second);
        }
        if (!values.empty()) out.scores[key] = median(std::move(values));
    }

    out.raw = std::move(verdicts);
    return out;
}

AggregatedVerdict judge_package(const EvaluationPackage& package, llm::Gateway& gateway,
                                const JudgeConfig& config) {
    if (config.judge_profiles.size() != 3)
        throw std::invalid_argument("judge_package: exactly 3 judge profiles required");

    std::vector<JudgeVerdict> verdicts;
    for (const auto& profile : config.judge_profiles) {
        try {
            Json parsed = llm::chat_json(
                gateway, profile,
                {{"system", kJudgeSystem},
                 {"user", "[judge-request]\n```json\n" +
                              Json{{"package", package.to_json()}}.dump(2) + "\n```"}},
                config.parse_retries);
            verdicts.push_back(JudgeVerdict::from_json(profile, parsed));
        } catch (const std::exception&) {
            // this judge is out; aggregation degrades below
        }
    }
    return aggregate_verdicts(std::move(verdicts));
}

} // namespace toolrange::eval

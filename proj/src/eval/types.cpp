#include "toolrange/eval/types.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace toolrange::eval {

Json EvaluationPackage::to_json() const {
    return Json{
        {"task_id", task_id},
        {"task_query", task_query},
        {"constraints", constraints},
        {"final_answer", final_answer},
        {"trajectory", trajectory},
        {"plan", plan},
        {"rationales", rationales},
    };
}

EvaluationPackage build_package(const tasks::TaskSpec& task,
                                const agent::Trajectory& trajectory) {
    EvaluationPackage package;
    package.task_id = task.task_id;
    package.task_query = task.user_query;
    package.constraints = trajectory.constraints;  // post any constraint-level injections
    package.final_answer = trajectory.final_answer;
    package.trajectory = trajectory.to_json();
    package.plan = trajectory.plan;
    Json rationales = Json::object();
    for (const auto& [tool_id, why] : task.tool_rationales) rationales[tool_id] = why;
    package.rationales = std::move(rationales);
    return package;
}

Json JudgeVerdict::to_json() const {
    Json scores_json = Json::object();
    for (const auto& [key, value] : scores) scores_json[key] = value;
    Json constraints_json = Json::object();
    for (const auto& [cid, ok] : constraint_satisfied) constraints_json[cid] = ok;
    return Json{{"judge_id", judge_id},
                {"scores", scores_json},
                {"task_success", task_success},
                {"constraints", constraints_json}};
}

JudgeVerdict JudgeVerdict::from_json(const std::string& judge_id, const Json& j) {
    JudgeVerdict v;
    v.judge_id = judge_id;
    const Json scores = j.value("scores", Json::object());
    for (const auto& key : judged_score_keys()) {
        if (scores.contains(key) && scores[key].is_number()) {
            v.scores[key] = std::clamp(scores[key].get<double>(), 0.0, 10.0);
        }
    }
    v.task_success = j.value("task_success", false);
    const Json constraint_verdicts = j.value("constraints", Json::object());
    for (const auto& [cid, ok] : constraint_verdicts.items()) {
        if (ok.is_boolean()) v.constraint_satisfied[cid] = ok.get<bool>();
    }
    return v;
}

Json AggregatedVerdict::to_json() const {
    Json scores_json = Json::object();
    for (const auto& [key, value] : scores) scores_json[key] = value;
    Json constraints_json = Json::object();
    for (const auto& [cid, ok] : constraint_satisfied) constraints_json[cid] = ok;
    Json raw_json = Json::array();
    for (const auto& v : raw) raw_json.push_back(v.to_json());
    return Json{{"scores", scores_json},
                {"task_success", task_success},
                {"constraints", constraints_json},
                {"degraded", degraded},
                {"judges_reporting", judges_reporting},
                {"raw_verdicts", raw_json}};
}

const std::vector<std::string>& MetricVector::field_order() {
    static const std::vector<std::string> order = {
        "overall",          "completeness",      "grounding",
        "success_rate",     "recovery_rate",     "flexibility",
        "schema_compliance", "order",            "info_diversity",
        "format",           "tradeoff",          "tool_calls",
        "turns",            "progress_tracking", "goal_decomposition"};
    return order;
}

std::optional<double> MetricVector::field(const std::string& name) const {
    if (name == "overall") return overall;
    if (name == "completeness") return completeness;
    if (name == "grounding") return grounding;
    if (name == "success_rate") return success_rate;
    if (name == "recovery_rate") return recovery_rate;
    if (name == "flexibility") return flexibility;
    if (name == "schema_compliance") return schema_compliance;
    if (name == "order") return order;
    if (name == "info_diversity") return info_diversity;
    if (name == "format") return format;
    if (name == "tradeoff") return tradeoff;
    if (name == "tool_calls") return tool_calls;
    if (name == "turns") return turns;
    if (name == "progress_tracking") return progress_tracking;
    if (name == "goal_decomposition") return goal_decomposition;
    return std::nullopt;
}

void MetricVector::set_field(const std::string& name, std::optional<double> value) {
    if (name == "overall") overall = value;
    else if (name == "completeness") completeness = value;
    else if (name == "grounding") grounding = value;
    else if (name == "success_rate") success_rate = value;
    else if (name == "recovery_rate") recovery_rate = value;
    else if (name == "flexibility") flexibility = value;
    else if (name == "schema_compliance") schema_compliance = value;
    else if (name == "order") order = value;
    else if (name == "info_diversity") info_diversity = value;
    else if (name == "format") format = value;
    else if (name == "tradeoff") tradeoff = value;
    else if (name == "tool_calls") tool_calls = value;
    else if (name == "turns") turns = value;
    else if (name == "progress_tracking") progress_tracking = value;
    else if (name == "goal_decomposition") goal_decomposition = value;
}

Json MetricVector::to_json() const {
    Json j = Json::object();
    for (const auto& name : field_order()) {
        if (auto value = field(name)) j[name] = *value;
    }
    return j;
}

MetricVector MetricVector::from_json(const Json& j) {
    MetricVector v;
    for (const auto& name : field_order()) {
        if (j.contains(name) && j[name].is_number())
            v.set_field(name, j[name].get<double>());
    }
    return v;
}

std::string AgreementReport::display() const {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.3f \xC2\xB1 %.3f", mean, stddev);
    return buf;
}

Json AgreementReport::to_json() const {
    return Json{{"left", left},
                {"right", right},
                {"mean", mean},
                {"stddev", stddev},
                {"display", display()},
                {"batch_values", batch_values}};
}

} // namespace toolrange::eval

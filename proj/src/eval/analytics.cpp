#include "toolrange/eval/analytics.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace toolrange::eval {

namespace {

const std::set<std::string>& percent_fields() {
    static const std::set<std::string> fields = {
        "success_rate", "recovery_rate", "flexibility", "schema_compliance",
        "order",        "info_diversity", "format"};
    return fields;
}

std::optional<double> mean_of(const std::vector<double>& values) {
    if (values.empty()) return std::nullopt;
    double sum = 0.0;
    for (double v : values) sum += v;
    return sum / static_cast<double>(values.size());
}

} // namespace

Json default_overall_weights() {
    return Json{
        {"completeness", 2.0},   {"grounding", 1.0},   {"success_rate", 2.0},
        {"recovery_rate", 1.0},  {"flexibility", 1.0}, {"schema_compliance", 1.0},
        {"order", 0.5},          {"info_diversity", 0.5}, {"format", 0.5},
        {"tradeoff", 0.5},       {"progress_tracking", 0.5}, {"goal_decomposition", 0.5},
    };
}

double aggregate_overall(const MetricVector& vector, const Json& weights) {
    if (!weights.is_object() || weights.empty())
        throw std::invalid_argument("overall weights: empty config");
    double weighted = 0.0;
    double mass = 0.0;
    for (const auto& [field, w] : weights.items()) {
        if (!w.is_number()) continue;
        const double weight = w.get<double>();
        if (weight <= 0.0) continue;
        auto value = vector.field(field);
        if (!value) continue;  // absent fields carry no weight
        double v = *value;
        if (percent_fields().count(field)) v /= 10.0;  // % -> 10-point scale
        weighted += weight * v;
        mass += weight;
    }
    if (mass == 0.0)
        throw std::invalid_argument("overall weights: no applicable weight mass");
    return weighted / mass;
}

Json EpisodeReport::to_json() const {
    return Json{{"metrics", metrics.to_json()}, {"verdict", verdict.to_json()}};
}

EpisodeReport evaluate_episode(const tasks::TaskSpec& task, const agent::Trajectory& trajectory,
                               const registry::Registry& registry, llm::Gateway& gateway,
                               const JudgeConfig& judges, const Json& weights) {
    EpisodeReport report;
    EvaluationPackage package = build_package(task, trajectory);
    report.verdict = judge_package(package, gateway, judges);

    MetricVector& m = report.metrics;
    auto judged = [&](const std::string& key) -> std::optional<double> {
        auto it = report.verdict.scores.find(key);
        if (it == report.verdict.scores.end()) return std::nullopt;
        return it->second;
    };

    m.completeness = judged("completeness");
    m.grounding = judged("grounding");
    m.tradeoff = judged("tradeoff");
    m.progress_tracking = judged("progress_tracking");
    m.goal_decomposition = judged("goal_decomposition");
    if (auto f = judged("format")) m.format = *f * 10.0;  // 10-point -> %

    m.success_rate = report.verdict.task_success ? 100.0 : 0.0;
    m.recovery_rate = recovery_rate(trajectory);
    m.flexibility = flexibility(trajectory);
    m.schema_compliance = schema_compliance(trajectory, registry);
    auto od = constraint_order_diversity(trajectory, task, registry);
    m.order = od.order;
    m.info_diversity = od.diversity;
    m.tool_calls = static_cast<double>(tool_call_count(trajectory));
    m.turns = static_cast<double>(trajectory.turns.size());
    m.overall = aggregate_overall(m, weights);
    return report;
}

Json ModelAggregate::to_json() const {
    Json j{{"model", model},
           {"episodes", episodes},
           {"mean", mean.to_json()},
           {"best", best.to_json()}};
    if (pass_at_3) j["pass_at_3"] = *pass_at_3;
    if (turn1_score) j["turn1_score"] = *turn1_score;
    return j;
}

ModelAggregate aggregate_model(const std::string& model,
                               const std::vector<MetricVector>& episode_vectors,
                               const std::map<std::string, std::vector<bool>>& success_by_task,
                               const Json& weights) {
    ModelAggregate agg;
    agg.model = model;
    agg.episodes = static_cast<int>(episode_vectors.size());

    for (const auto& field : MetricVector::field_order()) {
        if (field == "overall") continue;
        std::vector<double> present;
        for (const auto& v : episode_vectors) {
            if (auto value = v.field(field)) present.push_back(*value);
        }
        if (present.empty()) continue;
        agg.mean.set_field(field, mean_of(present));
        agg.best.set_field(field, *std::max_element(present.begin(), present.end()));
    }
    if (agg.episodes > 0) {
        agg.mean.overall = aggregate_overall(agg.mean, weights);
        agg.best.overall = aggregate_overall(agg.best, weights);
    }

    if (!success_by_task.empty()) {
        int passed = 0;
        for (const auto& [_, runs] : success_by_task)
            if (pass_at_k(runs, 3)) ++passed;
        agg.pass_at_3 = 100.0 * passed / static_cast<double>(success_by_task.size());
    }
    return agg;
}

Json PersonaScores::to_json() const {
    Json j = Json::object();
    if (diligence) j["diligence"] = *diligence;
    if (prudence) j["prudence"] = *prudence;
    if (grit) j["grit"] = *grit;
    if (introspection) j["introspection"] = *introspection;
    if (strategic) j["strategic"] = *strategic;
    return j;
}

PersonaScores persona(const std::vector<agent::Trajectory>& trajectories,
                      const std::vector<MetricVector>& episode_vectors, int step_cap,
                      int max_turns) {
    PersonaScores out;
    if (trajectories.empty()) return out;  // all dimensions absent

    std::vector<double> steps_per_turn;
    std::vector<double> turn_counts;
    int lazy = 0;
    for (const auto& t : trajectories) {
        if (!t.turns.empty()) {
            std::size_t steps = 0;
            for (const auto& turn : t.turns) steps += turn.steps.size();
            steps_per_turn.push_back(static_cast<double>(steps) /
                                     static_cast<double>(t.turns.size()));
            turn_counts.push_back(static_cast<double>(t.turns.size()));
        }
        if (t.termination == "Laziness") ++lazy;
    }

    if (auto m = mean_of(steps_per_turn); m && step_cap > 0) out.diligence = *m / step_cap;
    out.prudence = 1.0 - static_cast<double>(lazy) / static_cast<double>(trajectories.size());
    if (auto m = mean_of(turn_counts); m && max_turns > 0) out.introspection = *m / max_turns;

    std::vector<double> recovery, flex, decomp;
    for (const auto& v : episode_vectors) {
        if (v.recovery_rate) recovery.push_back(*v.recovery_rate);
        if (v.flexibility) flex.push_back(*v.flexibility);
        if (v.goal_decomposition) decomp.push_back(*v.goal_decomposition);
    }
    auto mean_recovery = mean_of(recovery);
    auto mean_flex = mean_of(flex);
    if (mean_recovery && mean_flex) {
        out.grit = (*mean_recovery + *mean_flex) / 2.0 / 100.0;
    } else if (mean_recovery) {
        out.grit = *mean_recovery / 100.0;
    } else if (mean_flex) {
        out.grit = *mean_flex / 100.0;
    }
    if (auto m = mean_of(decomp)) out.strategic = *m / 10.0;
    return out;
}

std::map<std::string, int> rank_shift(const std::map<std::string, double>& turn1_scores,
                                      const std::map<std::string, double>& final_completeness) {
    auto ranks_of = [](const std::map<std::string, double>& scores) {
        std::vector<std::pair<std::string, double>> items(scores.begin(), scores.end());
        std::sort(items.begin(), items.end(), [](const auto& a, const auto& b) {
            if (a.second != b.second) return a.second > b.second;
            return a.first < b.first;
        });
        std::map<std::string, int> ranks;
        for (std::size_t i = 0; i < items.size(); ++i)
            ranks[items[i].first] = static_cast<int>(i) + 1;
        return ranks;
    };

    auto r1 = ranks_of(turn1_scores);
    auto rf = ranks_of(final_completeness);
    std::map<std::string, int> deltas;
    for (const auto& [model, rank1] : r1) {
        auto it = rf.find(model);
        if (it != rf.end()) deltas[model] = rank1 - it->second;
    }
    return deltas;
}

AgreementReport agreement(const std::string& left, const std::string& right,
                          const std::vector<std::pair<std::vector<double>,
                                                      std::vector<double>>>& batches) {
    AgreementReport report;
    report.left = left;
    report.right = right;
    for (const auto& [a, b] : batches) report.batch_values.push_back(spearman(a, b));
    if (report.batch_values.empty()) return report;

    double sum = 0.0;
    for (double v : report.batch_values) sum += v;
    report.mean = sum / static_cast<double>(report.batch_values.size());

    if (report.batch_values.size() > 1) {
        double ss = 0.0;
        for (double v : report.batch_values) ss += (v - report.mean) * (v - report.mean);
        report.stddev = std::sqrt(ss / static_cast<double>(report.batch_values.size() - 1));
    }
    return report;
}

} // namespace toolrange::eval

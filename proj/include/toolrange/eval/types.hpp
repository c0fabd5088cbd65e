#pragma once
// Evaluation types: the package judges receive, per-judge and aggregated
// verdicts, the metric vector behind every leaderboard row, and agreement
// reports.
//
// Metrics distinguish "absent" from zero everywhere: an empty denominator
// yields no value, never 0.

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "toolrange/agent/types.hpp"
#include "toolrange/core/json.hpp"

namespace toolrange::eval {

// The six judged scalar dimensions, on a 10-point scale.
inline const std::vector<std::string>& judged_score_keys() {
    static const std::vector<std::string> keys = {
        "completeness", "grounding",         "format",
        "tradeoff",     "goal_decomposition", "progress_tracking"};
    return keys;
}

struct EvaluationPackage {
    std::string task_id;
    std::string task_query;
    Json constraints;  // live list at termination
    std::string final_answer;
    Json trajectory;   // full Trajectory JSON
    Json plan;
    Json rationales;   // tool_id -> reference rationale

    Json to_json() const;
};

EvaluationPackage build_package(const tasks::TaskSpec& task, const agent::Trajectory& trajectory);

struct JudgeVerdict {
    std::string judge_id;
    std::map<std::string, double> scores;  // judged_score_keys, clamped to [0,10]
    bool task_success = false;
    std::map<std::string, bool> constraint_satisfied;

    Json to_json() const;
    static JudgeVerdict from_json(const std::string& judge_id, const Json& j);
};

struct AggregatedVerdict {
    std::map<std::string, double> scores;  // per-key median over reporting judges
    bool task_success = false;
    std::map<std::string, bool> constraint_satisfied;  // strict majority per constraint
    bool degraded = false;  // fewer than 3 judges reported
    int judges_reporting = 0;
    std::vector<JudgeVerdict> raw;  // retained for audit

    Json to_json() const;
};

// One scored episode; mirrors the leaderboard columns. nullopt = absent.
struct MetricVector {
    std::optional<double> overall;
    std::optional<double> completeness;
    std::optional<double> grounding;
    std::optional<double> success_rate;       // %
    std::optional<double> recovery_rate;      // %
    std::optional<double> flexibility;        // %
    std::optional<double> schema_compliance;  // %
    std::optional<double> order;              // %
    std::optional<double> info_diversity;     // %
    std::optional<double> format;             // %
    std::optional<double> tradeoff;           // 10-point
    std::optional<double> tool_calls;
    std::optional<double> turns;
    std::optional<double> progress_tracking;
    std::optional<double> goal_decomposition;

    Json to_json() const;
    static MetricVector from_json(const Json& j);

    // Leaderboard column order.
    static const std::vector<std::string>& field_order();
    std::optional<double> field(const std::string& name) const;
    void set_field(const std::string& name, std::optional<double> value);
};

struct AgreementReport {
    std::string left;
    std::string right;
    double mean = 0.0;
    double stddev = 0.0;
    std::vector<double> batch_values;

    std::string display() const;  // "0.773 ± 0.075"
    Json to_json() const;
};

} // namespace toolrange::eval

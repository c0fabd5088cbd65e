#pragma once
// Episode scoring composition and cross-model analytics: the weighted
// overall score, per-model aggregates, persona dimensions, rank shift, and
// Spearman agreement reports.

#include <map>

#include "toolrange/eval/judge.hpp"
#include "toolrange/eval/metrics.hpp"

namespace toolrange::eval {

// Default weights for the overall score. The formula is a config choice,
// echoed into every report; percentage fields are normalized to the
// 10-point scale before weighting.
Json default_overall_weights();

// Weighted mean over the fields present in both the vector and the weight
// map. Throws when the applicable weight mass is zero.
double aggregate_overall(const MetricVector& vector, const Json& weights);

// All metrics for one episode: deterministic ones from the log, judged
// ones via the 3-judge vote. `weights` feeds the overall score.
struct EpisodeReport {
    MetricVector metrics;
    AggregatedVerdict verdict;
    Json to_json() const;
};

EpisodeReport evaluate_episode(const tasks::TaskSpec& task, const agent::Trajectory& trajectory,
                               const registry::Registry& registry, llm::Gateway& gateway,
                               const JudgeConfig& judges, const Json& weights);

// Per-model rollup across episodes. Judged scalars are reported both as
// mean-across-runs and best-run; percentages average over the runs where
// they are present.
struct ModelAggregate {
    std::string model;
    int episodes = 0;
    MetricVector mean;
    MetricVector best;
    std::optional<double> pass_at_3;  // % of tasks passing any of 3 runs
    std::optional<double> turn1_score;

    Json to_json() const;
};

ModelAggregate aggregate_model(const std::string& model,
                               const std::vector<MetricVector>& episode_vectors,
                               const std::map<std::string, std::vector<bool>>& success_by_task,
                               const Json& weights);

struct PersonaScores {
    std::optional<double> diligence;
    std::optional<double> prudence;
    std::optional<double> grit;
    std::optional<double> introspection;
    std::optional<double> strategic;

    Json to_json() const;
};

PersonaScores persona(const std::vector<agent::Trajectory>& trajectories,
                      const std::vector<MetricVector>& episode_vectors, int step_cap,
                      int max_turns);

// Rank by turn-1 score minus rank by final completeness (positive =
// climbed). Ranks are positions under (score desc, model name asc).
std::map<std::string, int> rank_shift(const std::map<std::string, double>& turn1_scores,
                                      const std::map<std::string, double>& final_completeness);

// Spearman over ranking batches, reported as mean +/- sample stddev.
AgreementReport agreement(const std::string& left, const std::string& right,
                          const std::vector<std::pair<std::vector<double>,
                                                      std::vector<double>>>& batches);

} // namespace toolrange::eval

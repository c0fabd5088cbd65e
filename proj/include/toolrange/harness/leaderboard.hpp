#pragma once
// Leaderboard rendering: one row per model profile, columns in the metric
// vector's canonical order, absent values shown as an em dash. A JSON twin
// accompanies the text table.

#include "toolrange/eval/analytics.hpp"

namespace toolrange::harness {

struct Leaderboard {
    std::vector<std::string> columns;         // metric field names
    std::vector<eval::ModelAggregate> rows;

    void sort_by(const std::string& field, bool descending = true);

    std::string to_text() const;
    Json to_json() const;
};

Leaderboard make_leaderboard(std::vector<eval::ModelAggregate> aggregates);

} // namespace toolrange::harness

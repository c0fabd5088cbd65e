#include "toolrange/harness/leaderboard.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>

namespace toolrange::harness {

namespace {

std::string format_cell(std::optional<double> value) {
    if (!value) return "\xE2\x80\x94";  // em dash for absent
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", *value);
    return buf;
}

} // namespace

Leaderboard make_leaderboard(std::vector<eval::ModelAggregate> aggregates) {
    Leaderboard board;
    board.columns = eval::MetricVector::field_order();
    board.rows = std::move(aggregates);
    board.sort_by("overall");
    return board;
}

void Leaderboard::sort_by(const std::string& field, bool descending) {
    std::stable_sort(rows.begin(), rows.end(),
                     [&](const eval::ModelAggregate& a, const eval::ModelAggregate& b) {
                         auto va = a.mean.field(field);
                         auto vb = b.mean.field(field);
                         if (va.has_value() != vb.has_value()) return va.has_value();
                         if (!va) return a.model < b.model;
                         if (*va != *vb) return descending ? *va > *vb : *va < *vb;
                         return a.model < b.model;
                     });
}

std::string Leaderboard::to_text() const {
    std::vector<std::vector<std::string>> cells;
    std::vector<std::string> header{"model"};
    for (const auto& c : columns) header.push_back(c);
    cells.push_back(header);
    for (const auto& row : rows) {
        std::vector<std::string> line{row.model};
        for (const auto& c : columns) line.push_back(format_cell(row.mean.field(c)));
        cells.push_back(std::move(line));
    }

    std::vector<std::size_t> widths(header.size(), 0);
    for (const auto& line : cells)
        for (std::size_t i = 0; i < line.size(); ++i) {
            // em dash is 3 bytes, 1 column
            std::size_t display = line[i] == "\xE2\x80\x94" ? 1 : line[i].size();
            widths[i] = std::max(widths[i], display);
        }

    std::ostringstream out;
    for (std::size_t r = 0; r < cells.size(); ++r) {
        for (std::size_t i = 0; i < cells[r].size(); ++i) {
            std::size_t display = cells[r][i] == "\xE2\x80\x94" ? 1 : cells[r][i].size();
            out << cells[r][i] << std::string(widths[i] - display + 2, ' ');
        }
        out << "\n";
        if (r == 0) {
            std::size_t total = 0;
            for (auto w : widths) total += w + 2;
            out << std::string(total, '-') << "\n";
        }
    }
    return out.str();
}

Json Leaderboard::to_json() const {
    Json rows_json = Json::array();
    for (const auto& row : rows) rows_json.push_back(row.to_json());
    return Json{{"columns", columns}, {"rows", rows_json}};
}

} // namespace toolrange::harness

#include "toolrange/harness/store.hpp"

#include <fstream>
#include <stdexcept>

namespace toolrange::harness {

Json TrajectoryRecord::to_json() const {
    Json j{
        {"schema_version", schema_version},
        {"task_id", task_id},
        {"run_index", run_index},
        {"model", model},
        {"trajectory", trajectory.to_json()},
    };
    if (metrics) j["metrics"] = metrics->to_json();
    return j;
}

TrajectoryRecord TrajectoryRecord::from_json(const Json& j) {
    TrajectoryRecord r;
    r.schema_version = j.value("schema_version", 0);
    r.task_id = j.value("task_id", "");
    r.run_index = j.value("run_index", 0);
    r.model = j.value("model", "");
    r.trajectory = agent::Trajectory::from_json(j.value("trajectory", Json::object()));
    if (j.contains("metrics")) r.metrics = eval::MetricVector::from_json(j["metrics"]);
    return r;
}

std::string TrajectoryRecord::validate() const {
    if (schema_version != kTrajectorySchemaVersion)
        return "unsupported schema_version " + std::to_string(schema_version);
    if (task_id.empty()) return "missing task_id";
    if (trajectory.termination != "Completed" && trajectory.termination != "MaxTurns" &&
        trajectory.termination != "Laziness")
        return "unknown termination '" + trajectory.termination + "'";
    for (std::size_t i = 0; i < trajectory.turns.size(); ++i) {
        if (trajectory.turns[i].turn_index != static_cast<int>(i) + 1)
            return "turn indices not contiguous from 1";
    }
    return "";
}

void store_trajectories(const std::vector<TrajectoryRecord>& records, const std::string& path,
                        bool append) {
    std::ofstream out(path, append ? std::ios::app : std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    for (const auto& record : records) out << record.to_json().dump() << "\n";
}

LoadReport load_trajectories(const std::string& path, bool skip_corrupt) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open trajectory file: " + path);

    LoadReport report;
    std::string line;
    int line_number = 0;
    while (std::getline(in, line)) {
        ++line_number;
        if (line.empty()) continue;
        std::string problem;
        Json parsed = Json::parse(line, nullptr, false);
        if (parsed.is_discarded()) {
            problem = "invalid JSON";
        } else {
            TrajectoryRecord record = TrajectoryRecord::from_json(parsed);
            problem = record.validate();
            if (problem.empty()) {
                report.records.push_back(std::move(record));
                continue;
            }
        }
        if (!skip_corrupt)
            throw std::runtime_error(path + ":" + std::to_string(line_number) + ": " + problem);
        report.bad_lines.emplace_back(line_number, problem);
    }
    return report;
}

void merge_trajectory_files(const std::vector<std::string>& parts, const std::string& out_path) {
    std::ofstream out(out_path, std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open for writing: " + out_path);
    for (const auto& part : parts) {
        std::ifstream in(part);
        if (!in) throw std::runtime_error("cannot open part file: " + part);
        std::string line;
        while (std::getline(in, line)) {
            if (!line.empty()) out << line << "\n";
        }
    }
}

} // namespace toolrange::harness

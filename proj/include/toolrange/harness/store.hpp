#pragma once
// Trajectory persistence: append-only JSON lines, one self-contained record
// per line. Parallel runs write per-worker files and merge afterwards.

#include <optional>
#include <string>
#include <vector>

#include "toolrange/agent/types.hpp"
#include "toolrange/eval/types.hpp"

namespace toolrange::harness {

constexpr int kTrajectorySchemaVersion = 1;

struct TrajectoryRecord {
    int schema_version = kTrajectorySchemaVersion;
    std::string task_id;
    int run_index = 0;
    std::string model;  // gateway profile the actor ran under
    agent::Trajectory trajectory;
    std::optional<eval::MetricVector> metrics;  // filled once evaluated

    Json to_json() const;
    static TrajectoryRecord from_json(const Json& j);

    // Empty string when the record is well-formed; otherwise the reason.
    std::string validate() const;
};

void store_trajectories(const std::vector<TrajectoryRecord>& records, const std::string& path,
                        bool append = false);

struct LoadReport {
    std::vector<TrajectoryRecord> records;
    std::vector<std::pair<int, std::string>> bad_lines;  // (line number, reason)
};

// skip_corrupt=false aborts on the first bad line with its line number;
// true collects bad lines into the report and keeps going.
LoadReport load_trajectories(const std::string& path, bool skip_corrupt = false);

// Concatenates several record files into one, preserving record counts.
void merge_trajectory_files(const std::vector<std::string>& parts, const std::string& out_path);

} // namespace toolrange::harness

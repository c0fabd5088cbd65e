#pragma once
// SFT data curation: keep the first turn of each trajectory when all of
// its tool calls are schema-valid and it actually acts, then export the
// kept turns as role-tagged chat samples (tool calls paired with tool
// results, closing on an assistant message).

#include <map>

#include "toolrange/harness/store.hpp"
#include "toolrange/registry/registry.hpp"
#include "toolrange/tasks/types.hpp"

namespace toolrange::harness {

struct SftSample {
    Json messages = Json::array();  // {role, content, tool_call?}
    std::string task_id;
    std::string model;
    int run_index = 0;
    int turn_index = 1;

    Json to_json() const;
    static SftSample from_json(const Json& j);

    // Checks the message invariants: every tool-call message is followed by
    // exactly one tool message, tool messages only follow tool calls, and
    // the final message is a plain assistant message. Empty string = valid.
    std::string validate() const;
};

std::vector<SftSample> curate_first_round(const std::vector<TrajectoryRecord>& records,
                                          const std::map<std::string, tasks::TaskSpec>& tasks,
                                          const registry::Registry& registry);

// JSON-lines export with a leading '#' header line; alternation re-checked
// per sample, a violation aborts naming the offender.
void export_sft(const std::vector<SftSample>& samples, const std::string& path);
std::vector<SftSample> load_sft(const std::string& path);

} // namespace toolrange::harness

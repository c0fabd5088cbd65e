#include "toolrange/harness/curation.hpp"

#include <fstream>

#include "toolrange/registry/schema.hpp"
#include "toolrange/retrieval/service.hpp"

namespace toolrange::harness {

Json SftSample::to_json() const {
    return Json{
        {"messages", messages},
        {"task_id", task_id},
        {"model", model},
        {"run_index", run_index},
        {"turn_index", turn_index},
    };
}

SftSample SftSample::from_json(const Json& j) {
    SftSample s;
    s.messages = j.value("messages", Json::array());
    s.task_id = j.value("task_id", "");
    s.model = j.value("model", "");
    s.run_index = j.value("run_index", 0);
    s.turn_index = j.value("turn_index", 1);
    return s;
}

std::string SftSample::validate() const {
    if (!messages.is_array() || messages.empty()) return "no messages";
    for (std::size_t i = 0; i < messages.size(); ++i) {
        const Json& m = messages[i];
        const std::string role = m.value("role", "");
        if (m.contains("tool_call")) {
            if (role != "assistant") return "tool_call on non-assistant message";
            if (i + 1 >= messages.size() || messages[i + 1].value("role", "") != "tool")
                return "tool-call message not followed by a tool result";
        }
        if (role == "tool") {
            if (i == 0 || !messages[i - 1].contains("tool_call"))
                return "tool result without a preceding tool call";
        }
    }
    const Json& last = messages.back();
    if (last.value("role", "") != "assistant") return "final message is not from the assistant";
    if (last.contains("tool_call")) return "final message is an unanswered tool call";
    return "";
}

namespace {

std::string observation_text(const Json& observation) {
    if (observation.is_null()) return "";
    return observation.dump();
}

} // namespace

std::vector<SftSample> curate_first_round(const std::vector<TrajectoryRecord>& records,
                                          const std::map<std::string, tasks::TaskSpec>& tasks,
                                          const registry::Registry& registry) {
    const Json search_schema = retrieval::search_tools_schema();
    std::vector<SftSample> samples;

    for (const auto& record : records) {
        if (record.trajectory.turns.empty()) continue;
        const agent::Turn& first = record.trajectory.turns.front();

        bool acted = false;
        bool all_valid = true;
        for (const auto& step : first.steps) {
            if (step.action.type == agent::Action::Type::invoke) {
                acted = true;
                const auto* tool = registry.find_tool(step.action.tool_id);
                if (!tool || registry::validate_against_schema(step.action.arguments,
                                                               tool->input_schema)) {
                    all_valid = false;
                    break;
                }
            } else if (step.action.type == agent::Action::Type::search) {
                acted = true;
            }
        }
        if (!acted || !all_valid) continue;

        auto task_it = tasks.find(record.task_id);
        const std::string query =
            task_it != tasks.end() ? task_it->second.user_query : record.task_id;

        SftSample sample;
        sample.task_id = record.task_id;
        sample.model = record.model;
        sample.run_index = record.run_index;

        sample.messages.push_back(Json{
            {"role", "system"},
            {"content", "You are a tool-using agent. Discover tools with search_tools, invoke "
                        "them with schema-valid arguments, and answer the user."}});
        sample.messages.push_back(Json{{"role", "user"}, {"content", query}});

        std::string closing;
        for (const auto& step : first.steps) {
            if (step.action.type == agent::Action::Type::respond) {
                closing = step.action.text;
                break;
            }
            Json tool_call;
            if (step.action.type == agent::Action::Type::search) {
                tool_call = Json{{"name", "search_tools"},
                                 {"arguments", Json{{"query", step.action.query},
                                                    {"k", step.action.k}}}};
            } else {
                tool_call = Json{{"name", step.action.tool_id},
                                 {"arguments", step.action.arguments}};
            }
            sample.messages.push_back(Json{{"role", "assistant"},
                                           {"content", step.thought},
                                           {"tool_call", tool_call}});
            sample.messages.push_back(
                Json{{"role", "tool"}, {"content", observation_text(step.observation)}});
            closing = step.thought;  // fallback closer when the turn never responded
        }
        sample.messages.push_back(Json{{"role", "assistant"}, {"content", closing}});

        if (sample.validate().empty()) samples.push_back(std::move(sample));
    }
    return samples;
}

void export_sft(const std::vector<SftSample>& samples, const std::string& path) {
    for (const auto& sample : samples) {
        std::string problem = sample.validate();
        if (!problem.empty())
            throw std::runtime_error("sft sample " + sample.task_id + "#" +
                                     std::to_string(sample.run_index) + ": " + problem);
    }
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << "# toolrange sft export v1\n";
    for (const auto& sample : samples) out << sample.to_json().dump() << "\n";
}

std::vector<SftSample> load_sft(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open sft file: " + path);
    std::vector<SftSample> samples;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        samples.push_back(SftSample::from_json(Json::parse(line)));
    }
    return samples;
}

} // namespace toolrange::harness

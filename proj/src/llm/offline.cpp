#include "toolrange/llm/offline.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include "toolrange/core/rng.hpp"
#include "toolrange/registry/schema.hpp"

namespace toolrange::llm {

// ---------------------------------------------------------------------------
// ScriptedBackend

ScriptedBackend::ScriptedBackend(Json script) : script_(std::move(script)) {
    if (script_.is_null()) script_ = Json::object();
}

Json ScriptedBackend::load_script(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open script: " + path);
    return Json::parse(in);
}

ChatResult ScriptedBackend::chat(const std::vector<Message>& messages, const std::string&) {
    calls_.fetch_add(1);
    const Message& last = messages.back();

    auto render = [](const Json& entry) {
        if (entry.contains("response_json")) return entry["response_json"].dump();
        return entry.value("response", std::string());
    };

    for (const auto& entry : script_.value("behaviors", Json::array())) {
        const Json match = entry.value("match", Json::object());
        if (match.contains("role") && match["role"].get<std::string>() != last.role) continue;
        if (match.contains("contains") &&
            last.content.find(match["contains"].get<std::string>()) == std::string::npos)
            continue;
        if (match.contains("turn_index") &&
            match["turn_index"].get<std::size_t>() != messages.size())
            continue;
        ChatResult out;
        out.text = render(entry);
        return out;
    }
    if (script_.contains("default")) {
        ChatResult out;
        out.text = script_["default"].is_string() ? script_["default"].get<std::string>()
                                                  : script_["default"].dump();
        return out;
    }
    throw std::runtime_error("scripted backend: no matching behavior and no default");
}

// ---------------------------------------------------------------------------
// BuiltinBackend

namespace {

// Last user message carries the request marker plus a fenced JSON block.
std::string marker_of(const std::string& content) {
    for (const char* m : {"[plan-request]", "[feedback-request]", "[actor-turn]",
                          "[judge-request]", "[draft-request]", "[critique-request]"}) {
        if (content.find(m) != std::string::npos) return m;
    }
    return "";
}

double clamp10(double v) { return std::max(0.0, std::min(10.0, v)); }

} // namespace

BuiltinBackend::BuiltinBackend(Json params) : params_(std::move(params)) {
    if (params_.is_null()) params_ = Json::object();
}

ChatResult BuiltinBackend::chat(const std::vector<Message>& messages, const std::string&) {
    const Message& last = messages.back();
    const std::string marker = marker_of(last.content);
    auto request = extract_json(last.content);
    if (!request) request = Json::object();

    Json response;
    if (marker == "[plan-request]") response = plan(*request);
    else if (marker == "[feedback-request]") response = feedback(*request);
    else if (marker == "[actor-turn]") response = actor(messages, *request);
    else if (marker == "[judge-request]") response = judge(*request);
    else if (marker == "[draft-request]") response = draft(*request);
    else if (marker == "[critique-request]") response = critique(*request);
    else throw std::runtime_error("builtin backend: unrecognized request");

    ChatResult out;
    out.text = "```json\n" + response.dump(2) + "\n```";
    return out;
}

Json BuiltinBackend::plan(const Json& request) const {
    const Json task = request.value("task", Json::object());
    const int wanted = params_.value("planner_nodes", 3);
    const int cap = request.value("max_nodes", 15);
    const int n = std::max(1, std::min(wanted, cap));

    static const char* stock[] = {
        "Discover the tools relevant to the request",
        "Execute the core workflow steps across the required apps",
        "Verify constraints are satisfied",
        "Collect intermediate results",
        "Compose and deliver the final answer",
    };
    Json nodes = Json::array();
    for (int i = 0; i < n; ++i) {
        Json node{{"goal_id", "g" + std::to_string(i + 1)},
                  {"description", std::string(stock[i % 5]) + " for " +
                                      task.value("task_id", std::string("the task"))},
                  {"depends_on", Json::array()}};
        if (i > 0) node["depends_on"].push_back("g" + std::to_string(i));
        nodes.push_back(std::move(node));
    }
    return Json{{"nodes", nodes}};
}

Json BuiltinBackend::feedback(const Json& request) const {
    const Json graph = request.value("graph", Json::object());
    const Json turn = request.value("turn", Json::object());

    int pending = 0;
    for (const auto& node : graph.value("nodes", Json::array()))
        if (node.value("status", "Pending") == "Pending") ++pending;

    // Tool work advances the plan; a bare response only closes out the
    // final wrap-up goal.
    const bool productive = turn.value("had_successful_invoke", false) ||
                            (turn.value("responded", false) && pending == 1);

    Json statuses = Json::object();
    std::string next_goal;
    bool flipped = false;
    for (const auto& node : graph.value("nodes", Json::array())) {
        const std::string id = node.value("goal_id", "");
        std::string status = node.value("status", "Pending");
        if (status == "Pending" && productive && !flipped) {
            status = "Complete";
            flipped = true;
        } else if (status == "Pending" && next_goal.empty()) {
            next_goal = node.value("description", id);
        }
        statuses[id] = status;
    }
    std::string text = next_goal.empty()
                           ? "All sub-goals are complete; wrap up."
                           : (productive ? "Good progress. Next: " + next_goal
                                         : "No progress this turn. Use tools to advance: " +
                                               next_goal);
    return Json{{"statuses", statuses}, {"feedback", text}};
}

Json BuiltinBackend::actor(const std::vector<Message>& messages, const Json&) const {
    if (params_.value("lazy", false)) {
        return Json{{"thought", "The request can be answered directly."},
                    {"action", Json{{"type", "respond"},
                                    {"text", "I believe no tool work is needed here."}}}};
    }
    if (messages.back().content.find("[summarize]") != std::string::npos) {
        return Json{{"thought", "Wrapping up with what was accomplished."},
                    {"action", Json{{"type", "respond"},
                                    {"text", "Summary: executed the reachable workflow steps; "
                                             "some goals may remain open."}}}};
    }

    // Scan the current turn: messages after the last [turn ...] marker.
    std::size_t turn_start = 0;
    int turn_index = 0;
    for (std::size_t i = 0; i < messages.size(); ++i) {
        if (messages[i].role == "user" && messages[i].content.rfind("[turn ", 0) == 0) {
            turn_start = i;
            ++turn_index;
        }
    }

    Json task = Json::object();
    for (const auto& m : messages) {
        if (m.role == "user" && m.content.find("[task]") != std::string::npos) {
            if (auto t = extract_json(m.content)) task = *t;
            break;
        }
    }

    Json last_search;
    int invokes_this_turn = 0;
    for (std::size_t i = turn_start; i < messages.size(); ++i) {
        if (messages[i].content.find("[observation]") == std::string::npos) continue;
        auto obs = extract_json(messages[i].content);
        if (!obs) continue;
        const std::string kind = obs->value("kind", "");
        if (kind == "search") last_search = *obs;
        if (kind == "tool") ++invokes_this_turn;
    }

    const int invokes_per_turn = params_.value("invokes_per_turn", 1);

    if (last_search.is_null()) {
        std::string query = task.value("user_query", std::string("relevant tools"));
        // keep the query short; vary slightly per turn so recall shifts
        std::string head;
        int words = 0;
        for (char c : query) {
            if (c == ' ' && ++words >= 8) break;
            head += c;
        }
        return Json{{"thought", "I need tools for this step; searching the registry."},
                    {"action", Json{{"type", "search"},
                                    {"query", head + " step " + std::to_string(turn_index)},
                                    {"k", params_.value("search_k", 5)}}}};
    }

    const Json results = last_search.value("results", Json::array());
    if (invokes_this_turn < invokes_per_turn && !results.empty()) {
        const Json& pick = results[static_cast<std::size_t>(invokes_this_turn) % results.size()];
        Json args = registry::minimal_instance(pick.value("input_schema", Json::object()));
        return Json{{"thought", "Invoking the best-ranked tool for this sub-goal."},
                    {"action", Json{{"type", "invoke"},
                                    {"tool_id", pick.value("tool_id", "")},
                                    {"arguments", args}}}};
    }

    return Json{{"thought", "This step is done; reporting back."},
                {"action",
                 Json{{"type", "respond"},
                      {"text", "Progress update: executed " + std::to_string(invokes_this_turn) +
                                   " tool call(s) for turn " + std::to_string(turn_index) +
                                   " of task " + task.value("task_id", std::string("?")) + "."}}}};
}

Json BuiltinBackend::judge(const Json& request) const {
    const Json package = request.value("package", Json::object());
    const double bias = params_.value("judge_bias", 0.0);

    int invokes = 0, successes = 0, turns = 0;
    const Json trajectory = package.value("trajectory", Json::object());
    for (const auto& turn : trajectory.value("turns", Json::array())) {
        ++turns;
        for (const auto& step : turn.value("steps", Json::array())) {
            if (step.value("action", Json::object()).value("type", "") == "invoke") {
                ++invokes;
                if (step.value("success", false)) ++successes;
            }
        }
    }
    const std::string termination = trajectory.value("termination", "");
    const double ratio = invokes == 0 ? 0.0 : static_cast<double>(successes) / invokes;
    const bool completed = termination == "Completed";

    const std::string task_id = package.value("task_id", "");
    Rng salt = Rng::derive(params_.value("seed", std::uint64_t{0}), task_id);

    Json scores{
        {"completeness", clamp10(ratio * 5.0 + (completed ? 4.0 : 1.0) + bias)},
        {"grounding", clamp10(3.0 + ratio * 4.0 + bias)},
        {"format", clamp10(package.value("final_answer", std::string()).empty()
                               ? 1.0
                               : 6.0 + static_cast<double>(salt.below(3)) + bias)},
        {"tradeoff", clamp10(3.0 + static_cast<double>(salt.below(4)) + bias)},
        {"goal_decomposition", clamp10(6.0 + static_cast<double>(salt.below(3)) + bias)},
        {"progress_tracking", clamp10(5.0 + ratio * 3.0 + bias)},
    };

    Json constraint_verdicts = Json::object();
    for (const auto& c : package.value("constraints", Json::array())) {
        const std::string cid = c.value("constraint_id", "");
        constraint_verdicts[cid] = completed && (salt.below(4) != 0);
    }

    return Json{{"scores", scores},
                {"task_success", scores["completeness"].get<double>() >= 6.0},
                {"constraints", constraint_verdicts}};
}

Json BuiltinBackend::draft(const Json& request) const {
    const Json bundle = request.value("bundle", Json::object());
    const Json tools = bundle.value("tools", Json::array());
    if (tools.empty()) throw std::runtime_error("builtin draft: empty bundle");
    const int min_servers = request.value("min_servers", 2);
    const int round = request.value("round", 1);
    const std::string feedback = request.value("feedback", "");

    std::vector<std::string> apps;
    std::string tool_phrase;
    for (const auto& t : tools) {
        const std::string app = t.value("app_name", "");
        if (std::find(apps.begin(), apps.end(), app) == apps.end()) apps.push_back(app);
        if (!tool_phrase.empty()) tool_phrase += ", ";
        tool_phrase += t.value("tool_name", "");
    }
    std::string app_phrase;
    for (std::size_t i = 0; i < apps.size(); ++i) {
        if (i) app_phrase += i + 1 == apps.size() ? " and " : ", ";
        app_phrase += apps[i];
    }

    std::string query = "Coordinate a workflow across " + app_phrase +
                        ": gather the inputs, run the necessary operations (" + tool_phrase +
                        "), and deliver one consolidated report.";
    if (round > 1) query += " Be thorough about every stated requirement.";

    Json constraints = Json::array();
    constraints.push_back(Json{
        {"constraint_id", "c-order"},
        {"kind", "order"},
        {"text", "Complete the " + tools[0].value("tool_name", "") + " step before the " +
                     tools[std::min<std::size_t>(1, tools.size() - 1)].value("tool_name", "") +
                     " step."},
        {"machine_check", Json{{"before", tools[0].value("tool_id", "")},
                               {"after", tools[std::min<std::size_t>(1, tools.size() - 1)]
                                             .value("tool_id", "")}}}});
    constraints.push_back(Json{{"constraint_id", "c-diversity"},
                               {"kind", "diversity"},
                               {"text", "Use at least " + std::to_string(min_servers) +
                                            " distinct services."},
                               {"machine_check", Json{{"min_servers", min_servers}}}});
    constraints.push_back(Json{{"constraint_id", "c-format"},
                               {"kind", "format"},
                               {"text", "Present the final answer as a bulleted list."},
                               {"machine_check", Json{{"pattern", "bulleted list"}}}});
    if (round > 1) {
        constraints.push_back(Json{{"constraint_id", "c-tradeoff"},
                                   {"kind", "tradeoff"},
                                   {"text", "When speed and completeness conflict, prefer "
                                            "completeness and say so explicitly."}});
    }

    Json rationales = Json::object();
    for (const auto& t : tools) {
        std::string d = t.value("description", "");
        if (!d.empty() && d.back() == '.') d.pop_back();
        rationales[t.value("tool_id", "")] =
            "Use " + t.value("tool_name", "") + " to " + (d.empty() ? "perform its step" : d);
    }

    Json edges = Json::array();
    if (tools.size() >= 2) {
        edges.push_back(Json::array(
            {tools[0].value("tool_id", ""), tools[1].value("tool_id", "")}));
    }

    return Json{{"user_query", query},
                {"constraints", constraints},
                {"tool_rationales", rationales},
                {"dependency_edges", edges}};
}

Json BuiltinBackend::critique(const Json& request) const {
    const int round = request.value("round", 1);
    const int fail_rounds = params_.value("critic_fail_rounds", 0);
    if (round <= fail_rounds) {
        const bool coverage = (round % 2) == 1;
        Json per_tool = Json::object();
        const Json draft = request.value("draft", Json::object());
        bool first = true;
        const Json rationales = draft.value("tool_rationales", Json::object());
        for (const auto& [tool_id, _] : rationales.items()) {
            per_tool[tool_id] = !(coverage && first);
            first = false;
        }
        return Json{{"coverage_ok", !coverage},
                    {"constraint_ok", coverage},
                    {"feedback", coverage
                                     ? "The query does not motivate every tool; ground each one."
                                     : "Constraints are too thin; add an explicit trade-off."},
                    {"per_tool_coverage", per_tool}};
    }
    return Json{{"coverage_ok", true},
                {"constraint_ok", true},
                {"feedback", ""},
                {"per_tool_coverage", Json::object()}};
}

} // namespace toolrange::llm

#include "toolrange/registry/validation.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <ctime>

#include "toolrange/registry/schema.hpp"

namespace toolrange::registry {

namespace {

std::string iso8601_now() {
    auto now = std::chrono::system_clock::now();
    std::time_t t = std::chrono::system_clock::to_time_t(now);
    char buf[32];
    std::tm tm{};
    gmtime_r(&t, &tm);
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

// True when `text` starts with `word` followed by a non-alphanumeric
// boundary ("error:" matches "error", "errors" does not).
bool starts_with_word(const std::string& text, const std::string& word) {
    if (text.size() < word.size()) return false;
    if (text.compare(0, word.size(), word) != 0) return false;
    if (text.size() == word.size()) return true;
    return !std::isalnum(static_cast<unsigned char>(text[word.size()]));
}

} // namespace

bool payload_usable(const ToolResult& result, const std::vector<std::string>& error_patterns) {
    if (!result.ok()) return false;
    if (result.payload.empty()) return false;
    std::string text = lower(result.text());
    // Trim leading whitespace before the prefix check.
    auto first = text.find_first_not_of(" \t\r\n");
    if (first == std::string::npos) return false;
    text = text.substr(first);
    for (const auto& pattern : error_patterns) {
        if (starts_with_word(text, lower(pattern))) return false;
    }
    return true;
}

ValidationReport validate_tool(const Registry& registry, const std::string& tool_id,
                               const Persona& persona, const ValidationConfig& config) {
    const ToolDescriptor* tool = registry.find_tool(tool_id);
    if (!tool) throw std::invalid_argument("unknown tool_id: " + tool_id);
    const ServerDescriptor* server = registry.find_server(tool->server_id);

    ValidationReport report;
    report.tool_id = tool_id;
    report.checked_at = iso8601_now();

    // Stage 1: the server lists the tool and the persona holds the needed credential.
    try {
        auto listed = registry.transport_for(tool->server_id)->list_tools();
        if (std::find(listed.begin(), listed.end(), tool->tool_name) == listed.end()) {
            report.evidence.push_back("stage1: tool not listed by server");
            return report;
        }
    } catch (const TransportError& e) {
        report.evidence.push_back(std::string("stage1: ") + e.what());
        return report;
    }
    if (tool->auth_required) {
        if (!server->credential_ref || !persona.has_credential(*server->credential_ref)) {
            report.evidence.push_back("stage1: persona lacks credential for " + tool->server_id);
            return report;
        }
    }
    report.stage1_available = true;
    report.evidence.push_back("stage1: listed and accessible");

    // Stage 2: one probe invocation with minimal schema-respecting arguments.
    Json probe_args = minimal_instance(tool->input_schema);
    ToolResult result = registry.invoke(tool_id, probe_args, CallContext{persona, 0, 0});
    if (!result.ok()) {
        report.evidence.push_back("stage2: probe returned " +
                                  to_string(result.error_kind.value_or(ErrorKind::server_error)) +
                                  ": " + result.text());
        return report;
    }
    report.stage2_invocable = true;
    report.evidence.push_back("stage2: probe invocation ok");

    // Stage 3: the payload must be actionable, not an error dressed as ok.
    if (!payload_usable(result, config.error_patterns)) {
        report.evidence.push_back("stage3: payload classified as error-like: " +
                                  result.text().substr(0, 120));
        return report;
    }
    report.stage3_usable = true;
    report.evidence.push_back("stage3: payload usable");
    return report;
}

Json RegistryValidation::to_json() const {
    Json reports_json = Json::array();
    for (const auto& r : reports) reports_json.push_back(r.to_json());
    return Json{{"working_set", working_set}, {"reports", reports_json}};
}

RegistryValidation validate_registry(const Registry& registry, const Persona& persona,
                                     const ValidationConfig& config) {
    RegistryValidation out;
    for (const auto& tool : registry.tools()) {
        ValidationReport report = validate_tool(registry, tool.tool_id, persona, config);
        if (report.working()) out.working_set.push_back(tool.tool_id);
        out.reports.push_back(std::move(report));
    }
    return out;
}

} // namespace toolrange::registry

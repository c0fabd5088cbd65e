#include "toolrange/registry/types.hpp"

#include <algorithm>
#include <stdexcept>

namespace toolrange::registry {

Json ToolDescriptor::to_json() const {
    Json j{
        {"tool_id", tool_id},
        {"server_id", server_id},
        {"app_name", app_name},
        {"tool_name", tool_name},
        {"description", description},
        {"input_schema", input_schema},
        {"auth_required", auth_required},
        {"tags", tags},
    };
    if (!behavior.is_null() && !behavior.empty()) j["behavior"] = behavior;
    return j;
}

ToolDescriptor ToolDescriptor::from_json(const Json& j) {
    ToolDescriptor d;
    d.tool_id = j.at("tool_id").get<std::string>();
    d.server_id = j.value("server_id", "");
    d.app_name = j.value("app_name", "");
    d.tool_name = j.at("tool_name").get<std::string>();
    d.description = j.value("description", "");
    d.input_schema = j.value("input_schema", Json{{"type", "object"}});
    d.auth_required = j.value("auth_required", false);
    for (const auto& t : j.value("tags", Json::array())) d.tags.push_back(t.get<std::string>());
    d.behavior = j.value("behavior", Json());
    return d;
}

Json ValidationReport::to_json() const {
    return Json{
        {"tool_id", tool_id},
        {"stage1_available", stage1_available},
        {"stage2_invocable", stage2_invocable},
        {"stage3_usable", stage3_usable},
        {"evidence", evidence},
        {"checked_at", checked_at},
    };
}

std::string to_string(ErrorKind k) {
    switch (k) {
        case ErrorKind::timeout: return "timeout";
        case ErrorKind::rate_limited: return "rate_limited";
        case ErrorKind::unavailable: return "unavailable";
        case ErrorKind::schema_violation: return "schema_violation";
        case ErrorKind::auth: return "auth";
        case ErrorKind::server_error: return "server_error";
    }
    return "server_error";
}

ErrorKind error_kind_from_string(const std::string& s) {
    if (s == "timeout") return ErrorKind::timeout;
    if (s == "rate_limited") return ErrorKind::rate_limited;
    if (s == "unavailable") return ErrorKind::unavailable;
    if (s == "schema_violation") return ErrorKind::schema_violation;
    if (s == "auth") return ErrorKind::auth;
    if (s == "server_error") return ErrorKind::server_error;
    throw std::invalid_argument("unknown error kind: " + s);
}

ToolResult ToolResult::make_ok(const std::string& text, std::int64_t latency_ms) {
    ToolResult r;
    r.status = Status::ok;
    r.payload.push_back(Json{{"type", "text"}, {"text", text}});
    r.latency_ms = latency_ms;
    return r;
}

ToolResult ToolResult::make_ok_blocks(std::vector<Json> blocks, std::int64_t latency_ms) {
    ToolResult r;
    r.status = Status::ok;
    r.payload = std::move(blocks);
    r.latency_ms = latency_ms;
    return r;
}

ToolResult ToolResult::make_error(ErrorKind kind, const std::string& text,
                                  std::int64_t latency_ms) {
    ToolResult r;
    r.status = Status::error;
    r.error_kind = kind;
    r.payload.push_back(Json{{"type", "text"}, {"text", text}});
    r.latency_ms = latency_ms;
    return r;
}

std::string ToolResult::text() const {
    std::string out;
    for (const auto& block : payload) {
        if (block.is_object() && block.value("type", "") == "text") {
            if (!out.empty()) out += "\n";
            out += block.value("text", "");
        }
    }
    return out;
}

Json ToolResult::to_json() const {
    Json j{
        {"status", ok() ? "ok" : "error"},
        {"payload", payload},
        {"latency_ms", latency_ms},
    };
    if (error_kind) j["error_kind"] = to_string(*error_kind);
    return j;
}

ToolResult ToolResult::from_json(const Json& j) {
    ToolResult r;
    r.status = j.value("status", "ok") == "ok" ? Status::ok : Status::error;
    for (const auto& block : j.value("payload", Json::array())) r.payload.push_back(block);
    if (j.contains("error_kind"))
        r.error_kind = error_kind_from_string(j["error_kind"].get<std::string>());
    r.latency_ms = j.value("latency_ms", std::int64_t{0});
    return r;
}

bool Persona::has_credential(const std::string& ref) const {
    return std::find(credential_refs.begin(), credential_refs.end(), ref) !=
           credential_refs.end();
}

} // namespace toolrange::registry

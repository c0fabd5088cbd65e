#include "toolrange/mcp/dispatcher.hpp"

#include <iostream>

#include "toolrange/registry/schema.hpp"

namespace toolrange::mcp {

Dispatcher::Dispatcher(std::string server_name) : server_name_(std::move(server_name)) {}

void Dispatcher::add_tool(ServedTool tool) { tools_.push_back(std::move(tool)); }

Json Dispatcher::make_error(const Json& id, int code, const std::string& message) const {
    return Json{
        {"jsonrpc", "2.0"},
        {"id", id},
        {"error", Json{{"code", code}, {"message", message}}},
    };
}

std::string Dispatcher::handle_raw(const std::string& message) {
    Json request = Json::parse(message, nullptr, false);
    if (request.is_discarded()) {
        return make_error(nullptr, rpc_error::kParseError, "parse error").dump();
    }
    Json response = handle(request);
    return response.is_null() ? std::string() : response.dump();
}

Json Dispatcher::handle(const Json& request) {
    if (!request.is_object() || !request.contains("method") || !request["method"].is_string()) {
        return make_error(request.is_object() ? request.value("id", Json()) : Json(),
                          rpc_error::kInvalidRequest, "invalid request");
    }
    const std::string method = request["method"].get<std::string>();
    const bool is_notification = !request.contains("id");
    const Json id = request.value("id", Json());

    if (method.rfind("notifications/", 0) == 0) return Json();

    if (method == "initialize") {
        if (is_notification) return Json();
        return Json{{"jsonrpc", "2.0"},
                    {"id", id},
                    {"result",
                     Json{{"protocolVersion", "2024-11-05"},
                          {"capabilities", Json{{"tools", Json::object()}}},
                          {"serverInfo", Json{{"name", server_name_}, {"version", "0.1"}}}}}};
    }

    if (method == "tools/list") {
        if (is_notification) return Json();
        Json list = Json::array();
        for (const auto& tool : tools_) {
            list.push_back(Json{{"name", tool.name},
                                {"description", tool.description},
                                {"inputSchema", tool.input_schema}});
        }
        return Json{{"jsonrpc", "2.0"}, {"id", id}, {"result", Json{{"tools", list}}}};
    }

    if (method == "tools/call") {
        if (is_notification) return Json();
        const Json params = request.value("params", Json::object());
        if (!params.is_object() || !params.contains("name") || !params["name"].is_string())
            return make_error(id, rpc_error::kInvalidParams, "params.name required");
        const std::string name = params["name"].get<std::string>();

        const ServedTool* tool = nullptr;
        for (const auto& t : tools_) {
            if (t.name == name) { tool = &t; break; }
        }
        if (!tool) return make_error(id, rpc_error::kToolNotFound, "unknown tool: " + name);

        Json arguments = params.value("arguments", Json::object());
        if (auto violation = registry::validate_against_schema(arguments, tool->input_schema)) {
            return make_error(id, rpc_error::kInvalidParams,
                              "schema_violation: " + violation->path + ": " + violation->message);
        }

        registry::ToolResult result;
        try {
            result = tool->handler(arguments);
        } catch (const std::exception& e) {
            return make_error(id, rpc_error::kInternalError, e.what());
        }
        return Json{{"jsonrpc", "2.0"},
                    {"id", id},
                    {"result", Json{{"content", result.payload},
                                    {"isError", !result.ok()}}}};
    }

    if (is_notification) return Json();
    return make_error(id, rpc_error::kMethodNotFound, "method not found: " + method);
}

void serve_stdio(Dispatcher& dispatcher, std::istream& in, std::ostream& out) {
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::string response = dispatcher.handle_raw(line);
        if (!response.empty()) {
            out << response << "\n";
            out.flush();
        }
    }
}

} // namespace toolrange::mcp

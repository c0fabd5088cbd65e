#include "toolrange/registry/registry.hpp"

#include <fstream>
#include <stdexcept>

#include "toolrange/registry/schema.hpp"

namespace toolrange::registry {

Registry Registry::from_manifest(const Json& manifest) {
    if (!manifest.is_object() || !manifest.contains("servers") || !manifest["servers"].is_array())
        throw std::runtime_error("registry manifest: expected {servers:[...]}");

    Registry reg;
    for (const auto& server_json : manifest["servers"]) {
        ServerDescriptor server;
        server.server_id = server_json.at("server_id").get<std::string>();
        if (reg.server_index_.count(server.server_id))
            throw std::runtime_error("registry manifest: duplicate server_id " + server.server_id);

        const Json t = server_json.value("transport", Json{{"kind", "synthetic"}, {"target", ""}});
        server.transport.kind = t.value("kind", "synthetic");
        server.transport.target = t.value("target", "");
        if (server_json.contains("credential_ref"))
            server.credential_ref = server_json["credential_ref"].get<std::string>();

        std::vector<ToolDescriptor> server_tools;
        for (const auto& tool_json : server_json.value("tools", Json::array())) {
            ToolDescriptor tool = ToolDescriptor::from_json(tool_json);
            if (tool.server_id.empty()) tool.server_id = server.server_id;
            if (tool.server_id != server.server_id)
                throw std::runtime_error("registry manifest: tool " + tool.tool_id +
                                         " claims server " + tool.server_id + " inside " +
                                         server.server_id);
            std::string reason;
            if (!is_valid_tool_schema(tool.input_schema, &reason))
                throw std::runtime_error("registry manifest: tool " + tool.tool_id +
                                         " has invalid input_schema: " + reason);
            if (reg.tool_index_.count(tool.tool_id))
                throw std::runtime_error("registry manifest: duplicate tool_id " + tool.tool_id);

            server.tool_ids.push_back(tool.tool_id);
            reg.tool_index_[tool.tool_id] = reg.tools_.size();
            reg.tools_.push_back(tool);
            server_tools.push_back(std::move(tool));
        }

        reg.transports_[server.server_id] =
            make_transport(server.transport, std::move(server_tools));
        reg.server_index_[server.server_id] = reg.servers_.size();
        reg.servers_.push_back(std::move(server));
    }
    return reg;
}

Registry Registry::load_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open registry manifest: " + path);
    Json manifest = Json::parse(in, nullptr, false);
    if (manifest.is_discarded())
        throw std::runtime_error("registry manifest is not valid JSON: " + path);
    return from_manifest(manifest);
}

Json Registry::manifest() const {
    Json servers = Json::array();
    for (const auto& server : servers_) {
        Json server_json{
            {"server_id", server.server_id},
            {"transport", Json{{"kind", server.transport.kind},
                               {"target", server.transport.target}}},
        };
        if (server.credential_ref) server_json["credential_ref"] = *server.credential_ref;
        Json tools = Json::array();
        for (const auto& tool_id : server.tool_ids) {
            tools.push_back(tools_[tool_index_.at(tool_id)].to_json());
        }
        server_json["tools"] = std::move(tools);
        servers.push_back(std::move(server_json));
    }
    return Json{{"servers", std::move(servers)}};
}

void Registry::save_file(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write registry manifest: " + path);
    out << manifest().dump(2) << "\n";
}

const ToolDescriptor* Registry::find_tool(const std::string& tool_id) const {
    auto it = tool_index_.find(tool_id);
    return it == tool_index_.end() ? nullptr : &tools_[it->second];
}

const ServerDescriptor* Registry::find_server(const std::string& server_id) const {
    auto it = server_index_.find(server_id);
    return it == server_index_.end() ? nullptr : &servers_[it->second];
}

Transport* Registry::transport_for(const std::string& server_id) const {
    auto it = transports_.find(server_id);
    return it == transports_.end() ? nullptr : it->second.get();
}

ToolResult Registry::invoke(const std::string& tool_id, const Json& arguments,
                            const CallContext& /*ctx*/) const {
    const ToolDescriptor* tool = find_tool(tool_id);
    if (!tool) throw std::invalid_argument("unknown tool_id: " + tool_id);

    Json args = arguments.is_null() ? Json::object() : arguments;
    if (!args.is_object())
        return ToolResult::make_error(ErrorKind::schema_violation, "arguments must be an object");

    if (auto violation = validate_against_schema(args, tool->input_schema)) {
        return ToolResult::make_error(ErrorKind::schema_violation,
                                      violation->path + ": " + violation->message);
    }

    Transport* transport = transport_for(tool->server_id);
    try {
        return transport->call_tool(tool->tool_name, args, timeout_ms_);
    } catch (const TransportError& e) {
        return ToolResult::make_error(ErrorKind::unavailable, e.what());
    }
}

} // namespace toolrange::registry

#pragma once
// The tool universe: descriptors indexed by id, one transport per server,
// and the schema-gated invocation path.
//
// A Registry is immutable after construction and safe to share across
// concurrent episode runners. Mutable state lives inside transports
// (stateful synthetic tools, serialized stdio pipes).

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "toolrange/registry/transport.hpp"
#include "toolrange/registry/types.hpp"

namespace toolrange::registry {

class Registry {
public:
    Registry() = default;

    // Parses the manifest format {servers:[{server_id, transport, credential_ref?,
    // tools:[...]}]} and enforces the registry invariants: globally unique
    // tool ids, valid object-typed schemas, server/tool id agreement.
    // Throws std::runtime_error on malformed input or duplicate ids.
    static Registry from_manifest(const Json& manifest);
    static Registry load_file(const std::string& path);

    // Canonical manifest form; regenerating a synthetic universe with the
    // same seed reproduces this byte for byte.
    Json manifest() const;
    void save_file(const std::string& path) const;

    const std::vector<ToolDescriptor>& tools() const { return tools_; }
    const std::vector<ServerDescriptor>& servers() const { return servers_; }
    const ToolDescriptor* find_tool(const std::string& tool_id) const;
    const ServerDescriptor* find_server(const std::string& server_id) const;
    std::size_t tool_count() const { return tools_.size(); }

    // Validates arguments against the tool's input schema before dispatch;
    // violations return a schema_violation error without touching the
    // transport. Unknown tool ids are a hard error (std::invalid_argument).
    ToolResult invoke(const std::string& tool_id, const Json& arguments,
                      const CallContext& ctx = {}) const;

    Transport* transport_for(const std::string& server_id) const;

    int invocation_timeout_ms() const { return timeout_ms_; }
    void set_invocation_timeout_ms(int ms) { timeout_ms_ = ms; }

private:
    std::vector<ToolDescriptor> tools_;
    std::vector<ServerDescriptor> servers_;
    std::map<std::string, std::size_t> tool_index_;
    std::map<std::string, std::size_t> server_index_;
    std::map<std::string, std::shared_ptr<Transport>> transports_;
    int timeout_ms_ = 30000;
};

} // namespace toolrange::registry

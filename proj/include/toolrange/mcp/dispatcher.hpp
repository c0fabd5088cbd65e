#pragma once
// Minimal MCP server plumbing: JSON-RPC 2.0 request handling for the
// methods this project speaks (initialize, tools/list, tools/call).
// Transport-agnostic; the HTTP search service and the stdio bridge both
// sit on top of this.

#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "toolrange/core/json.hpp"
#include "toolrange/registry/types.hpp"

namespace toolrange::mcp {

namespace rpc_error {
constexpr int kParseError = -32700;
constexpr int kInvalidRequest = -32600;
constexpr int kMethodNotFound = -32601;
constexpr int kInvalidParams = -32602;
constexpr int kInternalError = -32603;
constexpr int kToolNotFound = -32001;
} // namespace rpc_error

struct ServedTool {
    std::string name;
    std::string description;
    Json input_schema;
    std::function<registry::ToolResult(const Json& arguments)> handler;
};

class Dispatcher {
public:
    explicit Dispatcher(std::string server_name = "toolrange");

    void add_tool(ServedTool tool);

    // Handles one raw JSON-RPC message. Returns a serialized response, or
    // an empty string for notifications. Never throws: protocol and tool
    // failures become error responses.
    std::string handle_raw(const std::string& message);
    Json handle(const Json& request);

private:
    Json make_error(const Json& id, int code, const std::string& message) const;

    std::string server_name_;
    std::vector<ServedTool> tools_;
};

// Blocking newline-delimited JSON-RPC loop; returns when `in` closes.
void serve_stdio(Dispatcher& dispatcher, std::istream& in, std::ostream& out);

} // namespace toolrange::mcp

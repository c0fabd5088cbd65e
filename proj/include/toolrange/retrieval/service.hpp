#pragma once
// The agent-facing search service: exposes one MCP tool, search_tools,
// over JSON-RPC/HTTP. Requests are stateless; the index is read-only.

#include <memory>
#include <string>
#include <thread>

#include "toolrange/mcp/dispatcher.hpp"
#include "toolrange/retrieval/index.hpp"

namespace httplib {
class Server;
}

namespace toolrange::retrieval {

Json search_tools_schema();

// Dispatcher serving exactly one tool named "search_tools" whose result
// content is the ranked (tool_id, score) list as a JSON text block.
mcp::Dispatcher make_search_dispatcher(const ToolIndex& index);

class SearchService {
public:
    // Binds immediately; throws std::runtime_error when the port is taken.
    // port 0 picks a free port. The index must outlive the service.
    SearchService(const ToolIndex& index, const std::string& host, int port);
    ~SearchService();

    int port() const { return port_; }
    void stop();

private:
    mcp::Dispatcher dispatcher_;
    std::unique_ptr<httplib::Server> server_;
    std::thread thread_;
    int port_ = 0;
};

} // namespace toolrange::retrieval

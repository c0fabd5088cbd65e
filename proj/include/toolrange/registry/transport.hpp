#pragma once
// Server transports. All tool invocations go through one of these; the
// result is normalized into ToolResult regardless of where it ran.
//
// Call counters are part of the contract: the invoke gate promises zero
// transport operations for schema-violating arguments, and tests check
// that through these counters.

#include <atomic>
#include <map>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <string>
#include <vector>

#include "toolrange/core/json.hpp"
#include "toolrange/registry/types.hpp"

namespace toolrange::registry {

// Server cannot be reached at all (process dead, connection refused,
// listing refused). Tool-level failures never throw; they come back as
// error ToolResults.
struct TransportError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

class Transport {
public:
    virtual ~Transport() = default;

    // MCP tools/list. Throws TransportError when the server is unreachable.
    virtual std::vector<std::string> list_tools() = 0;

    // MCP tools/call. The transport fills latency_ms: measured wall time for
    // remote servers, the configured simulated delay for synthetic ones.
    virtual ToolResult call_tool(const std::string& tool_name, const Json& arguments,
                                 int timeout_ms) = 0;

    int list_count() const { return lists_.load(); }
    int call_count() const { return calls_.load(); }

protected:
    std::atomic<int> lists_{0};
    std::atomic<int> calls_{0};
};

// In-process simulated server. Behaviors are configured per tool through
// the descriptor's `behavior` object:
//   {"kind":"echo"}                          echo the "text" argument
//   {"kind":"lookup","seed":N}               deterministic fact table
//   {"kind":"counter"}                       stateful increment
//   {"kind":"flaky","rate":R,"seed":N}       fails with probability R
//   {"kind":"fixed","text":S}                canned ok payload
//   {"kind":"fixed_error","error_kind":K,"text":S}
// plus a common "delay_ms" param reported as the call latency.
class SyntheticTransport : public Transport {
public:
    SyntheticTransport(std::vector<ToolDescriptor> tools, bool unreachable);

    std::vector<std::string> list_tools() override;
    ToolResult call_tool(const std::string& tool_name, const Json& arguments,
                         int timeout_ms) override;

private:
    struct ToolState {
        ToolDescriptor descriptor;
        std::int64_t counter = 0;        // counter behavior
        std::uint64_t flaky_state = 0;   // per-tool deterministic failure stream
        std::mutex mutex;                // guards the mutable fields above
    };

    std::map<std::string, std::unique_ptr<ToolState>> by_name_;
    bool unreachable_;
};

// JSON-RPC 2.0 over HTTP. One client per transport; concurrent calls allowed.
class HttpTransport : public Transport {
public:
    explicit HttpTransport(std::string url);

    std::vector<std::string> list_tools() override;
    ToolResult call_tool(const std::string& tool_name, const Json& arguments,
                         int timeout_ms) override;

private:
    Json rpc(const std::string& method, const Json& params, int timeout_ms);

    std::string host_;
    std::string path_;
    int port_ = 80;
    std::atomic<std::uint64_t> next_id_{1};
};

// JSON-RPC 2.0 over a child process's stdin/stdout, newline-delimited.
// The pipe is a serial medium, so calls are serialized with a mutex.
class StdioTransport : public Transport {
public:
    explicit StdioTransport(std::string command);
    ~StdioTransport() override;

    std::vector<std::string> list_tools() override;
    ToolResult call_tool(const std::string& tool_name, const Json& arguments,
                         int timeout_ms) override;

private:
    void ensure_started();
    Json rpc(const std::string& method, const Json& params, int timeout_ms);
    void shutdown();

    std::string command_;
    std::mutex mutex_;
    int child_pid_ = -1;
    int to_child_ = -1;    // write end
    int from_child_ = -1;  // read end
    std::string read_buffer_;
    std::uint64_t next_id_ = 1;
};

// Number of sockets opened by HTTP transports and gateway HTTP backends
// since process start. Scripted/synthetic paths must leave this untouched.
std::uint64_t network_operations();
void count_network_operation();

std::shared_ptr<Transport> make_transport(const TransportSpec& spec,
                                          std::vector<ToolDescriptor> tools);

} // namespace toolrange::registry

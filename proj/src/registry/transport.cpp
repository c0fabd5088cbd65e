#include "toolrange/registry/transport.hpp"

#include <httplib.h>

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <chrono>
#include <cstring>

#include "toolrange/core/rng.hpp"

namespace toolrange::registry {

namespace {

std::atomic<std::uint64_t> g_network_ops{0};

std::int64_t behavior_delay_ms(const Json& behavior) {
    return behavior.is_object() ? behavior.value("delay_ms", std::int64_t{0}) : 0;
}

// Deterministic pseudo-fact for the lookup behavior: any key resolves.
std::string lookup_fact(std::uint64_t seed, const std::string& key) {
    static const std::vector<std::string> subjects = {
        "the shipment", "the invoice", "the meeting", "the repository",
        "the playlist", "the reservation", "the dataset", "the ticket"};
    static const std::vector<std::string> states = {
        "was confirmed yesterday", "is pending review", "closed last week",
        "has 3 open items",        "was updated at 09:14", "is active",
        "holds 42 entries",        "expires next month"};
    Rng rng = Rng::derive(seed, key);
    return key + ": " + rng.pick(subjects) + " " + rng.pick(states) + ".";
}

} // namespace

std::uint64_t network_operations() { return g_network_ops.load(); }
void count_network_operation() { g_network_ops.fetch_add(1); }

// ---------------------------------------------------------------------------
// SyntheticTransport

SyntheticTransport::SyntheticTransport(std::vector<ToolDescriptor> tools, bool unreachable)
    : unreachable_(unreachable) {
    for (auto& tool : tools) {
        auto state = std::make_unique<ToolState>();
        state->descriptor = std::move(tool);
        const Json& b = state->descriptor.behavior;
        if (b.is_object()) state->flaky_state = b.value("seed", std::uint64_t{0});
        by_name_[state->descriptor.tool_name] = std::move(state);
    }
}

std::vector<std::string> SyntheticTransport::list_tools() {
    lists_.fetch_add(1);
    if (unreachable_) throw TransportError("synthetic server refuses listing");
    std::vector<std::string> names;
    names.reserve(by_name_.size());
    for (const auto& [name, _] : by_name_) names.push_back(name);
    return names;
}

ToolResult SyntheticTransport::call_tool(const std::string& tool_name, const Json& arguments,
                                         int /*timeout_ms*/) {
    calls_.fetch_add(1);
    if (unreachable_) throw TransportError("synthetic server unreachable");

    auto it = by_name_.find(tool_name);
    if (it == by_name_.end())
        return ToolResult::make_error(ErrorKind::server_error, "no such tool: " + tool_name);

    ToolState& state = *it->second;
    const Json& behavior = state.descriptor.behavior;
    const std::string kind = behavior.is_object() ? behavior.value("kind", "echo") : "echo";
    const std::int64_t latency = behavior_delay_ms(behavior);

    if (kind == "echo") {
        std::string text;
        if (arguments.is_object() && arguments.contains("text") && arguments["text"].is_string())
            text = arguments["text"].get<std::string>();
        else
            text = canonical_dump(arguments);
        return ToolResult::make_ok(text, latency);
    }
    if (kind == "lookup") {
        std::string key = "test";
        if (arguments.is_object()) {
            for (const auto& [k, v] : arguments.items()) {
                if (v.is_string()) { key = v.get<std::string>(); break; }
            }
        }
        return ToolResult::make_ok(lookup_fact(behavior.value("seed", std::uint64_t{0}), key),
                                   latency);
    }
    if (kind == "counter") {
        std::lock_guard lock(state.mutex);
        ++state.counter;
        return ToolResult::make_ok("count=" + std::to_string(state.counter), latency);
    }
    if (kind == "flaky") {
        const double rate = behavior.value("rate", 1.0);
        bool fail;
        {
            std::lock_guard lock(state.mutex);
            Rng rng(state.flaky_state);
            fail = rng.chance(rate);
            state.flaky_state = rng.next_u64();
        }
        if (fail)
            return ToolResult::make_error(ErrorKind::server_error,
                                          "transient backend failure", latency);
        return ToolResult::make_ok("ok", latency);
    }
    if (kind == "fixed") {
        return ToolResult::make_ok(behavior.value("text", "ok"), latency);
    }
    if (kind == "fixed_error") {
        return ToolResult::make_error(
            error_kind_from_string(behavior.value("error_kind", "server_error")),
            behavior.value("text", "failure"), latency);
    }
    return ToolResult::make_error(ErrorKind::server_error, "unknown behavior kind: " + kind);
}

// ---------------------------------------------------------------------------
// HttpTransport

HttpTransport::HttpTransport(std::string url) {
    // Accept http://host:port/path; default path "/".
    std::string rest = url;
    if (rest.rfind("http://", 0) == 0) rest = rest.substr(7);
    auto slash = rest.find('/');
    std::string hostport = slash == std::string::npos ? rest : rest.substr(0, slash);
    path_ = slash == std::string::npos ? "/" : rest.substr(slash);
    auto colon = hostport.find(':');
    if (colon == std::string::npos) {
        host_ = hostport;
    } else {
        host_ = hostport.substr(0, colon);
        port_ = std::stoi(hostport.substr(colon + 1));
    }
}

Json HttpTransport::rpc(const std::string& method, const Json& params, int timeout_ms) {
    Json request{
        {"jsonrpc", "2.0"},
        {"id", next_id_.fetch_add(1)},
        {"method", method},
        {"params", params},
    };
    count_network_operation();
    httplib::Client client(host_, port_);
    client.set_connection_timeout(0, std::max(timeout_ms, 1) * 1000LL);
    client.set_read_timeout(0, std::max(timeout_ms, 1) * 1000LL);
    auto res = client.Post(path_, request.dump(), "application/json");
    if (!res) throw TransportError("http transport unreachable: " + host_);
    if (res->status != 200)
        throw TransportError("http transport status " + std::to_string(res->status));
    Json body = Json::parse(res->body, nullptr, false);
    if (body.is_discarded()) throw TransportError("http transport returned invalid JSON");
    return body;
}

std::vector<std::string> HttpTransport::list_tools() {
    lists_.fetch_add(1);
    Json body = rpc("tools/list", Json::object(), 10000);
    std::vector<std::string> names;
    if (body.contains("result") && body["result"].contains("tools")) {
        for (const auto& t : body["result"]["tools"]) names.push_back(t.value("name", ""));
    }
    return names;
}

ToolResult HttpTransport::call_tool(const std::string& tool_name, const Json& arguments,
                                    int timeout_ms) {
    calls_.fetch_add(1);
    auto start = std::chrono::steady_clock::now();
    Json body;
    try {
        body = rpc("tools/call", Json{{"name", tool_name}, {"arguments", arguments}},
                   timeout_ms);
    } catch (const TransportError&) {
        throw;
    }
    auto elapsed = std::chrono::duration_cast<std::chrono::milliseconds>(
                       std::chrono::steady_clock::now() - start)
                       .count();

    if (body.contains("error")) {
        return ToolResult::make_error(ErrorKind::server_error,
                                      body["error"].value("message", "rpc error"), elapsed);
    }
    const Json result = body.value("result", Json::object());
    ToolResult out;
    out.latency_ms = elapsed;
    if (result.value("isError", false)) {
        out.status = ToolResult::Status::error;
        out.error_kind = ErrorKind::server_error;
    }
    for (const auto& block : result.value("content", Json::array())) out.payload.push_back(block);
    if (out.payload.empty() && out.ok()) out.payload.push_back(Json{{"type", "text"}, {"text", ""}});
    return out;
}

// ---------------------------------------------------------------------------
// StdioTransport

StdioTransport::StdioTransport(std::string command) : command_(std::move(command)) {}

StdioTransport::~StdioTransport() { shutdown(); }

void StdioTransport::ensure_started() {
    if (child_pid_ > 0) return;

    int to_child[2];
    int from_child[2];
    if (pipe(to_child) != 0 || pipe(from_child) != 0)
        throw TransportError("stdio transport: pipe failed");

    pid_t pid = fork();
    if (pid < 0) throw TransportError("stdio transport: fork failed");
    if (pid == 0) {
        dup2(to_child[0], STDIN_FILENO);
        dup2(from_child[1], STDOUT_FILENO);
        close(to_child[0]);
        close(to_child[1]);
        close(from_child[0]);
        close(from_child[1]);
        execl("/bin/sh", "sh", "-c", command_.c_str(), static_cast<char*>(nullptr));
        _exit(127);
    }
    close(to_child[0]);
    close(from_child[1]);
    child_pid_ = pid;
    to_child_ = to_child[1];
    from_child_ = from_child[0];
}

void StdioTransport::shutdown() {
    if (to_child_ >= 0) close(to_child_);
    if (from_child_ >= 0) close(from_child_);
    to_child_ = from_child_ = -1;
    if (child_pid_ > 0) {
        kill(child_pid_, SIGTERM);
        int status = 0;
        waitpid(child_pid_, &status, 0);
        child_pid_ = -1;
    }
}

Json StdioTransport::rpc(const std::string& method, const Json& params, int timeout_ms) {
    ensure_started();
    Json request{
        {"jsonrpc", "2.0"},
        {"id", next_id_++},
        {"method", method},
        {"params", params},
    };
    std::string line = request.dump() + "\n";
    ssize_t written = write(to_child_, line.data(), line.size());
    if (written != static_cast<ssize_t>(line.size()))
        throw TransportError("stdio transport: write failed");

    auto deadline = std::chrono::steady_clock::now() + std::chrono::milliseconds(timeout_ms);
    for (;;) {
        auto newline = read_buffer_.find('\n');
        if (newline != std::string::npos) {
            std::string msg = read_buffer_.substr(0, newline);
            read_buffer_.erase(0, newline + 1);
            if (msg.empty()) continue;
            Json body = Json::parse(msg, nullptr, false);
            if (body.is_discarded()) throw TransportError("stdio transport: invalid JSON line");
            return body;
        }
        auto remaining = std::chrono::duration_cast<std::chrono::milliseconds>(
                             deadline - std::chrono::steady_clock::now())
                             .count();
        if (remaining <= 0) throw TransportError("stdio transport: read timeout");
        pollfd pfd{from_child_, POLLIN, 0};
        int rc = poll(&pfd, 1, static_cast<int>(remaining));
        if (rc <= 0) throw TransportError("stdio transport: read timeout");
        char buf[4096];
        ssize_t n = read(from_child_, buf, sizeof(buf));
        if (n <= 0) throw TransportError("stdio transport: child closed pipe");
        read_buffer_.append(buf, static_cast<std::size_t>(n));
    }
}

std::vector<std::string> StdioTransport::list_tools() {
    std::lock_guard lock(mutex_);
    lists_.fetch_add(1);
    Json body = rpc("tools/list", Json::object(), 10000);
    std::vector<std::string> names;
    if (body.contains("result") && body["result"].contains("tools")) {
        for (const auto& t : body["result"]["tools"]) names.push_back(t.value("name", ""));
    }
    return names;
}

ToolResult StdioTransport::call_tool(const std::string& tool_name, const Json& arguments,
                                     int timeout_ms) {
    std::lock_guard lock(mutex_);
    calls_.fetch_add(1);
    auto start = std::chrono::steady_clock::now();
    Json body;
    try {
        body = rpc("tools/call", Json{{"name", tool_name}, {"arguments", arguments}}, timeout_ms);
    } catch (const TransportError& e) {
        if (std::string(e.what()).find("timeout") != std::string::npos) {
            return ToolResult::make_error(ErrorKind::timeout, e.what(),
                                          static_cast<std::int64_t>(timeout_ms));
        }
        throw;
    }
    auto elapsed = std::chrono::duration_cast<std::chrono::milliseconds>(
                       std::chrono::steady_clock::now() - start)
                       .count();
    if (body.contains("error")) {
        return ToolResult::make_error(ErrorKind::server_error,
                                      body["error"].value("message", "rpc error"), elapsed);
    }
    const Json result = body.value("result", Json::object());
    ToolResult out;
    out.latency_ms = elapsed;
    if (result.value("isError", false)) {
        out.status = ToolResult::Status::error;
        out.error_kind = ErrorKind::server_error;
    }
    for (const auto& block : result.value("content", Json::array())) out.payload.push_back(block);
    if (out.payload.empty() && out.ok()) out.payload.push_back(Json{{"type", "text"}, {"text", ""}});
    return out;
}

// ---------------------------------------------------------------------------

std::shared_ptr<Transport> make_transport(const TransportSpec& spec,
                                          std::vector<ToolDescriptor> tools) {
    if (spec.kind == "synthetic")
        return std::make_shared<SyntheticTransport>(std::move(tools),
                                                    spec.target == "unreachable");
    if (spec.kind == "http") return std::make_shared<HttpTransport>(spec.target);
    if (spec.kind == "stdio") return std::make_shared<StdioTransport>(spec.target);
    throw std::invalid_argument("unknown transport kind: " + spec.kind);
}

} // namespace toolrange::registry

#pragma once
// Uniform access to chat and embedding backends. Three kinds:
//   http-chat  OpenAI-compatible endpoint, retries + bounded concurrency
//   scripted   matcher list -> canned responses, fully offline
//   builtin    deterministic role behaviors (planner/actor/judge/...) that
//              read the structured blocks in the conversation; offline
// Scripted and builtin profiles never perform network operations.

#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "toolrange/core/json.hpp"
#include "toolrange/retrieval/embedder.hpp"

namespace toolrange::llm {

struct Message {
    std::string role;  // "system" | "user" | "assistant" | "tool"
    std::string content;
};

struct ChatResult {
    std::string text;
    int attempts = 1;
    std::int64_t latency_ms = 0;
    Json usage;  // {prompt_chars, completion_chars} or backend-reported tokens
};

struct Limits {
    int max_in_flight = 4;
    int retries = 2;
    std::vector<int> backoff_ms = {100, 500};
    int timeout_ms = 60000;
};

struct GatewayProfile {
    std::string profile_id;
    std::string kind;  // "http-chat" | "scripted" | "builtin"

    // http-chat
    std::string endpoint;     // e.g. http://host:port/v1/chat/completions
    std::string model;
    std::string api_key_env;  // environment indirection; never an inline secret
    std::string embed_endpoint;

    // scripted
    std::string script_path;
    Json script;  // inline alternative to script_path

    // builtin
    Json params;

    Limits limits;

    static GatewayProfile from_json(const Json& j);
    Json to_json() const;
};

struct CallRecord {
    std::string profile_id;
    std::string prompt_digest;
    std::int64_t latency_ms = 0;
    int attempts = 1;
    std::size_t prompt_chars = 0;
    std::size_t completion_chars = 0;
};

class Backend {
public:
    virtual ~Backend() = default;
    virtual ChatResult chat(const std::vector<Message>& messages,
                            const std::string& schema_hint) = 0;
    virtual std::vector<retrieval::Vector> embed(const std::vector<std::string>& texts);
};

class Gateway {
public:
    Gateway() = default;

    static Gateway from_file(const std::string& path);
    static Gateway from_json(const Json& profiles);

    void add_profile(const GatewayProfile& profile);
    bool has_profile(const std::string& profile_id) const;
    std::vector<std::string> profile_ids() const;

    // Throws std::invalid_argument for unknown profiles and
    // std::runtime_error when the backend fails after retries.
    ChatResult chat(const std::string& profile_id, const std::vector<Message>& messages,
                    const std::string& schema_hint = "");
    std::vector<retrieval::Vector> embed(const std::string& profile_id,
                                         const std::vector<std::string>& texts);

    std::vector<CallRecord> call_log() const;
    std::size_t call_count(const std::string& profile_id) const;

private:
    struct Entry;
    struct State {
        std::mutex mutex;
        std::vector<std::shared_ptr<Entry>> entries;
        std::vector<CallRecord> log;
    };
    std::shared_ptr<Entry> find(const std::string& profile_id) const;

    std::shared_ptr<State> state_ = std::make_shared<State>();
};

// Extracts a JSON object from model output: a ```json fenced block if
// present, otherwise the first balanced {...} span.
std::optional<Json> extract_json(const std::string& text);

// Chat exchange that must produce JSON. On unparseable output, appends a
// repair request and retries up to `repair_retries` times, then throws.
Json chat_json(Gateway& gateway, const std::string& profile_id,
               std::vector<Message> messages, int repair_retries = 1);

} // namespace toolrange::llm

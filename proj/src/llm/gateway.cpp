#include "toolrange/llm/gateway.hpp"

#include <httplib.h>

#include <chrono>
#include <condition_variable>
#include <cstdlib>
#include <fstream>
#include <stdexcept>
#include <thread>

#include "toolrange/llm/offline.hpp"
#include "toolrange/registry/transport.hpp"

namespace toolrange::llm {

namespace {

// Limits arrive from config at runtime, so a cv-based gate instead of
// std::counting_semaphore's compile-time ceiling.
class Gate {
public:
    explicit Gate(int slots) : slots_(slots < 1 ? 1 : slots) {}

    void acquire() {
        std::unique_lock lock(mutex_);
        cv_.wait(lock, [this] { return in_flight_ < slots_; });
        ++in_flight_;
    }
    void release() {
        {
            std::lock_guard lock(mutex_);
            --in_flight_;
        }
        cv_.notify_one();
    }

private:
    std::mutex mutex_;
    std::condition_variable cv_;
    int slots_;
    int in_flight_ = 0;
};

struct GateHold {
    Gate& gate;
    explicit GateHold(Gate& g) : gate(g) { gate.acquire(); }
    ~GateHold() { gate.release(); }
};

class HttpChatBackend : public Backend {
public:
    explicit HttpChatBackend(GatewayProfile profile) : profile_(std::move(profile)) {}

    ChatResult chat(const std::vector<Message>& messages, const std::string&) override {
        Json body{{"model", profile_.model}, {"messages", Json::array()}};
        for (const auto& m : messages)
            body["messages"].push_back(Json{{"role", m.role}, {"content", m.content}});

        const int attempts_allowed = profile_.limits.retries + 1;
        std::string last_error;
        for (int attempt = 1; attempt <= attempts_allowed; ++attempt) {
            auto response = post(profile_.endpoint, body);
            if (response && response->first == 200) {
                Json parsed = Json::parse(response->second, nullptr, false);
                if (!parsed.is_discarded() && parsed.contains("choices") &&
                    !parsed["choices"].empty()) {
                    ChatResult out;
                    out.text = parsed["choices"][0]["message"].value("content", "");
                    out.attempts = attempt;
                    out.usage = parsed.value("usage", Json::object());
                    return out;
                }
                last_error = "malformed completion response";
            } else if (response) {
                last_error = "http status " + std::to_string(response->first);
                // 4xx other than 429 will not improve on retry
                if (response->first < 500 && response->first != 429) break;
            } else {
                last_error = "transport failure";
            }
            if (attempt < attempts_allowed) {
                const auto& schedule = profile_.limits.backoff_ms;
                int delay = schedule.empty()
                                ? 100
                                : schedule[std::min<std::size_t>(static_cast<std::size_t>(attempt) - 1,
                                                                 schedule.size() - 1)];
                std::this_thread::sleep_for(std::chrono::milliseconds(delay));
            }
        }
        throw std::runtime_error("chat backend '" + profile_.profile_id +
                                 "' failed: " + last_error);
    }

    std::vector<retrieval::Vector> embed(const std::vector<std::string>& texts) override {
        if (texts.empty()) return {};
        std::string endpoint = profile_.embed_endpoint.empty()
                                   ? profile_.endpoint
                                   : profile_.embed_endpoint;
        Json body{{"model", profile_.model}, {"input", texts}};
        auto response = post(endpoint, body);
        if (!response || response->first != 200)
            throw std::runtime_error("embedding backend '" + profile_.profile_id + "' failed");
        Json parsed = Json::parse(response->second);
        std::vector<retrieval::Vector> out;
        for (const auto& item : parsed.at("data"))
            out.push_back(item.at("embedding").get<retrieval::Vector>());
        return out;
    }

private:
    std::optional<std::pair<int, std::string>> post(const std::string& url, const Json& body) {
        std::string rest = url;
        if (rest.rfind("http://", 0) == 0) rest = rest.substr(7);
        auto slash = rest.find('/');
        std::string hostport = slash == std::string::npos ? rest : rest.substr(0, slash);
        std::string path = slash == std::string::npos ? "/" : rest.substr(slash);
        std::string host = hostport;
        int port = 80;
        if (auto colon = hostport.find(':'); colon != std::string::npos) {
            host = hostport.substr(0, colon);
            port = std::stoi(hostport.substr(colon + 1));
        }
        registry::count_network_operation();
        httplib::Client client(host, port);
        client.set_read_timeout(profile_.limits.timeout_ms / 1000,
                                (profile_.limits.timeout_ms % 1000) * 1000);
        httplib::Headers headers;
        if (!profile_.api_key_env.empty()) {
            if (const char* key = std::getenv(profile_.api_key_env.c_str()))
                headers.emplace("Authorization", std::string("Bearer ") + key);
        }
        auto res = client.Post(path, headers, body.dump(), "application/json");
        if (!res) return std::nullopt;
        return std::make_pair(res->status, res->body);
    }

    GatewayProfile profile_;
};

} // namespace

std::vector<retrieval::Vector> Backend::embed(const std::vector<std::string>& texts) {
    // Offline default: the hashed bag-of-tokens embedder.
    retrieval::HashEmbedder embedder;
    return embedder.embed(texts);
}

GatewayProfile GatewayProfile::from_json(const Json& j) {
    GatewayProfile p;
    p.profile_id = j.at("profile_id").get<std::string>();
    p.kind = j.value("kind", "scripted");
    p.endpoint = j.value("endpoint", "");
    p.model = j.value("model", "");
    p.api_key_env = j.value("api_key_env", "");
    p.embed_endpoint = j.value("embed_endpoint", "");
    p.script_path = j.value("script_path", "");
    p.script = j.value("script", Json());
    p.params = j.value("params", Json::object());
    if (j.contains("limits")) {
        const Json& l = j["limits"];
        p.limits.max_in_flight = l.value("max_in_flight", 4);
        p.limits.retries = l.value("retries", 2);
        if (l.contains("backoff_ms")) p.limits.backoff_ms = l["backoff_ms"].get<std::vector<int>>();
        p.limits.timeout_ms = l.value("timeout_ms", 60000);
    }
    return p;
}

Json GatewayProfile::to_json() const {
    Json j{{"profile_id", profile_id}, {"kind", kind}};
    if (!endpoint.empty()) j["endpoint"] = endpoint;
    if (!model.empty()) j["model"] = model;
    if (!api_key_env.empty()) j["api_key_env"] = api_key_env;
    if (!embed_endpoint.empty()) j["embed_endpoint"] = embed_endpoint;
    if (!script_path.empty()) j["script_path"] = script_path;
    if (!script.is_null()) j["script"] = script;
    if (!params.empty()) j["params"] = params;
    j["limits"] = Json{{"max_in_flight", limits.max_in_flight},
                       {"retries", limits.retries},
                       {"backoff_ms", limits.backoff_ms},
                       {"timeout_ms", limits.timeout_ms}};
    return j;
}

struct Gateway::Entry {
    GatewayProfile profile;
    std::unique_ptr<Backend> backend;
    std::unique_ptr<Gate> gate;
};

Gateway Gateway::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open gateway profiles: " + path);
    return from_json(Json::parse(in));
}

Gateway Gateway::from_json(const Json& profiles) {
    Gateway gw;
    if (profiles.is_array()) {
        for (const auto& p : profiles) gw.add_profile(GatewayProfile::from_json(p));
    } else if (profiles.is_object() && profiles.contains("profiles")) {
        for (const auto& p : profiles["profiles"]) gw.add_profile(GatewayProfile::from_json(p));
    } else {
        throw std::runtime_error("gateway profiles: expected array or {profiles:[...]}");
    }
    return gw;
}

void Gateway::add_profile(const GatewayProfile& profile) {
    auto entry = std::make_shared<Entry>();
    entry->profile = profile;
    if (profile.kind == "http-chat") {
        entry->backend = std::make_unique<HttpChatBackend>(profile);
    } else if (profile.kind == "scripted") {
        Json script = profile.script;
        if (script.is_null() && !profile.script_path.empty())
            script = ScriptedBackend::load_script(profile.script_path);
        entry->backend = std::make_unique<ScriptedBackend>(std::move(script));
    } else if (profile.kind == "builtin") {
        entry->backend = std::make_unique<BuiltinBackend>(profile.params);
    } else {
        throw std::invalid_argument("unknown gateway kind: " + profile.kind);
    }
    entry->gate = std::make_unique<Gate>(profile.limits.max_in_flight);
    std::lock_guard lock(state_->mutex);
    state_->entries.push_back(std::move(entry));
}

bool Gateway::has_profile(const std::string& profile_id) const {
    std::lock_guard lock(state_->mutex);
    for (const auto& e : state_->entries)
        if (e->profile.profile_id == profile_id) return true;
    return false;
}

std::vector<std::string> Gateway::profile_ids() const {
    std::lock_guard lock(state_->mutex);
    std::vector<std::string> ids;
    for (const auto& e : state_->entries) ids.push_back(e->profile.profile_id);
    return ids;
}

std::shared_ptr<Gateway::Entry> Gateway::find(const std::string& profile_id) const {
    std::lock_guard lock(state_->mutex);
    for (const auto& e : state_->entries)
        if (e->profile.profile_id == profile_id) return e;
    throw std::invalid_argument("unknown gateway profile: " + profile_id);
}

ChatResult Gateway::chat(const std::string& profile_id, const std::vector<Message>& messages,
                         const std::string& schema_hint) {
    if (messages.empty()) throw std::invalid_argument("chat: messages must be non-empty");
    auto entry = find(profile_id);
    GateHold hold(*entry->gate);

    auto start = std::chrono::steady_clock::now();
    ChatResult result = entry->backend->chat(messages, schema_hint);
    result.latency_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                            std::chrono::steady_clock::now() - start)
                            .count();

    std::string prompt;
    for (const auto& m : messages) prompt += m.role + ":" + m.content + "\n";
    CallRecord record{profile_id, digest(prompt), result.latency_ms, result.attempts,
                      prompt.size(), result.text.size()};
    {
        std::lock_guard lock(state_->mutex);
        state_->log.push_back(std::move(record));
    }
    return result;
}

std::vector<retrieval::Vector> Gateway::embed(const std::string& profile_id,
                                              const std::vector<std::string>& texts) {
    auto entry = find(profile_id);
    GateHold hold(*entry->gate);
    return entry->backend->embed(texts);
}

std::vector<CallRecord> Gateway::call_log() const {
    std::lock_guard lock(state_->mutex);
    return state_->log;
}

std::size_t Gateway::call_count(const std::string& profile_id) const {
    std::lock_guard lock(state_->mutex);
    std::size_t n = 0;
    for (const auto& r : state_->log)
        if (r.profile_id == profile_id) ++n;
    return n;
}

Json chat_json(Gateway& gateway, const std::string& profile_id, std::vector<Message> messages,
               int repair_retries) {
    for (int attempt = 0;; ++attempt) {
        ChatResult result = gateway.chat(profile_id, messages, "json");
        if (auto parsed = extract_json(result.text)) return *parsed;
        if (attempt >= repair_retries)
            throw std::runtime_error("profile '" + profile_id +
                                     "' did not produce valid JSON after repair");
        messages.push_back({"assistant", result.text});
        messages.push_back({"user",
                            "Your previous reply was not valid JSON. Respond again with only a "
                            "valid JSON object."});
    }
}

std::optional<Json> extract_json(const std::string& text) {
    auto fence = text.find("```json");
    std::size_t begin = std::string::npos;
    std::size_t end = std::string::npos;
    if (fence != std::string::npos) {
        begin = text.find('\n', fence);
        if (begin != std::string::npos) {
            ++begin;
            end = text.find("```", begin);
        }
    }
    std::string candidate;
    if (begin != std::string::npos && end != std::string::npos) {
        candidate = text.substr(begin, end - begin);
    } else {
        // first balanced object
        auto open = text.find('{');
        if (open == std::string::npos) return std::nullopt;
        int depth = 0;
        bool in_string = false;
        for (std::size_t i = open; i < text.size(); ++i) {
            char c = text[i];
            if (in_string) {
                if (c == '\\') ++i;
                else if (c == '"') in_string = false;
                continue;
            }
            if (c == '"') in_string = true;
            else if (c == '{') ++depth;
            else if (c == '}') {
                if (--depth == 0) {
                    candidate = text.substr(open, i - open + 1);
                    break;
                }
            }
        }
        if (candidate.empty()) return std::nullopt;
    }
    Json parsed = Json::parse(candidate, nullptr, false);
    if (parsed.is_discarded()) return std::nullopt;
    return parsed;
}

} // namespace toolrange::llm

#pragma once
// Core registry types: tool/server descriptors, validation reports, and
// the normalized result shape every tool invocation funnels into.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "toolrange/core/json.hpp"

namespace toolrange::registry {

struct ToolDescriptor {
    std::string tool_id;       // globally unique within a Registry
    std::string server_id;
    std::string app_name;
    std::string tool_name;
    std::string description;
    Json input_schema;         // object-typed JSON Schema
    bool auth_required = false;
    std::vector<std::string> tags;
    Json behavior;             // synthetic-universe behavior config, empty otherwise

    Json to_json() const;
    static ToolDescriptor from_json(const Json& j);
};

struct TransportSpec {
    std::string kind;    // "stdio" | "http" | "synthetic"
    std::string target;  // command line | URL | unused
};

struct ServerDescriptor {
    std::string server_id;
    TransportSpec transport;
    std::optional<std::string> credential_ref;  // opaque; never an inline secret
    std::vector<std::string> tool_ids;
};

// Three-stage tool validation outcome. Stages are ordered: a later stage
// can only pass if every earlier one did.
struct ValidationReport {
    std::string tool_id;
    bool stage1_available = false;
    bool stage2_invocable = false;
    bool stage3_usable = false;
    std::vector<std::string> evidence;  // one message per stage attempted
    std::string checked_at;

    bool working() const { return stage1_available && stage2_invocable && stage3_usable; }
    Json to_json() const;
};

enum class ErrorKind { timeout, rate_limited, unavailable, schema_violation, auth, server_error };

std::string to_string(ErrorKind k);
ErrorKind error_kind_from_string(const std::string& s);

struct ToolResult {
    enum class Status { ok, error };

    Status status = Status::ok;
    std::vector<Json> payload;              // typed content blocks, text at minimum
    std::optional<ErrorKind> error_kind;
    std::int64_t latency_ms = 0;

    static ToolResult make_ok(const std::string& text, std::int64_t latency_ms = 0);
    static ToolResult make_ok_blocks(std::vector<Json> blocks, std::int64_t latency_ms = 0);
    static ToolResult make_error(ErrorKind kind, const std::string& text,
                                 std::int64_t latency_ms = 0);

    bool ok() const { return status == Status::ok; }
    // Concatenated text of all text-typed content blocks.
    std::string text() const;

    Json to_json() const;
    static ToolResult from_json(const Json& j);
};

// Credential context a validation or invocation runs under. Credentials are
// opaque references resolved against the persona's grant set; secrets stay
// in the environment/keystore.
struct Persona {
    std::string name = "default";
    std::vector<std::string> credential_refs;

    bool has_credential(const std::string& ref) const;
};

struct CallContext {
    Persona persona;
    int turn = 0;
    int step = 0;
};

} // namespace toolrange::registry

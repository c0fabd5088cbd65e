#pragma once
// JSON Schema validation for tool call arguments, plus deterministic
// generation of a minimal valid instance (used to probe tools with
// schema-respecting arguments).
//
// Supported keywords: type, required, properties, additionalProperties
// (boolean form), enum, minimum, maximum, minLength, maxLength, minItems,
// maxItems, items (single-schema form). This covers the schemas produced
// by the synthetic universe and the common shape of MCP tool schemas.

#include <optional>
#include <string>

#include "toolrange/core/json.hpp"

namespace toolrange::registry {

struct SchemaViolation {
    std::string path;    // JSON pointer-ish location, "$" for the root
    std::string message;
};

// Returns the first violation found, or nullopt when `value` conforms.
std::optional<SchemaViolation> validate_against_schema(const Json& value, const Json& schema);

// True when `schema` is an object-typed JSON Schema whose `required` names
// all appear under `properties`.
bool is_valid_tool_schema(const Json& schema, std::string* reason = nullptr);

// Smallest instance that satisfies `schema`: required fields only,
// strings -> "test" (padded when minLength demands more), numbers -> 0
// unless a minimum forces otherwise, enums -> first member, booleans ->
// false, arrays/objects -> as small as the schema allows.
Json minimal_instance(const Json& schema);

} // namespace toolrange::registry

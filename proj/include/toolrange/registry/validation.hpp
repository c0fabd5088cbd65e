#pragma once
// Three-stage tool validation: (1) authenticated availability, (2) a probe
// invocation with schema-respecting arguments, (3) a usability check on the
// returned payload. Each stage runs only if the previous one passed.

#include <string>
#include <vector>

#include "toolrange/registry/registry.hpp"

namespace toolrange::registry {

struct ValidationConfig {
    // A payload is unusable when its text starts with one of these words
    // (case-insensitive, full-word prefix). Visible config, not a constant:
    // what counts as "non-actionable" is a policy choice.
    std::vector<std::string> error_patterns = {"error", "unauthorized", "quota", "not found"};
    int probe_timeout_ms = 30000;
};

// Stage-3 classifier, exposed for direct testing.
bool payload_usable(const ToolResult& result, const std::vector<std::string>& error_patterns);

ValidationReport validate_tool(const Registry& registry, const std::string& tool_id,
                               const Persona& persona, const ValidationConfig& config = {});

struct RegistryValidation {
    std::vector<std::string> working_set;  // tool ids passing all three stages
    std::vector<ValidationReport> reports; // one per tool, registry order

    Json to_json() const;
};

// Per-tool failures are data, not errors: the report always covers every tool.
RegistryValidation validate_registry(const Registry& registry, const Persona& persona,
                                     const ValidationConfig& config = {});

} // namespace toolrange::registry

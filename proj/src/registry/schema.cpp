#include "toolrange/registry/schema.hpp"

#include <string>

namespace toolrange::registry {

namespace {

bool type_matches(const Json& value, const std::string& type) {
    if (type == "string") return value.is_string();
    if (type == "number") return value.is_number();
    if (type == "integer") return value.is_number_integer();
    if (type == "boolean") return value.is_boolean();
    if (type == "object") return value.is_object();
    if (type == "array") return value.is_array();
    if (type == "null") return value.is_null();
    return true; // unknown type names are not enforced
}

std::optional<SchemaViolation> validate_at(const Json& value, const Json& schema,
                                           const std::string& path) {
    if (!schema.is_object()) return std::nullopt;

    if (schema.contains("type") && schema["type"].is_string()) {
        const auto type = schema["type"].get<std::string>();
        if (!type_matches(value, type)) {
            return SchemaViolation{path, "expected type " + type};
        }
    }

    if (schema.contains("enum") && schema["enum"].is_array()) {
        bool found = false;
        for (const auto& member : schema["enum"]) {
            if (member == value) { found = true; break; }
        }
        if (!found) return SchemaViolation{path, "value not in enum"};
    }

    if (value.is_string()) {
        const auto len = value.get_ref<const std::string&>().size();
        if (schema.contains("minLength") && len < schema["minLength"].get<std::size_t>())
            return SchemaViolation{path, "string shorter than minLength"};
        if (schema.contains("maxLength") && len > schema["maxLength"].get<std::size_t>())
            return SchemaViolation{path, "string longer than maxLength"};
    }

    if (value.is_number()) {
        const double v = value.get<double>();
        if (schema.contains("minimum") && v < schema["minimum"].get<double>())
            return SchemaViolation{path, "number below minimum"};
        if (schema.contains("maximum") && v > schema["maximum"].get<double>())
            return SchemaViolation{path, "number above maximum"};
    }

    if (value.is_array()) {
        if (schema.contains("minItems") && value.size() < schema["minItems"].get<std::size_t>())
            return SchemaViolation{path, "array shorter than minItems"};
        if (schema.contains("maxItems") && value.size() > schema["maxItems"].get<std::size_t>())
            return SchemaViolation{path, "array longer than maxItems"};
        if (schema.contains("items") && schema["items"].is_object()) {
            for (std::size_t i = 0; i < value.size(); ++i) {
                auto v = validate_at(value[i], schema["items"],
                                     path + "[" + std::to_string(i) + "]");
                if (v) return v;
            }
        }
    }

    if (value.is_object()) {
        const Json props = schema.value("properties", Json::object());
        for (const auto& req : schema.value("required", Json::array())) {
            if (!req.is_string()) continue;
            const auto name = req.get<std::string>();
            if (!value.contains(name))
                return SchemaViolation{path + "." + name, "missing required field"};
        }
        const bool allow_extra = !schema.contains("additionalProperties") ||
                                 !schema["additionalProperties"].is_boolean() ||
                                 schema["additionalProperties"].get<bool>();
        for (const auto& [key, field] : value.items()) {
            if (props.contains(key)) {
                auto v = validate_at(field, props[key], path + "." + key);
                if (v) return v;
            } else if (!allow_extra) {
                return SchemaViolation{path + "." + key, "unexpected field"};
            }
        }
    }

    return std::nullopt;
}

} // namespace

std::optional<SchemaViolation> validate_against_schema(const Json& value, const Json& schema) {
    return validate_at(value, schema, "$");
}

bool is_valid_tool_schema(const Json& schema, std::string* reason) {
    auto fail = [&](const std::string& why) {
        if (reason) *reason = why;
        return false;
    };
    if (!schema.is_object()) return fail("schema is not a JSON object");
    if (schema.contains("type") && schema["type"] != "object")
        return fail("schema root must be object-typed");
    const Json props = schema.value("properties", Json::object());
    if (!props.is_object()) return fail("properties must be an object");
    for (const auto& req : schema.value("required", Json::array())) {
        if (!req.is_string()) return fail("required entries must be strings");
        if (!props.contains(req.get<std::string>()))
            return fail("required field '" + req.get<std::string>() + "' not in properties");
    }
    return true;
}

Json minimal_instance(const Json& schema) {
    if (!schema.is_object()) return Json::object();

    if (schema.contains("enum") && schema["enum"].is_array() && !schema["enum"].empty())
        return schema["enum"][0];

    std::string type = schema.value("type", "");
    if (type.empty()) type = schema.contains("properties") ? "object" : "string";

    if (type == "string") {
        std::string s = "test";
        if (schema.contains("minLength")) {
            auto need = schema["minLength"].get<std::size_t>();
            while (s.size() < need) s += 'x';
        }
        return s;
    }
    if (type == "integer" || type == "number") {
        double v = 0.0;
        if (schema.contains("minimum") && schema["minimum"].get<double>() > v)
            v = schema["minimum"].get<double>();
        if (type == "integer") return static_cast<std::int64_t>(v);
        return v;
    }
    if (type == "boolean") return false;
    if (type == "null") return nullptr;
    if (type == "array") {
        Json arr = Json::array();
        std::size_t need = schema.value("minItems", std::size_t{0});
        const Json items = schema.value("items", Json{{"type", "string"}});
        for (std::size_t i = 0; i < need; ++i) arr.push_back(minimal_instance(items));
        return arr;
    }
    // object
    Json obj = Json::object();
    const Json props = schema.value("properties", Json::object());
    for (const auto& req : schema.value("required", Json::array())) {
        if (!req.is_string()) continue;
        const auto name = req.get<std::string>();
        obj[name] = props.contains(name) ? minimal_instance(props[name]) : Json("test");
    }
    return obj;
}

} // namespace toolrange::registry

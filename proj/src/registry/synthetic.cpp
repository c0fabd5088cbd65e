#include "toolrange/registry/synthetic.hpp"

#include <set>
#include <stdexcept>

#include "toolrange/core/rng.hpp"

namespace toolrange::registry {

namespace {

struct Archetype {
    const char* domain;
    std::vector<const char*> verbs;
    std::vector<const char*> nouns;
    std::vector<const char*> qualifiers;
};

const std::vector<Archetype>& archetypes() {
    static const std::vector<Archetype> kinds = {
        {"mail",
         {"send", "list", "search", "archive", "draft", "forward"},
         {"message", "inbox", "thread", "contact", "attachment"},
         {"for the signed-in mailbox", "with delivery tracking", "matching a query",
          "including attachments", "across folders"}},
        {"calendar",
         {"create", "list", "update", "cancel", "share"},
         {"event", "reminder", "slot", "invite", "agenda"},
         {"on the primary calendar", "with conflict detection", "for the next week",
          "with attendee responses", "in a chosen timezone"}},
        {"files",
         {"upload", "download", "list", "move", "share", "tag"},
         {"file", "folder", "link", "revision", "archive"},
         {"in shared drives", "with version history", "as a public link",
          "preserving permissions", "under a path prefix"}},
        {"code",
         {"open", "merge", "review", "list", "close", "label"},
         {"issue", "pull_request", "branch", "commit", "release"},
         {"in the active repository", "with CI status attached", "across forks",
          "filtered by author", "sorted by recency"}},
        {"chat",
         {"post", "list", "react", "pin", "schedule"},
         {"message", "channel", "thread", "mention", "digest"},
         {"to a workspace channel", "with emoji reactions", "for unread items",
          "as the current user", "with thread context"}},
        {"music",
         {"play", "queue", "search", "like", "shuffle"},
         {"track", "playlist", "album", "artist", "station"},
         {"from the user library", "by popularity", "with explicit filtering",
          "on the active device", "from curated charts"}},
        {"travel",
         {"book", "search", "cancel", "track", "compare"},
         {"flight", "hotel", "route", "rental", "itinerary"},
         {"with flexible dates", "under a price cap", "for two travelers",
          "including layovers", "near a destination"}},
        {"finance",
         {"pay", "list", "export", "flag", "reconcile"},
         {"invoice", "expense", "budget", "transaction", "statement"},
         {"for the current quarter", "in the default currency", "pending approval",
          "above a threshold", "grouped by category"}},
        {"docs",
         {"create", "edit", "export", "comment", "outline"},
         {"document", "sheet", "note", "template", "snapshot"},
         {"with revision history", "as PDF output", "in a shared workspace",
          "with inline suggestions", "from a template"}},
        {"search",
         {"query", "fetch", "rank", "cache", "summarize"},
         {"page", "result", "snapshot", "feed", "source"},
         {"from the public web", "with freshness scoring", "deduplicated by domain",
          "restricted to a site", "with snippet extraction"}},
    };
    return kinds;
}

const std::vector<const char*>& name_prefixes() {
    static const std::vector<const char*> v = {
        "Nova", "Polar", "Echo", "Quill", "Drift", "Lumen", "Vertex", "Harbor",
        "Cobalt", "Maple", "Onyx", "Sierra", "Fable", "Zephyr", "Cinder", "Atlas"};
    return v;
}

const std::vector<const char*>& name_suffixes() {
    static const std::vector<const char*> v = {
        "Mail", "Cal", "Drive", "Forge", "Chat", "Tunes", "Trips", "Ledger",
        "Docs", "Find", "Desk", "Hub", "Flow", "Box", "Works", "Port"};
    return v;
}

struct ParamSpec {
    const char* name;
    Json schema;
};

const std::vector<ParamSpec>& param_pool() {
    static const std::vector<ParamSpec> pool = {
        {"query", Json{{"type", "string"}, {"description", "free-text query"}}},
        {"id", Json{{"type", "string"}, {"description", "target object id"}}},
        {"name", Json{{"type", "string"}, {"description", "display name"}}},
        {"body", Json{{"type", "string"}, {"description", "content body"}}},
        {"recipient", Json{{"type", "string"}, {"description", "destination address"}}},
        {"date", Json{{"type", "string"}, {"description", "ISO-8601 date"}}},
        {"limit", Json{{"type", "integer"}, {"minimum", 1}, {"description", "max results"}}},
        {"count", Json{{"type", "integer"}, {"minimum", 0}, {"maximum", 100}}},
        {"notify", Json{{"type", "boolean"}, {"description", "send notifications"}}},
        {"tags", Json{{"type", "array"}, {"items", Json{{"type", "string"}}}}},
        {"format", Json{{"type", "string"}, {"enum", Json::array({"json", "text", "html"})}}},
    };
    return pool;
}

std::string capitalize(std::string s) {
    if (!s.empty() && s[0] >= 'a' && s[0] <= 'z') s[0] = static_cast<char>(s[0] - 32);
    return s;
}

std::string lower(std::string s) {
    for (auto& c : s)
        if (c >= 'A' && c <= 'Z') c = static_cast<char>(c + 32);
    return s;
}

} // namespace

Registry generate_synthetic_universe(std::uint64_t seed, int n_servers, int tools_per_server,
                                     const BehaviorProfile& profile) {
    if (n_servers < 1 || tools_per_server < 1)
        throw std::invalid_argument("synthetic universe needs n_servers >= 1 and tools_per_server >= 1");

    Rng rng(seed);
    Json servers = Json::array();
    std::set<std::string> used_app_names;
    std::set<std::string> used_descriptions;

    for (int si = 0; si < n_servers; ++si) {
        const Archetype& kind = archetypes()[static_cast<std::size_t>(si) % archetypes().size()];

        std::string app_name;
        for (int attempt = 0;; ++attempt) {
            app_name = std::string(rng.pick(name_prefixes())) + rng.pick(name_suffixes());
            if (attempt >= 8) app_name += std::to_string(si);
            if (used_app_names.insert(app_name).second) break;
        }
        std::string server_id = lower(app_name) + "-" + std::to_string(si);

        const bool credentialed = rng.chance(profile.credentialed_server_fraction);

        Json server{
            {"server_id", server_id},
            {"transport", Json{{"kind", "synthetic"}, {"target", ""}}},
        };
        if (credentialed) server["credential_ref"] = "cred_" + server_id;

        Json tools = Json::array();
        std::set<std::string> used_tool_names;
        for (int ti = 0; ti < tools_per_server; ++ti) {
            std::string verb, noun, tool_name;
            for (int attempt = 0;; ++attempt) {
                verb = rng.pick(kind.verbs);
                noun = rng.pick(kind.nouns);
                tool_name = verb + "_" + noun;
                if (attempt >= 16) tool_name += "_" + std::to_string(ti);
                if (used_tool_names.insert(tool_name).second) break;
            }

            std::string description;
            for (int attempt = 0;; ++attempt) {
                description = capitalize(verb) + " a " + noun + " " + rng.pick(kind.qualifiers) +
                              " in " + app_name + ".";
                if (attempt >= 8)
                    description = capitalize(verb) + " a " + noun + " (" + tool_name + ") in " +
                                  app_name + ".";
                if (used_descriptions.insert(description).second) break;
            }

            // Behavior first; it constrains which parameters must exist.
            std::string behavior_kind;
            if (rng.chance(profile.flaky_fraction)) {
                behavior_kind = "flaky";
            } else {
                static const std::vector<const char*> kinds = {"echo", "lookup", "lookup", "counter"};
                behavior_kind = rng.pick(kinds);
            }

            Json properties = Json::object();
            Json required = Json::array();
            if (behavior_kind == "echo") {
                properties["text"] = Json{{"type", "string"}, {"description", "text to echo back"}};
                required.push_back("text");
            } else if (behavior_kind == "lookup") {
                properties["query"] = Json{{"type", "string"}, {"description", "lookup key"}};
                required.push_back("query");
            }
            const int extra_params = static_cast<int>(rng.range(1, 3));
            for (int pi = 0; pi < extra_params; ++pi) {
                const ParamSpec& p = rng.pick(param_pool());
                if (properties.contains(p.name)) continue;
                properties[p.name] = p.schema;
                if (required.empty() && rng.chance(0.5)) required.push_back(p.name);
            }

            Json behavior{{"kind", behavior_kind}};
            if (behavior_kind == "flaky") {
                behavior["rate"] = profile.flaky_rate;
                behavior["seed"] = rng.next_u64();
            } else if (behavior_kind == "lookup") {
                behavior["seed"] = rng.next_u64();
            }
            const std::int64_t delay = profile.delay_choices_ms.empty()
                                           ? 0
                                           : rng.pick(profile.delay_choices_ms);
            if (delay > 0) behavior["delay_ms"] = delay;

            const bool auth_required = credentialed && rng.chance(profile.auth_tool_fraction);
            Json tags = Json::array({kind.domain});
            // First tool of a credentialed server doubles as its re-auth hook.
            if (credentialed && ti == 0) tags.push_back("auth");

            tools.push_back(Json{
                {"tool_id", server_id + "." + tool_name},
                {"server_id", server_id},
                {"app_name", app_name},
                {"tool_name", tool_name},
                {"description", description},
                {"input_schema", Json{{"type", "object"},
                                      {"properties", properties},
                                      {"required", required}}},
                {"auth_required", auth_required},
                {"tags", tags},
                {"behavior", behavior},
            });
        }
        server["tools"] = std::move(tools);
        servers.push_back(std::move(server));
    }

    return Registry::from_manifest(Json{{"servers", std::move(servers)}});
}

} // namespace toolrange::registry

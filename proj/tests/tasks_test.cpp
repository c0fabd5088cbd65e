#include <doctest.h>

#include <map>
#include <set>

#include "toolrange/llm/offline.hpp"
#include "toolrange/registry/synthetic.hpp"
#include "toolrange/retrieval/index.hpp"
#include "toolrange/tasks/engine.hpp"

using namespace toolrange;
using tasks::assemble_bundle;
using tasks::CandidateBundle;
using tasks::EngineConfig;

namespace {

struct EngineFixture {
    registry::Registry reg;
    retrieval::ToolIndex index;

    explicit EngineFixture(std::uint64_t seed = 2, int servers = 10, int tools = 6)
        : reg(registry::generate_synthetic_universe(seed, servers, tools)) {
        std::vector<retrieval::ToolDocument> documents;
        for (const auto& tool : reg.tools())
            documents.push_back(retrieval::build_document(tool));
        index = retrieval::ToolIndex::build(documents,
                                            std::make_shared<retrieval::HashEmbedder>(256));
    }
};

llm::GatewayProfile builtin_profile(const std::string& id, Json params = Json::object()) {
    llm::GatewayProfile p;
    p.profile_id = id;
    p.kind = "builtin";
    p.params = std::move(params);
    return p;
}

} // namespace

TEST_CASE("seed sampling: single-tool registry always picks that tool") {
    auto reg = registry::generate_synthetic_universe(5, 1, 1);
    Rng rng(1);
    for (int i = 0; i < 10; ++i) {
        auto seeds = tasks::sample_seed_tools(reg, rng);
        REQUIRE(seeds.size() == 1);
        CHECK(seeds[0] == reg.tools()[0].tool_id);
    }
}

TEST_CASE("seed sampling: deterministic for a fixed rng seed") {
    EngineFixture fx;
    Rng a(42), b(42);
    for (int i = 0; i < 20; ++i)
        CHECK(tasks::sample_seed_tools(fx.reg, a) == tasks::sample_seed_tools(fx.reg, b));
}

TEST_CASE("seed sampling: uniform over a 30-tool registry within 3 sigma") {
    auto reg = registry::generate_synthetic_universe(8, 5, 6);  // 30 tools
    REQUIRE(reg.tool_count() == 30);

    std::map<std::string, int> counts;
    std::map<int, int> size_counts;
    Rng rng(777);
    const int draws = 10000;
    for (int i = 0; i < draws; ++i) {
        auto seeds = tasks::sample_seed_tools(reg, rng);
        REQUIRE(seeds.size() >= 1);
        REQUIRE(seeds.size() <= 3);
        ++size_counts[static_cast<int>(seeds.size())];
        std::set<std::string> unique(seeds.begin(), seeds.end());
        CHECK(unique.size() == seeds.size());  // without replacement
        for (const auto& s : seeds) ++counts[s];
    }

    // Monte-Carlo oracle: P(tool in a draw) = E[|seeds|]/30 = 2/30
    const double p = 2.0 / 30.0;
    const double mean = draws * p;
    const double sigma = std::sqrt(draws * p * (1 - p));
    for (const auto& tool : reg.tools()) {
        const double n = counts[tool.tool_id];
        CHECK(std::abs(n - mean) <= 3.0 * sigma);
    }
    // seed count itself uniform on {1,2,3}
    for (int size = 1; size <= 3; ++size) {
        const double q = 1.0 / 3.0;
        const double s_mean = draws * q;
        const double s_sigma = std::sqrt(draws * q * (1 - q));
        CHECK(std::abs(size_counts[size] - s_mean) <= 3.0 * s_sigma);
    }
}

TEST_CASE("recall: k=0 returns exactly the seeds, deduplicated") {
    EngineFixture fx;
    std::vector<std::string> seeds = {fx.reg.tools()[0].tool_id, fx.reg.tools()[0].tool_id,
                                      fx.reg.tools()[5].tool_id};
    auto recalled = tasks::recall_candidates(seeds, fx.reg, fx.index, 0);
    REQUIRE(recalled.size() == 2);
    CHECK(recalled[0] == fx.reg.tools()[0].tool_id);
    CHECK(recalled[1] == fx.reg.tools()[5].tool_id);
}

TEST_CASE("recall matches a direct search_tools call on the same query") {
    EngineFixture fx;
    std::vector<std::string> seeds = {fx.reg.tools()[3].tool_id};
    const auto* seed_tool = fx.reg.find_tool(seeds[0]);
    std::string query = seed_tool->tool_name + " " + seed_tool->description;

    auto direct = fx.index.search(query, 12).hits;
    auto recalled = tasks::recall_candidates(seeds, fx.reg, fx.index, 12);

    // every directly retrieved tool appears, and seeds are force-included
    std::set<std::string> recalled_set(recalled.begin(), recalled.end());
    CHECK(recalled_set.count(seeds[0]) == 1);
    for (const auto& hit : direct) CHECK(recalled_set.count(hit.tool_id) == 1);
}

TEST_CASE("bundle: 3 servers at size 6 takes exactly 2 per server") {
    EngineFixture fx(3, 3, 4);
    std::vector<std::string> recalled;
    for (const auto& tool : fx.reg.tools()) recalled.push_back(tool.tool_id);
    Rng rng(9);
    auto outcome = assemble_bundle({recalled[0]}, recalled, fx.reg, {6, 6}, 3, rng);
    REQUIRE(outcome.feasible);
    CHECK(outcome.bundle.candidate_tool_ids.size() == 6);
    std::map<std::string, int> per_server;
    for (const auto& id : outcome.bundle.candidate_tool_ids)
        ++per_server[fx.reg.find_tool(id)->server_id];
    REQUIRE(per_server.size() == 3);
    for (const auto& [_, count] : per_server) CHECK(count == 2);
}

TEST_CASE("bundle: min_servers above the recalled span is infeasible") {
    EngineFixture fx(3, 2, 5);
    std::vector<std::string> recalled;
    for (const auto& tool : fx.reg.tools()) recalled.push_back(tool.tool_id);
    Rng rng(4);
    auto outcome = assemble_bundle({recalled[0]}, recalled, fx.reg, {6, 8}, 4, rng);
    CHECK_FALSE(outcome.feasible);
    CHECK(!outcome.reason.empty());
}

TEST_CASE("bundle property sweep: 1000 bundles honor all bounds") {
    EngineFixture fx(12, 12, 8);  // 96 tools over 12 servers
    Rng rng(2024);
    int produced = 0;
    for (int i = 0; i < 1000; ++i) {
        auto seeds = tasks::sample_seed_tools(fx.reg, rng);
        auto recalled = tasks::recall_candidates(seeds, fx.reg, fx.index, 40);
        auto outcome = assemble_bundle(seeds, recalled, fx.reg, {6, 10}, 3, rng);
        if (!outcome.feasible) continue;
        ++produced;
        const auto& bundle = outcome.bundle;

        const int size = static_cast<int>(bundle.candidate_tool_ids.size());
        CHECK(size >= 6);
        CHECK(size <= 10);

        std::map<std::string, int> per_server;
        for (const auto& id : bundle.candidate_tool_ids)
            ++per_server[fx.reg.find_tool(id)->server_id];
        CHECK(per_server.size() >= 3);
        CHECK(per_server.size() == bundle.servers_covered.size());

        const int cap = (size + static_cast<int>(per_server.size()) - 1) /
                        static_cast<int>(per_server.size());
        for (const auto& [_, count] : per_server) CHECK(count <= cap);

        std::set<std::string> in_bundle(bundle.candidate_tool_ids.begin(),
                                        bundle.candidate_tool_ids.end());
        for (const auto& seed : bundle.seed_tool_ids) CHECK(in_bundle.count(seed) == 1);
    }
    CHECK(produced > 900);  // rich universe: nearly everything is feasible
}

TEST_CASE("draft_task: scripted gateway fills every field") {
    EngineFixture fx(3, 3, 4);
    CandidateBundle bundle;
    bundle.candidate_tool_ids = {fx.reg.tools()[0].tool_id, fx.reg.tools()[4].tool_id};
    bundle.seed_tool_ids = {fx.reg.tools()[0].tool_id};
    for (const auto& id : bundle.candidate_tool_ids)
        bundle.servers_covered.insert(fx.reg.find_tool(id)->server_id);

    Json payload{{"user_query", "Do the thing across both apps."},
                 {"constraints", Json::array({Json{{"constraint_id", "c1"},
                                                   {"kind", "format"},
                                                   {"text", "Answer as a table."}}})},
                 {"tool_rationales", Json{{bundle.candidate_tool_ids[0], "first"},
                                          {bundle.candidate_tool_ids[1], "second"}}},
                 {"dependency_edges", Json::array({Json::array(
                                          {bundle.candidate_tool_ids[0],
                                           bundle.candidate_tool_ids[1]})})}};
    llm::GatewayProfile scripted;
    scripted.profile_id = "synth";
    scripted.kind = "scripted";
    scripted.script = Json{{"default", payload.dump()}};
    llm::Gateway gateway;
    gateway.add_profile(scripted);

    EngineConfig config;
    auto draft = tasks::draft_task(bundle, fx.reg, gateway, config, "", 1);
    CHECK(draft.user_query == "Do the thing across both apps.");
    REQUIRE(draft.constraints.size() == 1);
    CHECK(draft.constraints[0].kind == "format");
    CHECK(draft.tool_rationales.size() == 2);
    REQUIRE(draft.dependency_edges.size() == 1);
    CHECK(draft.dependency_edges[0].first == bundle.candidate_tool_ids[0]);
}

TEST_CASE("draft_task: one repair round for missing rationales, then error") {
    EngineFixture fx(3, 3, 4);
    CandidateBundle bundle;
    bundle.candidate_tool_ids = {fx.reg.tools()[0].tool_id, fx.reg.tools()[1].tool_id};
    bundle.seed_tool_ids = {fx.reg.tools()[0].tool_id};

    Json incomplete{{"user_query", "q"},
                    {"constraints", Json::array({Json{{"constraint_id", "c"},
                                                      {"kind", "other"},
                                                      {"text", "t"}}})},
                    {"tool_rationales", Json{{bundle.candidate_tool_ids[0], "only one"}}}};
    Json complete = incomplete;
    complete["tool_rationales"][bundle.candidate_tool_ids[1]] = "second";

    SUBCASE("repair completes the draft") {
        Json script{{"behaviors",
                     Json::array({Json{{"match", Json{{"contains", "incomplete"}}},
                                       {"response", complete.dump()}},
                                  Json{{"match", Json{{"contains", "[draft-request]"}}},
                                       {"response", incomplete.dump()}}})}};
        llm::GatewayProfile p;
        p.profile_id = "synth";
        p.kind = "scripted";
        p.script = script;
        llm::Gateway gateway;
        gateway.add_profile(p);
        auto draft = tasks::draft_task(bundle, fx.reg, gateway, EngineConfig{}, "", 1);
        CHECK(draft.tool_rationales.size() == 2);
        CHECK(gateway.call_count("synth") == 2);
    }
    SUBCASE("still missing after repair is an error") {
        llm::GatewayProfile p;
        p.profile_id = "synth";
        p.kind = "scripted";
        p.script = Json{{"default", incomplete.dump()}};
        llm::Gateway gateway;
        gateway.add_profile(p);
        CHECK_THROWS_WITH_AS(tasks::draft_task(bundle, fx.reg, gateway, EngineConfig{}, "", 1),
                             doctest::Contains("incomplete"), std::runtime_error);
    }
}

TEST_CASE("draft_task: empty bundle is a precondition error") {
    EngineFixture fx(3, 3, 4);
    llm::Gateway gateway;
    gateway.add_profile(builtin_profile("synth"));
    CHECK_THROWS_AS(
        tasks::draft_task(CandidateBundle{}, fx.reg, gateway, EngineConfig{}, "", 1),
        std::invalid_argument);
}

TEST_CASE("critique consistency: mostly-failing per-tool map forces coverage_ok=false") {
    EngineFixture fx(3, 3, 4);
    tasks::TaskSpec draft;
    draft.user_query = "q";
    CandidateBundle bundle;
    bundle.candidate_tool_ids = {"a", "b", "c"};

    Json crafted{{"coverage_ok", true},
                 {"constraint_ok", true},
                 {"feedback", ""},
                 {"per_tool_coverage", Json{{"a", false}, {"b", false}, {"c", true}}}};
    llm::GatewayProfile p;
    p.profile_id = "synth";
    p.kind = "scripted";
    p.script = Json{{"default", crafted.dump()}};
    llm::Gateway gateway;
    gateway.add_profile(p);

    auto critique = tasks::critique_task(draft, bundle, gateway, EngineConfig{}, 1);
    CHECK_FALSE(critique.coverage_ok);
    CHECK(critique.constraint_ok);
    CHECK_FALSE(critique.feedback.empty());  // failing critiques must explain
}

TEST_CASE("synthesize_task: builtin pass on round 1") {
    EngineFixture fx;
    llm::Gateway gateway;
    gateway.add_profile(builtin_profile("synth"));
    EngineConfig config;
    config.min_servers = 2;
    config.size_range = {4, 6};
    Rng rng(31);
    auto task = tasks::synthesize_task(fx.reg, fx.index, config, rng, gateway, "t-1");
    CHECK(task.task_id == "t-1");
    CHECK(task.provenance["rounds"] == 1);
    CHECK(task.provenance["converged"] == true);
    CHECK_FALSE(task.user_query.empty());
    // rationale totality
    std::set<std::string> keys;
    for (const auto& [k, _] : task.tool_rationales) keys.insert(k);
    std::set<std::string> bundle_set(task.bundle.candidate_tool_ids.begin(),
                                     task.bundle.candidate_tool_ids.end());
    CHECK(keys == bundle_set);
}

TEST_CASE("synthesize_task: critic failing twice means three rounds") {
    EngineFixture fx;
    llm::Gateway gateway;
    gateway.add_profile(builtin_profile("synth", Json{{"critic_fail_rounds", 2}}));
    EngineConfig config;
    config.min_servers = 2;
    config.size_range = {4, 6};
    Rng rng(32);
    auto task = tasks::synthesize_task(fx.reg, fx.index, config, rng, gateway, "t-2");
    CHECK(task.provenance["rounds"] == 3);
    CHECK(task.provenance["converged"] == true);
    CHECK(task.provenance["critiques"].size() == 3);
}

TEST_CASE("synthesize_task: max_rounds exhausted still returns the best draft") {
    EngineFixture fx;
    llm::Gateway gateway;
    gateway.add_profile(builtin_profile("synth", Json{{"critic_fail_rounds", 99}}));
    EngineConfig config;
    config.min_servers = 2;
    config.size_range = {4, 6};
    config.max_rounds = 2;
    Rng rng(33);
    auto task = tasks::synthesize_task(fx.reg, fx.index, config, rng, gateway, "t-3");
    CHECK(task.provenance["rounds"] == 2);
    CHECK(task.provenance["converged"] == false);
    CHECK_FALSE(task.user_query.empty());
}

TEST_CASE("synthesize_task: loop boundedness on gateway calls") {
    EngineFixture fx;
    llm::Gateway gateway;
    gateway.add_profile(builtin_profile("synth", Json{{"critic_fail_rounds", 99}}));
    EngineConfig config;
    config.min_servers = 2;
    config.size_range = {4, 6};
    config.max_rounds = 4;
    Rng rng(34);
    tasks::synthesize_task(fx.reg, fx.index, config, rng, gateway, "t-4");
    // per round: 1 draft + 1 critique, plus at most parse/repair retries
    CHECK(gateway.call_count("synth") <=
          static_cast<std::size_t>(2 * config.max_rounds * (1 + config.parse_retries)));
}

TEST_CASE("synthesis determinism: byte-identical task JSON") {
    EngineFixture fx;
    EngineConfig config;
    config.min_servers = 2;
    config.size_range = {4, 6};

    auto once = [&](std::uint64_t seed) {
        llm::Gateway gateway;
        gateway.add_profile(builtin_profile("synth"));
        Rng rng(seed);
        return tasks::synthesize_task(fx.reg, fx.index, config, rng, gateway, "t-d")
            .to_json()
            .dump();
    };
    CHECK(once(55) == once(55));
    CHECK(once(55) != once(56));
}

TEST_CASE("task spec JSON round-trips") {
    EngineFixture fx;
    llm::Gateway gateway;
    gateway.add_profile(builtin_profile("synth"));
    EngineConfig config;
    config.min_servers = 2;
    config.size_range = {4, 6};
    Rng rng(77);
    auto task = tasks::synthesize_task(fx.reg, fx.index, config, rng, gateway, "t-rt");
    auto reparsed = tasks::TaskSpec::from_json(task.to_json());
    CHECK(reparsed.to_json().dump() == task.to_json().dump());
}

#include <doctest.h>

#include <cmath>

#include "toolrange/core/rng.hpp"
#include "toolrange/eval/analytics.hpp"
#include "toolrange/eval/judge.hpp"
#include "toolrange/eval/metrics.hpp"
#include "toolrange/llm/offline.hpp"
#include "toolrange/registry/schema.hpp"
#include "toolrange/registry/synthetic.hpp"

using namespace toolrange;
using agent::Action;
using agent::ActorStep;
using agent::Trajectory;
using agent::Turn;
using eval::MetricVector;

namespace {

ActorStep invoke_step(const std::string& tool_id, bool success, Json args = Json::object(),
                      bool injected = false) {
    ActorStep step;
    step.action.type = Action::Type::invoke;
    step.action.tool_id = tool_id;
    step.action.arguments = std::move(args);
    step.success = success;
    step.injected = injected;
    Json result{{"status", success ? "ok" : "error"},
                {"payload", Json::array({Json{{"type", "text"}, {"text", "x"}}})}};
    if (!success) result["error_kind"] = "timeout";
    step.observation = Json{{"kind", "tool"}, {"tool_id", tool_id}, {"result", result}};
    return step;
}

ActorStep search_step(const std::string& query, int k = 5) {
    ActorStep step;
    step.action.type = Action::Type::search;
    step.action.query = query;
    step.action.k = k;
    step.observation = Json{{"kind", "search"}, {"results", Json::array()}};
    return step;
}

ActorStep respond_step(const std::string& text) {
    ActorStep step;
    step.action.type = Action::Type::respond;
    step.action.text = text;
    return step;
}

// 'S' = turn with one successful invoke, 'F' = turn with one failed invoke,
// 'N' = tool-free turn
Trajectory outcomes(const std::string& pattern) {
    Trajectory t;
    t.task_id = "t";
    int turn_index = 0;
    for (char c : pattern) {
        Turn turn;
        turn.turn_index = ++turn_index;
        if (c == 'S') turn.steps.push_back(invoke_step("tool.a", true));
        if (c == 'F') turn.steps.push_back(invoke_step("tool.a", false));
        if (c == 'N') turn.steps.push_back(respond_step("chat"));
        t.turns.push_back(std::move(turn));
    }
    t.termination = "MaxTurns";
    return t;
}

} // namespace

TEST_CASE("recovery: the [S,F,S,F,F] hand case is exactly 50 percent") {
    auto rate = eval::recovery_rate(outcomes("SFSFF"));
    REQUIRE(rate.has_value());
    CHECK(*rate == doctest::Approx(50.0).epsilon(1e-12));
}

TEST_CASE("recovery: no failures means absent, not zero") {
    CHECK_FALSE(eval::recovery_rate(outcomes("SSS")).has_value());
    CHECK_FALSE(eval::recovery_rate(outcomes("NNN")).has_value());
    // a trailing failure has no successor: conditioning set stays empty
    CHECK_FALSE(eval::recovery_rate(outcomes("SSF")).has_value());
}

TEST_CASE("recovery: [F,S] is 100 percent") {
    auto rate = eval::recovery_rate(outcomes("FS"));
    REQUIRE(rate.has_value());
    CHECK(*rate == 100.0);
}

TEST_CASE("flexibility: the three rules") {
    SUBCASE("different tool after the injected failure is flexible") {
        Trajectory t;
        Turn turn;
        turn.turn_index = 1;
        turn.steps.push_back(invoke_step("tool.a", false, Json::object(), true));
        turn.steps.push_back(invoke_step("tool.b", true));
        t.turns.push_back(turn);
        CHECK(*eval::flexibility(t) == 100.0);
    }
    SUBCASE("verbatim retry is not flexible") {
        Trajectory t;
        Turn turn;
        turn.turn_index = 1;
        turn.steps.push_back(invoke_step("tool.a", false, Json{{"x", 1}}, true));
        turn.steps.push_back(invoke_step("tool.a", true, Json{{"x", 1}}));
        t.turns.push_back(turn);
        CHECK(*eval::flexibility(t) == 0.0);
    }
    SUBCASE("same arguments in a different key order is still a verbatim retry") {
        Trajectory t;
        Turn turn;
        turn.turn_index = 1;
        Json args1 = Json::parse(R"({"a":1,"b":2})");
        Json args2 = Json::parse(R"({"b":2,"a":1})");
        turn.steps.push_back(invoke_step("tool.a", false, args1, true));
        turn.steps.push_back(invoke_step("tool.a", true, args2));
        t.turns.push_back(turn);
        CHECK(*eval::flexibility(t) == 0.0);  // canonical JSON equality
    }
    SUBCASE("a search before the retry counts as flexible") {
        Trajectory t;
        Turn turn;
        turn.turn_index = 1;
        turn.steps.push_back(invoke_step("tool.a", false, Json{{"x", 1}}, true));
        turn.steps.push_back(search_step("alternatives"));
        turn.steps.push_back(invoke_step("tool.a", true, Json{{"x", 1}}));
        t.turns.push_back(turn);
        CHECK(*eval::flexibility(t) == 100.0);
    }
    SUBCASE("window extends into the next turn only") {
        Trajectory t;
        Turn turn1;
        turn1.turn_index = 1;
        turn1.steps.push_back(invoke_step("tool.a", false, Json::object(), true));
        Turn turn2;
        turn2.turn_index = 2;
        turn2.steps.push_back(invoke_step("tool.b", true));
        t.turns.push_back(turn1);
        t.turns.push_back(turn2);
        CHECK(*eval::flexibility(t) == 100.0);
    }
    SUBCASE("no subsequent invoke means not flexible") {
        Trajectory t;
        Turn turn;
        turn.turn_index = 1;
        turn.steps.push_back(invoke_step("tool.a", false, Json::object(), true));
        t.turns.push_back(turn);
        CHECK(*eval::flexibility(t) == 0.0);
    }
    SUBCASE("absent without injections") {
        CHECK_FALSE(eval::flexibility(outcomes("SFS")).has_value());
    }
}

TEST_CASE("flexibility: 3 injections with 2 flexible is 66.7 percent") {
    Trajectory t;
    for (int i = 0; i < 3; ++i) {
        Turn turn;
        turn.turn_index = i + 1;
        turn.steps.push_back(invoke_step("tool.a", false, Json{{"n", i}}, true));
        if (i < 2)
            turn.steps.push_back(invoke_step("tool.b", true));       // flexible
        else
            turn.steps.push_back(invoke_step("tool.a", true, Json{{"n", i}}));  // retry
        t.turns.push_back(turn);
    }
    auto rate = eval::flexibility(t);
    REQUIRE(rate.has_value());
    CHECK(*rate == doctest::Approx(66.7).epsilon(0.002));
}

TEST_CASE("schema compliance over invoke and search calls") {
    auto reg = registry::generate_synthetic_universe(2, 2, 2);
    const auto& tool = reg.tools()[0];
    Json good_args = registry::minimal_instance(tool.input_schema);

    Trajectory t;
    Turn turn;
    turn.turn_index = 1;
    turn.steps.push_back(invoke_step(tool.tool_id, true, good_args));
    turn.steps.push_back(invoke_step(tool.tool_id, true, good_args));
    turn.steps.push_back(invoke_step(tool.tool_id, true, good_args));
    turn.steps.push_back(invoke_step(tool.tool_id, false, Json::object()));  // missing required
    t.turns.push_back(turn);

    auto rate = eval::schema_compliance(t, reg);
    REQUIRE(rate.has_value());
    CHECK(*rate == 75.0);

    SUBCASE("searches validate against the search_tools schema") {
        t.turns[0].steps.push_back(search_step("query", 5));   // valid
        t.turns[0].steps.push_back(search_step("query", 0));   // k below minimum
        CHECK(*eval::schema_compliance(t, reg) == doctest::Approx(100.0 * 4 / 6));
    }
    SUBCASE("no calls at all is absent") {
        Trajectory empty;
        empty.turns.push_back(Turn{1, "", {respond_step("hi")}, Json::object()});
        CHECK_FALSE(eval::schema_compliance(empty, reg).has_value());
    }
    SUBCASE("unknown tool ids count as non-compliant") {
        Trajectory ghost;
        Turn g;
        g.turn_index = 1;
        g.steps.push_back(invoke_step("no.such.tool", false));
        ghost.turns.push_back(g);
        CHECK(*eval::schema_compliance(ghost, reg) == 0.0);
    }
}

TEST_CASE("order and diversity against the dependency graph") {
    auto reg = registry::generate_synthetic_universe(3, 5, 2);
    tasks::TaskSpec task;
    const std::string a = reg.tools()[0].tool_id;
    const std::string b = reg.tools()[2].tool_id;  // different server
    const std::string c = reg.tools()[4].tool_id;
    task.dependency_edges = {{a, b}};
    tasks::Constraint diversity;
    diversity.kind = "diversity";
    diversity.machine_check = Json{{"min_servers", 5}};
    task.constraints.push_back(diversity);

    SUBCASE("satisfied edge and partial diversity") {
        Trajectory t;
        Turn turn;
        turn.turn_index = 1;
        turn.steps.push_back(invoke_step(a, true));
        turn.steps.push_back(invoke_step(b, true));
        turn.steps.push_back(invoke_step(c, true));
        turn.steps.push_back(invoke_step(reg.tools()[6].tool_id, true));
        t.turns.push_back(turn);
        auto od = eval::constraint_order_diversity(t, task, reg);
        CHECK(*od.order == 100.0);
        CHECK(*od.diversity == 80.0);  // 4 servers of the required 5
    }
    SUBCASE("edge with the successor never succeeding is 0") {
        Trajectory t;
        Turn turn;
        turn.turn_index = 1;
        turn.steps.push_back(invoke_step(a, true));
        turn.steps.push_back(invoke_step(b, false));
        t.turns.push_back(turn);
        CHECK(*eval::constraint_order_diversity(t, task, reg).order == 0.0);
    }
    SUBCASE("wrong order is 0") {
        Trajectory t;
        Turn turn;
        turn.turn_index = 1;
        turn.steps.push_back(invoke_step(b, true));
        turn.steps.push_back(invoke_step(a, true));
        t.turns.push_back(turn);
        CHECK(*eval::constraint_order_diversity(t, task, reg).order == 0.0);
    }
    SUBCASE("absent without edges or diversity constraints") {
        tasks::TaskSpec bare;
        auto od = eval::constraint_order_diversity(outcomes("S"), bare, reg);
        CHECK_FALSE(od.order.has_value());
        CHECK_FALSE(od.diversity.has_value());
    }
}

TEST_CASE("tool call and turn counting") {
    Trajectory t;
    for (int turn_index = 1; turn_index <= 4; ++turn_index) {
        Turn turn;
        turn.turn_index = turn_index;
        for (int i = 0; i < 3; ++i) turn.steps.push_back(invoke_step("tool.x", true));
        turn.steps.push_back(search_step("q"));
        t.turns.push_back(turn);
    }
    CHECK(eval::tool_call_count(t) == 12);  // searches are not tool_calls
    CHECK(t.turns.size() == 4);
}

TEST_CASE("pass@k") {
    CHECK(eval::pass_at_k({false, false, true}, 3));
    CHECK_FALSE(eval::pass_at_k({false, false, false}, 3));
    CHECK(eval::pass_at_k({true}, 1));
    CHECK_FALSE(eval::pass_at_k({false, true}, 1));  // k limits the window
    CHECK_FALSE(eval::pass_at_k({}, 3));
}

TEST_CASE("spearman fixed points") {
    std::vector<double> identity = {1, 2, 3, 4, 5};
    CHECK(eval::spearman(identity, identity) == doctest::Approx(1.0).epsilon(1e-12));

    std::vector<double> reversed = {5, 4, 3, 2, 1};
    CHECK(eval::spearman(identity, reversed) == doctest::Approx(-1.0).epsilon(1e-12));

    // closed form: 1 - 6*4 / (5*24) = 0.8
    std::vector<double> swapped = {2, 1, 4, 3, 5};
    CHECK(eval::spearman(identity, swapped) == doctest::Approx(0.8).epsilon(1e-12));
}

TEST_CASE("spearman: ties get average ranks") {
    std::vector<double> a = {1, 1, 2};
    std::vector<double> b = {1, 2, 3};
    // ranks a = (1.5, 1.5, 3); Pearson with b's ranks = 1.5/sqrt(1.5*2)
    CHECK(eval::spearman(a, b) == doctest::Approx(1.5 / std::sqrt(3.0)).epsilon(1e-12));
}

TEST_CASE("spearman: bounds hold on random inputs") {
    Rng rng(404);
    for (int trial = 0; trial < 200; ++trial) {
        std::size_t n = 2 + rng.below(20);
        std::vector<double> a, b;
        for (std::size_t i = 0; i < n; ++i) {
            a.push_back(static_cast<double>(rng.below(10)));
            b.push_back(static_cast<double>(rng.below(10)));
        }
        // constant vectors have no defined correlation
        bool const_a = std::all_of(a.begin(), a.end(), [&](double v) { return v == a[0]; });
        bool const_b = std::all_of(b.begin(), b.end(), [&](double v) { return v == b[0]; });
        if (const_a || const_b) continue;
        double rho = eval::spearman(a, b);
        CHECK(rho <= 1.0 + 1e-12);
        CHECK(rho >= -1.0 - 1e-12);
    }
}

TEST_CASE("spearman input validation") {
    CHECK_THROWS_AS(eval::spearman({1.0}, {1.0}), std::invalid_argument);
    CHECK_THROWS_AS(eval::spearman({1.0, 2.0}, {1.0, 2.0, 3.0}), std::invalid_argument);
}

TEST_CASE("strict majority over all 8 boolean triples") {
    auto vote = [](bool a, bool b, bool c) { return eval::strict_majority({a, b, c}); };
    CHECK(vote(true, true, true));
    CHECK(vote(true, true, false));
    CHECK(vote(true, false, true));
    CHECK(vote(false, true, true));
    CHECK_FALSE(vote(true, false, false));
    CHECK_FALSE(vote(false, true, false));
    CHECK_FALSE(vote(false, false, true));
    CHECK_FALSE(vote(false, false, false));
}

TEST_CASE("median is permutation-invariant (random triples)") {
    Rng rng(21);
    for (int trial = 0; trial < 300; ++trial) {
        double a = rng.real() * 10, b = rng.real() * 10, c = rng.real() * 10;
        double m = eval::median({a, b, c});
        CHECK(m == eval::median({b, c, a}));
        CHECK(m == eval::median({c, a, b}));
        CHECK(m == eval::median({c, b, a}));
        // the median of three is the middle order statistic
        CHECK(m == std::max(std::min(a, b), std::min(std::max(a, b), c)));
    }
    CHECK(eval::median({4.0, 5.0, 9.0}) == 5.0);
    CHECK(eval::median({4.0, 6.0}) == 5.0);  // degraded two-judge case
}

TEST_CASE("verdict aggregation: majority vote with medians") {
    eval::JudgeVerdict v1, v2, v3;
    v1.judge_id = "a";
    v1.task_success = true;
    v1.scores = {{"completeness", 4.0}};
    v1.constraint_satisfied = {{"c1", true}, {"c2", false}};
    v2.judge_id = "b";
    v2.task_success = true;
    v2.scores = {{"completeness", 5.0}};
    v2.constraint_satisfied = {{"c1", true}, {"c2", true}};
    v3.judge_id = "c";
    v3.task_success = false;
    v3.scores = {{"completeness", 9.0}};
    v3.constraint_satisfied = {{"c1", false}, {"c2", false}};

    auto agg = eval::aggregate_verdicts({v1, v2, v3});
    CHECK(agg.task_success);
    CHECK(agg.scores["completeness"] == 5.0);
    CHECK(agg.constraint_satisfied["c1"]);
    CHECK_FALSE(agg.constraint_satisfied["c2"]);
    CHECK_FALSE(agg.degraded);
    CHECK(agg.judges_reporting == 3);

    // permutation invariance of the whole aggregate
    auto permuted = eval::aggregate_verdicts({v3, v1, v2});
    CHECK(permuted.task_success == agg.task_success);
    CHECK(permuted.scores["completeness"] == agg.scores["completeness"]);
}

TEST_CASE("degraded two-judge mode: ties go to false") {
    eval::JudgeVerdict yes, no;
    yes.judge_id = "a";
    yes.task_success = true;
    yes.scores = {{"completeness", 8.0}};
    no.judge_id = "b";
    no.task_success = false;
    no.scores = {{"completeness", 4.0}};

    auto agg = eval::aggregate_verdicts({yes, no});
    CHECK_FALSE(agg.task_success);  // 1-1 tie is not a strict majority
    CHECK(agg.degraded);
    CHECK(agg.scores["completeness"] == 6.0);

    CHECK_THROWS_AS(eval::aggregate_verdicts({yes}), std::runtime_error);
}

TEST_CASE("judge_package degrades when one judge fails") {
    eval::EvaluationPackage package;
    package.task_id = "t";
    package.task_query = "q";
    package.final_answer = "a";
    package.trajectory = outcomes("S").to_json();

    Json verdict{{"scores", Json{{"completeness", 7.0}, {"grounding", 5.0}, {"format", 5.0},
                                 {"tradeoff", 5.0}, {"goal_decomposition", 5.0},
                                 {"progress_tracking", 5.0}}},
                 {"task_success", true},
                 {"constraints", Json::object()}};

    llm::Gateway gateway;
    auto scripted = [&](const std::string& id, Json script) {
        llm::GatewayProfile p;
        p.profile_id = id;
        p.kind = "scripted";
        p.script = std::move(script);
        gateway.add_profile(p);
    };
    scripted("j1", Json{{"default", verdict.dump()}});
    scripted("j2", Json{{"default", verdict.dump()}});
    scripted("j3", Json{{"default", "never valid json"}});  // fails after repair

    eval::JudgeConfig config;
    config.judge_profiles = {"j1", "j2", "j3"};
    auto agg = eval::judge_package(package, gateway, config);
    CHECK(agg.degraded);
    CHECK(agg.judges_reporting == 2);
    CHECK(agg.task_success);  // 2-0 is a strict majority of 2

    eval::JudgeConfig two_only;
    two_only.judge_profiles = {"j1", "j2"};
    CHECK_THROWS_AS(eval::judge_package(package, gateway, two_only), std::invalid_argument);
}

TEST_CASE("persona dimensions") {
    SUBCASE("grit from the recovery/flexibility pair") {
        MetricVector v;
        v.recovery_rate = 90.6;
        v.flexibility = 72.4;
        Trajectory t = outcomes("SFS");
        auto scores = eval::persona({t}, {v}, 20, 30);
        REQUIRE(scores.grit.has_value());
        CHECK(*scores.grit == doctest::Approx(0.815).epsilon(1e-9));
    }
    SUBCASE("prudence is 1 when laziness never fires") {
        std::vector<Trajectory> runs = {outcomes("SS"), outcomes("SF")};
        auto scores = eval::persona(runs, {}, 20, 30);
        REQUIRE(scores.prudence.has_value());
        CHECK(*scores.prudence == 1.0);

        runs[0].termination = "Laziness";
        CHECK(*eval::persona(runs, {}, 20, 30).prudence == 0.5);
    }
    SUBCASE("empty input leaves every dimension absent") {
        auto scores = eval::persona({}, {}, 20, 30);
        CHECK_FALSE(scores.diligence.has_value());
        CHECK_FALSE(scores.prudence.has_value());
        CHECK_FALSE(scores.grit.has_value());
        CHECK_FALSE(scores.introspection.has_value());
        CHECK_FALSE(scores.strategic.has_value());
    }
    SUBCASE("diligence and introspection normalize by the configured caps") {
        Trajectory t = outcomes("SSSS");  // 4 turns x 1 step
        auto scores = eval::persona({t}, {}, 20, 8);
        CHECK(*scores.diligence == doctest::Approx(1.0 / 20));
        CHECK(*scores.introspection == doctest::Approx(4.0 / 8));
    }
}

TEST_CASE("rank shift: fixed points and the leaderboard fixture") {
    SUBCASE("identical orderings give zero deltas") {
        std::map<std::string, double> scores = {{"a", 3}, {"b", 2}, {"c", 1}};
        for (const auto& [model, delta] : eval::rank_shift(scores, scores))
            CHECK(delta == 0);
    }
    SUBCASE("a full reversal of three models gives +2, 0, -2") {
        std::map<std::string, double> turn1 = {{"a", 3}, {"b", 2}, {"c", 1}};
        std::map<std::string, double> final = {{"a", 1}, {"b", 2}, {"c", 3}};
        auto deltas = eval::rank_shift(turn1, final);
        CHECK(deltas["a"] == -2);
        CHECK(deltas["b"] == 0);
        CHECK(deltas["c"] == 2);
    }
    SUBCASE("nine-model fixture reproduces the published shift pattern") {
        std::map<std::string, double> turn1 = {
            {"gpt-5.2", 5.00},       {"claude-opus-4.5", 4.96}, {"grok-4", 4.72},
            {"deepseek-v3.2", 4.67}, {"gemini-3-pro", 4.62},    {"qwen3-235b-a22b", 4.56},
            {"gpt-oss-120b", 4.03},  {"glm-4.6v", 3.55},        {"gpt-4o-mini", 3.04}};
        std::map<std::string, double> completeness = {
            {"gemini-3-pro", 4.75},  {"claude-opus-4.5", 4.70}, {"glm-4.6v", 4.01},
            {"deepseek-v3.2", 4.00}, {"grok-4", 3.80},          {"gpt-oss-120b", 3.42},
            {"gpt-5.2", 3.42},       {"qwen3-235b-a22b", 2.56}, {"gpt-4o-mini", 1.13}};
        auto deltas = eval::rank_shift(turn1, completeness);
        CHECK(deltas["gpt-5.2"] == -5);
        CHECK(deltas["gemini-3-pro"] == 4);
        CHECK(deltas["glm-4.6v"] == 5);
        CHECK(deltas["deepseek-v3.2"] == 0);
        CHECK(deltas["claude-opus-4.5"] == 0);
        CHECK(deltas["grok-4"] == -2);
        CHECK(deltas["qwen3-235b-a22b"] == -2);
        CHECK(deltas["gpt-oss-120b"] == 0);
        CHECK(deltas["gpt-4o-mini"] == 0);
    }
}

TEST_CASE("aggregate_overall") {
    MetricVector v;
    v.completeness = 7.0;
    v.recovery_rate = 80.0;  // percent -> 8.0 on the 10-point scale
    v.tool_calls = 12;

    SUBCASE("single weighted field equals that field") {
        CHECK(eval::aggregate_overall(v, Json{{"completeness", 1.0}}) == 7.0);
    }
    SUBCASE("zero weight mass is an error") {
        CHECK_THROWS_AS(eval::aggregate_overall(v, Json{{"completeness", 0.0}}),
                        std::invalid_argument);
        CHECK_THROWS_AS(eval::aggregate_overall(v, Json::object()), std::invalid_argument);
    }
    SUBCASE("weighted mean with percentage normalization") {
        // (2*7.0 + 1*8.0) / 3 computed independently
        double expected = (2.0 * 7.0 + 1.0 * 8.0) / 3.0;
        CHECK(eval::aggregate_overall(v, Json{{"completeness", 2.0}, {"recovery_rate", 1.0}}) ==
              doctest::Approx(expected).epsilon(1e-12));
    }
    SUBCASE("absent fields are skipped with their weight") {
        MetricVector sparse;
        sparse.completeness = 6.0;
        CHECK(eval::aggregate_overall(sparse, Json{{"completeness", 1.0},
                                                   {"flexibility", 5.0}}) == 6.0);
    }
}

TEST_CASE("agreement report formats mean and std like the published tables") {
    eval::AgreementReport report;
    report.left = "judge";
    report.right = "human";
    report.mean = 0.773;
    report.stddev = 0.075;
    CHECK(report.display() == "0.773 \xC2\xB1 0.075");

    // computed end to end over ranking batches
    std::vector<std::pair<std::vector<double>, std::vector<double>>> batches = {
        {{1, 2, 3, 4, 5}, {1, 2, 3, 4, 5}},
        {{1, 2, 3, 4, 5}, {2, 1, 4, 3, 5}},
    };
    auto computed = eval::agreement("judge", "human", batches);
    CHECK(computed.mean == doctest::Approx(0.9).epsilon(1e-12));
    CHECK(computed.batch_values.size() == 2);
    CHECK(computed.stddev == doctest::Approx(std::sqrt(0.02)).epsilon(1e-9));
}

TEST_CASE("evaluate_episode composes judged and deterministic metrics") {
    auto reg = registry::generate_synthetic_universe(4, 3, 3);
    tasks::TaskSpec task;
    task.task_id = "t-eval";
    task.user_query = "do things";
    for (const auto& tool : reg.tools()) task.bundle.candidate_tool_ids.push_back(tool.tool_id);

    Trajectory t = outcomes("SFS");
    t.task_id = "t-eval";
    t.termination = "Completed";
    t.final_answer = "done";
    t.constraints = Json::array();

    llm::Gateway gateway;
    for (const auto& id : {"j1", "j2", "j3"}) {
        llm::GatewayProfile p;
        p.profile_id = id;
        p.kind = "builtin";
        p.params = Json{{"judge_bias", id[1] == '1' ? 0.0 : 0.5}};
        gateway.add_profile(p);
    }
    eval::JudgeConfig judges;
    judges.judge_profiles = {"j1", "j2", "j3"};

    auto report = eval::evaluate_episode(task, t, reg, gateway, judges,
                                         eval::default_overall_weights());
    CHECK(report.metrics.overall.has_value());
    CHECK(report.metrics.completeness.has_value());
    CHECK(report.metrics.recovery_rate == 100.0);  // F followed by S
    CHECK(report.metrics.tool_calls == 3);
    CHECK(report.metrics.turns == 3);
    CHECK(report.verdict.judges_reporting == 3);
    CHECK(report.verdict.raw.size() == 3);  // raw verdicts retained
}

TEST_CASE("metric vector JSON omits absent fields and round-trips") {
    MetricVector v;
    v.completeness = 5.5;
    v.recovery_rate = 50.0;
    Json j = v.to_json();
    CHECK(j.contains("completeness"));
    CHECK_FALSE(j.contains("flexibility"));
    auto back = MetricVector::from_json(j);
    CHECK(back.completeness == 5.5);
    CHECK_FALSE(back.flexibility.has_value());
}

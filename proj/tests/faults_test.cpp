#include <doctest.h>

#include "toolrange/faults/controller.hpp"
#include "toolrange/registry/synthetic.hpp"

using namespace toolrange;
using faults::InterventionAction;
using faults::InterventionPolicy;
using faults::InterventionRule;
using faults::StateController;
using registry::ErrorKind;

namespace {

registry::Registry echo_registry() {
    Json schema{{"type", "object"},
                {"properties", Json{{"text", Json{{"type", "string"}}}}},
                {"required", Json::array({"text"})}};
    auto tool = [&](const std::string& server, const std::string& name, Json tags) {
        return Json{{"tool_id", server + "." + name}, {"server_id", server},
                    {"app_name", "App"},             {"tool_name", name},
                    {"description", "d"},            {"input_schema", schema},
                    {"auth_required", false},        {"tags", tags},
                    {"behavior", Json{{"kind", "echo"}}}};
    };
    Json manifest{
        {"servers",
         Json::array(
             {Json{{"server_id", "mail"},
                   {"transport", Json{{"kind", "synthetic"}, {"target", ""}}},
                   {"tools", Json::array({tool("mail", "send_message", Json::array()),
                                          tool("mail", "send_digest", Json::array()),
                                          tool("mail", "renew_session",
                                               Json::array({"auth"}))})}},
              Json{{"server_id", "cal"},
                   {"transport", Json{{"kind", "synthetic"}, {"target", ""}}},
                   {"tools", Json::array({tool("cal", "create_event", Json::array())})}}})}};
    return registry::Registry::from_manifest(manifest);
}

InterventionPolicy policy_of(std::vector<InterventionRule> rules, std::uint64_t seed = 1) {
    InterventionPolicy p;
    p.seed = seed;
    p.rules = std::move(rules);
    return p;
}

InterventionRule rule_json(const Json& j) { return InterventionRule::from_json(j); }

Json echo_args() { return Json{{"text", "payload"}}; }

} // namespace

TEST_CASE("glob matching") {
    CHECK(faults::glob_match("*", "anything"));
    CHECK(faults::glob_match("send_*", "send_message"));
    CHECK_FALSE(faults::glob_match("send_*", "create_event"));
    CHECK(faults::glob_match("*session*", "mail.renew_session"));
    CHECK(faults::glob_match("send_message", "send_message"));
    CHECK_FALSE(faults::glob_match("send_message", "send_messages"));
}

TEST_CASE("empty policy always passes through") {
    auto reg = echo_registry();
    StateController controller(policy_of({}), "task-a");
    auto guarded = controller.guarded_invoke(reg, "mail.send_message", echo_args(), 1, 0);
    CHECK(guarded.result.ok());
    CHECK_FALSE(guarded.injected);
    CHECK(controller.records().empty());
}

TEST_CASE("nth trigger fires exactly on the nth matching call") {
    auto reg = echo_registry();
    auto rule = rule_json(Json{{"rule_id", "r1"},
                               {"trigger", Json{{"tool_pattern", "send_*"}, {"nth", 2}}},
                               {"action", Json{{"type", "timeout"}, {"after_ms", 50}}}});
    StateController controller(policy_of({rule}), "task-b");

    auto first = controller.guarded_invoke(reg, "mail.send_message", echo_args(), 1, 0);
    CHECK(first.result.ok());
    auto second = controller.guarded_invoke(reg, "mail.send_message", echo_args(), 1, 1);
    CHECK_FALSE(second.result.ok());
    CHECK(second.result.error_kind == ErrorKind::timeout);
    CHECK(second.result.latency_ms == 50);
    auto third = controller.guarded_invoke(reg, "mail.send_message", echo_args(), 1, 2);
    CHECK(third.result.ok());  // one-shot nth
    CHECK(controller.records().size() == 1);
}

TEST_CASE("p=1.0 with max_firings=1 injects exactly once") {
    auto reg = echo_registry();
    auto rule = rule_json(Json{{"rule_id", "r1"},
                               {"trigger", Json{{"tool_pattern", "*"}}},
                               {"action", Json{{"type", "rate_limit"}, {"retry_after_s", 9}}},
                               {"max_firings", 1}});
    StateController controller(policy_of({rule}), "task-c");
    int injected = 0;
    for (int step = 0; step < 6; ++step) {
        auto guarded = controller.guarded_invoke(reg, "mail.send_message", echo_args(), 1, step);
        if (guarded.injected) {
            ++injected;
            CHECK(guarded.result.error_kind == ErrorKind::rate_limited);
            CHECK(guarded.result.text().find("retry_after_s=9") != std::string::npos);
        }
    }
    CHECK(injected == 1);
}

TEST_CASE("rate limit carries retry_after in the payload") {
    InterventionAction action;
    action.type = InterventionAction::Type::rate_limit;
    action.retry_after_s = 30;
    auto result = faults::synthesize_failure(action);
    CHECK(result.error_kind == ErrorKind::rate_limited);
    CHECK(result.text().find("30") != std::string::npos);
}

TEST_CASE("corrupt_result: truncate keeps the stated fraction") {
    std::string hundred(100, 'x');
    auto original = registry::ToolResult::make_ok(hundred);
    Rng stream(1);
    std::string pre, post;

    auto mutated = faults::corrupt_result(original, Json{{"kind", "truncate"}, {"frac", 0.5}},
                                          stream, &pre, &post);
    CHECK(mutated.text().size() == 50);
    CHECK(pre != post);

    auto untouched = faults::corrupt_result(original, Json{{"kind", "truncate"}, {"frac", 0.0}},
                                            stream, &pre, &post);
    CHECK(untouched.text() == hundred);
    CHECK(pre == post);  // identity mutator leaves the digest equal
}

TEST_CASE("corrupt_result: field_drop removes one key from JSON payloads") {
    auto original = registry::ToolResult::make_ok(
        Json{{"a", 1}, {"b", 2}, {"c", 3}}.dump());
    Rng stream(7);
    std::string pre, post;
    auto mutated = faults::corrupt_result(original, Json{{"kind", "field_drop"}}, stream,
                                          &pre, &post);
    auto parsed = Json::parse(mutated.text());
    CHECK(parsed.size() == 2);
    CHECK(pre != post);
}

TEST_CASE("corrupt_result: text_scramble is deterministic in its seed") {
    auto original = registry::ToolResult::make_ok("alpha beta gamma delta epsilon");
    Rng s1(1), s2(2);
    std::string pre, post;
    auto a = faults::corrupt_result(original, Json{{"kind", "text_scramble"}, {"seed", 5}},
                                    s1, &pre, &post);
    auto b = faults::corrupt_result(original, Json{{"kind", "text_scramble"}, {"seed", 5}},
                                    s2, &pre, &post);
    CHECK(a.text() == b.text());
    CHECK(a.text() != original.text());
}

TEST_CASE("delay_result adds to reported latency and keeps the payload") {
    auto reg = echo_registry();
    auto rule = rule_json(Json{{"rule_id", "slow"},
                               {"trigger", Json{{"tool_pattern", "*"}}},
                               {"action", Json{{"type", "delay_result"}, {"ms", 250}}},
                               {"max_firings", 1}});
    StateController controller(policy_of({rule}), "task-d");
    auto guarded = controller.guarded_invoke(reg, "mail.send_message", echo_args(), 1, 0);
    CHECK(guarded.injected);
    CHECK(guarded.result.ok());
    CHECK(guarded.result.latency_ms >= 250);
    CHECK(guarded.result.text() == "payload");
}

TEST_CASE("unavailable downs the server for the stated turns") {
    auto reg = echo_registry();
    auto rule = rule_json(Json{{"rule_id", "down"},
                               {"trigger", Json{{"tool_pattern", "send_message"}, {"nth", 1}}},
                               {"action", Json{{"type", "unavailable"}, {"for_turns", 2}}}});
    StateController controller(policy_of({rule}), "task-e");

    controller.begin_turn(1);
    auto hit = controller.guarded_invoke(reg, "mail.send_message", echo_args(), 1, 0);
    CHECK(hit.result.error_kind == ErrorKind::unavailable);

    // turns 2 and 3: the whole server is down, other tools included
    controller.begin_turn(2);
    CHECK(controller.guarded_invoke(reg, "mail.send_digest", echo_args(), 2, 0)
              .result.error_kind == ErrorKind::unavailable);
    controller.begin_turn(3);
    CHECK(controller.guarded_invoke(reg, "mail.send_digest", echo_args(), 3, 0)
              .result.error_kind == ErrorKind::unavailable);

    // turn 4: recovered; the other server was never affected
    controller.begin_turn(4);
    CHECK(controller.guarded_invoke(reg, "mail.send_digest", echo_args(), 4, 0).result.ok());

    // every downtime failure left a record
    CHECK(controller.records().size() == 3);
}

TEST_CASE("session expiry blocks the server until re-auth or timeout") {
    auto reg = echo_registry();
    auto rule = rule_json(Json{{"rule_id", "expire"},
                               {"trigger", Json{{"tool_pattern", "send_message"}, {"nth", 1}}},
                               {"action", Json{{"type", "session_expire"}}}});

    SUBCASE("re-auth through the auth-tagged tool clears it") {
        StateController controller(policy_of({rule}), "task-f");
        controller.begin_turn(1);
        auto hit = controller.guarded_invoke(reg, "mail.send_message", echo_args(), 1, 0);
        CHECK(hit.result.error_kind == ErrorKind::auth);

        auto blocked = controller.guarded_invoke(reg, "mail.send_digest", echo_args(), 1, 1);
        CHECK(blocked.result.error_kind == ErrorKind::auth);

        // auth-tagged tools pass through and clear the expiry on success
        auto renew = controller.guarded_invoke(reg, "mail.renew_session", echo_args(), 1, 2);
        CHECK(renew.result.ok());
        auto after = controller.guarded_invoke(reg, "mail.send_digest", echo_args(), 1, 3);
        CHECK(after.result.ok());
    }

    SUBCASE("automatic recovery after the configured turns") {
        StateController controller(policy_of({rule}), "task-g", 3);
        controller.begin_turn(1);
        controller.guarded_invoke(reg, "mail.send_message", echo_args(), 1, 0);
        for (int turn = 2; turn <= 4; ++turn) {
            controller.begin_turn(turn);
            CHECK(controller.guarded_invoke(reg, "mail.send_digest", echo_args(), turn, 0)
                      .result.error_kind == ErrorKind::auth);
        }
        controller.begin_turn(5);
        CHECK(controller.guarded_invoke(reg, "mail.send_digest", echo_args(), 5, 0).result.ok());
    }
}

TEST_CASE("first matching rule wins, in declaration order") {
    auto reg = echo_registry();
    auto first = rule_json(Json{{"rule_id", "first"},
                                {"trigger", Json{{"tool_pattern", "send_*"}}},
                                {"action", Json{{"type", "timeout"}, {"after_ms", 1}}},
                                {"max_firings", 1}});
    auto second = rule_json(Json{{"rule_id", "second"},
                                 {"trigger", Json{{"tool_pattern", "*"}}},
                                 {"action", Json{{"type", "rate_limit"}, {"retry_after_s", 1}}},
                                 {"max_firings", 1}});
    StateController controller(policy_of({first, second}), "task-h");
    auto one = controller.guarded_invoke(reg, "mail.send_message", echo_args(), 1, 0);
    CHECK(one.result.error_kind == ErrorKind::timeout);
    auto two = controller.guarded_invoke(reg, "mail.send_message", echo_args(), 1, 1);
    CHECK(two.result.error_kind == ErrorKind::rate_limited);
}

TEST_CASE("turn_range limits when a rule can fire") {
    auto reg = echo_registry();
    auto rule = rule_json(Json{{"rule_id", "mid"},
                               {"trigger", Json{{"tool_pattern", "*"},
                                                {"turn_range", Json::array({2, 3})}}},
                               {"action", Json{{"type", "timeout"}, {"after_ms", 5}}}});
    StateController controller(policy_of({rule}), "task-i");
    CHECK(controller.guarded_invoke(reg, "mail.send_message", echo_args(), 1, 0).result.ok());
    CHECK_FALSE(controller.guarded_invoke(reg, "mail.send_message", echo_args(), 2, 0)
                    .result.ok());
    CHECK_FALSE(controller.guarded_invoke(reg, "mail.send_message", echo_args(), 3, 0)
                    .result.ok());
    CHECK(controller.guarded_invoke(reg, "mail.send_message", echo_args(), 4, 0).result.ok());
}

TEST_CASE("constraint updates arrive at their turn, in declaration order") {
    tasks::Constraint c1;
    c1.constraint_id = "new-1";
    c1.kind = "format";
    c1.text = "Use a table.";
    tasks::Constraint c2;
    c2.constraint_id = "new-2";
    c2.kind = "other";
    c2.text = "Mention the deadline.";

    Json r1{{"rule_id", "u1"},
            {"trigger", Json::object()},
            {"action", Json{{"type", "constraint_update"},
                            {"constraint", c1.to_json()},
                            {"at_turn", 3}}}};
    Json r2{{"rule_id", "u2"},
            {"trigger", Json::object()},
            {"action", Json{{"type", "constraint_update"},
                            {"constraint", c2.to_json()},
                            {"at_turn", 3}}}};
    StateController controller(policy_of({rule_json(r1), rule_json(r2)}), "task-j");

    CHECK(controller.begin_turn(1).empty());
    CHECK(controller.begin_turn(2).empty());
    auto events = controller.begin_turn(3);
    REQUIRE(events.size() == 2);
    CHECK(events[0].constraint.constraint_id == "new-1");
    CHECK(events[1].constraint.constraint_id == "new-2");
    CHECK(controller.records().size() == 2);
}

TEST_CASE("seeded determinism: identical logs for identical runs") {
    auto reg = echo_registry();
    auto rule = rule_json(Json{{"rule_id", "p50"},
                               {"trigger", Json{{"tool_pattern", "*"}, {"probability", 0.5}}},
                               {"action", Json{{"type", "timeout"}, {"after_ms", 10}}}});
    auto run = [&](const std::string& task_id) {
        StateController controller(policy_of({rule}, 99), task_id);
        for (int turn = 1; turn <= 5; ++turn) {
            controller.begin_turn(turn);
            for (int step = 0; step < 4; ++step)
                controller.guarded_invoke(reg, "mail.send_message", echo_args(), turn, step);
        }
        return controller.records_json().dump();
    };
    CHECK(run("same-task") == run("same-task"));
    CHECK(run("same-task") != run("other-task"));  // per-task streams differ
}

TEST_CASE("logging completeness: every injected error has a failure record") {
    auto reg = echo_registry();
    auto rule = rule_json(Json{{"rule_id", "p40"},
                               {"trigger", Json{{"tool_pattern", "*"}, {"probability", 0.4}}},
                               {"action", Json{{"type", "timeout"}, {"after_ms", 10}}}});
    StateController controller(policy_of({rule}, 5), "task-k");
    int injected_errors = 0;
    for (int turn = 1; turn <= 6; ++turn) {
        controller.begin_turn(turn);
        for (int step = 0; step < 5; ++step) {
            auto guarded = controller.guarded_invoke(reg, "mail.send_message", echo_args(),
                                                     turn, step);
            if (guarded.injected && !guarded.result.ok()) ++injected_errors;
        }
    }
    int failure_records = 0;
    for (const auto& record : controller.records()) {
        auto action = faults::InterventionAction::from_json(record.action);
        if (action.is_failure()) ++failure_records;
    }
    CHECK(injected_errors > 0);
    CHECK(injected_errors == failure_records);
}

TEST_CASE("policy validation rejects malformed rules") {
    CHECK_THROWS_AS(InterventionPolicy::from_json(Json{
                        {"seed", 1},
                        {"rules", Json::array({Json{
                                      {"rule_id", "bad"},
                                      {"trigger", Json{{"probability", 1.5}}},
                                      {"action", Json{{"type", "timeout"}}}}})}}),
                    std::runtime_error);
    CHECK_THROWS_AS(
        InterventionPolicy::from_json(Json{
            {"seed", 1},
            {"rules",
             Json::array({Json{{"rule_id", "bad"},
                               {"trigger", Json::object()},
                               {"action", Json{{"type", "corrupt_result"},
                                               {"mutator", Json{{"kind", "truncate"},
                                                                {"frac", 1.5}}}}}}})}}),
        std::runtime_error);
}

TEST_CASE("viability: permanent full-server blocks are flagged") {
    auto reg = echo_registry();
    std::vector<std::string> bundle = {"mail.send_message", "mail.send_digest",
                                       "mail.renew_session", "cal.create_event"};

    auto blocking = rule_json(Json{{"rule_id", "block-mail"},
                                   {"trigger", Json{{"tool_pattern", "mail.*"}}},
                                   {"action", Json{{"type", "timeout"}, {"after_ms", 1}}}});
    auto report = faults::check_viability(policy_of({blocking}), reg, bundle);
    CHECK(report.hard_fail);
    REQUIRE(report.issues.size() == 1);
    CHECK(report.issues[0].server_id == "mail");

    auto capped = blocking;
    capped.max_firings = 2;
    CHECK_FALSE(faults::check_viability(policy_of({capped}), reg, bundle).hard_fail);

    CHECK_FALSE(faults::check_viability(policy_of({}), reg, bundle).hard_fail);

    // partial coverage of a server is not a hard failure
    auto partial = rule_json(Json{{"rule_id", "one-tool"},
                                  {"trigger", Json{{"tool_pattern", "send_message"}}},
                                  {"action", Json{{"type", "timeout"}, {"after_ms", 1}}}});
    CHECK_FALSE(faults::check_viability(policy_of({partial}), reg, bundle).hard_fail);
}

TEST_CASE("policy files round-trip") {
    Json doc{{"seed", 42},
             {"rules", Json::array({Json{{"rule_id", "r"},
                                         {"trigger", Json{{"tool_pattern", "send_*"},
                                                          {"probability", 0.25},
                                                          {"nth", 3}}},
                                         {"action", Json{{"type", "unavailable"},
                                                         {"for_turns", 2}}},
                                         {"max_firings", 5}}})}};
    auto policy = InterventionPolicy::from_json(doc);
    CHECK(policy.to_json() == doc);
}

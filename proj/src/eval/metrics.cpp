#include "toolrange/eval/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "toolrange/registry/schema.hpp"
#include "toolrange/retrieval/service.hpp"

namespace toolrange::eval {

TurnOutcome classify_turn(const agent::Turn& turn) {
    bool any_invoke = false;
    bool any_success = false;
    for (const auto& step : turn.steps) {
        if (step.action.type != agent::Action::Type::invoke) continue;
        any_invoke = true;
        if (step.success) any_success = true;
    }
    if (!any_invoke) return TurnOutcome::no_tool;
    return any_success ? TurnOutcome::success : TurnOutcome::failure;
}

std::optional<double> recovery_rate(const agent::Trajectory& trajectory) {
    const auto& turns = trajectory.turns;
    int conditioning = 0;
    int recovered = 0;
    for (std::size_t t = 0; t + 1 < turns.size(); ++t) {
        if (classify_turn(turns[t]) != TurnOutcome::failure) continue;
        ++conditioning;
        if (classify_turn(turns[t + 1]) == TurnOutcome::success) ++recovered;
    }
    if (conditioning == 0) return std::nullopt;
    return 100.0 * recovered / conditioning;
}

namespace {

struct StepRef {
    std::size_t turn;
    std::size_t step;
};

bool is_injected_failure(const agent::ActorStep& step) {
    if (!step.injected) return false;
    if (step.action.type != agent::Action::Type::invoke) return false;
    return !step.success;
}

} // namespace

std::optional<double> flexibility(const agent::Trajectory& trajectory) {
    const auto& turns = trajectory.turns;
    int events = 0;
    int flexible = 0;

    for (std::size_t t = 0; t < turns.size(); ++t) {
        for (std::size_t s = 0; s < turns[t].steps.size(); ++s) {
            const agent::ActorStep& failed = turns[t].steps[s];
            if (!is_injected_failure(failed)) continue;
            ++events;

            // window: the rest of this turn plus the whole next turn
            std::vector<const agent::ActorStep*> window;
            for (std::size_t s2 = s + 1; s2 < turns[t].steps.size(); ++s2)
                window.push_back(&turns[t].steps[s2]);
            if (t + 1 < turns.size())
                for (const auto& step : turns[t + 1].steps) window.push_back(&step);

            bool searched = false;
            const agent::ActorStep* next_invoke = nullptr;
            for (const auto* step : window) {
                if (step->action.type == agent::Action::Type::search && !next_invoke)
                    searched = true;
                if (step->action.type == agent::Action::Type::invoke) {
                    next_invoke = step;
                    break;
                }
            }
            if (!next_invoke) continue;
            if (searched || next_invoke->action.tool_id != failed.action.tool_id ||
                canonical_dump(next_invoke->action.arguments) !=
                    canonical_dump(failed.action.arguments)) {
                ++flexible;
            }
        }
    }
    if (events == 0) return std::nullopt;
    return 100.0 * flexible / events;
}

std::optional<double> schema_compliance(const agent::Trajectory& trajectory,
                                        const registry::Registry& registry) {
    const Json search_schema = retrieval::search_tools_schema();
    int calls = 0;
    int valid = 0;
    for (const auto& turn : trajectory.turns) {
        for (const auto& step : turn.steps) {
            if (step.action.type == agent::Action::Type::invoke) {
                ++calls;
                const auto* tool = registry.find_tool(step.action.tool_id);
                if (tool && !registry::validate_against_schema(step.action.arguments,
                                                               tool->input_schema))
                    ++valid;
            } else if (step.action.type == agent::Action::Type::search) {
                ++calls;
                Json args{{"query", step.action.query}, {"k", step.action.k}};
                if (!registry::validate_against_schema(args, search_schema)) ++valid;
            }
        }
    }
    if (calls == 0) return std::nullopt;
    return 100.0 * valid / calls;
}

OrderDiversity constraint_order_diversity(const agent::Trajectory& trajectory,
                                          const tasks::TaskSpec& task,
                                          const registry::Registry& registry) {
    OrderDiversity out;

    // global ordinal of the first successful invocation per tool
    std::map<std::string, int> first_success;
    int ordinal = 0;
    for (const auto& turn : trajectory.turns) {
        for (const auto& step : turn.steps) {
            if (step.action.type != agent::Action::Type::invoke) continue;
            ++ordinal;
            if (step.success && !first_success.count(step.action.tool_id))
                first_success[step.action.tool_id] = ordinal;
        }
    }

    if (!task.dependency_edges.empty()) {
        int satisfied = 0;
        for (const auto& [before, after] : task.dependency_edges) {
            auto a = first_success.find(before);
            auto b = first_success.find(after);
            if (a != first_success.end() && b != first_success.end() && a->second < b->second)
                ++satisfied;
        }
        out.order = 100.0 * satisfied / static_cast<double>(task.dependency_edges.size());
    }

    std::optional<int> min_servers;
    for (const auto& c : task.constraints) {
        if (c.kind == "diversity" && c.machine_check.is_object() &&
            c.machine_check.contains("min_servers")) {
            min_servers = c.machine_check["min_servers"].get<int>();
            break;
        }
    }
    if (min_servers && *min_servers > 0) {
        std::set<std::string> servers_used;
        for (const auto& [tool_id, _] : first_success) {
            if (const auto* tool = registry.find_tool(tool_id))
                servers_used.insert(tool->server_id);
        }
        const auto used = static_cast<double>(servers_used.size());
        out.diversity = used >= *min_servers ? 100.0 : 100.0 * used / *min_servers;
    }
    return out;
}

int tool_call_count(const agent::Trajectory& trajectory) {
    int n = 0;
    for (const auto& turn : trajectory.turns)
        for (const auto& step : turn.steps)
            if (step.action.type == agent::Action::Type::invoke) ++n;
    return n;
}

bool pass_at_k(const std::vector<bool>& run_verdicts, int k) {
    const auto limit = std::min<std::size_t>(run_verdicts.size(), static_cast<std::size_t>(k));
    for (std::size_t i = 0; i < limit; ++i)
        if (run_verdicts[i]) return true;
    return false;
}

namespace {

// average ranks, 1-based, ties share the mean of their positions
std::vector<double> average_ranks(const std::vector<double>& values) {
    const std::size_t n = values.size();
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
    std::vector<double> ranks(n, 0.0);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
        const double shared = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
        for (std::size_t k2 = i; k2 <= j; ++k2) ranks[order[k2]] = shared;
        i = j + 1;
    }
    return ranks;
}

} // namespace

double spearman(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size()) throw std::invalid_argument("spearman: length mismatch");
    if (a.size() < 2) throw std::invalid_argument("spearman: need at least 2 items");

    auto ra = average_ranks(a);
    auto rb = average_ranks(b);
    const double n = static_cast<double>(a.size());
    double mean = (n + 1.0) / 2.0;

    double cov = 0.0, var_a = 0.0, var_b = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double da = ra[i] - mean;
        const double db = rb[i] - mean;
        cov += da * db;
        var_a += da * da;
        var_b += db * db;
    }
    if (var_a == 0.0 || var_b == 0.0)
        throw std::invalid_argument("spearman: constant ranking has no correlation");
    return cov / std::sqrt(var_a * var_b);
}

bool strict_majority(const std::vector<bool>& votes) {
    std::size_t yes = 0;
    for (bool v : votes)
        if (v) ++yes;
    return yes * 2 > votes.size();
}

double median(std::vector<double> values) {
    if (values.empty()) throw std::invalid_argument("median of empty set");
    std::sort(values.begin(), values.end());
    const std::size_t n = values.size();
    if (n % 2 == 1) return values[n / 2];
    return (values[n / 2 - 1] + values[n / 2]) / 2.0;
}

} // namespace toolrange::eval

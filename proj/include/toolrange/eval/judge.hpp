#pragma once
// LLM-as-judge protocol: three judges score each evaluation package;
// booleans aggregate by strict majority, scalars by median. A judge that
// fails after retries degrades the vote to two (ties go to false); fewer
// than two verdicts is an evaluation error.

#include "toolrange/eval/types.hpp"
#include "toolrange/llm/gateway.hpp"

namespace toolrange::eval {

struct JudgeConfig {
    std::vector<std::string> judge_profiles;  // exactly 3
    int parse_retries = 1;

    static JudgeConfig from_json(const Json& j);
};

// Aggregation over however many verdicts arrived (2 or 3); exposed
// separately so the combination logic is testable without a gateway.
AggregatedVerdict aggregate_verdicts(std::vector<JudgeVerdict> verdicts);

AggregatedVerdict judge_package(const EvaluationPackage& package, llm::Gateway& gateway,
                                const JudgeConfig& config);

} // namespace toolrange::eval

#pragma once
// Deterministic synthetic tool universe. Stands in for a fleet of live
// servers at desk scale: same seed, same manifest, byte for byte.

#include <cstdint>
#include <vector>

#include "toolrange/registry/registry.hpp"

namespace toolrange::registry {

struct BehaviorProfile {
    double flaky_fraction = 0.0;   // share of tools given the flaky behavior
    double flaky_rate = 0.3;       // failure probability of those tools
    std::vector<std::int64_t> delay_choices_ms = {0};
    double credentialed_server_fraction = 0.5;
    double auth_tool_fraction = 0.25;  // of tools on credentialed servers

    static BehaviorProfile reliable() { return {}; }
    static BehaviorProfile flaky(double fraction, double rate) {
        BehaviorProfile p;
        p.flaky_fraction = fraction;
        p.flaky_rate = rate;
        return p;
    }
};

// Throws std::invalid_argument unless n_servers >= 1 and tools_per_server >= 1.
Registry generate_synthetic_universe(std::uint64_t seed, int n_servers, int tools_per_server,
                                     const BehaviorProfile& profile = {});

} // namespace toolrange::registry

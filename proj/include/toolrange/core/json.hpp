#pragma once
// Shared JSON alias and small helpers used across the project.
//
// Json preserves object key insertion order, which matters in two places:
// tool schema signatures follow the property order of the source document,
// and serialized manifests/trajectories round-trip byte-identically.

#include <json.hpp>

#include <cstdint>
#include <string>
#include <string_view>

namespace toolrange {

using Json = nlohmann::ordered_json;

// Key-sorted dump, independent of insertion order. Used wherever two
// argument sets must be compared for semantic equality.
inline std::string canonical_dump(const Json& j) {
    return nlohmann::json(j).dump();
}

// FNV-1a 64-bit. Digests here identify content (pre/post-image hashes,
// prompt digests); they are not security primitives.
inline std::uint64_t fnv1a(std::string_view data, std::uint64_t seed = 14695981039346656037ull) {
    std::uint64_t h = seed;
    for (unsigned char c : data) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

inline std::string hex64(std::uint64_t v) {
    static const char* digits = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[static_cast<std::size_t>(i)] = digits[v & 0xf];
        v >>= 4;
    }
    return out;
}

inline std::string digest(std::string_view data) {
    return hex64(fnv1a(data));
}

inline std::string digest_json(const Json& j) {
    return digest(canonical_dump(j));
}

} // namespace toolrange

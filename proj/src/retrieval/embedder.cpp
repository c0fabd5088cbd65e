#include "toolrange/retrieval/embedder.hpp"

#include <cctype>
#include <cmath>
#include <stdexcept>

#include "toolrange/core/json.hpp"

namespace toolrange::retrieval {

Vector HashEmbedder::embed_one(const std::string& text, int dim) {
    Vector v(static_cast<std::size_t>(dim), 0.0f);
    std::size_t i = 0;
    const std::size_t n = text.size();
    while (i < n) {
        while (i < n && !std::isalnum(static_cast<unsigned char>(text[i]))) ++i;
        std::size_t start = i;
        while (i < n && std::isalnum(static_cast<unsigned char>(text[i]))) ++i;
        if (i > start) {
            std::string token = text.substr(start, i - start);
            for (auto& c : token)
                if (c >= 'A' && c <= 'Z') c = static_cast<char>(c + 32);
            v[fnv1a(token) % static_cast<std::uint64_t>(dim)] += 1.0f;
        }
    }
    float norm_sq = 0.0f;
    for (float x : v) norm_sq += x * x;
    if (norm_sq > 0.0f) {
        float inv = 1.0f / std::sqrt(norm_sq);
        for (float& x : v) x *= inv;
    }
    return v;
}

std::vector<Vector> HashEmbedder::embed(const std::vector<std::string>& texts) {
    std::vector<Vector> out;
    out.reserve(texts.size());
    for (const auto& t : texts) out.push_back(embed_one(t, dim_));
    return out;
}

std::shared_ptr<Embedder> make_embedder(const std::string& identity) {
    if (identity.rfind("hash-bow-", 0) == 0) {
        int dim = std::stoi(identity.substr(9));
        return std::make_shared<HashEmbedder>(dim);
    }
    throw std::invalid_argument("no local embedder for identity: " + identity);
}

} // namespace toolrange::retrieval

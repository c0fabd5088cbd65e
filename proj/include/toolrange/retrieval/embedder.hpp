#pragma once
// Embedding backends for the tool index. The model used by a deployment is
// pluggable; the hashed bag-of-tokens embedder below is the deterministic
// default that makes retrieval testable offline.

#include <memory>
#include <string>
#include <vector>

namespace toolrange::retrieval {

using Vector = std::vector<float>;

class Embedder {
public:
    virtual ~Embedder() = default;
    virtual std::vector<Vector> embed(const std::vector<std::string>& texts) = 0;
    virtual int dim() const = 0;
    // Recorded into every index so vectors from different embedders
    // cannot be mixed.
    virtual std::string identity() const = 0;
};

// Bag of tokens hashed into a fixed-width vector, L2-normalized. Token
// overlap drives similarity, which is exactly what the tests need from a
// "semantically related" signal without any model.
class HashEmbedder : public Embedder {
public:
    explicit HashEmbedder(int dim = 256) : dim_(dim) {}

    std::vector<Vector> embed(const std::vector<std::string>& texts) override;
    int dim() const override { return dim_; }
    std::string identity() const override { return "hash-bow-" + std::to_string(dim_); }

    static Vector embed_one(const std::string& text, int dim);

private:
    int dim_;
};

std::shared_ptr<Embedder> make_embedder(const std::string& identity);

} // namespace toolrange::retrieval

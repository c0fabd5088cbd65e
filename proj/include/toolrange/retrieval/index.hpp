#pragma once
// Vector index over tool documents. Exact search: score every document,
// rank by cosine similarity with ties broken by ascending tool_id.
//
// Two scoring kernels are kept side by side: a plain serial scan (the
// reference, also used by tests as the oracle) and an OpenMP scan across
// documents. Per-document arithmetic is identical in both, so their
// outputs match bitwise; bench/search_bench compares their throughput.

#include <cstddef>
#include <string>
#include <vector>

#include "toolrange/registry/types.hpp"
#include "toolrange/retrieval/embedder.hpp"

namespace toolrange::retrieval {

struct ToolDocument {
    std::string tool_id;
    std::string text;
};

// "{app_name}/{server_id} :: {tool_name} :: {description} :: {signature}"
// where the signature lists "name:type" pairs in schema property order.
ToolDocument build_document(const registry::ToolDescriptor& descriptor);
std::string schema_signature(const Json& input_schema);

struct SearchHit {
    std::string tool_id;
    float score;
};

struct SearchResult {
    std::vector<SearchHit> hits;
    bool empty_query = false;  // warning flag; an empty query is not an error
};

class ToolIndex {
public:
    ToolIndex() = default;

    static ToolIndex build(const std::vector<ToolDocument>& documents,
                           std::shared_ptr<Embedder> embedder);

    SearchResult search(const std::string& query, std::size_t k) const;

    // Scoring kernels over the whole corpus; exposed for tests and the
    // benchmark. `query` must already be embedded and normalized.
    void score_serial(const Vector& query, std::vector<float>& out) const;
    void score_parallel(const Vector& query, std::vector<float>& out) const;

    // Ranks precomputed scores with the (score desc, tool_id asc) order.
    std::vector<SearchHit> rank(const std::vector<float>& scores, std::size_t k) const;

    void save(const std::string& dir) const;
    static ToolIndex load(const std::string& dir);
    static ToolIndex load(const std::string& dir, std::shared_ptr<Embedder> embedder);

    std::size_t size() const { return documents_.size(); }
    int dim() const { return dim_; }
    const std::string& embedder_tag() const { return embedder_tag_; }
    const std::vector<ToolDocument>& documents() const { return documents_; }
    const float* vector_data() const { return vectors_.data(); }

private:
    std::vector<ToolDocument> documents_;
    std::vector<float> vectors_;  // row-major, documents_.size() x dim_
    int dim_ = 0;
    std::string embedder_tag_;
    std::shared_ptr<Embedder> embedder_;
};

} // namespace toolrange::retrieval

#include "toolrange/retrieval/index.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <stdexcept>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace toolrange::retrieval {

namespace fs = std::filesystem;

std::string schema_signature(const Json& input_schema) {
    std::string sig;
    const Json props = input_schema.is_object() ? input_schema.value("properties", Json::object())
                                                : Json::object();
    for (const auto& [name, prop] : props.items()) {
        if (!sig.empty()) sig += ", ";
        sig += name + ":" + (prop.is_object() ? prop.value("type", "any") : "any");
    }
    return sig;
}

ToolDocument build_document(const registry::ToolDescriptor& d) {
    return ToolDocument{
        d.tool_id,
        d.app_name + "/" + d.server_id + " :: " + d.tool_name + " :: " + d.description +
            " :: " + schema_signature(d.input_schema),
    };
}

namespace {

void normalize(float* v, int dim) {
    float norm_sq = 0.0f;
    for (int i = 0; i < dim; ++i) norm_sq += v[i] * v[i];
    if (norm_sq > 0.0f) {
        float inv = 1.0f / std::sqrt(norm_sq);
        for (int i = 0; i < dim; ++i) v[i] *= inv;
    }
}

float dot(const float* a, const float* b, int dim) {
    float acc = 0.0f;
    for (int i = 0; i < dim; ++i) acc += a[i] * b[i];
    return acc;
}

bool blank(const std::string& s) {
    return s.find_first_not_of(" \t\r\n") == std::string::npos;
}

} // namespace

ToolIndex ToolIndex::build(const std::vector<ToolDocument>& documents,
                           std::shared_ptr<Embedder> embedder) {
    ToolIndex index;
    index.embedder_ = std::move(embedder);
    index.embedder_tag_ = index.embedder_->identity();
    index.dim_ = index.embedder_->dim();
    index.documents_ = documents;

    std::vector<std::string> texts;
    texts.reserve(documents.size());
    for (const auto& doc : documents) {
        if (doc.text.empty())
            throw std::runtime_error("tool document has empty text: " + doc.tool_id);
        texts.push_back(doc.text);
    }

    auto vectors = index.embedder_->embed(texts);
    index.vectors_.resize(documents.size() * static_cast<std::size_t>(index.dim_));
    for (std::size_t i = 0; i < vectors.size(); ++i) {
        if (static_cast<int>(vectors[i].size()) != index.dim_)
            throw std::runtime_error("embedder returned wrong dimension for " +
                                     documents[i].tool_id);
        for (float x : vectors[i]) {
            if (!std::isfinite(x))
                throw std::runtime_error("embedder returned non-finite value for " +
                                         documents[i].tool_id);
        }
        float* row = index.vectors_.data() + i * static_cast<std::size_t>(index.dim_);
        std::copy(vectors[i].begin(), vectors[i].end(), row);
        normalize(row, index.dim_);
    }
    return index;
}

void ToolIndex::score_serial(const Vector& query, std::vector<float>& out) const {
    const std::size_t n = documents_.size();
    out.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        out[i] = dot(vectors_.data() + i * static_cast<std::size_t>(dim_), query.data(), dim_);
    }
}

void ToolIndex::score_parallel(const Vector& query, std::vector<float>& out) const {
    const std::size_t n = documents_.size();
    out.resize(n);
#ifdef _OPENMP
    const auto count = static_cast<std::int64_t>(n);
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < count; ++i) {
        out[static_cast<std::size_t>(i)] =
            dot(vectors_.data() + static_cast<std::size_t>(i) * static_cast<std::size_t>(dim_),
                query.data(), dim_);
    }
#else
    score_serial(query, out);
#endif
}

std::vector<SearchHit> ToolIndex::rank(const std::vector<float>& scores, std::size_t k) const {
    const std::size_t n = documents_.size();
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;

    auto better = [&](std::size_t a, std::size_t b) {
        if (scores[a] != scores[b]) return scores[a] > scores[b];
        return documents_[a].tool_id < documents_[b].tool_id;
    };

    const std::size_t take = std::min(k, n);
    if (take < n) {
        std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(take),
                          order.end(), better);
        order.resize(take);
    } else {
        std::sort(order.begin(), order.end(), better);
    }

    std::vector<SearchHit> hits;
    hits.reserve(order.size());
    for (std::size_t i : order) hits.push_back(SearchHit{documents_[i].tool_id, scores[i]});
    return hits;
}

SearchResult ToolIndex::search(const std::string& query, std::size_t k) const {
    SearchResult result;
    if (blank(query)) {
        result.empty_query = true;
        return result;
    }
    if (k == 0 || documents_.empty()) return result;
    if (!embedder_) throw std::runtime_error("index has no embedder attached");

    Vector qv = embedder_->embed({query})[0];
    if (static_cast<int>(qv.size()) != dim_)
        throw std::runtime_error("query embedding dimension mismatch");
    normalize(qv.data(), dim_);

    std::vector<float> scores;
    // The kernels agree bitwise; cut over to threads only when the scan is
    // big enough to pay for them.
    if (documents_.size() >= 4096) {
        score_parallel(qv, scores);
    } else {
        score_serial(qv, scores);
    }
    result.hits = rank(scores, k);
    return result;
}

void ToolIndex::save(const std::string& dir) const {
    fs::create_directories(dir);

    std::ofstream docs(fs::path(dir) / "documents.jsonl");
    if (!docs) throw std::runtime_error("cannot write index documents: " + dir);
    for (const auto& doc : documents_) {
        docs << Json{{"tool_id", doc.tool_id}, {"text", doc.text}}.dump() << "\n";
    }

    std::ofstream vecs(fs::path(dir) / "vectors.bin", std::ios::binary);
    if (!vecs) throw std::runtime_error("cannot write index vectors: " + dir);
    vecs.write(reinterpret_cast<const char*>(vectors_.data()),
               static_cast<std::streamsize>(vectors_.size() * sizeof(float)));

    std::ofstream header(fs::path(dir) / "header.json");
    header << Json{{"dim", dim_},
                   {"count", documents_.size()},
                   {"embedder", embedder_tag_}}
                  .dump(2)
           << "\n";
}

ToolIndex ToolIndex::load(const std::string& dir) {
    std::ifstream header_in(fs::path(dir) / "header.json");
    if (!header_in) throw std::runtime_error("cannot open index header: " + dir);
    Json header = Json::parse(header_in);
    return load(dir, make_embedder(header.at("embedder").get<std::string>()));
}

ToolIndex ToolIndex::load(const std::string& dir, std::shared_ptr<Embedder> embedder) {
    std::ifstream header_in(fs::path(dir) / "header.json");
    if (!header_in) throw std::runtime_error("cannot open index header: " + dir);
    Json header = Json::parse(header_in);

    ToolIndex index;
    index.dim_ = header.at("dim").get<int>();
    index.embedder_tag_ = header.at("embedder").get<std::string>();
    const auto count = header.at("count").get<std::size_t>();

    if (embedder->identity() != index.embedder_tag_)
        throw std::runtime_error("index was built with embedder '" + index.embedder_tag_ +
                                 "', got '" + embedder->identity() + "'");
    index.embedder_ = std::move(embedder);

    std::ifstream docs(fs::path(dir) / "documents.jsonl");
    if (!docs) throw std::runtime_error("cannot open index documents: " + dir);
    std::string line;
    while (std::getline(docs, line)) {
        if (line.empty()) continue;
        Json j = Json::parse(line);
        index.documents_.push_back(
            ToolDocument{j.at("tool_id").get<std::string>(), j.at("text").get<std::string>()});
    }
    if (index.documents_.size() != count)
        throw std::runtime_error("index document count mismatch");

    std::ifstream vecs(fs::path(dir) / "vectors.bin", std::ios::binary);
    if (!vecs) throw std::runtime_error("cannot open index vectors: " + dir);
    index.vectors_.resize(count * static_cast<std::size_t>(index.dim_));
    vecs.read(reinterpret_cast<char*>(index.vectors_.data()),
              static_cast<std::streamsize>(index.vectors_.size() * sizeof(float)));
    if (static_cast<std::size_t>(vecs.gcount()) != index.vectors_.size() * sizeof(float))
        throw std::runtime_error("index vectors truncated");
    return index;
}

} // namespace toolrange::retrieval

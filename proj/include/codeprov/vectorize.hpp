#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "codeprov/common.hpp"
#include "codeprov/tokenizer.hpp"

namespace codeprov {

// --------------------------------------------------------------------------
// TF-IDF

struct TfidfModel {
    // Slot order: descending document frequency, ties by ascending token id.
    std::vector<TokenId> tokens;
    std::vector<double> idf;  // ln(N / N_t), parallel to tokens
    std::size_t n_docs_fitted = 0;

    std::size_t dim() const { return tokens.size(); }
};

// Vocabulary = the max_dim tokens with the highest document frequency.
// Throws if every document is empty.
TfidfModel fit_tfidf(const std::vector<TokenSequence>& train_docs, std::size_t max_dim = 1536);

// value[slot] = (count of token in doc / doc length) * idf; empty doc maps
// to the zero vector.
DenseVector transform_tfidf(const TfidfModel& model, const TokenSequence& doc);

// --------------------------------------------------------------------------
// Cosine similarity

// Both norms must be positive; throws DataError on zero vectors or
// mismatched dimensions.
double cosine_similarity(const DenseVector& u, const DenseVector& v);

// --------------------------------------------------------------------------
// CBOW word vectors (negative sampling)

struct CbowOptions {
    std::size_t dim = 1536;
    std::size_t window = 5;
    std::size_t min_count = 1;
    std::size_t negative_k = 5;
    std::size_t epochs = 5;
    double learning_rate = 0.025;
    std::uint64_t seed = 0;
};

class CbowModel {
public:
    CbowModel() = default;

    std::size_t dim() const { return dim_; }
    std::size_t vocab_size() const { return tokens_.size(); }
    const std::vector<TokenId>& tokens() const { return tokens_; }
    // Running mean negative-sampling loss per epoch.
    const std::vector<double>& epoch_losses() const { return epoch_losses_; }

    bool contains(TokenId token) const { return row_.count(token) != 0; }
    // Input vector of a vocabulary token; throws on unknown tokens.
    DenseVector vector_of(TokenId token) const;
    // Input vectors of the in-vocabulary tokens of a document, in order.
    std::vector<DenseVector> token_vectors(const TokenSequence& doc) const;

    friend CbowModel fit_cbow(const std::vector<TokenSequence>&, const CbowOptions&);

    const std::vector<double>& input_matrix() const { return input_; }
    const std::vector<double>& output_matrix() const { return output_; }

private:
    std::size_t dim_ = 0;
    std::vector<TokenId> tokens_;  // ascending token id
    std::unordered_map<TokenId, std::size_t> row_;
    std::vector<double> input_;   // |V| x dim, row-major
    std::vector<double> output_;  // |V| x dim, row-major
    std::vector<double> epoch_losses_;
};

// Single-threaded, deterministic given (docs, options). Context is the
// mean of input vectors within +-window; negatives are drawn from the
// unigram^0.75 distribution; the learning rate decays linearly.
CbowModel fit_cbow(const std::vector<TokenSequence>& train_docs, const CbowOptions& options);

// --------------------------------------------------------------------------
// Remote embedding client with a file cache

// Retriable transport/protocol failure; `status` is the HTTP status code
// or 0 when the connection itself failed.
struct RemoteError : std::runtime_error {
    RemoteError(const std::string& what, int status_) : std::runtime_error(what), status(status_) {}
    int status;
};

std::string sha256_hex(std::string_view text);

// Append-only JSONL cache {sha256, model, dim, values}, keyed by the
// SHA-256 of the snippet text. Hits return bit-identical vectors.
class EmbeddingCache {
public:
    EmbeddingCache(std::string path, std::string provider_name, std::size_t dim);

    const std::string& provider_name() const { return provider_name_; }
    std::size_t dim() const { return dim_; }
    std::size_t size() const { return store_.size(); }

    std::optional<DenseVector> lookup(std::string_view text) const;
    void put(std::string_view text, const DenseVector& vec);

private:
    std::string path_;
    std::string provider_name_;
    std::size_t dim_;
    std::unordered_map<std::string, DenseVector> store_;  // sha256 -> vector
};

struct RemoteEmbedderConfig {
    std::string base_url = "https://api.openai.com";
    std::string path = "/v1/embeddings";
    std::string api_key_env = "CODEPROV_API_KEY";
    bool offline = true;  // cache misses are errors unless explicitly online
    int timeout_seconds = 30;
};

class RemoteEmbedder {
public:
    explicit RemoteEmbedder(RemoteEmbedderConfig config) : config_(std::move(config)) {}

    // Cache hit, or one HTTP request in online mode (the result is
    // cached). Offline misses throw a DataError naming the content hash.
    DenseVector embed(EmbeddingCache& cache, const std::string& text) const;

    // Exact bytes sent as the request body.
    static std::string request_body(const std::string& provider_name, const std::string& text);

private:
    RemoteEmbedderConfig config_;
};

}  // namespace codeprov

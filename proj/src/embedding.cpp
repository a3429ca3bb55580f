#include <cstdio>
#include <fstream>

#include <openssl/evp.h>

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>
#include <nlohmann/json.hpp>

#include "codeprov/vectorize.hpp"

namespace codeprov {

using nlohmann::json;

std::string sha256_hex(std::string_view text) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (!EVP_Digest(text.data(), text.size(), digest, &len, EVP_sha256(), nullptr))
        throw std::runtime_error("sha256 failed");
    static const char* hex = "0123456789abcdef";
    std::string out;
    out.reserve(len * 2);
    for (unsigned int i = 0; i < len; ++i) {
        out.push_back(hex[digest[i] >> 4]);
        out.push_back(hex[digest[i] & 0xF]);
    }
    return out;
}

EmbeddingCache::EmbeddingCache(std::string path, std::string provider_name, std::size_t dim)
    : path_(std::move(path)), provider_name_(std::move(provider_name)), dim_(dim) {
    std::ifstream in(path_, std::ios::binary);
    if (!in) return;  // fresh cache
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        json obj = json::parse(line, nullptr, false);
        if (obj.is_discarded())
            throw DataError(path_ + ": line " + std::to_string(line_no) + ": malformed cache line");
        if (obj.value("model", "") != provider_name_) continue;
        auto values = obj.at("values").get<DenseVector>();
        if (obj.at("dim").get<std::size_t>() != dim_ || values.size() != dim_)
            throw DataError(path_ + ": line " + std::to_string(line_no) +
                            ": cached dimension mismatch");
        store_[obj.at("sha256").get<std::string>()] = std::move(values);
    }
}

std::optional<DenseVector> EmbeddingCache::lookup(std::string_view text) const {
    auto it = store_.find(sha256_hex(text));
    if (it == store_.end()) return std::nullopt;
    return it->second;
}

void EmbeddingCache::put(std::string_view text, const DenseVector& vec) {
    if (vec.size() != dim_)
        throw DataError("embedding dimension mismatch: got " + std::to_string(vec.size()) +
                        ", cache expects " + std::to_string(dim_));
    std::string hash = sha256_hex(text);
    if (store_.count(hash)) return;
    json obj;
    obj["sha256"] = hash;
    obj["model"] = provider_name_;
    obj["dim"] = dim_;
    obj["values"] = vec;
    std::ofstream out(path_, std::ios::binary | std::ios::app);
    if (!out) throw DataError("cannot append to embedding cache: " + path_);
    out << obj.dump() << '\n';
    store_.emplace(std::move(hash), vec);
}

std::string RemoteEmbedder::request_body(const std::string& provider_name,
                                         const std::string& text) {
    json body;
    body["input"] = text;
    body["model"] = provider_name;
    return body.dump();
}

DenseVector RemoteEmbedder::embed(EmbeddingCache& cache, const std::string& text) const {
    if (auto hit = cache.lookup(text)) return *hit;
    if (config_.offline)
        throw DataError("offline embedding cache miss for sha256 " + sha256_hex(text));

    const char* key = std::getenv(config_.api_key_env.c_str());
    if (!key || !*key)
        throw ConfigError("online mode needs a credential in $" + config_.api_key_env);

    httplib::Client client(config_.base_url);
    client.set_connection_timeout(config_.timeout_seconds);
    client.set_read_timeout(config_.timeout_seconds);
    httplib::Headers headers = {{"Authorization", std::string("Bearer ") + key}};
    auto res = client.Post(config_.path, headers, request_body(cache.provider_name(), text),
                           "application/json");
    if (!res) throw RemoteError("embedding request failed: " + to_string(res.error()), 0);
    if (res->status != 200)
        throw RemoteError("embedding request returned HTTP " + std::to_string(res->status),
                          res->status);

    json reply = json::parse(res->body, nullptr, false);
    if (reply.is_discarded()) throw RemoteError("embedding response is not JSON", res->status);
    DenseVector vec;
    try {
        vec = reply.at("data").at(0).at("embedding").get<DenseVector>();
    } catch (const json::exception& e) {
        throw RemoteError(std::string("unexpected embedding response shape: ") + e.what(),
                          res->status);
    }
    if (vec.size() != cache.dim())
        throw DataError("provider returned dimension " + std::to_string(vec.size()) +
                        ", expected " + std::to_string(cache.dim()));
    cache.put(text, vec);
    return vec;
}

}  // namespace codeprov

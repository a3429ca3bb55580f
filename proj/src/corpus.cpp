#include "codeprov/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include <nlohmann/json.hpp>

namespace codeprov {

using nlohmann::json;

const char* origin_name(Origin o) { return o == Origin::Human ? "human" : "gpt"; }

Origin origin_from_string(const std::string& s) {
    if (s == "human") return Origin::Human;
    if (s == "gpt") return Origin::Gpt;
    throw DataError("unknown origin \"" + s + "\" (expected \"human\" or \"gpt\")");
}

std::size_t Corpus::count_origin(Origin o) const {
    std::size_t n = 0;
    for (const auto& s : samples_)
        if (s.origin == o) ++n;
    return n;
}

std::vector<std::string> Corpus::problem_ids() const {
    std::vector<std::string> ids;
    std::unordered_set<std::string> seen;
    for (const auto& s : samples_) {
        if (seen.insert(s.problem_id).second) ids.push_back(s.problem_id);
    }
    return ids;
}

std::map<std::string, std::pair<std::size_t, std::size_t>> Corpus::class_counts_by_problem()
    const {
    std::map<std::string, std::pair<std::size_t, std::size_t>> counts;
    for (const auto& s : samples_) {
        auto& c = counts[s.problem_id];
        if (s.origin == Origin::Human)
            ++c.first;
        else
            ++c.second;
    }
    return counts;
}

namespace {

bool is_trimmed_empty(const std::string& code) {
    return std::all_of(code.begin(), code.end(),
                       [](unsigned char c) { return std::isspace(c) != 0; });
}

CodeSample sample_from_json(const json& obj, std::size_t line_no) {
    auto require = [&](const char* key) -> const json& {
        auto it = obj.find(key);
        if (it == obj.end())
            throw DataError("line " + std::to_string(line_no) + ": missing key \"" + key + "\"");
        return *it;
    };
    CodeSample s;
    try {
        s.problem_id = require("problem_id").get<std::string>();
        s.origin = origin_from_string(require("origin").get<std::string>());
        s.code = require("code").get<std::string>();
        s.source_dataset = require("source_dataset").get<std::string>();
        s.formatted = require("formatted").get<bool>();
    } catch (const json::exception& e) {
        throw DataError("line " + std::to_string(line_no) + ": " + e.what());
    } catch (const DataError& e) {
        throw DataError("line " + std::to_string(line_no) + ": " + e.what());
    }
    if (is_trimmed_empty(s.code))
        throw DataError("line " + std::to_string(line_no) + ": code is empty after trimming");
    return s;
}

// CRLF/CR -> LF, for duplicate comparison only.
std::string normalize_newlines(const std::string& text) {
    std::string out;
    out.reserve(text.size());
    for (std::size_t i = 0; i < text.size(); ++i) {
        if (text[i] == '\r') {
            out.push_back('\n');
            if (i + 1 < text.size() && text[i + 1] == '\n') ++i;
        } else {
            out.push_back(text[i]);
        }
    }
    return out;
}

}  // namespace

Corpus parse_jsonl(std::istream& in, const std::string& origin_label) {
    std::vector<CodeSample> samples;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) {
            throw DataError(origin_label + ": line " + std::to_string(line_no) + ": blank line");
        }
        json obj = json::parse(line, nullptr, false);
        if (obj.is_discarded() || !obj.is_object())
            throw DataError(origin_label + ": line " + std::to_string(line_no) +
                            ": not a JSON object");
        try {
            samples.push_back(sample_from_json(obj, line_no));
        } catch (const DataError& e) {
            throw DataError(origin_label + ": " + e.what());
        }
    }
    return Corpus(std::move(samples));
}

Corpus load_jsonl(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open dataset file: " + path);
    return parse_jsonl(in, path);
}

void write_jsonl(const Corpus& corpus, const std::string& path) {
    std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw DataError("cannot write dataset file: " + tmp);
        for (const auto& s : corpus.samples()) {
            json obj;
            obj["problem_id"] = s.problem_id;
            obj["origin"] = origin_name(s.origin);
            obj["code"] = s.code;
            obj["source_dataset"] = s.source_dataset;
            obj["formatted"] = s.formatted;
            out << obj.dump() << '\n';
        }
        if (!out) throw DataError("write failed: " + tmp);
    }
    if (std::rename(tmp.c_str(), path.c_str()) != 0)
        throw DataError("cannot rename " + tmp + " to " + path);
}

Corpus dedup(const Corpus& corpus) {
    std::vector<CodeSample> kept;
    kept.reserve(corpus.size());
    std::unordered_set<std::string> seen;  // problem \x1f origin \x1f normalized code
    for (const auto& s : corpus.samples()) {
        std::string key = s.problem_id;
        key.push_back('\x1f');
        key.push_back(s.origin == Origin::Human ? 'h' : 'g');
        key.push_back('\x1f');
        key += normalize_newlines(s.code);
        if (seen.insert(std::move(key)).second) kept.push_back(s);
    }
    return Corpus(std::move(kept));
}

Corpus balance(const Corpus& corpus, std::uint64_t seed) {
    auto problems = corpus.problem_ids();
    // Per problem: sample indices of each class, in file order.
    std::unordered_map<std::string, std::pair<std::vector<std::size_t>, std::vector<std::size_t>>>
        groups;
    for (std::size_t i = 0; i < corpus.size(); ++i) {
        const auto& s = corpus[i];
        auto& g = groups[s.problem_id];
        (s.origin == Origin::Human ? g.first : g.second).push_back(i);
    }

    Rng rng(seed);
    std::vector<bool> keep(corpus.size(), false);
    for (const auto& pid : problems) {
        auto& g = groups[pid];
        std::size_t k = std::min(g.first.size(), g.second.size());
        if (k == 0) continue;
        for (const auto* cls : {&g.first, &g.second}) {
            if (cls->size() == k) {
                for (std::size_t idx : *cls) keep[idx] = true;
            } else {
                for (std::size_t pick : sample_without_replacement(cls->size(), k, rng))
                    keep[(*cls)[pick]] = true;
            }
        }
    }

    std::vector<CodeSample> out;
    for (std::size_t i = 0; i < corpus.size(); ++i)
        if (keep[i]) out.push_back(corpus[i]);
    return Corpus(std::move(out));
}

SplitPlan plan_split(const Corpus& corpus, std::uint64_t seed, double ratio) {
    if (!(ratio > 0.0 && ratio < 1.0)) throw ConfigError("split ratio must be in (0, 1)");
    auto problems = corpus.problem_ids();
    if (problems.size() < 2)
        throw DataError("problem-wise split needs at least 2 problems, got " +
                        std::to_string(problems.size()));
    Rng rng(seed);
    shuffle(problems, rng);
    std::size_t n_train =
        static_cast<std::size_t>(std::floor(ratio * static_cast<double>(problems.size())));
    SplitPlan plan;
    plan.seed = seed;
    plan.ratio = ratio;
    plan.train_problems.assign(problems.begin(), problems.begin() + n_train);
    plan.test_problems.assign(problems.begin() + n_train, problems.end());
    return plan;
}

std::pair<Corpus, Corpus> apply_split(const Corpus& corpus, const SplitPlan& plan) {
    std::unordered_set<std::string> train_set(plan.train_problems.begin(),
                                              plan.train_problems.end());
    std::vector<CodeSample> train, test;
    for (const auto& s : corpus.samples()) {
        if (train_set.count(s.problem_id))
            train.push_back(s);
        else
            test.push_back(s);
    }
    return {Corpus(std::move(train)), Corpus(std::move(test))};
}

std::pair<Corpus, Corpus> split_problemwise(const Corpus& corpus, std::uint64_t seed,
                                            double ratio) {
    return apply_split(corpus, plan_split(corpus, seed, ratio));
}

}  // namespace codeprov

#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "codeprov/common.hpp"

namespace codeprov {

enum class Origin { Human, Gpt };

const char* origin_name(Origin o);
Origin origin_from_string(const std::string& s);  // "human" | "gpt"

// One labeled snippet. `formatted` marks dataset variants that were run
// through a uniform code formatter before being stored.
struct CodeSample {
    std::string problem_id;
    Origin origin = Origin::Human;
    std::string code;
    std::string source_dataset;
    bool formatted = false;
};

// Immutable after construction; grouping by (problem_id, origin) is the
// unit all preprocessing operates on.
class Corpus {
public:
    Corpus() = default;
    explicit Corpus(std::vector<CodeSample> samples) : samples_(std::move(samples)) {}

    const std::vector<CodeSample>& samples() const { return samples_; }
    std::size_t size() const { return samples_.size(); }
    bool empty() const { return samples_.empty(); }
    const CodeSample& operator[](std::size_t i) const { return samples_[i]; }

    std::size_t count_origin(Origin o) const;
    // Distinct problem ids in order of first appearance.
    std::vector<std::string> problem_ids() const;
    std::size_t count_problems() const { return problem_ids().size(); }
    // Per-problem (human count, gpt count), keyed by problem id.
    std::map<std::string, std::pair<std::size_t, std::size_t>> class_counts_by_problem() const;

private:
    std::vector<CodeSample> samples_;
};

struct SplitPlan {
    std::uint64_t seed = 0;
    double ratio = 0.8;
    std::vector<std::string> train_problems;
    std::vector<std::string> test_problems;
};

// JSONL with exact keys problem_id, origin ("human"|"gpt"), code,
// source_dataset, formatted. Blank lines are rejected; errors carry the
// 1-based line number.
Corpus load_jsonl(const std::string& path);
Corpus parse_jsonl(std::istream& in, const std::string& origin_label);
void write_jsonl(const Corpus& corpus, const std::string& path);

// Keep the first occurrence of each byte-identical code text within a
// (problem_id, origin) group. Line endings are normalized to "\n" for
// the comparison only; stored text is untouched. Identical texts under
// different problems are both kept.
Corpus dedup(const Corpus& corpus);

// Per problem with h human and g gpt solutions, keep k = min(h, g) of
// each class, chosen uniformly without replacement; problems with k == 0
// are dropped. Pure function of (corpus, seed).
Corpus balance(const Corpus& corpus, std::uint64_t seed);

// Shuffle problems with the seed and allocate floor(ratio * n) of them
// to train; every sample follows its problem.
SplitPlan plan_split(const Corpus& corpus, std::uint64_t seed, double ratio = 0.8);
std::pair<Corpus, Corpus> split_problemwise(const Corpus& corpus, std::uint64_t seed,
                                            double ratio = 0.8);
std::pair<Corpus, Corpus> apply_split(const Corpus& corpus, const SplitPlan& plan);

}  // namespace codeprov

#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace codeprov {

// Bad or malformed input data (files, datasets, dimension mismatches).
struct DataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Invalid configuration or usage (bad flags, violated preconditions).
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

using DenseVector = std::vector<double>;
using Matrix = std::vector<std::vector<double>>;  // row-major, rectangular

// 64-bit splittable generator (splitmix64). Used everywhere instead of
// std::uniform_* so that seeded results are identical across platforms
// and standard libraries.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ull);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

    // Uniform integer in [0, n), unbiased via rejection.
    std::size_t uniform_index(std::size_t n) {
        if (n == 0) throw std::logic_error("uniform_index: n == 0");
        std::uint64_t bound = n;
        std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
        std::uint64_t v;
        do {
            v = next_u64();
        } while (v >= limit);
        return static_cast<std::size_t>(v % bound);
    }

    // Uniform double in [0, 1).
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // Uniform double in [lo, hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Standard normal via Box-Muller.
    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1;
        do {
            u1 = uniform();
        } while (u1 <= 0.0);
        double u2 = uniform();
        double r = std::sqrt(-2.0 * std::log(u1));
        double theta = 6.283185307179586476925286766559 * u2;
        spare_ = r * std::sin(theta);
        have_spare_ = true;
        return r * std::cos(theta);
    }

    double normal(double mean, double stddev) { return mean + stddev * normal(); }

    // Derive an independent stream, e.g. one per worker or per tree.
    Rng spawn(std::uint64_t stream) {
        Rng r(state_ ^ (0xA0761D6478BD642Full * (stream + 1)));
        r.next_u64();
        return r;
    }

private:
    std::uint64_t state_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

// In-place Fisher-Yates shuffle driven by Rng::uniform_index.
template <typename T>
void shuffle(std::vector<T>& v, Rng& rng) {
    for (std::size_t i = v.size(); i > 1; --i) {
        std::size_t j = rng.uniform_index(i);
        std::swap(v[i - 1], v[j]);
    }
}

// Sample k distinct indices from [0, n) in selection order.
std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t k, Rng& rng);

inline double sigmoid(double z) {
    if (z >= 0.0) {
        return 1.0 / (1.0 + std::exp(-z));
    }
    double e = std::exp(z);
    return e / (1.0 + e);
}

double log_sum_exp(const double* vals, std::size_t n);
double mean(const std::vector<double>& v);
// Sample standard deviation (n-1 denominator); 0 for fewer than two values.
double sample_stddev(const std::vector<double>& v);

// Write via a temp file and rename, so readers never see partial content.
void atomic_write_file(const std::string& path, const std::string& content);

}  // namespace codeprov

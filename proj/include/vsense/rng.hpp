#pragma once

#include <cstdint>
#include <random>
#include <utility>
#include <vector>

namespace vsense {

// Deterministic random source. All derived draws (uniforms, gaussians,
// shuffles) are computed with fixed arithmetic on the raw mt19937_64 word
// stream, so sequences are identical across platforms and standard library
// implementations, not just across runs.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    std::uint64_t next_u64() { return eng_(); }

    // Uniform in [0, 1) with 53 random bits.
    double uniform01() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

    // Uniform in [lo, hi]; returns lo exactly for a degenerate interval.
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    // Standard normal (Box-Muller, one value per call).
    double gaussian();

    // Uniform integer in [0, n), n > 0.
    std::uint64_t below(std::uint64_t n) { return eng_() % n; }

    // Fisher-Yates shuffle.
    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::swap(v[i - 1], v[below(i)]);
        }
    }

private:
    std::mt19937_64 eng_;
};

// Stable derivation of per-purpose seeds from one master seed. Streams keep
// independent consumers (dataset generation, per-example attack RNGs, noise
// draws) from sharing state, so adding draws in one place never shifts
// another.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream, std::uint64_t index = 0);

namespace seed_stream {
inline constexpr std::uint64_t kTrainData = 1;
inline constexpr std::uint64_t kTestData = 2;
inline constexpr std::uint64_t kPgd = 3;
inline constexpr std::uint64_t kNoiseEval = 4;
}  // namespace seed_stream

}  // namespace vsense

#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>

#include "vsense/linalg.hpp"

namespace vsense {

struct DatasetMeta {
    std::uint64_t seed = 0;
    int K = 0;
    int n = 0;
    int generator_version = 0;
    double y_min = 0.0;
};

// Normalized regression dataset: features in [0,1]^K, targets in [y_min, 1].
struct Dataset {
    int n = 0;
    int K = 0;
    Matrix X;   // n x K
    Vector Y;   // n
    DatasetMeta meta;

    std::span<const double> row(int i) const { return X.row(i); }
};

// Synthetic injector-pulse surrogate. Each example is a smooth plateau pulse
// over the K-1 series features whose amplitude and width both grow with the
// target y, plus one scalar sensor reading 0.5 + 0.3 y; every value carries
// seeded gaussian noise (sigma 0.005) and is clamped to [0, 1].
Dataset generate(int n, int K, std::uint64_t seed, double y_min = 0.05);

// CSV with header s_0,...,s_{K-2},p,y; one example per row, floats with
// 17 significant digits so a round trip is exact. Generator parameters go to
// a sidecar <path>.meta.json.
void save_csv(const Dataset& ds, const std::filesystem::path& path);

// Throws std::runtime_error naming the offending row on malformed input,
// wrong column counts, or values outside [0, 1].
Dataset load_csv(const std::filesystem::path& path);

// Table bins over the target range: [0,.2) [.2,.4) [.4,.6) [.6,.8) [.8,1].
inline constexpr int kNumRangeBins = 5;
inline constexpr double kBinEdges[kNumRangeBins + 1] = {0.0, 0.2, 0.4, 0.6, 0.8, 1.0};

// Bin index for y in [0,1]; y = 1.0 belongs to the last bin.
// Throws std::domain_error outside [0,1].
int bin_of(double y);

}  // namespace vsense

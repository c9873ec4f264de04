#pragma once

#include <array>
#include <filesystem>
#include <string>
#include <vector>

#include "vsense/attack.hpp"
#include "vsense/data.hpp"
#include "vsense/net.hpp"
#include "vsense/perturb.hpp"
#include "vsense/verifier.hpp"

namespace vsense {

// Table rows, in presentation order.
enum EvalMetric {
    kRelativeError = 0,
    kNoiseError = 1,
    kPgdError = 2,
    kMilpBound = 3,
    kDualBound = 4,
};
inline constexpr int kNumMetrics = 5;
inline constexpr int kNumTableBins = kNumRangeBins + 1;  // five ranges + full range
extern const char* const kMetricNames[kNumMetrics];

struct BinCell {
    int count = 0;
    double mean_percent = 0.0;  // undefined when count == 0 (absent entry)
    bool present() const { return count > 0; }
};

// Per-model evaluation binned by target range. Entries are mean percentages.
struct EvalTable {
    std::string model;
    std::array<std::array<BinCell, kNumTableBins>, kNumMetrics> cells;
};

// Mean relative error (1/n) sum |f(x_i) - y_i| / |y_i| over the examples.
// Throws std::domain_error if any target is zero.
double mre(const DenseNet& net, const Dataset& data);

// Assembles all five rows. Certificates must cover examples 0..n-1 of the
// test set for both methods, in id order. Noise and PGD randomness derive
// from eval_seed per example, so the table is reproducible and independent of
// evaluation order.
EvalTable build_table(const DenseNet& net, const Dataset& test, const PerturbationSpec& spec,
                      const std::vector<Certificate>& certs_dual,
                      const std::vector<Certificate>& certs_milp, const AttackConfig& attack_cfg,
                      int noise_draws, std::uint64_t eval_seed, const std::string& model_name);

// Checks the soundness ordering PGD <= MILP <= dual per populated bin (slack
// 1e-7 before percent rounding) and the count-weighted partition identity of
// the full-range column (1e-9).
bool table_is_consistent(const EvalTable& table);

// report.md: aligned markdown, two-decimal percents.
void emit_report_md(const std::vector<EvalTable>& tables, const std::filesystem::path& path);

// report.csv: model,metric,bin_index,bin_lo,bin_hi,count,mean_percent at full
// precision; absent entries keep an empty value field.
void emit_report_csv(const std::vector<EvalTable>& tables, const std::filesystem::path& path);
std::vector<EvalTable> load_report_csv(const std::filesystem::path& path);

// scatter.csv: y,relative_error rows, one per example.
void emit_scatter(const DenseNet& net, const Dataset& data, const std::filesystem::path& path);

// series CSV: t,clean,perturbed,band_lo,band_hi over the series features of
// one example and its adversarial counterpart.
void emit_series(std::span<const double> x, std::span<const double> z_adv, const Box& box,
                 const std::filesystem::path& path);

}  // namespace vsense

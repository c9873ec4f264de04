#include "vsense/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>

#include "vsense/io_util.hpp"
#include "vsense/rng.hpp"

namespace vsense {

const char* const kMetricNames[kNumMetrics] = {
    "relative_error", "noise_error", "pgd_error", "milp_bound", "dual_bound",
};

double mre(const DenseNet& net, const Dataset& data) {
    if (data.n == 0) throw std::invalid_argument("mre: empty dataset");
    double sum = 0.0;
    for (int i = 0; i < data.n; ++i) {
        if (data.Y[i] == 0.0) throw std::domain_error("mre: target must be nonzero");
        sum += std::abs(forward(net, data.row(i)) - data.Y[i]) / std::abs(data.Y[i]);
    }
    return sum / data.n;
}

EvalTable build_table(const DenseNet& net, const Dataset& test, const PerturbationSpec& spec,
                      const std::vector<Certificate>& certs_dual,
                      const std::vector<Certificate>& certs_milp, const AttackConfig& attack_cfg,
                      int noise_draws, std::uint64_t eval_seed, const std::string& model_name) {
    if (static_cast<int>(certs_dual.size()) < test.n ||
        static_cast<int>(certs_milp.size()) < test.n) {
        throw std::invalid_argument("build_table: certificates must cover the test set");
    }

    EvalTable table;
    table.model = model_name;
    std::array<std::array<double, kNumTableBins>, kNumMetrics> sums{};
    std::array<int, kNumTableBins> counts{};

    for (int i = 0; i < test.n; ++i) {
        const auto x = test.row(i);
        const double y = test.Y[i];
        const Box box = box_of(spec, x);

        std::array<double, kNumMetrics> v{};
        v[kRelativeError] = std::abs(forward(net, x) - y) / std::abs(y);
        Rng noise_rng(mix_seed(eval_seed, seed_stream::kNoiseEval, i));
        v[kNoiseError] = noise_error(net, x, y, box, noise_draws, noise_rng);
        Rng pgd_rng(mix_seed(eval_seed, seed_stream::kPgd, i));
        v[kPgdError] = pgd_attack(net, x, y, box, attack_cfg, pgd_rng).adv_err;
        v[kMilpBound] = certified_relative_error(certs_milp[i].bounds, y);
        v[kDualBound] = certified_relative_error(certs_dual[i].bounds, y);

        const int bin = bin_of(y);
        for (int m = 0; m < kNumMetrics; ++m) {
            sums[m][bin] += v[m];
            sums[m][kNumRangeBins] += v[m];
        }
        ++counts[bin];
        ++counts[kNumRangeBins];
    }

    for (int m = 0; m < kNumMetrics; ++m) {
        for (int b = 0; b < kNumTableBins; ++b) {
            table.cells[m][b].count = counts[b];
            if (counts[b] > 0) {
                table.cells[m][b].mean_percent = 100.0 * sums[m][b] / counts[b];
            }
        }
    }
    return table;
}

bool table_is_consistent(const EvalTable& table) {
    constexpr double kOrderSlackPercent = 1e-7 * 100.0;
    for (int b = 0; b < kNumTableBins; ++b) {
        const BinCell& pgd = table.cells[kPgdError][b];
        const BinCell& milp = table.cells[kMilpBound][b];
        const BinCell& dual = table.cells[kDualBound][b];
        if (!pgd.present()) continue;
        if (pgd.mean_percent > milp.mean_percent + kOrderSlackPercent) return false;
        if (milp.mean_percent > dual.mean_percent + kOrderSlackPercent) return false;
        if (table.cells[kNoiseError][b].mean_percent < 0.0) return false;
    }
    for (int m = 0; m < kNumMetrics; ++m) {
        double weighted = 0.0;
        int total = 0;
        for (int b = 0; b < kNumRangeBins; ++b) {
            const BinCell& cell = table.cells[m][b];
            if (!cell.present()) continue;
            weighted += cell.mean_percent * cell.count;
            total += cell.count;
        }
        const BinCell& full = table.cells[m][kNumRangeBins];
        if (total != full.count) return false;
        if (total > 0 && std::abs(weighted / total - full.mean_percent) > 1e-9) return false;
        for (int b = 0; b < kNumTableBins; ++b) {
            if (table.cells[m][b].present() && !std::isfinite(table.cells[m][b].mean_percent)) {
                return false;
            }
        }
    }
    return true;
}

namespace {

const char* const kBinHeaders[kNumTableBins] = {
    "[0.0-0.2)", "[0.2-0.4)", "[0.4-0.6)", "[0.6-0.8)", "[0.8-1.0]", "[0.0-1.0]",
};

const char* const kMetricLabels[kNumMetrics] = {
    "Relative error", "Noise error", "PGD error", "MILP bound", "Dual bound",
};

std::string percent2(const BinCell& cell) {
    if (!cell.present()) return "-";
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f%%", cell.mean_percent);
    return buf;
}

}  // namespace

void emit_report_md(const std::vector<EvalTable>& tables, const std::filesystem::path& path) {
    std::ostringstream out;
    out << "# Worst-case evaluation by target range\n";
    for (const EvalTable& t : tables) {
        out << "\n## " << t.model << "\n\n";
        out << "| metric |";
        for (const char* h : kBinHeaders) out << ' ' << h << " |";
        out << "\n|---|";
        for (int b = 0; b < kNumTableBins; ++b) out << "---:|";
        out << '\n';
        for (int m = 0; m < kNumMetrics; ++m) {
            out << "| " << kMetricLabels[m] << " |";
            for (int b = 0; b < kNumTableBins; ++b) out << ' ' << percent2(t.cells[m][b]) << " |";
            out << '\n';
        }
        out << "| examples |";
        for (int b = 0; b < kNumTableBins; ++b) {
            out << ' ' << t.cells[0][b].count << " |";
        }
        out << '\n';
    }
    write_file_atomic(path, out.str());
}

void emit_report_csv(const std::vector<EvalTable>& tables, const std::filesystem::path& path) {
    std::ostringstream out;
    out << "model,metric,bin_index,bin_lo,bin_hi,count,mean_percent\n";
    for (const EvalTable& t : tables) {
        for (int m = 0; m < kNumMetrics; ++m) {
            for (int b = 0; b < kNumTableBins; ++b) {
                const double lo = b < kNumRangeBins ? kBinEdges[b] : 0.0;
                const double hi = b < kNumRangeBins ? kBinEdges[b + 1] : 1.0;
                const BinCell& cell = t.cells[m][b];
                out << t.model << ',' << kMetricNames[m] << ',' << b << ',' << fmt17(lo) << ','
                    << fmt17(hi) << ',' << cell.count << ',';
                if (cell.present()) out << fmt17(cell.mean_percent);
                out << '\n';
            }
        }
    }
    write_file_atomic(path, out.str());
}

std::vector<EvalTable> load_report_csv(const std::filesystem::path& path) {
    std::istringstream in(read_file(path));
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("report csv: empty file");

    std::vector<EvalTable> tables;
    auto metric_index = [](const std::string& name) {
        for (int m = 0; m < kNumMetrics; ++m) {
            if (name == kMetricNames[m]) return m;
        }
        throw std::runtime_error("report csv: unknown metric " + name);
    };

    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string model, metric, bin_s, lo_s, hi_s, count_s, val_s;
        std::getline(ls, model, ',');
        std::getline(ls, metric, ',');
        std::getline(ls, bin_s, ',');
        std::getline(ls, lo_s, ',');
        std::getline(ls, hi_s, ',');
        std::getline(ls, count_s, ',');
        std::getline(ls, val_s);

        if (tables.empty() || tables.back().model != model) {
            tables.emplace_back();
            tables.back().model = model;
        }
        EvalTable& t = tables.back();
        const int m = metric_index(metric);
        const int b = std::stoi(bin_s);
        if (b < 0 || b >= kNumTableBins) throw std::runtime_error("report csv: bad bin index");
        t.cells[m][b].count = std::stoi(count_s);
        if (!val_s.empty()) t.cells[m][b].mean_percent = std::stod(val_s);
    }
    return tables;
}

void emit_scatter(const DenseNet& net, const Dataset& data, const std::filesystem::path& path) {
    std::ostringstream out;
    out << "y,relative_error\n";
    for (int i = 0; i < data.n; ++i) {
        const double y = data.Y[i];
        const double rel = std::abs(forward(net, data.row(i)) - y) / std::abs(y);
        out << fmt17(y) << ',' << fmt17(rel) << '\n';
    }
    write_file_atomic(path, out.str());
}

void emit_series(std::span<const double> x, std::span<const double> z_adv, const Box& box,
                 const std::filesystem::path& path) {
    if (x.size() != z_adv.size() || x.size() != box.dim()) {
        throw std::invalid_argument("emit_series: size mismatch");
    }
    std::ostringstream out;
    out << "t,clean,perturbed,band_lo,band_hi\n";
    // Series features only; the trailing scalar sensor is not part of the plot.
    for (std::size_t t = 0; t + 1 < x.size(); ++t) {
        out << t << ',' << fmt17(x[t]) << ',' << fmt17(z_adv[t]) << ',' << fmt17(box.lo[t])
            << ',' << fmt17(box.hi[t]) << '\n';
    }
    write_file_atomic(path, out.str());
}

}  // namespace vsense

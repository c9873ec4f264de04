#include "vsense/data.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "vsense/io_util.hpp"
#include "vsense/rng.hpp"

namespace vsense {

namespace {

constexpr int kGeneratorVersion = 1;

// Pulse shape constants. The amplitude slope is kept small so that reading
// the target accurately requires combining many series samples at high gain,
// which is what makes a plainly trained model sensitive to coordinated
// per-sample noise.
constexpr double kAmpBase = 0.50;
constexpr double kAmpSlope = 0.08;
constexpr double kOnset = 0.15;
constexpr double kOffBase = 0.45;
constexpr double kOffSlope = 0.12;
constexpr double kFlank = 0.30;
constexpr double kNoiseSigma = 0.005;

double logistic(double v) { return 1.0 / (1.0 + std::exp(-v)); }

double pulse_value(double t_norm, double y) {
    const double amp = kAmpBase + kAmpSlope * y;
    const double t_off = kOffBase + kOffSlope * y;
    return amp * logistic((t_norm - kOnset) / kFlank) * logistic((t_off - t_norm) / kFlank);
}

}  // namespace

Dataset generate(int n, int K, std::uint64_t seed, double y_min) {
    if (n < 1 || K < 2) throw std::invalid_argument("generate: need n >= 1 and K >= 2");
    if (!(y_min > 0.0 && y_min < 1.0)) {
        throw std::invalid_argument("generate: y_min must lie in (0, 1)");
    }
    Dataset ds;
    ds.n = n;
    ds.K = K;
    ds.X = Matrix(n, K);
    ds.Y.resize(n);
    ds.meta = DatasetMeta{seed, K, n, kGeneratorVersion, y_min};

    Rng rng(seed);
    const int series_len = K - 1;
    for (int i = 0; i < n; ++i) {
        const double y = rng.uniform(y_min, 1.0);
        ds.Y[i] = y;
        for (int t = 0; t < series_len; ++t) {
            const double t_norm =
                series_len > 1 ? static_cast<double>(t) / (series_len - 1) : 0.0;
            const double v = pulse_value(t_norm, y) + kNoiseSigma * rng.gaussian();
            ds.X(i, t) = std::clamp(v, 0.0, 1.0);
        }
        const double p = 0.5 + 0.3 * y + kNoiseSigma * rng.gaussian();
        ds.X(i, K - 1) = std::clamp(p, 0.0, 1.0);
    }
    return ds;
}

void save_csv(const Dataset& ds, const std::filesystem::path& path) {
    std::ostringstream out;
    for (int c = 0; c + 1 < ds.K; ++c) out << "s_" << c << ',';
    out << "p,y\n";
    for (int i = 0; i < ds.n; ++i) {
        for (int c = 0; c < ds.K; ++c) out << fmt17(ds.X(i, c)) << ',';
        out << fmt17(ds.Y[i]) << '\n';
    }
    write_file_atomic(path, out.str());

    nlohmann::json meta{{"seed", ds.meta.seed},
                        {"K", ds.meta.K},
                        {"n", ds.meta.n},
                        {"generator_version", ds.meta.generator_version},
                        {"y_min", ds.meta.y_min}};
    write_file_atomic(path.string() + ".meta.json", meta.dump(2) + "\n");
}

namespace {

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    for (char ch : line) {
        if (ch == ',') {
            fields.push_back(cur);
            cur.clear();
        } else if (ch != '\r') {
            cur.push_back(ch);
        }
    }
    fields.push_back(cur);
    return fields;
}

[[noreturn]] void parse_fail(const std::filesystem::path& path, int row, const std::string& why) {
    throw std::runtime_error(path.string() + ": row " + std::to_string(row) + ": " + why);
}

}  // namespace

Dataset load_csv(const std::filesystem::path& path) {
    std::istringstream in(read_file(path));
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error(path.string() + ": empty file");
    const auto header = split_line(line);
    const int K = static_cast<int>(header.size()) - 1;
    if (K < 2 || header[K - 1] != "p" || header[K] != "y") {
        throw std::runtime_error(path.string() + ": unrecognized CSV header");
    }

    std::vector<double> xs;
    Vector ys;
    int row = 0;
    while (std::getline(in, line)) {
        ++row;
        if (line.empty()) continue;
        const auto fields = split_line(line);
        if (static_cast<int>(fields.size()) != K + 1) {
            parse_fail(path, row, "expected " + std::to_string(K + 1) + " columns, got " +
                                      std::to_string(fields.size()));
        }
        for (int c = 0; c <= K; ++c) {
            double v = 0.0;
            try {
                std::size_t used = 0;
                v = std::stod(fields[c], &used);
                if (used != fields[c].size()) throw std::invalid_argument("trailing junk");
            } catch (const std::exception&) {
                parse_fail(path, row, "bad number '" + fields[c] + "'");
            }
            if (!(v >= 0.0 && v <= 1.0)) {
                parse_fail(path, row, "value " + fields[c] + " outside [0, 1]");
            }
            if (c < K) {
                xs.push_back(v);
            } else {
                ys.push_back(v);
            }
        }
    }

    Dataset ds;
    ds.n = static_cast<int>(ys.size());
    ds.K = K;
    ds.X = Matrix(ds.n, K);
    std::copy(xs.begin(), xs.end(), ds.X.data().begin());
    ds.Y = std::move(ys);
    ds.meta = DatasetMeta{0, K, ds.n, 0, 0.0};

    const auto meta_path = std::filesystem::path(path.string() + ".meta.json");
    if (std::filesystem::exists(meta_path)) {
        const auto j = nlohmann::json::parse(read_file(meta_path));
        ds.meta.seed = j.value("seed", std::uint64_t{0});
        ds.meta.K = j.value("K", K);
        ds.meta.n = j.value("n", ds.n);
        ds.meta.generator_version = j.value("generator_version", 0);
        ds.meta.y_min = j.value("y_min", 0.0);
    }
    return ds;
}

int bin_of(double y) {
    if (!(y >= 0.0 && y <= 1.0)) throw std::domain_error("bin_of: y outside [0, 1]");
    if (y < 0.2) return 0;
    if (y < 0.4) return 1;
    if (y < 0.6) return 2;
    if (y < 0.8) return 3;
    return 4;
}

}  // namespace vsense

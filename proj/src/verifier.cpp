#include "vsense/verifier.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <queue>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <json.hpp>

#include "vsense/attack.hpp"
#include "vsense/io_util.hpp"
#include "vsense/lp.hpp"

namespace vsense {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kIntegralityTol = 1e-9;

// Static MILP relaxation for one (net, box) pair. Variables are
// [z (K) | h (nU) | delta (nU)]; only the delta bounds change across nodes.
struct Formulation {
    int K = 0;
    std::vector<int> unstable;       // hidden unit index per h/delta pair
    Vector unit_l, unit_u;           // interval bounds of the unstable units
    lp::Problem prob;                // objective filled in per direction
    Vector obj_z;                    // sum_active w2_j W1_j
    double obj_const = 0.0;          // b2 + sum_active w2_j b1_j
};

Formulation build_formulation(const DenseNet& net, const Box& box) {
    Formulation f;
    f.K = net.input_dim;
    const PreactivationIntervals acts = preactivation_intervals(net, box);

    f.obj_const = net.b2;
    f.obj_z.assign(f.K, 0.0);
    for (int j = 0; j < net.hidden_dim; ++j) {
        switch (effective_phase(acts.l[j], acts.u[j])) {
            case Phase::Inactive:
                break;
            case Phase::Active:
                f.obj_const += net.w2[j] * net.b1[j];
                for (int i = 0; i < f.K; ++i) f.obj_z[i] += net.w2[j] * net.W1(j, i);
                break;
            case Phase::Unstable:
                f.unstable.push_back(j);
                f.unit_l.push_back(acts.l[j]);
                f.unit_u.push_back(acts.u[j]);
                break;
        }
    }

    const int nu = static_cast<int>(f.unstable.size());
    const int nvars = f.K + 2 * nu;
    lp::Problem& p = f.prob;
    p.c.assign(nvars, 0.0);
    p.A = Matrix(3 * nu, nvars);
    p.b.assign(3 * nu, 0.0);
    p.lb.assign(nvars, 0.0);
    p.ub.assign(nvars, 0.0);
    p.sense = lp::Sense::Maximize;

    for (int i = 0; i < f.K; ++i) {
        p.lb[i] = box.lo[i];
        p.ub[i] = box.hi[i];
    }
    for (int t = 0; t < nu; ++t) {
        const int j = f.unstable[t];
        const int vh = f.K + t;
        const int vd = f.K + nu + t;
        p.lb[vh] = 0.0;
        p.ub[vh] = f.unit_u[t];
        p.lb[vd] = 0.0;
        p.ub[vd] = 1.0;

        // h >= W1_j z + b1_j
        for (int i = 0; i < f.K; ++i) p.A(3 * t, i) = net.W1(j, i);
        p.A(3 * t, vh) = -1.0;
        p.b[3 * t] = -net.b1[j];
        // h <= u delta
        p.A(3 * t + 1, vh) = 1.0;
        p.A(3 * t + 1, vd) = -f.unit_u[t];
        p.b[3 * t + 1] = 0.0;
        // h <= W1_j z + b1_j - l (1 - delta)
        for (int i = 0; i < f.K; ++i) p.A(3 * t + 2, i) = -net.W1(j, i);
        p.A(3 * t + 2, vh) = 1.0;
        p.A(3 * t + 2, vd) = -f.unit_l[t];
        p.b[3 * t + 2] = net.b1[j] - f.unit_l[t];
    }
    return f;
}

struct Node {
    double key;                       // parent bound, valid for the subtree
    std::vector<signed char> fix;     // -1 free, 0 or 1 fixed
};

struct NodeOrder {
    bool operator()(const Node& a, const Node& b) const { return a.key < b.key; }
};

struct DirectionResult {
    double bound = 0.0;     // upper bound on direction * f over the box
    Vector witness;
    std::int64_t nodes = 0;
    bool timeout = false;
};

// Maximizes direction * f(z) over the box with branch-and-bound on the
// unstable ReLU indicators.
DirectionResult solve_direction(const DenseNet& net, const Box& box, Formulation& f,
                                double direction, double tol, std::int64_t node_limit) {
    DirectionResult res;
    const int nu = static_cast<int>(f.unstable.size());
    if (node_limit < 1) node_limit = 1;  // the root is always solved

    // Incumbent from projected gradient ascent, clamped into the box.
    Vector seed = pgd_extremize(net, box, direction, 50);
    double incumbent = direction * forward(net, seed);
    res.witness = seed;

    const double obj_const = direction * f.obj_const;
    if (nu == 0) {
        // Purely linear over the box; the extreme corner is exact.
        Vector corner(f.K);
        double val = obj_const;
        for (int i = 0; i < f.K; ++i) {
            const double coef = direction * f.obj_z[i];
            corner[i] = coef >= 0.0 ? box.hi[i] : box.lo[i];
            val += coef * corner[i];
        }
        res.bound = val;
        res.witness = corner;
        return res;
    }

    for (int i = 0; i < f.K; ++i) f.prob.c[i] = direction * f.obj_z[i];
    for (int t = 0; t < nu; ++t) {
        f.prob.c[f.K + t] = direction * net.w2[f.unstable[t]];
        f.prob.c[f.K + nu + t] = 0.0;
    }

    double fathomed = -kInf;  // max bound over finished subtrees
    std::priority_queue<Node, std::vector<Node>, NodeOrder> open;
    open.push(Node{kInf, std::vector<signed char>(nu, -1)});

    Vector zpart(f.K);
    while (!open.empty()) {
        if (res.nodes >= node_limit) {
            res.timeout = true;
            break;
        }
        Node node = open.top();
        open.pop();
        if (node.key <= incumbent + tol) {
            fathomed = std::max(fathomed, node.key);
            continue;
        }

        for (int t = 0; t < nu; ++t) {
            const int vd = f.K + nu + t;
            f.prob.lb[vd] = node.fix[t] == 1 ? 1.0 : 0.0;
            f.prob.ub[vd] = node.fix[t] == 0 ? 0.0 : 1.0;
        }
        const lp::Solution sol = lp::solve(f.prob);
        ++res.nodes;
        if (sol.status == lp::Status::Infeasible) continue;
        const double val = sol.value + obj_const;

        // The z part of any node LP point is feasible; use it to refresh the
        // incumbent.
        for (int i = 0; i < f.K; ++i) {
            zpart[i] = std::clamp(sol.point[i], box.lo[i], box.hi[i]);
        }
        const double cand = direction * forward(net, zpart);
        if (cand > incumbent) {
            incumbent = cand;
            res.witness = zpart;
        }

        if (val <= incumbent + tol) {
            fathomed = std::max(fathomed, val);
            continue;
        }

        int branch_t = -1;
        double best_frac = -1.0, best_weight = -1.0;
        for (int t = 0; t < nu; ++t) {
            if (node.fix[t] != -1) continue;
            const double d = sol.point[f.K + nu + t];
            const double frac = std::min(d, 1.0 - d);
            if (frac <= kIntegralityTol) continue;
            const double weight =
                std::abs(net.w2[f.unstable[t]]) * (f.unit_u[t] - f.unit_l[t]);
            if (frac > best_frac + 1e-12 ||
                (frac > best_frac - 1e-12 && weight > best_weight)) {
                best_frac = frac;
                best_weight = weight;
                branch_t = t;
            }
        }
        if (branch_t < 0) {
            // Integral relaxation: val is the exact optimum of this subtree.
            fathomed = std::max(fathomed, val);
            continue;
        }

        Node child0{val, node.fix};
        child0.fix[branch_t] = 0;
        Node child1{val, std::move(node.fix)};
        child1.fix[branch_t] = 1;
        open.push(std::move(child0));
        open.push(std::move(child1));
    }

    double bound = std::max(fathomed, incumbent);
    while (!open.empty()) {
        bound = std::max(bound, open.top().key);
        open.pop();
    }
    res.bound = bound;
    return res;
}

}  // namespace

Certificate exact_output_bounds(const DenseNet& net, const Box& box, double tol,
                                std::int64_t node_limit) {
    Formulation f = build_formulation(net, box);

    const DirectionResult up = solve_direction(net, box, f, 1.0, tol, node_limit);
    const DirectionResult down = solve_direction(net, box, f, -1.0, tol, node_limit);

    Certificate cert;
    cert.method = CertMethod::Milp;
    cert.bounds = BoundPair{-down.bound, up.bound};
    cert.witness_max = up.witness;
    cert.witness_min = down.witness;
    cert.node_count = up.nodes + down.nodes;
    cert.status = (up.timeout || down.timeout) ? CertStatus::Timeout : CertStatus::Certified;
    return cert;
}

std::vector<Certificate> verify_dataset(const DenseNet& net, const Dataset& data,
                                        const PerturbationSpec& spec, CertMethod method,
                                        double tol, std::int64_t node_limit, int jobs,
                                        int limit) {
    const int count = limit < 0 ? data.n : std::min(limit, data.n);
    std::vector<Certificate> certs(count);

    auto verify_one = [&](int i) {
        const Box box = box_of(spec, data.row(i));
        if (method == CertMethod::Dual) {
            certs[i].method = CertMethod::Dual;
            certs[i].bounds = dual_output_bounds(net, box);
            certs[i].status = CertStatus::Certified;
        } else {
            certs[i] = exact_output_bounds(net, box, tol, node_limit);
        }
        certs[i].example_id = i;
    };

    int workers = jobs > 0 ? jobs : static_cast<int>(std::thread::hardware_concurrency());
    workers = std::clamp(workers, 1, std::max(1, count));
    if (workers == 1 || method == CertMethod::Dual) {
        for (int i = 0; i < count; ++i) verify_one(i);
    } else {
        std::atomic<int> next{0};
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (int w = 0; w < workers; ++w) {
            pool.emplace_back([&] {
                for (int i = next.fetch_add(1); i < count; i = next.fetch_add(1)) {
                    verify_one(i);
                }
            });
        }
        for (auto& th : pool) th.join();
    }
    return certs;
}

namespace {

const char* to_string(CertMethod m) { return m == CertMethod::Dual ? "dual" : "milp"; }
const char* to_string(CertStatus s) {
    return s == CertStatus::Certified ? "certified" : "timeout";
}

}  // namespace

void save_certificates_jsonl(const std::vector<Certificate>& certs,
                             const std::filesystem::path& path) {
    std::ostringstream out;
    for (const Certificate& c : certs) {
        nlohmann::json j{{"example_id", c.example_id},
                         {"method", to_string(c.method)},
                         {"lower", c.bounds.lower},
                         {"upper", c.bounds.upper},
                         {"witness_max", c.witness_max},
                         {"witness_min", c.witness_min},
                         {"node_count", c.node_count},
                         {"status", to_string(c.status)}};
        out << j.dump() << '\n';
    }
    write_file_atomic(path, out.str());
}

std::vector<Certificate> load_certificates_jsonl(const std::filesystem::path& path) {
    std::istringstream in(read_file(path));
    std::vector<Certificate> certs;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const nlohmann::json j = nlohmann::json::parse(line);
        Certificate c;
        c.example_id = j.at("example_id").get<std::int64_t>();
        c.method = j.at("method").get<std::string>() == "dual" ? CertMethod::Dual
                                                               : CertMethod::Milp;
        c.bounds.lower = j.at("lower").get<double>();
        c.bounds.upper = j.at("upper").get<double>();
        c.witness_max = j.at("witness_max").get<Vector>();
        c.witness_min = j.at("witness_min").get<Vector>();
        c.node_count = j.at("node_count").get<std::int64_t>();
        c.status = j.at("status").get<std::string>() == "timeout" ? CertStatus::Timeout
                                                                  : CertStatus::Certified;
        certs.push_back(std::move(c));
    }
    return certs;
}

}  // namespace vsense

#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "vsense/data.hpp"
#include "vsense/dual_bound.hpp"
#include "vsense/net.hpp"
#include "vsense/perturb.hpp"

namespace vsense {

enum class CertMethod { Dual, Milp };
enum class CertStatus { Certified, Timeout };

// Per-example verification record. Witnesses are feasible inputs attaining
// the bounds within tolerance; they are produced by the MILP method only.
struct Certificate {
    std::int64_t example_id = 0;
    CertMethod method = CertMethod::Dual;
    BoundPair bounds;
    Vector witness_max, witness_min;
    std::int64_t node_count = 0;
    CertStatus status = CertStatus::Certified;
};

// Exact worst-case output bounds over the box by big-M branch-and-bound:
// stable units are substituted directly, each unstable unit gets a continuous
// h and a binary delta with the interval bounds as big-M constants. Node
// relaxations are LPs with delta in [0,1]; branching fixes the most
// fractional delta; incumbents are seeded by projected gradient ascent and
// refreshed from node LP points. On completion the bounds are exact within
// tol; if node_limit is hit the bounds are still sound but carry status
// Timeout. node_limit caps LP-solved nodes per optimization direction.
Certificate exact_output_bounds(const DenseNet& net, const Box& box, double tol = 1e-6,
                                std::int64_t node_limit = 1000000);

// One certificate per example (method Dual or Milp), ids following dataset
// order. limit < 0 verifies everything; jobs <= 0 picks the hardware
// concurrency. Per-example timeouts are recorded, never thrown.
std::vector<Certificate> verify_dataset(const DenseNet& net, const Dataset& data,
                                        const PerturbationSpec& spec, CertMethod method,
                                        double tol = 1e-6, std::int64_t node_limit = 1000000,
                                        int jobs = 0, int limit = -1);

void save_certificates_jsonl(const std::vector<Certificate>& certs,
                             const std::filesystem::path& path);
std::vector<Certificate> load_certificates_jsonl(const std::filesystem::path& path);

}  // namespace vsense

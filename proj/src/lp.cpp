#include "vsense/lp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace vsense::lp {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kCostTol = 1e-9;    // reduced-cost optimality tolerance
constexpr double kFeasTol = 1e-7;    // phase-1 infeasibility threshold
constexpr double kPivotTol = 1e-10;  // smallest usable pivot element
constexpr int kRefactorEvery = 64;

enum class VarState : unsigned char { Basic, AtLower, AtUpper };

// Internal solver over the extended variable set
//   [0, n)          structural
//   [n, n+p)        row slacks, bounds [0, inf)
//   [n+p, n+2p)     phase-1 artificials, bounds [0, inf) then fixed to 0
class Simplex {
public:
    explicit Simplex(const Problem& pr)
        : pr_(pr), n_(static_cast<int>(pr.c.size())), p_(static_cast<int>(pr.b.size())) {
        total_ = n_ + 2 * p_;
        lo_.resize(total_);
        up_.resize(total_);
        for (int j = 0; j < n_; ++j) {
            lo_[j] = pr.lb[j];
            up_[j] = pr.ub[j];
        }
        for (int j = n_; j < total_; ++j) {
            lo_[j] = 0.0;
            up_[j] = kInf;
        }
        art_sign_.assign(p_, 1.0);
        cost_.assign(total_, 0.0);
        state_.assign(total_, VarState::AtLower);
        binv_ = Matrix(p_, p_);
        basis_.resize(p_);
        xb_.assign(p_, 0.0);
        work_.assign(p_, 0.0);
    }

    Solution run() {
        setup_start_basis();
        if (have_artificials_) {
            for (int j = n_ + p_; j < total_; ++j) cost_[j] = 1.0;
            iterate();
            if (phase1_objective() > kFeasTol) {
                Solution sol;
                sol.status = Status::Infeasible;
                sol.iterations = iterations_;
                return sol;
            }
            drive_out_artificials();
        }
        for (int j = n_ + p_; j < total_; ++j) up_[j] = 0.0;  // pin artificials
        const double sign = pr_.sense == Sense::Maximize ? -1.0 : 1.0;
        for (int j = 0; j < n_; ++j) cost_[j] = sign * pr_.c[j];
        for (int j = n_; j < total_; ++j) cost_[j] = 0.0;
        iterate();

        Solution sol;
        sol.status = Status::Optimal;
        sol.iterations = iterations_;
        sol.point.resize(n_);
        for (int j = 0; j < n_; ++j) sol.point[j] = value_of(j);
        sol.value = 0.0;
        for (int j = 0; j < n_; ++j) sol.value += pr_.c[j] * sol.point[j];
        return sol;
    }

private:
    // Ā column of variable j into out.
    void column(int j, Vector& out) const {
        out.assign(p_, 0.0);
        if (j < n_) {
            for (int r = 0; r < p_; ++r) out[r] = pr_.A(r, j);
        } else if (j < n_ + p_) {
            out[j - n_] = 1.0;
        } else {
            out[j - n_ - p_] = art_sign_[j - n_ - p_];
        }
    }

    double value_of(int j) const {
        if (state_[j] == VarState::AtLower) return lo_[j];
        if (state_[j] == VarState::AtUpper) return up_[j];
        for (int r = 0; r < p_; ++r) {
            if (basis_[r] == j) return xb_[r];
        }
        return 0.0;  // unreachable for consistent state
    }

    void setup_start_basis() {
        // Structural variables start at their lower bound, slacks basic;
        // rows whose slack would start negative get an artificial instead.
        Vector resid = pr_.b;
        for (int j = 0; j < n_; ++j) {
            if (lo_[j] == 0.0) continue;
            for (int r = 0; r < p_; ++r) resid[r] -= pr_.A(r, j) * lo_[j];
        }
        binv_.fill(0.0);
        have_artificials_ = false;
        for (int r = 0; r < p_; ++r) {
            if (resid[r] >= 0.0) {
                basis_[r] = n_ + r;
                state_[n_ + r] = VarState::Basic;
                xb_[r] = resid[r];
                binv_(r, r) = 1.0;
            } else {
                art_sign_[r] = -1.0;
                basis_[r] = n_ + p_ + r;
                state_[n_ + p_ + r] = VarState::Basic;
                xb_[r] = -resid[r];
                binv_(r, r) = -1.0;
                have_artificials_ = true;
            }
        }
    }

    double phase1_objective() const {
        double obj = 0.0;
        for (int r = 0; r < p_; ++r) {
            if (basis_[r] >= n_ + p_) obj += xb_[r];
        }
        return obj;
    }

    // y = cost_B^T Binv
    void compute_duals(Vector& y) const {
        y.assign(p_, 0.0);
        for (int k = 0; k < p_; ++k) {
            const double cb = cost_[basis_[k]];
            if (cb == 0.0) continue;
            for (int r = 0; r < p_; ++r) y[r] += cb * binv_(k, r);
        }
    }

    double reduced_cost(int j, const Vector& y) const {
        if (j < n_) {
            double d = cost_[j];
            for (int r = 0; r < p_; ++r) d -= y[r] * pr_.A(r, j);
            return d;
        }
        if (j < n_ + p_) return cost_[j] - y[j - n_];
        return cost_[j] - y[j - n_ - p_] * art_sign_[j - n_ - p_];
    }

    void iterate() {
        Vector y, w;
        int degenerate_run = 0;
        bool bland = false;
        const long max_iters = 4000 + 400L * (n_ + p_);
        for (long iter = 0;; ++iter) {
            if (iter > max_iters) {
                throw std::runtime_error("simplex: iteration limit exceeded");
            }
            compute_duals(y);

            int enter = -1;
            double enter_score = kCostTol;
            for (int j = 0; j < total_; ++j) {
                if (state_[j] == VarState::Basic) continue;
                if (up_[j] - lo_[j] <= 0.0) continue;  // fixed, cannot move
                const double d = reduced_cost(j, y);
                const bool eligible = (state_[j] == VarState::AtLower && d < -kCostTol) ||
                                      (state_[j] == VarState::AtUpper && d > kCostTol);
                if (!eligible) continue;
                if (bland) {
                    enter = j;
                    break;
                }
                if (std::abs(d) > enter_score) {
                    enter_score = std::abs(d);
                    enter = j;
                }
            }
            if (enter < 0) return;  // optimal for current costs

            const double sigma = state_[enter] == VarState::AtLower ? 1.0 : -1.0;
            column(enter, work_);
            w.assign(p_, 0.0);
            for (int r = 0; r < p_; ++r) {
                double s = 0.0;
                for (int k = 0; k < p_; ++k) s += binv_(r, k) * work_[k];
                w[r] = s;
            }

            // Ratio test: smallest step that drives a basic variable to a
            // bound, against the entering variable's own bound-to-bound flip.
            double t_best = up_[enter] - lo_[enter];  // may be inf
            int leave_row = -1;
            bool leave_at_upper = false;
            for (int r = 0; r < p_; ++r) {
                const double delta = -sigma * w[r];
                const int bj = basis_[r];
                double t_r = kInf;
                bool hits_upper = false;
                if (delta > kPivotTol) {
                    if (up_[bj] == kInf) continue;
                    t_r = (up_[bj] - xb_[r]) / delta;
                    hits_upper = true;
                } else if (delta < -kPivotTol) {
                    t_r = (lo_[bj] - xb_[r]) / delta;
                } else {
                    continue;
                }
                if (t_r < 0.0) t_r = 0.0;  // numerical drift guard
                if (t_r < t_best - 1e-12 ||
                    (leave_row >= 0 && t_r < t_best + 1e-12 && bj < basis_[leave_row])) {
                    t_best = t_r;
                    leave_row = r;
                    leave_at_upper = hits_upper;
                }
            }

            if (leave_row < 0) {
                if (t_best == kInf) {
                    throw std::logic_error("simplex: unbounded direction in box-bounded problem");
                }
                // Bound flip, basis unchanged.
                for (int r = 0; r < p_; ++r) xb_[r] += -sigma * w[r] * t_best;
                state_[enter] =
                    state_[enter] == VarState::AtLower ? VarState::AtUpper : VarState::AtLower;
            } else {
                const double enter_start =
                    state_[enter] == VarState::AtLower ? lo_[enter] : up_[enter];
                apply_pivot(leave_row, enter, enter_start + sigma * t_best,
                            leave_at_upper ? VarState::AtUpper : VarState::AtLower, w, sigma,
                            t_best);
            }
            ++iterations_;

            if (t_best < 1e-10) {
                if (++degenerate_run > 2 * (n_ + p_ + 4)) bland = true;
            } else {
                degenerate_run = 0;
                bland = false;
            }
            if (iterations_ % kRefactorEvery == 0) refactorize();
        }
    }

    void apply_pivot(int row, int enter, double enter_value, VarState leave_state, const Vector& w,
                     double sigma, double t) {
        for (int r = 0; r < p_; ++r) xb_[r] += -sigma * w[r] * t;
        const int leaving = basis_[row];
        state_[leaving] = leave_state;
        basis_[row] = enter;
        state_[enter] = VarState::Basic;
        xb_[row] = enter_value;

        const double piv = w[row];
        for (int r = 0; r < p_; ++r) {
            if (r == row) continue;
            const double factor = w[r] / piv;
            if (factor == 0.0) continue;
            for (int k = 0; k < p_; ++k) binv_(r, k) -= factor * binv_(row, k);
        }
        for (int k = 0; k < p_; ++k) binv_(row, k) /= piv;
    }

    void drive_out_artificials() {
        Vector w(p_);
        for (int r = 0; r < p_; ++r) {
            if (basis_[r] < n_ + p_) continue;
            int enter = -1;
            for (int j = 0; j < n_ + p_; ++j) {
                if (state_[j] == VarState::Basic) continue;
                column(j, work_);
                double wr = 0.0;
                for (int k = 0; k < p_; ++k) wr += binv_(r, k) * work_[k];
                if (std::abs(wr) > kFeasTol) {
                    enter = j;
                    break;
                }
            }
            if (enter < 0) continue;  // redundant row; artificial stays pinned at 0
            column(enter, work_);
            for (int rr = 0; rr < p_; ++rr) {
                double s = 0.0;
                for (int k = 0; k < p_; ++k) s += binv_(rr, k) * work_[k];
                w[rr] = s;
            }
            const double enter_value =
                state_[enter] == VarState::AtLower ? lo_[enter] : up_[enter];
            apply_pivot(r, enter, enter_value, VarState::AtLower, w, 1.0, 0.0);
            ++iterations_;
        }
    }

    void refactorize() {
        // Rebuild Binv by Gauss-Jordan on the basis matrix and recompute the
        // basic values from the nonbasic assignment.
        Matrix tab(p_, 2 * p_);
        Vector col(p_);
        for (int c = 0; c < p_; ++c) {
            column(basis_[c], col);
            for (int r = 0; r < p_; ++r) tab(r, c) = col[r];
        }
        for (int r = 0; r < p_; ++r) tab(r, p_ + r) = 1.0;
        for (int c = 0; c < p_; ++c) {
            int piv = c;
            for (int r = c + 1; r < p_; ++r) {
                if (std::abs(tab(r, c)) > std::abs(tab(piv, c))) piv = r;
            }
            if (std::abs(tab(piv, c)) < 1e-13) {
                throw std::runtime_error("simplex: singular basis during refactorization");
            }
            if (piv != c) {
                for (int k = 0; k < 2 * p_; ++k) std::swap(tab(c, k), tab(piv, k));
            }
            const double inv = 1.0 / tab(c, c);
            for (int k = 0; k < 2 * p_; ++k) tab(c, k) *= inv;
            for (int r = 0; r < p_; ++r) {
                if (r == c) continue;
                const double f = tab(r, c);
                if (f == 0.0) continue;
                for (int k = 0; k < 2 * p_; ++k) tab(r, k) -= f * tab(c, k);
            }
        }
        for (int r = 0; r < p_; ++r) {
            for (int k = 0; k < p_; ++k) binv_(r, k) = tab(r, p_ + k);
        }

        Vector rhs = pr_.b;
        for (int j = 0; j < total_; ++j) {
            if (state_[j] == VarState::Basic) continue;
            const double v = state_[j] == VarState::AtLower ? lo_[j] : up_[j];
            if (v == 0.0) continue;
            column(j, col);
            for (int r = 0; r < p_; ++r) rhs[r] -= col[r] * v;
        }
        for (int r = 0; r < p_; ++r) {
            double s = 0.0;
            for (int k = 0; k < p_; ++k) s += binv_(r, k) * rhs[k];
            xb_[r] = s;
        }
    }

    const Problem& pr_;
    int n_, p_, total_;
    Vector lo_, up_, cost_;
    Vector art_sign_;
    std::vector<VarState> state_;
    std::vector<int> basis_;
    Matrix binv_;
    Vector xb_, work_;
    bool have_artificials_ = false;
    int iterations_ = 0;
};

}  // namespace

Solution solve(const Problem& problem) {
    const std::size_t n = problem.c.size();
    const std::size_t p = problem.b.size();
    if (problem.A.rows() != p || (p > 0 && problem.A.cols() != n) ||
        problem.lb.size() != n || problem.ub.size() != n) {
        throw std::invalid_argument("lp::solve: inconsistent problem shapes");
    }
    for (std::size_t j = 0; j < n; ++j) {
        if (!(problem.lb[j] <= problem.ub[j])) {
            throw std::invalid_argument("lp::solve: lb > ub");
        }
        if (!std::isfinite(problem.lb[j]) || !std::isfinite(problem.ub[j])) {
            throw std::invalid_argument("lp::solve: variable bounds must be finite");
        }
    }
    Simplex simplex(problem);
    return simplex.run();
}

}  // namespace vsense::lp

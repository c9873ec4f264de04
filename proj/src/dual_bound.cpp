#include "vsense/dual_bound.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace vsense {

Phase effective_phase(double l, double u) {
    constexpr double kDegenerateWidth = 1e-12;
    if (u <= 0.0) return Phase::Inactive;
    if (l >= 0.0) return Phase::Active;
    if (u - l < kDegenerateWidth) {
        return (l + u >= 0.0) ? Phase::Active : Phase::Inactive;
    }
    return Phase::Unstable;
}

PreactivationIntervals preactivation_intervals(const DenseNet& net, const Box& box) {
    if (static_cast<int>(box.dim()) != net.input_dim) {
        throw std::invalid_argument("preactivation_intervals: box dimension mismatch");
    }
    PreactivationIntervals out;
    out.l.resize(net.hidden_dim);
    out.u.resize(net.hidden_dim);
    out.phase.resize(net.hidden_dim);
    for (int j = 0; j < net.hidden_dim; ++j) {
        double lo = net.b1[j], hi = net.b1[j];
        for (int i = 0; i < net.input_dim; ++i) {
            const double w = net.W1(j, i);
            const double a = w * box.lo[i];
            const double b = w * box.hi[i];
            lo += std::min(a, b);
            hi += std::max(a, b);
        }
        out.l[j] = lo;
        out.u[j] = hi;
        out.phase[j] = hi <= 0.0 ? Phase::Inactive
                     : lo >= 0.0 ? Phase::Active
                                 : Phase::Unstable;
    }
    return out;
}

BoundPair dual_output_bounds(const DenseNet& net, const Box& box, DualTape* tape) {
    const int m = net.hidden_dim;
    const int K = net.input_dim;
    const PreactivationIntervals acts = preactivation_intervals(net, box);

    DualTape local;
    DualTape& tp = tape ? *tape : local;
    tp.l = acts.l;
    tp.u = acts.u;
    tp.phase.resize(m);
    tp.s.assign(m, 0.0);
    for (int j = 0; j < m; ++j) {
        tp.phase[j] = effective_phase(acts.l[j], acts.u[j]);
        if (tp.phase[j] == Phase::Unstable) {
            tp.s[j] = acts.u[j] / (acts.u[j] - acts.l[j]);
        }
    }

    for (int dir = 0; dir < 2; ++dir) {
        const double c = dir == 0 ? 1.0 : -1.0;
        Vector& nu = tp.nu[dir];
        Vector& g = tp.g[dir];
        nu.assign(m, 0.0);
        g.assign(K, 0.0);

        double J = c * net.b2;
        for (int j = 0; j < m; ++j) {
            if (tp.phase[j] == Phase::Inactive) continue;
            const double chat = c * net.w2[j];
            const double d = tp.phase[j] == Phase::Active ? 1.0 : tp.s[j];
            nu[j] = chat * d;
            J += nu[j] * net.b1[j];
            if (tp.phase[j] == Phase::Unstable && chat > 0.0) {
                J += chat * tp.s[j] * (-tp.l[j]);
            }
            for (int i = 0; i < K; ++i) g[i] += nu[j] * net.W1(j, i);
        }
        for (int i = 0; i < K; ++i) {
            J += std::max(g[i] * box.lo[i], g[i] * box.hi[i]);
        }
        tp.J[dir] = J;
    }

    return BoundPair{-tp.J[1], tp.J[0]};
}

void accumulate_dual_bound_gradient(const DenseNet& net, const Box& box, const DualTape& tape,
                                    int dir, double upstream, Gradients& grads) {
    const int m = net.hidden_dim;
    const int K = net.input_dim;
    const double c = dir == 0 ? 1.0 : -1.0;
    const Vector& nu = tape.nu[dir];
    const Vector& g = tape.g[dir];

    // Box corner selected by the final max(g_i lo_i, g_i hi_i) term.
    Vector e(K);
    for (int i = 0; i < K; ++i) e[i] = g[i] >= 0.0 ? box.hi[i] : box.lo[i];

    grads.b2 += upstream * c;
    for (int j = 0; j < m; ++j) {
        if (tape.phase[j] == Phase::Inactive) continue;
        const double chat = c * net.w2[j];
        // dJ/d(nu_j): coefficient nu_j multiplies b1_j + W1_j . e.
        const double dJ_dnu = net.b1[j] + dot(net.W1.row(j), e);

        if (tape.phase[j] == Phase::Active) {
            grads.w2[j] += upstream * dJ_dnu * c;
            grads.b1[j] += upstream * nu[j];
            for (int i = 0; i < K; ++i) grads.W1(j, i) += upstream * nu[j] * e[i];
            continue;
        }

        // Unstable unit: nu_j = chat * s_j, kappa_j = [chat>0] chat s_j (-l_j).
        const double s = tape.s[j];
        const double l = tape.l[j];
        const double u = tape.u[j];
        const bool has_kappa = chat > 0.0;

        grads.w2[j] += upstream * c * (dJ_dnu * s + (has_kappa ? s * (-l) : 0.0));

        double dJ_ds = dJ_dnu * chat;
        if (has_kappa) dJ_ds += chat * (-l);
        const double dJ_dl_direct = has_kappa ? -chat * s : 0.0;

        const double den = u - l;
        const double ds_du = -l / (den * den);
        const double ds_dl = u / (den * den);
        const double dJ_du = dJ_ds * ds_du;
        const double dJ_dl = dJ_ds * ds_dl + dJ_dl_direct;

        grads.b1[j] += upstream * (nu[j] + dJ_du + dJ_dl);
        for (int i = 0; i < K; ++i) {
            const bool wpos = net.W1(j, i) >= 0.0;
            const double dl_dw = wpos ? box.lo[i] : box.hi[i];
            const double du_dw = wpos ? box.hi[i] : box.lo[i];
            grads.W1(j, i) += upstream * (nu[j] * e[i] + dJ_du * du_dw + dJ_dl * dl_dw);
        }
    }
}

double robust_mse(const BoundPair& bounds, double y) {
    const double a = bounds.lower - y;
    const double b = bounds.upper - y;
    return std::max(a * a, b * b);
}

double certified_relative_error(const BoundPair& bounds, double y) {
    if (y == 0.0) throw std::domain_error("certified_relative_error: y must be nonzero");
    return std::max(std::abs(bounds.lower - y), std::abs(bounds.upper - y)) / std::abs(y);
}

double robust_mse_loss(const DenseNet& net, const Batch& batch, const std::vector<Box>& boxes) {
    if (batch.size() == 0) throw std::invalid_argument("robust_mse_loss: empty batch");
    if (boxes.size() != batch.size()) {
        throw std::invalid_argument("robust_mse_loss: one box per example required");
    }
    double loss = 0.0;
    for (std::size_t k = 0; k < batch.size(); ++k) {
        loss += robust_mse(dual_output_bounds(net, boxes[k]), batch.y[k]);
    }
    return loss / static_cast<double>(batch.size());
}

double robust_mse_loss_gradients(const DenseNet& net, const Batch& batch,
                                 const std::vector<Box>& boxes, Gradients& grads,
                                 double weight) {
    if (batch.size() == 0) throw std::invalid_argument("robust_mse_loss_gradients: empty batch");
    if (boxes.size() != batch.size()) {
        throw std::invalid_argument("robust_mse_loss_gradients: one box per example required");
    }
    const double inv_b = 1.0 / static_cast<double>(batch.size());
    double loss = 0.0;
    DualTape tape;
    for (std::size_t k = 0; k < batch.size(); ++k) {
        const BoundPair bounds = dual_output_bounds(net, boxes[k], &tape);
        const double dl = bounds.lower - batch.y[k];
        const double du = bounds.upper - batch.y[k];
        // Tie goes to the upper branch.
        if (du * du >= dl * dl) {
            loss += du * du;
            accumulate_dual_bound_gradient(net, boxes[k], tape, 0,
                                           weight * inv_b * 2.0 * du, grads);
        } else {
            loss += dl * dl;
            // lower = -J[1], so d(loss)/dJ[1] = -2 (l - y).
            accumulate_dual_bound_gradient(net, boxes[k], tape, 1,
                                           weight * inv_b * -2.0 * dl, grads);
        }
    }
    return loss * inv_b;
}

}  // namespace vsense

#include "vsense/train.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace vsense {

std::string to_string(TrainMode mode) {
    switch (mode) {
        case TrainMode::Standard: return "standard";
        case TrainMode::Noise: return "noise";
        case TrainMode::Robust: return "robust";
        case TrainMode::Targeted: return "targeted";
    }
    return "standard";
}

TrainMode train_mode_from_string(const std::string& name) {
    if (name == "standard") return TrainMode::Standard;
    if (name == "noise") return TrainMode::Noise;
    if (name == "robust") return TrainMode::Robust;
    if (name == "targeted") return TrainMode::Targeted;
    throw std::invalid_argument("unknown training mode: " + name);
}

void validate(const TrainConfig& cfg) {
    if (cfg.epochs < 1) throw std::invalid_argument("epochs must be >= 1");
    if (cfg.batch_size < 1) throw std::invalid_argument("batch_size must be >= 1");
    if (cfg.hidden_dim < 1) throw std::invalid_argument("hidden_dim must be >= 1");
    if (!(cfg.lambda >= 0.0 && cfg.lambda <= 1.0)) {
        throw std::invalid_argument("lambda must lie in [0, 1]");
    }
    if (cfg.lr_peak_epoch < 0 || cfg.lr_peak_epoch > cfg.epochs) {
        throw std::invalid_argument("lr_peak_epoch must lie in [0, epochs]");
    }
    if (!(cfg.target_lo >= 0.0 && cfg.target_hi <= 1.0 && cfg.target_lo <= cfg.target_hi)) {
        throw std::invalid_argument("target range must be a subinterval of [0, 1]");
    }
    if (cfg.eps_ramp_epochs < 0) throw std::invalid_argument("eps_ramp_epochs must be >= 0");
    if (!(cfg.momentum >= 0.0 && cfg.momentum < 1.0)) {
        throw std::invalid_argument("momentum must lie in [0, 1)");
    }
    if (cfg.lr_peak < 0.0) throw std::invalid_argument("lr_peak must be >= 0");
}

double cyclic_lr(int epoch, const TrainConfig& cfg) {
    if (epoch < 0 || epoch >= cfg.epochs) {
        throw std::out_of_range("cyclic_lr: epoch outside [0, epochs)");
    }
    if (epoch <= cfg.lr_peak_epoch) {
        if (cfg.lr_peak_epoch == 0) return cfg.lr_peak;
        return cfg.lr_peak * static_cast<double>(epoch) / cfg.lr_peak_epoch;
    }
    const int tail = cfg.epochs - cfg.lr_peak_epoch;
    return cfg.lr_peak * static_cast<double>(cfg.epochs - epoch) / tail;
}

namespace {

void apply_momentum_step(DenseNet& net, Gradients& vel, const Gradients& grads, double momentum,
                         double lr) {
    auto update = [momentum, lr](double& v, double& p, double g) {
        v = momentum * v - lr * g;
        p += v;
    };
    for (std::size_t i = 0; i < vel.W1.data().size(); ++i) {
        update(vel.W1.data()[i], net.W1.data()[i], grads.W1.data()[i]);
    }
    for (std::size_t j = 0; j < vel.b1.size(); ++j) update(vel.b1[j], net.b1[j], grads.b1[j]);
    for (std::size_t j = 0; j < vel.w2.size(); ++j) update(vel.w2[j], net.w2[j], grads.w2[j]);
    update(vel.b2, net.b2, grads.b2);
}

}  // namespace

TrainResult train(const Dataset& data, const TrainConfig& cfg, const PerturbationSpec& spec) {
    validate(cfg);
    if (data.n < 1) throw std::invalid_argument("train: empty dataset");

    std::vector<int> target_subset;
    if (cfg.mode == TrainMode::Targeted) {
        for (int i = 0; i < data.n; ++i) {
            if (data.Y[i] >= cfg.target_lo && data.Y[i] <= cfg.target_hi) {
                target_subset.push_back(i);
            }
        }
        if (target_subset.empty()) {
            throw std::invalid_argument("train: targeted mode with empty target subset");
        }
    }

    Rng rng(cfg.seed);
    DenseNet net = init_net(data.K, cfg.hidden_dim, rng);
    net.meta = ModelMeta{to_string(cfg.mode), cfg.seed, spec.eps_series, spec.eps_scalar,
                         cfg.mode == TrainMode::Targeted ? cfg.lambda : 0.0};

    Gradients vel(net), grads(net);
    std::vector<int> order(data.n);
    std::iota(order.begin(), order.end(), 0);

    const bool uses_ramp = cfg.mode == TrainMode::Robust || cfg.mode == TrainMode::Targeted;

    Batch batch, robust_batch;
    std::vector<Box> boxes;
    Matrix noisy;  // per-batch scratch for noise-mode draws
    if (cfg.mode == TrainMode::Noise) noisy = Matrix(cfg.batch_size, data.K);

    TrainResult result;
    result.epoch_loss.resize(cfg.epochs);

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        const double lr = cyclic_lr(epoch, cfg);
        double ramp = 1.0;
        if (uses_ramp && cfg.eps_ramp_epochs > 0) {
            ramp = std::min(1.0, static_cast<double>(epoch) / cfg.eps_ramp_epochs);
        }
        const PerturbationSpec eff = spec.scaled(ramp);

        rng.shuffle(order);
        double loss_sum = 0.0;

        for (int start = 0; start < data.n; start += cfg.batch_size) {
            const int count = std::min(cfg.batch_size, data.n - start);
            batch.x.clear();
            batch.y.clear();
            for (int k = 0; k < count; ++k) {
                const int idx = order[start + k];
                batch.x.push_back(data.row(idx));
                batch.y.push_back(data.Y[idx]);
            }

            grads.zero();
            double loss = 0.0;
            switch (cfg.mode) {
                case TrainMode::Standard:
                    loss = mse_loss_gradients(net, batch, grads);
                    break;
                case TrainMode::Noise: {
                    for (int k = 0; k < count; ++k) {
                        const Box box = box_of(spec, batch.x[k]);
                        const Vector z = sample_uniform(box, rng);
                        std::copy(z.begin(), z.end(), noisy.row(k).begin());
                        batch.x[k] = noisy.row(k);
                    }
                    loss = mse_loss_gradients(net, batch, grads);
                    break;
                }
                case TrainMode::Robust: {
                    if (eff.zero()) {
                        // The bounds collapse to f(x), so robust MSE is plain
                        // MSE; take the exact path.
                        loss = mse_loss_gradients(net, batch, grads);
                    } else {
                        boxes.clear();
                        for (int k = 0; k < count; ++k) boxes.push_back(box_of(eff, batch.x[k]));
                        loss = robust_mse_loss_gradients(net, batch, boxes, grads);
                    }
                    break;
                }
                case TrainMode::Targeted: {
                    const double lam = cfg.lambda;
                    loss = lam * mse_loss_gradients(net, batch, grads, lam);
                    if (lam < 1.0) {
                        robust_batch.x.clear();
                        robust_batch.y.clear();
                        for (int k = 0; k < count; ++k) {
                            if (batch.y[k] >= cfg.target_lo && batch.y[k] <= cfg.target_hi) {
                                robust_batch.x.push_back(batch.x[k]);
                                robust_batch.y.push_back(batch.y[k]);
                            }
                        }
                        if (!robust_batch.y.empty()) {
                            double rloss = 0.0;
                            if (eff.zero()) {
                                rloss = mse_loss_gradients(net, robust_batch, grads, 1.0 - lam);
                            } else {
                                boxes.clear();
                                for (std::size_t k = 0; k < robust_batch.size(); ++k) {
                                    boxes.push_back(box_of(eff, robust_batch.x[k]));
                                }
                                rloss = robust_mse_loss_gradients(net, robust_batch, boxes, grads,
                                                                  1.0 - lam);
                            }
                            loss += (1.0 - lam) * rloss;
                        }
                    }
                    break;
                }
            }

            apply_momentum_step(net, vel, grads, cfg.momentum, lr);
            loss_sum += loss * count;
        }

        result.epoch_loss[epoch] = loss_sum / data.n;
        if (!all_finite(net)) {
            throw std::runtime_error("train: parameters became non-finite at epoch " +
                                     std::to_string(epoch));
        }
    }

    result.net = std::move(net);
    return result;
}

}  // namespace vsense

#pragma once

#include <cstdint>
#include <string>

#include "vsense/data.hpp"
#include "vsense/dual_bound.hpp"
#include "vsense/net.hpp"
#include "vsense/perturb.hpp"

namespace vsense {

enum class TrainMode { Standard, Noise, Robust, Targeted };

std::string to_string(TrainMode mode);
TrainMode train_mode_from_string(const std::string& name);

struct TrainConfig {
    TrainMode mode = TrainMode::Standard;
    int epochs = 1000;
    int batch_size = 512;
    double momentum = 0.9;
    double lr_peak = 0.035;
    int lr_peak_epoch = 250;
    double lambda = 0.8;         // targeted mode only
    double target_lo = 0.6;
    double target_hi = 1.0;
    int eps_ramp_epochs = 250;   // robust/targeted: epsilon ramp length
    std::uint64_t seed = 0;
    int hidden_dim = 32;
};

// Throws std::invalid_argument when a field violates its range.
void validate(const TrainConfig& cfg);

// One triangular cycle: linear 0 -> lr_peak over [0, lr_peak_epoch], then
// linear lr_peak -> 0 over [lr_peak_epoch, epochs].
double cyclic_lr(int epoch, const TrainConfig& cfg);

struct TrainResult {
    DenseNet net;
    Vector epoch_loss;   // mean training loss per epoch, in the mode's own loss
};

// SGD with heavy-ball momentum over the configured number of epochs.
// standard: mean squared error on the clean data.
// noise:    MSE on examples resampled uniformly from their boxes every epoch.
// robust:   mean robust MSE through the dual bounds (epsilon ramped linearly
//           from zero over eps_ramp_epochs).
// targeted: lambda * MSE(all) + (1-lambda) * robustMSE(y in target range).
// Runs are bit-reproducible for a fixed config and seed.
TrainResult train(const Dataset& data, const TrainConfig& cfg, const PerturbationSpec& spec);

}  // namespace vsense

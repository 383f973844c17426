#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "patrol/rng.hpp"
#include "patrol/transition.hpp"

namespace patrol {

// Fully connected Q-network: rectified-linear hidden layers, linear output.
// Weights are row-major (out x in) per layer.
struct QParams {
    std::vector<int> dims;
    std::vector<std::vector<double>> weights;
    std::vector<std::vector<double>> biases;

    int layer_count() const { return static_cast<int>(dims.size()) - 1; }
    int input_dim() const { return dims.front(); }
    int output_dim() const { return dims.back(); }
    size_t parameter_count() const;
    bool same_shape(const QParams& other) const { return dims == other.dims; }

    static QParams zeros(const std::vector<int>& dims);
    // Variance-scaled symmetric init: U(-sqrt(6/fan_in), sqrt(6/fan_in)), zero biases.
    static QParams he_init(const std::vector<int>& dims, Rng& rng);
};

using TargetParams = QParams;

// Network shape of the reference configuration and the fast desk preset.
const std::vector<int>& paper_net_dims();
const std::vector<int>& desk_net_dims();

std::vector<double> forward(const QParams& params, std::span<const double> input);

// Argmax over entries with mask set; ties resolve to the lowest index
// (canonical action order). Throws when the mask is empty.
int masked_argmax(std::span<const double> q, const ActionMask& mask);

struct LossGrad {
    double loss = 0.0;
    QParams grads;  // same shapes as the parameters
};

// Mean squared Bellman residual with Double-DQN targets:
//   Y_t = r_t + gamma * Q(s', argmax_{u' feasible} Q(s',u'; params); target)
// Gradients flow only through Q(s_t, u_t; params).
LossGrad loss_and_grad(const QParams& params, const TargetParams& target,
                       std::span<const Transition> batch, double gamma);

// Adaptive-moment optimizer state.
struct AdamState {
    double lr = 1e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    uint64_t step = 0;
    std::vector<std::vector<double>> m_w, v_w, m_b, v_b;

    static AdamState init(const QParams& params, double lr = 1e-4);
};

void optimizer_step(QParams& params, const QParams& grads, AdamState& opt);

void hard_update(TargetParams& target, const QParams& params);

// Versioned binary checkpoint: magic, dims, key-value metadata, then the
// parameter tensors (and optionally the optimizer state) as little-endian f64.
using Metadata = std::map<std::string, std::string>;

std::vector<uint8_t> save_checkpoint(const QParams& params, const AdamState* opt,
                                     const Metadata& metadata);

struct Checkpoint {
    QParams params;
    std::optional<AdamState> opt;
    Metadata metadata;
};

Checkpoint load_checkpoint(std::span<const uint8_t> bytes);

void save_checkpoint_file(const std::string& path, const QParams& params,
                          const AdamState* opt, const Metadata& metadata);
Checkpoint load_checkpoint_file(const std::string& path);

}  // namespace patrol

#pragma once

#include "nmtlab/nnet/autodiff.hpp"

#include <json.hpp>

#include <span>
#include <vector>

namespace nmtlab::nnet {

enum class Schedule {
    constant,             // eta_t = eta * constant_scale
    inverse_sqrt_warmup,  // eta_t = eta * d_model^-0.5 * min(t^-0.5, t * warmup^-1.5)
};

struct OptimizerHyper {
    double eta = 1.0;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-7;
    Schedule schedule = Schedule::inverse_sqrt_warmup;
    int warmup_steps = 400;
    double constant_scale = 0.001;

    void validate() const;
    nlohmann::json to_json() const;
    static OptimizerHyper from_json(const nlohmann::json& j);

    // Transformer: warmup schedule. LSTM: constant 0.001 * eta.
    static OptimizerHyper lstm_default();
    static OptimizerHyper transformer_default();

    bool operator==(const OptimizerHyper&) const = default;
};

// Step size for 1-based step t.
double learning_rate(const OptimizerHyper& hyper, long t, int d_model);

// First and second moment estimates, one buffer per parameter tensor.
struct AdamState {
    std::vector<Mat> m;
    std::vector<Mat> v;

    static AdamState zeros_like(const ParamStore& params);
    bool operator==(const AdamState& o) const;
};

// One Adam update on flat buffers with an explicit step size:
//   m <- b1 m + (1 - b1) g;  v <- b2 v + (1 - b2) g^2
//   p <- p - lr * mhat / (sqrt(vhat) + eps),  mhat = m / (1 - b1^t), vhat = v / (1 - b2^t)
void adam_update(std::span<double> params, std::span<const double> grads, std::span<double> m,
                 std::span<double> v, const OptimizerHyper& hyper, long t, double lr);

// Applies adam_update to every tensor of the store using its gradient buffers.
void adam_step(ParamStore& params, AdamState& state, const OptimizerHyper& hyper, long t, double lr);

} // namespace nmtlab::nnet

#pragma once

#include "nmtlab/nnet/model.hpp"

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace nmtlab::nnet {

struct GradCheckOptions {
    double step_size = 3e-5;
    std::size_t min_coordinates = 200;  // every coordinate when the model is smaller
    std::uint64_t seed = 0;             // picks the coordinate subset
    // A difference whose two sides flip some relu is retried with the step
    // halved, at most this many times.
    int max_halvings = 12;
};

struct GradCheckResult {
    double max_relative_error = 0.0;
    std::string worst_parameter;
    long worst_index = -1;
    double analytic = 0.0;
    double numeric = 0.0;
    std::size_t coordinates = 0;
    std::size_t halved = 0;  // coordinates that needed a smaller step
};

// |a - n| / max(|a|, |n|, 1e-8)
double relative_error(double analytic, double numeric);

// Loss at the current parameter values. When the sink is non-null it receives
// the activation sign pattern of the evaluation (relu kinks).
using LossProbe = std::function<long double(std::vector<unsigned char>* signs)>;

// Compares the gradient left in params by `loss_with_grad` against central
// differences (L(x+h) - L(x-h)) / 2h of `loss`. Every parameter tensor
// contributes at least one coordinate; the rest are drawn uniformly.
GradCheckResult grad_check(ParamStore& params, const std::function<double()>& loss_with_grad, const LossProbe& loss,
                           const GradCheckOptions& options = {});

// Model loss without dropout. The loss is re-summed from the logits in long
// double so the differences are not limited by the rounding of the final mean.
GradCheckResult grad_check(const ModelConfig& config, ParamStore& params, const std::vector<Example>& batch,
                           const GradCheckOptions& options = {});

} // namespace nmtlab::nnet

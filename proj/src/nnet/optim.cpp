#include "nmtlab/nnet/optim.hpp"

#include "nmtlab/error.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

namespace nmtlab::nnet {

void OptimizerHyper::validate() const {
    if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0))
        throw Error("Adam decay rates must lie in [0, 1)");
    if (!(epsilon > 0.0)) throw Error("Adam epsilon must be positive");
    if (schedule == Schedule::inverse_sqrt_warmup && warmup_steps < 1) throw Error("warmup_steps must be >= 1");
}

nlohmann::json OptimizerHyper::to_json() const {
    return {{"eta", eta},
            {"beta1", beta1},
            {"beta2", beta2},
            {"epsilon", epsilon},
            {"schedule", schedule == Schedule::constant ? "constant" : "inverse_sqrt_warmup"},
            {"warmup_steps", warmup_steps},
            {"constant_scale", constant_scale}};
}

OptimizerHyper OptimizerHyper::from_json(const nlohmann::json& j) {
    OptimizerHyper h;
    h.eta = j.value("eta", h.eta);
    h.beta1 = j.value("beta1", h.beta1);
    h.beta2 = j.value("beta2", h.beta2);
    h.epsilon = j.value("epsilon", h.epsilon);
    const std::string s = j.value("schedule", std::string("inverse_sqrt_warmup"));
    if (s == "constant") h.schedule = Schedule::constant;
    else if (s == "inverse_sqrt_warmup") h.schedule = Schedule::inverse_sqrt_warmup;
    else throw Error("unknown schedule '" + s + "'");
    h.warmup_steps = j.value("warmup_steps", h.warmup_steps);
    h.constant_scale = j.value("constant_scale", h.constant_scale);
    h.validate();
    return h;
}

OptimizerHyper OptimizerHyper::lstm_default() {
    OptimizerHyper h;
    h.schedule = Schedule::constant;
    return h;
}

OptimizerHyper OptimizerHyper::transformer_default() { return OptimizerHyper{}; }

double learning_rate(const OptimizerHyper& h, long t, int d_model) {
    if (t < 1) throw Error("optimizer step must be >= 1");
    if (h.schedule == Schedule::constant) return h.eta * h.constant_scale;
    const double step = static_cast<double>(t);
    const double warm = static_cast<double>(h.warmup_steps);
    return h.eta / std::sqrt(static_cast<double>(d_model)) *
           std::min(1.0 / std::sqrt(step), step * std::pow(warm, -1.5));
}

AdamState AdamState::zeros_like(const ParamStore& params) {
    AdamState s;
    for (std::size_t i = 0; i < params.size(); ++i) {
        const Mat& p = params.value(static_cast<int>(i));
        s.m.push_back(Mat::Zero(p.rows(), p.cols()));
        s.v.push_back(Mat::Zero(p.rows(), p.cols()));
    }
    return s;
}

bool AdamState::operator==(const AdamState& o) const {
    if (m.size() != o.m.size()) return false;
    for (std::size_t i = 0; i < m.size(); ++i) {
        if (m[i].size() != o.m[i].size() || v[i].size() != o.v[i].size()) return false;
        const auto bytes = sizeof(double) * static_cast<std::size_t>(m[i].size());
        if (std::memcmp(m[i].data(), o.m[i].data(), bytes) || std::memcmp(v[i].data(), o.v[i].data(), bytes))
            return false;
    }
    return true;
}

void adam_update(std::span<double> params, std::span<const double> grads, std::span<double> m,
                 std::span<double> v, const OptimizerHyper& h, long t, double lr) {
    if (grads.size() != params.size() || m.size() != params.size() || v.size() != params.size())
        throw Error("adam_update: buffer sizes disagree");
    if (t < 1) throw Error("adam_update: step must be >= 1");
    const double bc1 = 1.0 - std::pow(h.beta1, static_cast<double>(t));
    const double bc2 = 1.0 - std::pow(h.beta2, static_cast<double>(t));
    for (std::size_t i = 0; i < params.size(); ++i) {
        const double g = grads[i];
        m[i] = h.beta1 * m[i] + (1.0 - h.beta1) * g;
        v[i] = h.beta2 * v[i] + (1.0 - h.beta2) * g * g;
        const double mhat = m[i] / bc1;
        const double vhat = v[i] / bc2;
        params[i] -= lr * mhat / (std::sqrt(vhat) + h.epsilon);
    }
}

void adam_step(ParamStore& params, AdamState& state, const OptimizerHyper& h, long t, double lr) {
    if (state.m.size() != params.size()) throw Error("adam_step: optimizer state does not match parameters");
    for (std::size_t i = 0; i < params.size(); ++i) {
        const int id = static_cast<int>(i);
        Mat& p = params.value(id);
        const Mat& g = params.grad(id);
        const auto n = static_cast<std::size_t>(p.size());
        adam_update({p.data(), n}, {g.data(), n}, {state.m[i].data(), n}, {state.v[i].data(), n}, h, t, lr);
    }
}

} // namespace nmtlab::nnet

#include "nmtlab/nnet/optim.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <vector>

using namespace nmtlab;
using namespace nmtlab::nnet;

TEST(Adam, ZeroGradientLeavesParams) {
    std::vector<double> p{1.5, -2.0}, g{0, 0}, m{0, 0}, v{0, 0};
    adam_update(p, g, m, v, OptimizerHyper{}, 1, 0.1);
    EXPECT_EQ(p, (std::vector<double>{1.5, -2.0}));
}

TEST(Adam, OneStepHandEvaluation) {
    std::vector<double> p{0.0}, g{1.0}, m{0.0}, v{0.0};
    OptimizerHyper h;
    adam_update(p, g, m, v, h, 1, 0.1);
    // mhat = 1, vhat = 1
    EXPECT_DOUBLE_EQ(p[0], -0.1 / (1.0 + 1e-7));
    EXPECT_NEAR(p[0], -0.09999999, 1e-8);
    EXPECT_DOUBLE_EQ(m[0], 0.1);
    EXPECT_DOUBLE_EQ(v[0], 0.001);
}

TEST(Adam, Deterministic) {
    auto run = [] {
        std::vector<double> p{0.3, -0.7, 2.0}, m(3, 0.0), v(3, 0.0);
        const std::vector<double> g{0.5, -1.5, 1e-3};
        for (long t = 1; t <= 5; ++t) adam_update(p, g, m, v, OptimizerHyper{}, t, 0.01);
        return p;
    };
    EXPECT_EQ(run(), run());
}

TEST(Adam, StepValidation) {
    std::vector<double> p{0.0}, g{1.0}, m{0.0}, v{0.0}, short_m;
    EXPECT_THROW(adam_update(p, g, m, v, OptimizerHyper{}, 0, 0.1), Error);
    EXPECT_THROW(adam_update(p, g, short_m, v, OptimizerHyper{}, 1, 0.1), Error);
}

TEST(Adam, StoreStep) {
    ParamStore s;
    s.add("w", Mat::Constant(2, 2, 1.0));
    s.grad(0).setConstant(2.0);
    AdamState st = AdamState::zeros_like(s);
    adam_step(s, st, OptimizerHyper{}, 1, 0.5);
    // mhat = 2, vhat = 4
    EXPECT_DOUBLE_EQ(s.value(0)(1, 0), 1.0 - 0.5 * 2.0 / (2.0 + 1e-7));
}

TEST(Schedule, TransformerWarmup) {
    const auto h = OptimizerHyper::transformer_default();
    EXPECT_EQ(h.schedule, Schedule::inverse_sqrt_warmup);
    EXPECT_EQ(h.warmup_steps, 400);
    EXPECT_NEAR(learning_rate(h, 400, 64), 0.125 * 0.05, 1e-15);
    EXPECT_NEAR(learning_rate(h, 100, 64), 0.125 * 100 * std::pow(400.0, -1.5), 1e-15);
    EXPECT_NEAR(learning_rate(h, 1600, 64), 0.125 / 40.0, 1e-15);
    EXPECT_LT(learning_rate(h, 399, 64), learning_rate(h, 400, 64));
    EXPECT_GT(learning_rate(h, 400, 64), learning_rate(h, 401, 64));
}

TEST(Schedule, LstmConstant) {
    auto h = OptimizerHyper::lstm_default();
    EXPECT_EQ(learning_rate(h, 1, 64), 0.001);
    EXPECT_EQ(learning_rate(h, 5000, 64), 0.001);
    h.eta = 10;
    EXPECT_DOUBLE_EQ(learning_rate(h, 3, 64), 0.01);
}

TEST(Hyper, DefaultsAndValidation) {
    const OptimizerHyper h;
    EXPECT_EQ(h.eta, 1.0);
    EXPECT_EQ(h.beta1, 0.9);
    EXPECT_EQ(h.beta2, 0.999);
    EXPECT_EQ(h.epsilon, 1e-7);
    EXPECT_EQ(OptimizerHyper::from_json(h.to_json()), h);
    OptimizerHyper bad = h;
    bad.beta2 = 1.0;
    EXPECT_THROW(bad.validate(), Error);
    bad = h;
    bad.epsilon = 0;
    EXPECT_THROW(bad.validate(), Error);
}

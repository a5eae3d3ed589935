#include "support.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace simlab;

static DeepNetworkArch arch(int input, std::vector<int> widths) {
    DeepNetworkArch a;
    a.input_dim = input;
    a.widths = std::move(widths);
    return a;
}

static AdaptationConfig adaptation_for(const DeepNetworkArch& a, double period = 2.0) {
    AdaptationConfig c;
    c.k_w = Matrix::Identity(a.output_width(), a.output_width());
    for (std::size_t j = 0; j < a.layer_count(); ++j) {
        c.k_v.push_back(Matrix::Constant(a.layer_rows(j), a.layer_cols(j), 1.0));
        c.v_lower.push_back(0.0);
        c.v_upper.push_back(1e6);
    }
    c.switch_period = period;
    return c;
}

// Forward pass written out loop by loop, independent of the library's Eigen products.
static double forward_oracle(const AgentNetwork& net, const Vector& x) {
    std::vector<double> h(x.data(), x.data() + x.size());
    for (std::size_t j = 0; j < net.v_hat.size(); ++j) {
        const Matrix& v = net.v_hat[j];
        std::vector<double> in = h;
        if (j > 0)
            for (auto& s : in) s = std::tanh(s);
        std::vector<double> out(static_cast<std::size_t>(v.cols()), 0.0);
        for (Eigen::Index c = 0; c < v.cols(); ++c)
            for (Eigen::Index r = 0; r < v.rows(); ++r) out[static_cast<std::size_t>(c)] += v(r, c) * in[static_cast<std::size_t>(r)];
        h = out;
    }
    double f = 0.0;
    for (std::size_t i = 0; i < h.size(); ++i) f += net.w_hat(static_cast<Eigen::Index>(i)) * std::tanh(h[i]);
    return f;
}

TEST(Dnn, ScalarForwardExample) {
    const auto a = arch(1, {1});
    auto net = AgentNetwork::zeros(a);
    net.v_hat[0](0, 0) = 2.0;
    net.w_hat(0) = 3.0;
    Vector x(1);
    x << 0.5;
    const auto fr = forward(net, a, x);
    EXPECT_NEAR(fr.rho(0), std::tanh(1.0), 1e-15);
    EXPECT_NEAR(fr.rho(0), 0.76159, 1e-5);
    EXPECT_NEAR(fr.f_hat, 3.0 * std::tanh(1.0), 1e-15);
    EXPECT_NEAR(fr.f_hat, 2.28478, 1e-5);
}

TEST(Dnn, ForwardMatchesLoopOracleAndIsBounded) {
    const auto a = arch(3, {10, 12, 14, 15, 18, 20});
    UniformSource rng(99);
    for (int trial = 0; trial < 20; ++trial) {
        const auto net = AgentNetwork::uniform(a, -10.5, 10.5, rng);
        Vector x(3);
        for (auto& v : x) v = rng.uniform(-20.0, 20.0);
        const auto fr = forward(net, a, x);
        EXPECT_NEAR(fr.f_hat, forward_oracle(net, x), 1e-9 * (1.0 + std::abs(fr.f_hat)));
        EXPECT_LE(fr.rho.norm(), std::sqrt(20.0) + 1e-12);
    }
}

TEST(Dnn, ZeroWeightsGiveZero) {
    const auto a = arch(3, {4, 5, 6});
    UniformSource rng(1);
    const auto zero = AgentNetwork::zeros(a);
    for (int trial = 0; trial < 10; ++trial) {
        Vector x(3);
        for (auto& v : x) v = rng.uniform(-5.0, 5.0);
        EXPECT_EQ(forward(zero, a, x).f_hat, 0.0);
    }
    auto net = AgentNetwork::uniform(a, -1.0, 1.0, rng);
    net.v_hat[1].setZero();
    Vector x = Vector::Ones(3);
    EXPECT_EQ(forward(net, a, x).f_hat, 0.0);
}

TEST(Dnn, ParameterCount) {
    const auto a = arch(3, {10, 12, 14, 15, 18, 20});
    EXPECT_EQ(a.inner_layers(), 5);
    EXPECT_EQ(a.output_width(), 20);
    EXPECT_EQ(a.parameter_count(), 20u + 30 + 120 + 168 + 210 + 270 + 360);
    EXPECT_THROW(arch(0, {3}).validate(), ValidationError);
    EXPECT_THROW(arch(2, {}).validate(), ValidationError);
    EXPECT_THROW(arch(2, {3, 0}).validate(), ValidationError);
}

TEST(Dnn, SwitchingWindows) {
    auto cfg = adaptation_for(arch(3, {10, 12, 14, 15, 18, 20}));
    const int k = 5;
    EXPECT_EQ(active_layer(3.0, k, cfg), 1);
    EXPECT_EQ(active_layer(4.0, k, cfg), 2);
    EXPECT_EQ(active_layer(13.0, k, cfg), 0);
    EXPECT_EQ(active_layer(0.0, k, cfg), 0);
    EXPECT_EQ(active_layer(11.999, k, cfg), 5);
    EXPECT_EQ(switch_signal(3.0, 1, k, cfg), 1);
    EXPECT_EQ(switch_signal(3.0, 0, k, cfg), 0);

    cfg.cyclic = false;
    EXPECT_EQ(active_layer(13.0, k, cfg), -1);
    EXPECT_EQ(active_layer(11.0, k, cfg), 5);
}

TEST(Dnn, SwitchingPartitionsTime) {
    const auto cfg = adaptation_for(arch(3, {10, 12, 14, 15, 18, 20}));
    for (int n = 0; n <= 40000; ++n) {
        const double t = n * 1e-3;
        int total = 0;
        for (int j = 0; j <= 5; ++j) total += switch_signal(t, j, 5, cfg);
        ASSERT_EQ(total, 1) << "t = " << t;
    }
}

TEST(Dnn, OuterUpdateExample) {
    const BarrierFunction unit(1.0);  // Upsilon_d(0) = 1
    Vector rho(1);
    rho << 0.5;
    const Matrix k = Matrix::Identity(1, 1);
    const AgentSignal s{2.0, 1.0, 1.0, 0.0};
    EXPECT_DOUBLE_EQ(outer_update(rho, s, unit, k)(0), -1.0);
    EXPECT_EQ(outer_update(rho, AgentSignal{0.0, 1.0, 1.0, 0.0}, unit, k)(0), 0.0);
}

TEST(Dnn, OuterUpdateIsLinear) {
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    const BarrierFunction b(5.0);
    for (int trial = 0; trial < 50; ++trial) {
        Vector rho(4);
        for (auto& v : rho) v = u(rng);
        Matrix k(4, 4);
        for (auto& v : k.reshaped()) v = u(rng);
        const double r = u(rng);
        const AgentSignal s{r, 0.7, 1.5, 0.3};
        const double c = u(rng);
        const Vector base = outer_update(rho, s, b, k);
        EXPECT_LT((outer_update(rho, s, b, c * k) - c * base).norm(), 1e-12 * (1.0 + base.norm()));
        const AgentSignal scaled{c * r, 0.7, 1.5, 0.3};
        EXPECT_LT((outer_update(rho, scaled, b, k) - c * base).norm(), 1e-12 * (1.0 + base.norm()));
    }
}

TEST(Dnn, InnerUpdateScalarExample) {
    const auto a = arch(1, {1});
    auto cfg = adaptation_for(a);
    cfg.v_upper[0] = 1.0;
    auto net = AgentNetwork::zeros(a);
    net.v_hat[0](0, 0) = 0.5;
    const BarrierFunction unit(1.0);
    const AgentSignal s{1.0, 1.0, 1.0, 0.0};
    const Matrix dv = inner_update(net, 0, s, 0.0, unit, cfg);
    EXPECT_NEAR(dv(0, 0), -std::exp(-0.5), 1e-15);
    EXPECT_NEAR(dv(0, 0), -0.60653, 1e-5);
}

TEST(Dnn, InnerUpdateGating) {
    const auto a = arch(2, {3, 2});
    auto cfg = adaptation_for(a);
    UniformSource rng(8);
    auto net = AgentNetwork::uniform(a, -1.0, 1.0, rng);
    const BarrierFunction b(10.0);
    const AgentSignal s = AgentSignal::local(0.8, 0.5, 2.0);

    // Layer 1 is not scheduled during [0, 2).
    EXPECT_TRUE(inner_update(net, 1, s, 0.5, b, cfg).isZero(0.0));
    EXPECT_FALSE(inner_update(net, 0, s, 0.5, b, cfg).isZero(0.0));

    // Outside the band the indicator freezes the layer.
    cfg.v_upper[0] = 0.5 * net.v_hat[0].norm();
    EXPECT_TRUE(inner_update(net, 0, s, 0.5, b, cfg).isZero(0.0));
    cfg.v_upper[0] = 1e6;
    cfg.v_lower[0] = 2.0 * net.v_hat[0].norm();
    EXPECT_TRUE(inner_update(net, 0, s, 0.5, b, cfg).isZero(0.0));

    // Zero sliding error is a fixed point of both laws.
    cfg.v_lower[0] = 0.0;
    const AgentSignal zero = AgentSignal::local(0.0, 0.5, 2.0);
    EXPECT_TRUE(inner_update(net, 0, zero, 0.5, b, cfg).isZero(0.0));
    EXPECT_TRUE(outer_update(Vector::Ones(2), zero, b, cfg.k_w).isZero(0.0));
}

TEST(Dnn, VBoundCheck) {
    const auto a = arch(3, {4, 5});
    auto cfg = adaptation_for(a);
    cfg.k_v[1] *= 3.0;
    std::vector<double> grid;
    for (int k = -100; k <= 100; ++k) grid.push_back(0.05 * k);
    const std::vector<double> ps{1.0, 0.5, 0.25};

    const auto rep = check_default_v_bound(cfg, grid, ps);
    EXPECT_TRUE(rep.satisfied);
    EXPECT_EQ(rep.psi, cfg.k_v[1].norm());
    EXPECT_GE(rep.tightest_margin, 0.0);

    // Margin equals psi |sqrt(p) r| (1 - exp(-r^2/2)) for the tightest layer.
    const double psi = rep.psi;
    const auto tight = check_v_bound([&](double r, double p) { return default_v(cfg.k_v[1], r, p); }, psi, grid, ps);
    EXPECT_NEAR(tight.tightest_margin,
                psi * std::abs(std::sqrt(tight.at_p) * tight.at_r) * (1.0 - std::exp(-0.5 * tight.at_r * tight.at_r)), 1e-12);

    const auto at_zero = check_v_bound([&](double r, double p) { return default_v(cfg.k_v[0], r, p); }, psi, {0.0}, {1.0});
    EXPECT_EQ(at_zero.tightest_margin, 0.0);

    EXPECT_THROW(check_v_bound([&](double r, double p) { return Matrix(2.0 * default_v(cfg.k_v[1], r, p)); }, psi, grid, ps),
                 BoundViolated);
}

#include "support.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace simlab;

TEST(Barrier, ValuesAtOriginAndMidpoint) {
    const BarrierFunction b(300.0);
    EXPECT_EQ(b.potential(0.0), 0.0);
    EXPECT_NEAR(b.potential_derivative(0.0), 1.0 / 90000.0, 1e-20);
    EXPECT_NEAR(b.potential_derivative(0.0), 1.1111e-5, 1e-9);

    EXPECT_NEAR(b.potential(150.0), 1.0 / 3.0, 1e-15);
    EXPECT_NEAR(b.potential_derivative(150.0), 90000.0 / (67500.0 * 67500.0), 1e-20);
    EXPECT_NEAR(b.potential_derivative(150.0), 1.9753e-5, 1e-9);
}

TEST(Barrier, DomainExceededAtAndBeyondMu) {
    const BarrierFunction b(300.0);
    EXPECT_THROW(b.potential(300.0), DomainExceeded);
    EXPECT_THROW(b.potential_derivative(300.0), DomainExceeded);
    EXPECT_THROW(b.potential(301.0), DomainExceeded);
    EXPECT_THROW(b.potential(-300.0), DomainExceeded);
    EXPECT_FALSE(b.inside(300.0));
    EXPECT_TRUE(b.inside(299.999));
}

TEST(Barrier, InvalidMu) {
    EXPECT_THROW(BarrierFunction(0.0), ValidationError);
    EXPECT_THROW(BarrierFunction(-1.0), ValidationError);
    EXPECT_THROW(BarrierFunction(std::nan("")), ValidationError);
}

TEST(Barrier, ArgumentsUseAbsoluteValue) {
    const BarrierFunction b(10.0);
    EXPECT_EQ(b.potential(-3.0), b.potential(3.0));
    EXPECT_EQ(b.potential_derivative(-3.0), b.potential_derivative(3.0));
}

TEST(Barrier, WeightedNorm) {
    Vector y(2);
    y << 1, -2;
    Matrix h = Matrix::Zero(2, 2);
    h(0, 0) = 1.0;
    h(1, 1) = 0.5;
    EXPECT_NEAR(weighted_norm(y, h), std::sqrt(3.0), 1e-15);
    EXPECT_NEAR(weighted_norm_diag(y, h.diagonal()), std::sqrt(3.0), 1e-15);
    EXPECT_EQ(weighted_norm(Vector::Zero(2), h), 0.0);
    EXPECT_NEAR(weighted_norm(y, Matrix::Identity(2, 2)), y.norm(), 1e-15);

    Matrix neg = -Matrix::Identity(2, 2);
    EXPECT_THROW(weighted_norm(y, neg), NonPDWeight);
    EXPECT_THROW(weighted_norm(y, Matrix::Identity(3, 3)), DimensionMismatch);
}

class BarrierForms : public ::testing::TestWithParam<std::tuple<BarrierForm, double>> {};

TEST_P(BarrierForms, DerivativeMatchesFiniteDifference) {
    const auto [form, mu] = GetParam();
    const BarrierFunction b(mu, form);
    for (int k = 0; k < 100; ++k) {
        const double z = 0.99 * mu * k / 99.0;
        const double h = 1e-6 * mu;
        // Central difference; the potential is even, so z - h < 0 is fine.
        const double fd = (b.potential(z + h) - b.potential(z - h)) / (2.0 * h);
        const double analytic = 2.0 * z * b.potential_derivative(z);
        EXPECT_LT(std::abs(fd - analytic), 1e-6 * (1.0 + std::abs(fd))) << "z = " << z;
    }
}

TEST_P(BarrierForms, MonotoneAndPositive) {
    const auto [form, mu] = GetParam();
    const BarrierFunction b(mu, form);
    double prev_v = -1.0;
    double prev_d = 0.0;
    for (int k = 0; k <= 10000; ++k) {
        const double z = 0.999 * mu * k / 10000.0;
        const double v = b.potential(z);
        const double d = b.potential_derivative(z);
        EXPECT_GT(d, 0.0);
        EXPECT_GE(v, prev_v);
        EXPECT_GE(d, prev_d);
        prev_v = v;
        prev_d = d;
    }
    EXPECT_EQ(b.potential(0.0), 0.0);
}

INSTANTIATE_TEST_SUITE_P(FormsAndScales, BarrierForms,
                         ::testing::Combine(::testing::Values(BarrierForm::rational, BarrierForm::logarithmic),
                                            ::testing::Values(0.5, 1.0, 10.0, 300.0, 1e4)));

TEST(Barrier, BlowUpNearMu) {
    for (double mu : {0.01, 1.0, 300.0, 1e6}) {
        const BarrierFunction b(mu);
        EXPECT_GT(b.potential_derivative(0.999 * mu) / b.potential_derivative(0.0), 1e4);
        EXPECT_GT(b.potential(0.9999999 * mu), 1e6);
    }
}

TEST(Barrier, FormNames) {
    EXPECT_EQ(barrier_form_from_string("rational"), BarrierForm::rational);
    EXPECT_EQ(barrier_form_from_string("log"), BarrierForm::logarithmic);
    EXPECT_THROW(barrier_form_from_string("quadratic"), ValidationError);
}

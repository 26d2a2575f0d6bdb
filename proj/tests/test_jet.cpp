#include <cmath>

#include <gtest/gtest.h>

#include "ahmpc/jet.hpp"

namespace ahmpc {
namespace {

PolyBundle lift1(const JetFunction& f, double at, int d) {
  const double point[] = {at};
  return jet_lift(f, point, d);
}

TEST(JetLiftTest, SineMaclaurin) {
  const auto p = lift1([](std::span<const Jet> x) { return sin(x[0]); }, 0.0, 3);
  EXPECT_NEAR(p.coeff(Exponent{0}), 0.0, 1e-16);
  EXPECT_NEAR(p.coeff(Exponent{1}), 1.0, 1e-16);
  EXPECT_NEAR(p.coeff(Exponent{2}), 0.0, 1e-16);
  EXPECT_NEAR(p.coeff(Exponent{3}), -1.0 / 6.0, 1e-16);
}

TEST(JetLiftTest, CosineMaclaurin) {
  const auto p = lift1([](std::span<const Jet> x) { return cos(x[0]); }, 0.0, 2);
  EXPECT_NEAR(p.coeff(Exponent{0}), 1.0, 1e-16);
  EXPECT_NEAR(p.coeff(Exponent{1}), 0.0, 1e-16);
  EXPECT_NEAR(p.coeff(Exponent{2}), -0.5, 1e-16);
}

TEST(JetLiftTest, SineTimesCosine) {
  // (x - x^3/6)(1 - x^2/2) truncated at degree 3: x - (2/3) x^3.
  const auto p = lift1(
      [](std::span<const Jet> x) { return sin(x[0]) * cos(x[0]); }, 0.0, 3);
  EXPECT_NEAR(p.coeff(Exponent{1}), 1.0, 1e-15);
  EXPECT_NEAR(p.coeff(Exponent{2}), 0.0, 1e-15);
  EXPECT_NEAR(p.coeff(Exponent{3}), -2.0 / 3.0, 1e-15);
}

TEST(JetLiftTest, DivisionByZeroConstantTermRejected) {
  auto f = [](std::span<const Jet> x) { return 1.0 / sin(x[0]); };
  EXPECT_THROW(lift1(f, 0.0, 3), std::domain_error);
  EXPECT_NO_THROW(lift1(f, 0.5, 3));
}

TEST(JetLiftTest, QuotientSeries) {
  // 1/(1 - x) = 1 + x + x^2 + x^3
  const auto p = lift1(
      [](std::span<const Jet> x) { return 1.0 / (1.0 - x[0]); }, 0.0, 3);
  for (int k = 0; k <= 3; ++k) EXPECT_NEAR(p.coeff(Exponent{k}), 1.0, 1e-15);
}

// Finite-difference derivatives of sin/cos at a nonzero expansion point,
// through order 4, compared with k! * coefficient.
TEST(JetLiftTest, MatchesFiniteDifferencesAwayFromZero) {
  const double a = 0.7;
  auto fd_step = [&](auto fn, int order, double h) {
    // Central differences of order 2 accuracy from binomial stencils.
    double sum = 0.0;
    for (int j = 0; j <= order; ++j) {
      const double w = std::tgamma(order + 1) /
                       (std::tgamma(j + 1) * std::tgamma(order - j + 1)) *
                       ((j % 2) ? -1.0 : 1.0);
      sum += w * fn(a + (order / 2.0 - j) * h);
    }
    return sum / std::pow(h, order);
  };
  // Richardson extrapolation removes the O(h^2) stencil error.
  auto fd = [&](auto fn, int order) {
    return (4.0 * fd_step(fn, order, 1e-2) - fd_step(fn, order, 2e-2)) / 3.0;
  };
  const auto ps = lift1([](std::span<const Jet> x) { return sin(x[0]); }, a, 4);
  const auto pc = lift1([](std::span<const Jet> x) { return cos(x[0]); }, a, 4);
  for (int k = 1; k <= 4; ++k) {
    const double kf = std::tgamma(k + 1);
    const double ds = fd([](double t) { return std::sin(t); }, k);
    const double dc = fd([](double t) { return std::cos(t); }, k);
    EXPECT_NEAR(kf * ps.coeff(Exponent{k}), ds, 1e-5 * std::max(1.0, std::abs(ds)))
        << "order " << k;
    EXPECT_NEAR(kf * pc.coeff(Exponent{k}), dc, 1e-5 * std::max(1.0, std::abs(dc)))
        << "order " << k;
  }
}

TEST(JetLiftTest, MultivariateProduct) {
  // sin(x) * y about (0, 2): 2x + x y - x^3/3 + ...
  const double point[] = {0.0, 2.0};
  const auto p = jet_lift(
      [](std::span<const Jet> v) { return sin(v[0]) * v[1]; }, point, 3);
  EXPECT_NEAR(p.coeff(Exponent{1, 0}), 2.0, 1e-15);
  EXPECT_NEAR(p.coeff(Exponent{1, 1}), 1.0, 1e-15);
  EXPECT_NEAR(p.coeff(Exponent{3, 0}), -1.0 / 3.0, 1e-15);
  EXPECT_NEAR(p.coeff(Exponent{0, 1}), 0.0, 1e-15);
}

TEST(JetSubstitutionTest, ComposesPolynomials) {
  // p(a, b) = a^2 + a b, with a = x + y, b = x - y in two seed variables.
  PolyBundle p(2, 2, 2);
  p.set_coeff(Exponent{2, 0}, 1.0);
  p.set_coeff(Exponent{1, 1}, 1.0);
  Jet x = Jet::variable(2, 3, 0, 0.0);
  Jet y = Jet::variable(2, 3, 1, 0.0);
  JetSubstitution sub({x + y, x - y}, 2);
  const auto q = sub.apply(p).series();
  // (x+y)^2 + (x+y)(x-y) = 2x^2 + 2xy
  EXPECT_NEAR(q.coeff(Exponent{2, 0}), 2.0, 1e-15);
  EXPECT_NEAR(q.coeff(Exponent{1, 1}), 2.0, 1e-15);
  EXPECT_NEAR(q.coeff(Exponent{0, 2}), 0.0, 1e-15);
}

}  // namespace
}  // namespace ahmpc

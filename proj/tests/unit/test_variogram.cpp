#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include <igpk/error.hpp>
#include <igpk/special.hpp>
#include <igpk/variogram.hpp>

#include "generators.hpp"
#include "oracles.hpp"

using namespace igpk;
using igpk::testing::Family;
using igpk::testing::Gen;

TEST(Variogram, BrownianIsLinearInDistance) {
  const auto m = VariogramModel::brownian(1.0);
  EXPECT_DOUBLE_EQ(eval(m, Location{0.0}, Location{2.0}), 2.0);
  EXPECT_DOUBLE_EQ(eval(VariogramModel::brownian(3.0), Location{0.0, 0.0}, Location{3.0, 4.0}), 15.0);
}

TEST(Variogram, SymmetricAndZeroOnDiagonal) {
  Gen g(11);
  for (int trial = 0; trial < 200; ++trial) {
    const auto f = igpk::testing::kFamilies[trial % 5];
    const int dim = g.integer(1, 2);
    const auto m = g.model(f, dim);
    const auto p = g.points(2, dim);
    const double ab = m.eval(p[0], p[1]);
    EXPECT_EQ(ab, m.eval(p[1], p[0])) << to_string(f);
    EXPECT_EQ(m.eval(p[0], p[0]), 0.0) << to_string(f);
    EXPECT_GT(ab, 0.0) << to_string(f);
  }
}

TEST(Variogram, StationaryModelsSaturateAtTheSill) {
  for (const auto& m : {VariogramModel::stationary_exp(1.7, 2.0), VariogramModel::stationary_gauss(1.7, 2.0)}) {
    double prev = 0.0;
    for (double h = 0.05; h < 10.0; h += 0.05) {
      const double v = m.at_distance(h);
      if (h < 2.0) {
        EXPECT_GT(v, prev) << h;
        EXPECT_LT(v, 1.7) << h;
      }
      EXPECT_GE(v, prev) << h;
      EXPECT_LE(v, 1.7) << h;
      prev = v;
    }
    EXPECT_NEAR(m.at_distance(50.0), 1.7, 1e-14);
    EXPECT_DOUBLE_EQ(*m.sill(), 1.7);
    EXPECT_DOUBLE_EQ(m.covariance_at(0.3), 1.7 - m.at_distance(0.3));
  }
}

TEST(Variogram, IntrinsicModelsAreUnbounded) {
  for (const auto& m : {VariogramModel::brownian(1.0), VariogramModel::convolved_brownian(1.0, 0.1, 1),
                        VariogramModel::convolved_brownian(1.0, 0.1, 2)}) {
    EXPECT_FALSE(m.sill().has_value());
    EXPECT_GT(m.at_distance(1e4), 100.0 * m.at_distance(10.0) / 2.0);
    EXPECT_THROW((void)m.covariance_at(1.0), DomainError);
  }
}

TEST(Variogram, ConvolvedLargeDistanceAsymptote) {
  const auto m = VariogramModel::convolved_brownian(1.0, 0.1, 1);
  const double expect = 0.5 * (10.0 - 2.0 * 0.1 / std::sqrt(std::numbers::pi));
  EXPECT_NEAR(m.at_distance(10.0), expect, 1e-12);
  EXPECT_NEAR(m.at_distance(10.0), convolved_variogram_oracle(1.0, 0.1, 1, 10.0), 1e-6 * expect);
}

TEST(Variogram, Convolved1dClosedFormMatchesQuadrature) {
  for (const double r : {0.05, 0.3, 1.0}) {
    const auto m = VariogramModel::convolved_brownian(1.3, r, 1);
    for (int i = 0; i <= 40; ++i) {
      const double d = 0.01 * r + (20.0 * r - 0.01 * r) * i / 40.0;
      const double closed = m.at_distance(d);
      EXPECT_NEAR(closed, convolved_variogram_oracle(1.3, r, 1, d), 1e-6 * closed) << r << " " << d;
    }
  }
}

TEST(Variogram, Convolved1dMatchesDoubleIntegralOfDefinition) {
  for (const double d : {0.02, 0.5, 3.0}) {
    const auto m = VariogramModel::convolved_brownian(1.0, 1.0, 1);
    EXPECT_NEAR(m.at_distance(d), oracle::convolved_1d_double_integral(1.0, 1.0, d), 1e-7 * m.at_distance(d))
        << d;
  }
}

TEST(Variogram, Convolved2dMatchesQuadratureAndBesselForm) {
  const auto m = VariogramModel::convolved_brownian(0.00008, 50.0, 2);
  const double at100 = m.at_distance(100.0);
  EXPECT_NEAR(at100, convolved_variogram_oracle(0.00008, 50.0, 2, 100.0), 1e-5 * at100);
  for (const double r : {0.1, 1.0, 50.0}) {
    const auto mr = VariogramModel::convolved_brownian(2.0, r, 2);
    for (int i = 1; i <= 30; ++i) {
      const double d = 20.0 * r * i / 30.0;
      const double v = mr.at_distance(d);
      EXPECT_NEAR(v, oracle::convolved_2d_rice(2.0, r, d), 1e-10 * v) << r << " " << d;
      EXPECT_NEAR(v, convolved_variogram_oracle(2.0, r, 2, d), 1e-6 * v) << r << " " << d;
    }
  }
  EXPECT_EQ(m.at_distance(0.0), 0.0);
}

TEST(Variogram, QuadratureOracleVanishesAtZero) {
  EXPECT_EQ(convolved_variogram_oracle(1.0, 1.0, 1, 0.0), 0.0);
  EXPECT_EQ(convolved_variogram_oracle(1.0, 1.0, 2, 0.0), 0.0);
  EXPECT_NEAR(convolved_variogram_oracle(1.0, 1.0, 1, 3.0),
              VariogramModel::convolved_brownian(1.0, 1.0, 1).at_distance(3.0), 1e-6);
  EXPECT_THROW((void)convolved_variogram_oracle(1.0, 1.0, 3, 1.0), DomainError);
}

TEST(NormalCdf, MatchesHighPrecisionErf) {
  EXPECT_EQ(std_normal_cdf(0.0), 0.5);
  EXPECT_NEAR(std_normal_cdf(1.96), 0.9750021048517795, 1e-15);
  EXPECT_LT(std_normal_cdf(-8.0), 1e-15);
  EXPECT_GT(std_normal_cdf(-8.0), 0.0);
  double prev = 0.0;
  for (double x = -9.0; x <= 9.0; x += 0.01) {
    const double p = std_normal_cdf(x);
    EXPECT_NEAR(p, oracle::normal_cdf_high_precision(x), 1e-12) << x;
    EXPECT_NEAR(std_normal_cdf(-x), 1.0 - p, 1e-15) << x;
    EXPECT_GE(p, prev);
    prev = p;
  }
}

TEST(Kummer, SpecialValues) {
  EXPECT_EQ(kummer_1f1(-0.5, 1.0, 0.0), 1.0);
  EXPECT_DOUBLE_EQ(kummer_1f1(1.0, 1.0, 1.5), std::exp(1.5));
  EXPECT_THROW((void)kummer_1f1(0.5, -2.0, 1.0), DomainError);
}

TEST(Kummer, AgreesWithIndependentImplementation) {
  for (double x = -30.0; x <= 0.0; x += 0.25) {
    const double v = kummer_1f1(-0.5, 1.0, x);
    EXPECT_NEAR(v, oracle::hyp1f1(-0.5, 1.0, x), 1e-10 * std::abs(v)) << x;
  }
  for (const double a : {-1.5, 0.3, 2.0}) {
    for (const double x : {-12.0, -1.0, 0.7, 5.0}) {
      const double v = kummer_1f1(a, 1.5, x);
      EXPECT_NEAR(v, oracle::hyp1f1(a, 1.5, x), 1e-10 * std::abs(v)) << a << " " << x;
    }
  }
}

TEST(Kummer, TransformAndDirectSeriesAgree) {
  // e^x 1F1(b-a; b; -x) against the raw alternating series at a moderate x.
  const double x = -1.0;
  double term = 1.0;
  double direct = 1.0;
  for (int k = 0; k < 60; ++k) {
    term *= (-0.5 + k) / (1.0 + k) * x / (k + 1.0);
    direct += term;
  }
  EXPECT_NEAR(kummer_1f1(-0.5, 1.0, x), direct, 1e-10 * direct);
}

TEST(Kummer, AsymptoticRegimeAndSwitchover) {
  const double v = kummer_1f1(-0.5, 1.0, -100.0);
  EXPECT_NEAR(v, oracle::hyp1f1_asymptotic(-0.5, 1.0, -100.0), 1e-4 * v);
  EXPECT_NEAR(v, 10.0 / std::tgamma(1.5), 3e-3 * v);
  for (const double x : {-29.0, -30.0, -30.5, -31.0, -45.0, -200.0}) {
    const double k = kummer_1f1(-0.5, 1.0, x);
    EXPECT_NEAR(k, oracle::hyp1f1(-0.5, 1.0, x), 1e-10 * k) << x;
  }
}

TEST(Surrogate, RoundTripAndMonotone) {
  EXPECT_EQ(surrogate_and_inverse(0.0, 3.0), std::make_pair(0.0, 0.0));
  const auto [s, back] = surrogate_and_inverse(0.5, 1.0);
  EXPECT_DOUBLE_EQ(s, 1.0);
  EXPECT_DOUBLE_EQ(back, 0.5);
  EXPECT_GT(surrogate_transform(1.0 - 1e-12, 1.0), 1e11);
  EXPECT_THROW((void)surrogate_transform(1.0, 1.0), DomainError);
  double prev = -1.0;
  for (double g = 0.0; g < 0.999; g += 0.001) {
    const auto [sg, inv] = surrogate_and_inverse(g, 0.7);
    EXPECT_GT(sg, prev);
    EXPECT_NEAR(inv, g, 1e-14);
    prev = sg;
  }
  EXPECT_NEAR(surrogate_transform(1e-6, 2.0), 2e-6, 1e-11);
}

TEST(Surrogate, ModelRejectsSaturatedBase) {
  const auto m = VariogramModel::surrogate(StationaryExp{1.0, 1.0}, 0.5);
  EXPECT_NEAR(m.at_distance(1.0), surrogate_transform(1.0 - std::exp(-1.0), 0.5), 1e-15);
  EXPECT_THROW((void)VariogramModel::surrogate(StationaryExp{2.0, 1.0}, 0.5), DomainError);
  // exp(-theta h) underflows to 0 so the base reaches its sill.
  EXPECT_THROW((void)m.at_distance(1e4), DomainError);
}

TEST(Variogram, CalibrationMatchesAtBothSeparations) {
  const auto sta = VariogramModel::stationary_exp(1.0, 1.0);
  const double target = sta.at_distance(0.05);
  const double s2 = calibrate_sigma2(VariogramModel::brownian(1.0), 0.05, target);
  EXPECT_NEAR(s2 * 0.05, target, 1e-12);
  const auto conv = VariogramModel::convolved_brownian(1.0, 0.05, 1);
  const auto cal = conv.with_sigma2(calibrate_sigma2(conv, 0.05, target));
  EXPECT_NEAR(cal.at_distance(0.05), target, 1e-10);
  EXPECT_EQ(cal.at_distance(0.0), 0.0);
}

TEST(Variogram, AxisScaleAppliesBeforeDistance) {
  Eigen::Vector2d scale(2.0, 0.5);
  const VariogramModel m(Brownian{1.0}, scale);
  EXPECT_DOUBLE_EQ(m.eval(Location{0.0, 0.0}, Location{1.0, 0.0}), 2.0);
  EXPECT_DOUBLE_EQ(m.eval(Location{0.0, 0.0}, Location{0.0, 4.0}), 2.0);
  EXPECT_THROW((void)m.eval(Location{0.0}, Location{1.0}), DomainError);
}

TEST(Variogram, DimensionMismatchThrows) {
  const auto m = VariogramModel::brownian(1.0);
  EXPECT_THROW((void)m.eval(Location{0.0}, Location{1.0, 2.0}), DomainError);
}

TEST(Variogram, ParametersMustBePositive) {
  EXPECT_THROW((void)VariogramModel::brownian(0.0), DomainError);
  EXPECT_THROW((void)VariogramModel::stationary_exp(1.0, -1.0), DomainError);
  EXPECT_THROW((void)VariogramModel::convolved_brownian(1.0, 0.1, 3), DomainError);
  EXPECT_THROW((void)VariogramModel::surrogate(StationaryGauss{1.0, 1.0}, 0.0), DomainError);
}

TEST(VariogramJson, RoundTripEveryFamily) {
  Gen g(5);
  for (const auto f : igpk::testing::kFamilies) {
    const auto m = g.model(f, 2);
    const auto back = model_from_json(to_json(m));
    EXPECT_EQ(back.family_name(), m.family_name());
    for (const double h : {0.0, 0.1, 0.7}) EXPECT_EQ(back.at_distance(h), m.at_distance(h));
  }
}

TEST(VariogramJson, RejectsMissingAndForeignFields) {
  using nlohmann::json;
  EXPECT_NO_THROW((void)model_from_json(json::parse(R"({"family":"brownian","sigma2":1})")));
  EXPECT_THROW((void)model_from_json(json::parse(R"({"family":"brownian"})")), ConfigError);
  EXPECT_THROW((void)model_from_json(json::parse(R"({"family":"brownian","sigma2":1,"r":2})")), ConfigError);
  EXPECT_THROW((void)model_from_json(json::parse(R"({"family":"matern","sigma2":1})")), ConfigError);
  EXPECT_THROW((void)model_from_json(json::parse(R"({"family":"stationary_exp","sigma2":1,"theta":-1})")),
               ConfigError);
  const auto s = model_from_json(json::parse(
      R"({"family":"surrogate","rho":0.5,"base":{"family":"stationary_gauss","sigma2":1,"theta":2}})"));
  EXPECT_EQ(s.family_name(), "surrogate");
}

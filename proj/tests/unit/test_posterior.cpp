#include <algorithm>
#include <cmath>

#include <Eigen/Eigenvalues>
#include <gtest/gtest.h>

#include <igpk/error.hpp>
#include <igpk/posterior.hpp>
#include <igpk/simdata.hpp>
#include <igpk/structmat.hpp>

#include "generators.hpp"
#include "oracles.hpp"

using namespace igpk;
using igpk::testing::Family;
using igpk::testing::Gen;
using igpk::testing::to_string;

namespace {

// N lattice points in the widened box, apart from each other and from locs.
LocationSet lattice(Gen& g, const LocationSet& locs, int n) {
  Eigen::MatrixXd p(n, locs.dim());
  LocationSet all = locs;
  for (int i = 0; i < n; ++i) {
    p.row(i) = g.target(all, 0.02).coords().transpose();
    all = all.concat(LocationSet(p.topRows(i + 1).bottomRows(1)));
  }
  return LocationSet(p);
}

Eigen::MatrixXd random_factor(Gen& g, Eigen::Index n) {
  Eigen::MatrixXd f(n, n);
  for (Eigen::Index j = 0; j < n; ++j) f.col(j) = g.normal_vector(n);
  return f;
}

double rel(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) { return oracle::rel(a, b); }

// 5 x 5 block of spacing h centred at c.
LocationSet block(const Eigen::Vector2d& c, double h) {
  Eigen::MatrixXd p(25, 2);
  for (int i = 0; i < 5; ++i) {
    for (int j = 0; j < 5; ++j) p.row(5 * i + j) << c[0] + (i - 2) * h, c[1] + (j - 2) * h;
  }
  return LocationSet(p);
}

Eigen::MatrixXd empirical_cov(const Eigen::MatrixXd& draws) {
  const Eigen::MatrixXd c = draws.colwise() - draws.rowwise().mean();
  return c * c.transpose() / static_cast<double>(draws.cols() - 1);
}

}  // namespace

TEST(PosteriorMoments, MatchesDenseOrdinaryKriging) {
  Gen g(301);
  for (int trial = 0; trial < 80; ++trial) {
    const auto in = g.instance_valid(trial, 2, 12);
    const Eigen::Index n = static_cast<Eigen::Index>(in.locs.size());
    const Observations obs(in.locs, g.normal_vector(n));
    const ObservationModel om{g.uniform(0.05, 0.5), trial % 2 ? random_factor(g, n) : Eigen::MatrixXd()};
    const auto t = lattice(g, in.locs, g.integer(1, 15));
    const auto pg = posterior_moments(obs, om, in.model, t);
    const auto want = oracle::ordinary_kriging_joint(in.model, in.locs, obs.y, om.noise_covariance(n), t);
    EXPECT_LE(rel(pg.mu, want.mu), 1e-8) << to_string(in.family);
    EXPECT_LE(rel(pg.covariance(), want.sigma), 1e-8) << to_string(in.family);
    EXPECT_TRUE(pg.R_post.isUpperTriangular());
  }
}

TEST(PosteriorMoments, LargerJointSystem) {
  Gen g(303);
  const auto locs = g.points(60, 2, 0.05);
  const auto model = VariogramModel::brownian(1.3);
  const Observations obs(locs, g.normal_vector(60));
  const ObservationModel om{0.1, {}};
  const auto t = lattice(g, locs, 120);
  const auto pg = posterior_moments(obs, om, model, t);
  const auto want = oracle::ordinary_kriging_joint(model, locs, obs.y, om.noise_covariance(60), t);
  EXPECT_LE(rel(pg.mu, want.mu), 1e-8);
  EXPECT_LE(rel(pg.covariance(), want.sigma), 1e-8);
  const Eigen::MatrixXd sigma = pg.covariance();
  const double floor = -1e-8 * sigma.trace() / static_cast<double>(sigma.rows());
  EXPECT_GE(Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(sigma).eigenvalues()[0], floor);
}

TEST(PosteriorMoments, IndependentOfDelta) {
  Gen g(307);
  for (int trial = 0; trial < 40; ++trial) {
    const auto in = g.instance_valid(trial, 2, 10);
    const Eigen::Index n = static_cast<Eigen::Index>(in.locs.size());
    const Observations obs(in.locs, g.normal_vector(n));
    const ObservationModel om{g.uniform(0.05, 0.5), {}};
    const auto t = lattice(g, in.locs, 8);
    const auto a = posterior_moments(obs, om, in.model, t);
    PosteriorOptions opts;
    opts.delta = 3.0 * a.delta;
    const auto b = posterior_moments(obs, om, in.model, t, opts);
    EXPECT_EQ(b.delta, 3.0 * a.delta);
    EXPECT_LE(rel(b.mu, a.mu), 1e-8) << to_string(in.family);
    EXPECT_LE(rel(b.covariance(), a.covariance()), 1e-8) << to_string(in.family);
  }
}

TEST(PosteriorMoments, NoiselessInterpolation) {
  Gen g(311);
  for (int trial = 0; trial < 20; ++trial) {
    const auto in = g.instance_valid(trial, 3, 10);
    const Eigen::Index n = static_cast<Eigen::Index>(in.locs.size());
    const Observations obs(in.locs, g.normal_vector(n));
    const auto extra = lattice(g, in.locs, 5);
    PosteriorOptions opts;
    opts.allow_direct_fallback = true;
    const auto pg = posterior_moments(obs, {0.0, {}}, in.model, in.locs.concat(extra), opts);
    EXPECT_LE((pg.mu.head(n) - obs.y).cwiseAbs().maxCoeff(), 1e-8 * std::max(1.0, obs.y.cwiseAbs().maxCoeff()))
        << to_string(in.family);
    const Eigen::VectorXd var = pg.covariance().diagonal();
    // Observation points on the lattice are nudged by eps, whose exact variance is
    // at most 2 gamma(eps). For the Gaussian family the nudged pair is numerically
    // singular, so only a looser relative bound holds.
    const auto all = in.locs.concat(extra);
    const double eps = 1e-9 * all.min_separation();
    const double scale = build_gamma(in.model, in.locs).gamma.cwiseAbs().maxCoeff();
    const double rel_tol = in.family == Family::Gauss ? 1e-7 : 1e-10;
    Eigen::VectorXd step = Eigen::VectorXd::Zero(in.locs.dim());
    step[0] = eps;
    const double gamma_eps = in.model.eval(Location(Eigen::VectorXd::Zero(in.locs.dim())), Location(step));
    const double bound = 2.0 * gamma_eps + rel_tol * scale;
    EXPECT_LE(var.head(n).cwiseAbs().maxCoeff(), bound) << to_string(in.family);
    EXPECT_GT(var.tail(5).minCoeff(), 0.0) << to_string(in.family);
  }
}

TEST(PosteriorMoments, SingleObservationGivesConstantMean) {
  Gen g(313);
  const LocationSet s(Eigen::MatrixXd{{0.3}});
  const Observations obs(s, Eigen::VectorXd::Constant(1, 2.5));
  const auto t = lattice(g, s, 12);
  const auto pg = posterior_moments(obs, {0.0, {}}, VariogramModel::brownian(1.0), t);
  EXPECT_LE((pg.mu.array() - 2.5).abs().maxCoeff(), 1e-10);
}

TEST(PosteriorMoments, AgreesWithPointwiseWeights) {
  const auto demo = make_demo_1d(DemoConfig1D{});
  const LocationSet t(Eigen::MatrixXd(Eigen::VectorXd::LinSpaced(40, -0.1037, 1.0963)));
  for (const auto& mv : demo.models) {
    if (!mv.intrinsic) continue;
    const auto pg = posterior_moments(demo.obs, {0.0, {}}, mv.model, t, {std::nullopt, true});
    const IgpKriging k(demo.obs.locs, mv.model, {0.0, {}});
    for (std::size_t i = 0; i < t.size(); ++i) {
      const double want = predict(k.weights(t[i]), demo.obs.y);
      EXPECT_NEAR(pg.mu[static_cast<Eigen::Index>(i)], want, 1e-8 * std::max(1.0, std::abs(want))) << mv.name;
    }
  }
}

TEST(PosteriorMoments, RejectsBadInput) {
  const LocationSet s(Eigen::MatrixXd{{0.0}, {1.0}});
  const Observations obs(s, Eigen::Vector2d(1, 2));
  const LocationSet t(Eigen::MatrixXd{{0.5}});
  const auto m = VariogramModel::brownian(1.0);
  EXPECT_THROW(posterior_moments(obs, {-1.0, {}}, m, t), DomainError);
  EXPECT_THROW(posterior_moments(obs, {1.0, Eigen::MatrixXd::Identity(3, 3)}, m, t), DomainError);
  EXPECT_THROW(posterior_moments(obs, {0.1, {}}, m, LocationSet(Eigen::MatrixXd{{0.5, 0.5}})), DomainError);
  EXPECT_THROW(stationary_posterior(obs, {0.1, {}}, m, t), DomainError);
}

TEST(Sampling, ZeroDrawIsTheMean) {
  Gen g(331);
  const auto in = g.instance(Family::Brownian, 5, 5);
  const auto t = lattice(g, in.locs, 6);
  const auto pg = posterior_moments(Observations(in.locs, g.normal_vector(5)), {0.1, {}}, in.model, t);
  EXPECT_EQ(realize(pg, Eigen::VectorXd::Zero(6)), pg.mu);
  EXPECT_THROW(realize(pg, Eigen::VectorXd::Zero(5)), DomainError);
}

TEST(Sampling, DeterministicInSeed) {
  Gen g(337);
  const auto in = g.instance(Family::Convolved, 6, 6);
  const auto t = lattice(g, in.locs, 10);
  const auto pg = posterior_moments(Observations(in.locs, g.normal_vector(6)), {0.1, {}}, in.model, t);
  const auto a = sample_posterior(pg, 99, 4);
  EXPECT_EQ(a, sample_posterior(pg, 99, 4));
  EXPECT_NE(a, sample_posterior(pg, 100, 4));
  // Same normals per column; the product may differ in the last bit with the block width.
  EXPECT_LT((a.leftCols(2) - sample_posterior(pg, 99, 2)).cwiseAbs().maxCoeff(), 1e-12);
  const Location anchor(Eigen::VectorXd::Constant(in.locs.dim(), -0.5));
  EXPECT_EQ(sample_prior_paths(in.model, anchor, t, 5, 3), sample_prior_paths(in.model, anchor, t, 5, 3));
}

// A compact block is dominated by its common mode, which keeps the Monte
// Carlo error of the covariance near sqrt(2 / k).
TEST(Sampling, MonteCarloMatchesMoments) {
  Gen g(347);
  const auto locs = g.points(10, 2, 0.08);
  const auto model = VariogramModel::brownian(1.0);
  const Observations obs(locs, g.normal_vector(10));
  const auto t = block(Eigen::Vector2d(0.5, 0.5), 0.01);
  ASSERT_GT(locs.matrix().rowwise().operator-(Eigen::RowVector2d(0.5, 0.5)).rowwise().norm().minCoeff(), 0.05);
  const auto pg = posterior_moments(obs, {0.05, {}}, model, t);
  const int k = 10000;
  const Eigen::MatrixXd draws = sample_posterior(pg, 2024, k);
  const Eigen::VectorXd mean = draws.rowwise().mean();
  const Eigen::VectorXd sd = pg.sd();
  for (Eigen::Index i = 0; i < 25; ++i) EXPECT_LE(std::abs(mean[i] - pg.mu[i]), 4.0 * sd[i] / std::sqrt(k));
  EXPECT_LT(rel(empirical_cov(draws), pg.covariance()), 0.05);
}

TEST(PriorPaths, IncrementVarianceIsTwiceTheVariogram) {
  const Eigen::MatrixXd p{{0.1, 0.0}, {0.4, 0.2}, {0.9, 0.9}, {-0.3, 0.5}, {0.2, -0.6}};
  const LocationSet pts(p);
  const Location anchor{0.0, 0.0};
  for (const auto& m : {VariogramModel::brownian(1.5), VariogramModel::convolved_brownian(1.0, 0.1, 2),
                        VariogramModel::stationary_exp(2.0, 1.5)}) {
    const Eigen::MatrixXd draws = sample_prior_paths(m, anchor, pts, 77, 10000);
    const Eigen::VectorXd var = draws.rowwise().squaredNorm() / 10000.0;
    for (Eigen::Index i = 0; i < 5; ++i) {
      const double want = 2.0 * m.eval(anchor, pts[static_cast<std::size_t>(i)]);
      EXPECT_NEAR(var[i] / want, 1.0, 0.05) << m.family_name() << " point " << i;
    }
  }
}

TEST(PriorPaths, BrownianIncrementsAreIndependent) {
  Eigen::MatrixXd p(10, 1);
  for (int i = 0; i < 10; ++i) p(i, 0) = 0.1 * (i + 1);
  const int k = 10000;
  const Eigen::MatrixXd z = sample_prior_paths(VariogramModel::brownian(1.0), Location{0.0}, LocationSet(p), 5, k);
  Eigen::MatrixXd inc(10, k);
  inc.row(0) = z.row(0);
  inc.bottomRows(9) = z.bottomRows(9) - z.topRows(9);
  const Eigen::MatrixXd c = empirical_cov(inc);
  for (int i = 0; i < 10; ++i) {
    EXPECT_NEAR(c(i, i), 0.2, 0.2 * 0.05);
    for (int j = 0; j < i; ++j) EXPECT_LT(std::abs(c(i, j)) / std::sqrt(c(i, i) * c(j, j)), 0.05);
  }
}

TEST(PriorPaths, AnchorIsPinned) {
  const LocationSet pts(Eigen::MatrixXd{{0.5}, {1.0}});
  const auto path = sample_prior_path(VariogramModel::brownian(1.0), Location{0.0}, pts, 3);
  EXPECT_EQ(path.anchor.coords()[0], 0.0);
  EXPECT_EQ(path.values.size(), 2);
  EXPECT_THROW(sample_prior_path(VariogramModel::brownian(1.0), Location{0.5}, pts, 3), DomainError);
}

TEST(PriorPaths, DistantAnchorStillFactors) {
  Gen g(353);
  const auto pts = g.points(6, 2);
  const auto m = VariogramModel::brownian(1.0);
  const Location anchor{40.0, -25.0};
  const Eigen::MatrixXd gf = prior_increment_factor(m, anchor, pts);
  const Eigen::MatrixXd want =
      oracle::increment_covariance(build_gamma(m, pts).gamma, gamma_vector(m, pts, anchor));
  EXPECT_LE(rel(gf * gf.transpose(), want), 1e-10);
}

TEST(StationaryPosterior, MatchesSimpleKriging) {
  Gen g(359);
  for (int trial = 0; trial < 40; ++trial) {
    const auto in = g.instance(trial % 2 ? Family::Exp : Family::Gauss, 2, 12);
    const Eigen::Index n = static_cast<Eigen::Index>(in.locs.size());
    const Observations obs(in.locs, g.normal_vector(n));
    const ObservationModel om{g.uniform(0.05, 0.5), {}};
    const auto t = lattice(g, in.locs, 8);
    const auto pg = stationary_posterior(obs, om, in.model, t);
    const auto want = oracle::simple_kriging_joint(in.model, in.locs, obs.y, om.noise_covariance(n), t);
    EXPECT_LE(rel(pg.mu, want.mu), 1e-8) << to_string(in.family);
    EXPECT_LE(rel(pg.covariance(), want.sigma), 1e-8) << to_string(in.family);
  }
}

TEST(StationaryPosterior, SagsToZeroFarAway) {
  const auto m = VariogramModel::stationary_exp(1.0, 2.0);
  const LocationSet s(Eigen::MatrixXd{{0.0}, {0.3}, {0.7}, {1.0}});
  const Observations obs(s, Eigen::Vector4d(3.0, 2.5, 3.5, 4.0));
  // exp(-2 * 8) < 1e-6
  const LocationSet far(Eigen::MatrixXd{{9.0}, {-8.0}, {20.0}});
  const auto pg = stationary_posterior(obs, {0.0, {}}, m, far);
  EXPECT_LT(pg.mu.cwiseAbs().maxCoeff(), 1e-4 * 4.0);
}

TEST(StationaryPosterior, InterpolatesAndIgnoresHugeNoise) {
  Gen g(367);
  const auto in = g.instance(Family::Exp, 6, 6);
  const Observations obs(in.locs, g.normal_vector(6));
  const auto pg = stationary_posterior(obs, {0.0, {}}, in.model, in.locs);
  EXPECT_LE((pg.mu - obs.y).cwiseAbs().maxCoeff(), 1e-8);
  const auto loud = stationary_posterior(obs, {1e6, {}}, in.model, lattice(g, in.locs, 5));
  EXPECT_LT(loud.mu.cwiseAbs().maxCoeff(), 1e-8 * obs.y.cwiseAbs().maxCoeff());
}

TEST(StationaryPrior, CovarianceOfDraws) {
  const auto m = VariogramModel::stationary_gauss(1.5, 4.0);
  const LocationSet pts(Eigen::MatrixXd{{0.0}, {0.2}, {0.5}});
  const Eigen::MatrixXd d = sample_stationary_prior(m, pts, 11, 20000);
  const Eigen::MatrixXd c = d * d.transpose() / 20000.0;
  Eigen::MatrixXd want = -build_gamma(m, pts).gamma;
  want.array() += 1.5;
  EXPECT_LT(rel(c, want), 0.05);
  EXPECT_THROW(sample_stationary_prior(VariogramModel::brownian(1.0), pts, 1, 1), DomainError);
}

// Intrinsic priors keep the far field near the data; the stationary one returns to 0.
TEST(DemoPosterior, NoMeanReversion) {
  const DemoConfig1D cfg;
  const auto demo = make_demo_1d(cfg);
  const Eigen::VectorXd& y = demo.obs.y;
  const double lo = y.minCoeff() - (y.maxCoeff() - y.minCoeff());
  const double hi = y.maxCoeff() + (y.maxCoeff() - y.minCoeff());
  Eigen::MatrixXd fp(static_cast<Eigen::Index>(cfg.far_points.size()), 1);
  for (std::size_t i = 0; i < cfg.far_points.size(); ++i) fp(static_cast<Eigen::Index>(i), 0) = cfg.far_points[i];
  const LocationSet far(fp);
  const Eigen::MatrixXd& s = demo.obs.locs.matrix();
  for (const auto& mv : demo.models) {
    const PosteriorOptions opts{std::nullopt, true};
    const auto pg = mv.intrinsic ? posterior_moments(demo.obs, {0.0, {}}, mv.model, far, opts)
                                 : stationary_posterior(demo.obs, {0.0, {}}, mv.model, far, opts);
    for (Eigen::Index i = 0; i < fp.rows(); ++i) {
      const double mu = pg.mu[i];
      if (!mv.intrinsic) {
        // Correlation at distance 8 is about exp(-8); further out it keeps shrinking.
        EXPECT_LT(std::abs(mu), 1e-2 * y.cwiseAbs().maxCoeff()) << mv.name;
        continue;
      }
      Eigen::Index nearest = 0;
      (s.col(0).array() - fp(i, 0)).abs().minCoeff(&nearest);
      EXPECT_GE(mu, lo) << mv.name;
      EXPECT_LE(mu, hi) << mv.name;
      EXPECT_LT(std::abs(mu - y[nearest]), std::abs(mu)) << mv.name;
    }
    if (!mv.intrinsic) {
      EXPECT_LE(std::abs(pg.mu[0]), std::abs(pg.mu[1])) << mv.name;
      EXPECT_LE(std::abs(pg.mu[3]), std::abs(pg.mu[2])) << mv.name;
    }
  }
}

TEST(MedianShift, OddAndEven) {
  EXPECT_EQ(median_shift(Eigen::Vector3d(5, 1, 3)), Eigen::Vector3d(2, -2, 0));
  EXPECT_EQ(median_shift(Eigen::Vector4d(4, 1, 3, 2)), Eigen::Vector4d(1.5, -1.5, 0.5, -0.5));
  EXPECT_EQ(median_shift(Eigen::VectorXd()).size(), 0);
}

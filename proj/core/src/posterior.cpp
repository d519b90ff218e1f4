#include "igpk/posterior.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include <Eigen/Cholesky>
#include <spdlog/spdlog.h>

#include "igpk/error.hpp"
#include "igpk/log.hpp"

namespace igpk {

namespace {

constexpr int kMaxDeltaDoublings = 6;

// Column-major fill so that the first columns do not depend on k.
Eigen::MatrixXd standard_normals(Eigen::Index n, int k, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  Eigen::MatrixXd v(n, k);
  for (Eigen::Index j = 0; j < k; ++j) {
    for (Eigen::Index i = 0; i < n; ++i) v(i, j) = normal(rng);
  }
  return v;
}

void check_inputs(const Observations& obs, const ObservationModel& om, const LocationSet& lattice) {
  if (obs.size() < 1) throw DomainError("posterior needs at least one observation");
  if (lattice.empty()) throw DomainError("prediction lattice is empty");
  if (lattice.dim() != obs.locs.dim()) throw DomainError("lattice and observations differ in dimension");
  if (!(om.sigma >= 0.0)) throw DomainError("sigma must be nonnegative");
  if (om.F.size() > 0 && om.F.rows() != obs.size()) {
    throw DomainError("noise factor must have one row per observation");
  }
}

// Under exact observations a lattice point on an observation makes the joint
// system singular; nudge such points by 1e-9 of the lattice spacing.
LocationSet separate_from_observations(const LocationSet& lattice, const Observations& obs,
                                       const ObservationModel& om) {
  const bool noiseless = om.sigma == 0.0 || (om.F.size() > 0 && om.F.isZero(0.0));
  if (!noiseless) return lattice;
  Eigen::MatrixXd p = lattice.matrix();
  double spacing = lattice.min_separation();
  if (!std::isfinite(spacing)) spacing = obs.locs.min_separation();
  if (!std::isfinite(spacing)) spacing = 1.0;
  int moved = 0;
  for (Eigen::Index i = 0; i < p.rows(); ++i) {
    if (obs.locs.find_coincident(Location(p.row(i).transpose()))) {
      p(i, 0) += 1e-9 * spacing;
      ++moved;
    }
  }
  if (moved > 0) {
    log().warn("moved {} lattice point(s) off exact observations by {:g}", moved, 1e-9 * spacing);
  }
  return LocationSet::unchecked(std::move(p));
}

// Factor of A - B'B + v v' from the factor of A: one update, then row downdates.
void factor_posterior(PosteriorGaussian& pg, const Eigen::MatrixXd& a_factor_upper,
                      const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, const Eigen::VectorXd* v,
                      bool allow_fallback) {
  Eigen::MatrixXd r = a_factor_upper;
  if (v != nullptr) cholesky_update_row(r, *v);
  try {
    auto dd = cholesky_downdate(r, b);
    pg.R_post = std::move(dd.R);
    pg.clamp_log = std::move(dd.clamps);
    return;
  } catch (const NumericError& e) {
    if (!allow_fallback) {
      throw NumericError(std::string(e.what()) +
                         "; the shift delta may be inadequate for the joint location set");
    }
    log().warn("posterior downdate failed ({}); factoring the assembled covariance", e.what());
  }
  Eigen::MatrixXd sigma = a;
  sigma.noalias() -= b.transpose() * b;
  if (v != nullptr) sigma.noalias() += (*v) * v->transpose();
  auto bc = bumped_cholesky(sigma);
  pg.R_post = bc.L.transpose();
  pg.used_direct = true;
  pg.clamp_log.clear();
  for (Eigen::Index i = 0; i < bc.bump.size(); ++i) {
    if (bc.bump[i] > 0.0) pg.clamp_log.push_back({i, bc.bump[i]});
  }
}

}  // namespace

Eigen::VectorXd PosteriorGaussian::sd() const { return R_post.colwise().norm().transpose(); }

Eigen::MatrixXd PosteriorGaussian::covariance() const { return R_post.transpose() * R_post; }

PosteriorGaussian posterior_moments(const Observations& obs, const ObservationModel& om,
                                    const VariogramModel& model, const LocationSet& lattice_in,
                                    const PosteriorOptions& opts) {
  check_inputs(obs, om, lattice_in);
  const Eigen::Index n = obs.size();
  PosteriorGaussian pg;
  pg.lattice = separate_from_observations(lattice_in, obs, om);
  const auto nt = static_cast<Eigen::Index>(pg.lattice.size());

  const Eigen::MatrixXd g_tt = build_gamma(model, pg.lattice).gamma;
  const Eigen::MatrixXd g_ss = build_gamma(model, obs.locs).gamma;
  const Eigen::MatrixXd g_st = cross_gamma(model, obs.locs, pg.lattice);

  double delta = 0.0;
  if (opts.delta) {
    delta = *opts.delta;
  } else {
    // choose_delta on the joint matrix, from its blocks.
    const Eigen::VectorXd row_t = g_tt.rowwise().sum() + g_st.colwise().sum().transpose();
    const Eigen::VectorXd row_s = g_ss.rowwise().sum() + g_st.rowwise().sum();
    const double den = row_t.sum() + row_s.sum();
    if (!(den > 0.0)) throw DomainError("joint variogram matrix is degenerate");
    delta = (row_t.squaredNorm() + row_s.squaredNorm()) / den;
  }
  ShiftedCholesky sc_t = shifted_cholesky(g_tt, delta);
  ShiftedCholesky sc_s = shifted_cholesky(g_ss, delta);
  for (int i = 0; i < kMaxDeltaDoublings && !opts.delta && (sc_t.bump_warning || sc_s.bump_warning);
       ++i) {
    delta *= 2.0;
    sc_t = shifted_cholesky(g_tt, delta);
    sc_s = shifted_cholesky(g_ss, delta);
  }
  pg.delta = delta;

  const Eigen::MatrixXd rs = noisy_shifted_factor(sc_s, om.sigma, om.F);
  const auto rst = rs.transpose().triangularView<Eigen::Lower>();
  Eigen::MatrixXd b = -g_st;
  b.array() += delta;
  rst.solveInPlace(b);  // B = R_s^{-T} (delta - Gamma_st)
  const Eigen::VectorXd w = rst.solve(Eigen::VectorXd::Ones(n));
  const Eigen::VectorXd z = rst.solve(obs.y);
  const double a = w.squaredNorm();
  if (!(a > 0.0)) throw NumericError("degenerate configuration: e'K^{-1}e vanishes");
  const double level = w.dot(z) / a;
  const Eigen::VectorXd resid = Eigen::VectorXd::Ones(nt) - b.transpose() * w;
  pg.mu = b.transpose() * z + resid * level;

  const Eigen::VectorXd v = resid / std::sqrt(a);
  Eigen::MatrixXd a_tt = -g_tt;
  a_tt.array() += delta;
  Eigen::MatrixXd r_t = sc_t.L0.transpose();
  factor_posterior(pg, r_t, a_tt, b, &v, opts.allow_direct_fallback);
  return pg;
}

PosteriorGaussian stationary_posterior(const Observations& obs, const ObservationModel& om,
                                       const VariogramModel& model, const LocationSet& lattice_in,
                                       const PosteriorOptions& opts) {
  check_inputs(obs, om, lattice_in);
  const auto sill = model.sill();
  if (!sill) throw DomainError("stationary posterior needs a stationary covariance model");
  PosteriorGaussian pg;
  pg.lattice = separate_from_observations(lattice_in, obs, om);

  auto cov = [&](const Eigen::MatrixXd& g) {
    Eigen::MatrixXd c = -g;
    c.array() += *sill;
    return c;
  };
  const Eigen::MatrixXd c_tt = cov(build_gamma(model, pg.lattice).gamma);
  Eigen::MatrixXd k = cov(build_gamma(model, obs.locs).gamma) + om.noise_covariance(obs.size());
  Eigen::MatrixXd b = cov(cross_gamma(model, obs.locs, pg.lattice));

  const auto lk = bumped_cholesky(k);
  const auto lkv = lk.L.triangularView<Eigen::Lower>();
  lkv.solveInPlace(b);  // B = L_K^{-1} C_st
  const Eigen::VectorXd z = lkv.solve(obs.y);
  pg.mu = b.transpose() * z;

  const auto lt = bumped_cholesky(c_tt);
  factor_posterior(pg, lt.L.transpose(), c_tt, b, nullptr, opts.allow_direct_fallback);
  return pg;
}

Eigen::VectorXd realize(const PosteriorGaussian& pg, const Eigen::VectorXd& v) {
  if (v.size() != pg.mu.size()) throw DomainError("draw length does not match the lattice");
  return pg.mu + pg.R_post.transpose().triangularView<Eigen::Lower>() * v;
}

Eigen::MatrixXd sample_posterior(const PosteriorGaussian& pg, std::uint64_t seed, int k) {
  if (k < 0) throw DomainError("sample count must be nonnegative");
  const Eigen::Index n = pg.mu.size();
  const Eigen::MatrixXd v = standard_normals(n, k, seed);
  Eigen::MatrixXd out = pg.R_post.transpose().triangularView<Eigen::Lower>() * v;
  out.colwise() += pg.mu;
  return out;
}

Eigen::MatrixXd prior_increment_factor(const VariogramModel& model, const Location& anchor,
                                       const LocationSet& points) {
  if (points.empty()) throw DomainError("no points to sample");
  if (anchor.dim() != points.dim()) throw DomainError("anchor dimension differs from points");
  if (points.find_coincident(anchor)) throw DomainError("anchor coincides with a sample point");
  const auto vg = build_gamma(model, points);
  const Eigen::VectorXd ga = gamma_vector(model, points, anchor);
  const auto sc = factor_shifted_augmented(vg.gamma, ga);
  const auto tf = twisted_factor(sc, ga);
  return increment_factor(sc, tf).G;
}

Eigen::MatrixXd sample_prior_paths(const VariogramModel& model, const Location& anchor,
                                   const LocationSet& points, std::uint64_t seed, int k) {
  if (k < 0) throw DomainError("sample count must be nonnegative");
  const Eigen::MatrixXd g = prior_increment_factor(model, anchor, points);
  const Eigen::Index n = g.rows();
  const Eigen::MatrixXd v = standard_normals(n, k, seed);
  return g.triangularView<Eigen::Lower>() * v;
}

PriorPath sample_prior_path(const VariogramModel& model, const Location& anchor,
                            const LocationSet& points, std::uint64_t seed) {
  PriorPath p;
  p.anchor = anchor;
  p.points = points;
  p.values = sample_prior_paths(model, anchor, points, seed, 1).col(0);
  return p;
}

Eigen::MatrixXd sample_stationary_prior(const VariogramModel& model, const LocationSet& points,
                                        std::uint64_t seed, int k) {
  if (k < 0) throw DomainError("sample count must be nonnegative");
  const auto sill = model.sill();
  if (!sill) throw DomainError("stationary prior needs a model with a sill");
  Eigen::MatrixXd c = -build_gamma(model, points).gamma;
  c.array() += *sill;
  const auto lc = bumped_cholesky(c);
  return lc.L.triangularView<Eigen::Lower>() * standard_normals(c.rows(), k, seed);
}

Eigen::VectorXd median_shift(const Eigen::VectorXd& v) {
  if (v.size() == 0) return v;
  std::vector<double> s(v.data(), v.data() + v.size());
  const auto mid = s.begin() + static_cast<std::ptrdiff_t>(s.size() / 2);
  std::nth_element(s.begin(), mid, s.end());
  double med = *mid;
  if (s.size() % 2 == 0) med = 0.5 * (med + *std::max_element(s.begin(), mid));
  return v.array() - med;
}

}  // namespace igpk

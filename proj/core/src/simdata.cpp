#include "igpk/simdata.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "igpk/error.hpp"
#include "igpk/posterior.hpp"

namespace igpk {

namespace {

constexpr std::uint64_t kNoiseStream = 0x9E3779B97F4A7C15ULL;

LocationSet line_points(const Eigen::Vector2d& a, const Eigen::Vector2d& b, int count) {
  Eigen::MatrixXd p(count, 2);
  for (int k = 0; k < count; ++k) {
    const double f = (k + 0.5) / count;
    p.row(k) = (a + f * (b - a)).transpose();
  }
  return LocationSet::unchecked(std::move(p));
}

}  // namespace

Demo1D make_demo_1d(const DemoConfig1D& cfg) {
  if (cfg.n_obs < 2) throw DomainError("demo needs at least two observations");
  if (!(cfg.hi > cfg.lo)) throw DomainError("demo domain is empty");
  if (cfg.lattice_steps < 2) throw DomainError("demo lattice needs at least two steps");

  std::mt19937_64 rng(cfg.seed);
  std::uniform_real_distribution<double> jitter(0.0, 1.0);
  std::normal_distribution<double> normal(cfg.data_level, cfg.data_sd);
  Eigen::MatrixXd x(cfg.n_obs, 1);
  Eigen::VectorXd y(cfg.n_obs);
  const double width = (cfg.hi - cfg.lo) / cfg.n_obs;
  for (int k = 0; k < cfg.n_obs; ++k) x(k, 0) = cfg.lo + (k + jitter(rng)) * width;
  for (int k = 0; k < cfg.n_obs; ++k) y[k] = normal(rng);

  std::vector<double> pts;
  for (int i = 0; i < cfg.lattice_steps; ++i) {
    pts.push_back(cfg.lattice_lo + (cfg.lattice_hi - cfg.lattice_lo) * i / (cfg.lattice_steps - 1));
  }
  for (int k = 0; k < cfg.n_obs; ++k) pts.push_back(x(k, 0));
  pts.insert(pts.end(), cfg.far_points.begin(), cfg.far_points.end());
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end(),
                        [](double a, double b) { return std::abs(a - b) <= kCoincidenceTol; }),
            pts.end());

  Demo1D demo;
  demo.obs = Observations(LocationSet(x), y);
  demo.lattice = LocationSet(Eigen::Map<Eigen::MatrixXd>(pts.data(), static_cast<Eigen::Index>(pts.size()), 1));

  const auto rough = VariogramModel::stationary_exp(cfg.sta_sigma2, cfg.sta_theta);
  const auto smooth = VariogramModel::stationary_gauss(cfg.sta_sigma2, cfg.sta_theta);
  const auto brown = VariogramModel::brownian(1.0);
  const auto conv = VariogramModel::convolved_brownian(1.0, cfg.smooth_r, 1);
  const auto rough_int =
      brown.with_sigma2(calibrate_sigma2(brown, cfg.calib_at, rough.at_distance(cfg.calib_at)));
  const auto smooth_int =
      conv.with_sigma2(calibrate_sigma2(conv, cfg.calib_at, smooth.at_distance(cfg.calib_at)));
  demo.calibration_residual =
      std::max(std::abs(rough_int.at_distance(cfg.calib_at) - rough.at_distance(cfg.calib_at)),
               std::abs(smooth_int.at_distance(cfg.calib_at) - smooth.at_distance(cfg.calib_at)));
  demo.models = {
      {"rough_stationary", "rough", false, rough},
      {"rough_intrinsic", "rough", true, rough_int},
      {"smooth_stationary", "smooth", false, smooth},
      {"smooth_intrinsic", "smooth", true, smooth_int},
  };
  return demo;
}

LocationSet swot_grid(const SwotConfig& cfg) {
  if (cfg.nx < 1 || cfg.ny < 1) throw DomainError("grid needs at least one cell per axis");
  Eigen::MatrixXd p(static_cast<Eigen::Index>(cfg.nx) * cfg.ny, 2);
  const double dx = cfg.region_x / cfg.nx;
  const double dy = cfg.region_y / cfg.ny;
  Eigen::Index k = 0;
  for (int j = 0; j < cfg.ny; ++j) {
    for (int i = 0; i < cfg.nx; ++i) {
      p(k, 0) = (i + 0.5) * dx;
      p(k, 1) = (j + 0.5) * dy;
      ++k;
    }
  }
  return LocationSet::unchecked(std::move(p));
}

LocationSet swot_track(const SwotConfig& cfg) {
  if (cfg.points_per_line < 1) throw DomainError("track needs at least one point per line");
  const auto a = line_points(cfg.line1_start, cfg.line1_end, cfg.points_per_line);
  const auto b = line_points(cfg.line1_start + cfg.line_offset, cfg.line1_end + cfg.line_offset,
                             cfg.points_per_line);
  auto track = a.concat(b);
  const auto& m = track.matrix();
  if ((m.col(0).array() < 0.0).any() || (m.col(0).array() > cfg.region_x).any() ||
      (m.col(1).array() < 0.0).any() || (m.col(1).array() > cfg.region_y).any()) {
    throw DomainError("track leaves the region");
  }
  return track;
}

Eigen::MatrixXd swot_noise_factor(const SwotConfig& cfg, const LocationSet& track) {
  if (cfg.sigma_w < 0.0 || cfg.sigma_c < 0.0 || !(cfg.ell_c > 0.0)) {
    throw DomainError("noise parameters must be nonnegative with a positive length");
  }
  const auto n = static_cast<Eigen::Index>(track.size());
  Eigen::MatrixXd k = Eigen::MatrixXd::Zero(n, n);
  const Eigen::Index per_line = cfg.points_per_line;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      if (i / per_line != j / per_line) continue;
      const double d = (track.matrix().row(i) - track.matrix().row(j)).norm();
      k(i, j) = std::exp(-0.5 * (d / cfg.ell_c) * (d / cfg.ell_c));
    }
  }
  k.rowwise().normalize();
  Eigen::MatrixXd f(n, 2 * n);
  f.leftCols(n) = cfg.sigma_w * Eigen::MatrixXd::Identity(n, n);
  f.rightCols(n) = cfg.sigma_c * k;
  return f;
}

Eigen::VectorXd swot_noise(const Eigen::MatrixXd& F, std::uint64_t seed) {
  std::mt19937_64 rng(seed ^ kNoiseStream);
  std::normal_distribution<double> normal;
  Eigen::VectorXd u(F.cols());
  for (Eigen::Index i = 0; i < u.size(); ++i) u[i] = normal(rng);
  return F * u;
}

SwotData make_swot(const SwotConfig& cfg) {
  SwotData d;
  d.grid = swot_grid(cfg);
  d.track = swot_track(cfg);
  d.model = VariogramModel::convolved_brownian(cfg.sigma2_z, cfg.r, 2);
  const LocationSet all(d.grid.concat(d.track).matrix());
  const Location anchor(Eigen::VectorXd(cfg.anchor));
  const Eigen::VectorXd truth = sample_prior_path(d.model, anchor, all, cfg.seed).values;
  const auto ng = static_cast<Eigen::Index>(d.grid.size());
  d.truth_grid = truth.head(ng);
  d.truth_track = truth.tail(truth.size() - ng);
  d.om.sigma = 1.0;
  d.om.F = swot_noise_factor(cfg, d.track);
  d.obs = Observations(d.track, d.truth_track + swot_noise(d.om.F, cfg.seed));
  d.config_echo = to_json(cfg);
  return d;
}

nlohmann::json to_json(const SwotConfig& cfg) {
  auto vec = [](const Eigen::Vector2d& v) { return std::vector<double>{v[0], v[1]}; };
  return nlohmann::json{
      {"region_km", {cfg.region_x, cfg.region_y}},
      {"grid", {cfg.nx, cfg.ny}},
      {"points_per_line", cfg.points_per_line},
      {"line1_start_km", vec(cfg.line1_start)},
      {"line1_end_km", vec(cfg.line1_end)},
      {"line_offset_km", vec(cfg.line_offset)},
      {"anchor_km", vec(cfg.anchor)},
      {"variogram",
       {{"family", "convolved_brownian"}, {"sigma2", cfg.sigma2_z}, {"r", cfg.r}, {"dim", 2}}},
      {"sigma2_z", cfg.sigma2_z},
      {"r_km", cfg.r},
      {"error",
       {{"model", "sigma_w^2 I + sigma_c^2 K K' (stand-in)"},
        {"sigma_w", cfg.sigma_w},
        {"sigma_c", cfg.sigma_c},
        {"ell_c_km", cfg.ell_c}}},
      {"seed", cfg.seed},
  };
}

}  // namespace igpk

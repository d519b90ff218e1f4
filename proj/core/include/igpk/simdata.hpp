#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <json.hpp>

#include "igpk/kriging.hpp"
#include "igpk/location.hpp"
#include "igpk/variogram.hpp"

namespace igpk {

struct DemoConfig1D {
  int n_obs = 7;
  double lo = 0.0;
  double hi = 1.0;
  std::uint64_t seed = 20240607;
  double data_level = 2.0;  // observations are data_level + N(0, data_sd^2)
  double data_sd = 1.0;
  double sta_sigma2 = 1.0;
  double sta_theta = 1.0;
  double calib_at = 0.05;
  double smooth_r = 0.05;  // kernel std-dev of the smooth intrinsic model
  double lattice_lo = -0.25;
  double lattice_hi = 1.25;
  int lattice_steps = 301;
  std::vector<double> far_points{-12.0, -8.0, 9.0, 13.0};
};

struct ModelVariant {
  std::string name;  // e.g. "rough_stationary"
  std::string row;   // "rough" or "smooth"
  bool intrinsic = false;
  VariogramModel model;
};

struct Demo1D {
  Observations obs;
  LocationSet lattice;  // grid, observation points and far points, sorted
  std::vector<ModelVariant> models;  // rough stationary, rough intrinsic, smooth stationary, smooth intrinsic
  double calibration_residual = 0.0;  // max over intrinsic models at calib_at
};

Demo1D make_demo_1d(const DemoConfig1D& cfg);

struct SwotConfig {
  double region_x = 512.0;  // km
  double region_y = 512.0;
  int nx = 64;
  int ny = 64;
  int points_per_line = 128;
  // Two parallel swath lines, each from start to end (km).
  Eigen::Vector2d line1_start{150.0, 8.0};
  Eigen::Vector2d line1_end{250.0, 504.0};
  Eigen::Vector2d line_offset{120.0, 0.0};
  Eigen::Vector2d anchor{0.0, 0.0};
  double sigma2_z = 0.00008;  // m^2
  double r = 50.0;            // km
  double sigma_w = 0.01;      // m, white error
  double sigma_c = 0.005;     // m, along-track correlated error
  double ell_c = 25.0;        // km
  std::uint64_t seed = 20240607;
};

struct SwotData {
  LocationSet grid;
  LocationSet track;
  Eigen::VectorXd truth_grid;
  Eigen::VectorXd truth_track;
  Observations obs;
  ObservationModel om;
  VariogramModel model = VariogramModel::brownian(1.0);
  nlohmann::json config_echo;
};

/// Cell-centre lattice of the region.
LocationSet swot_grid(const SwotConfig& cfg);
/// Observation locations along the two swath lines.
LocationSet swot_track(const SwotConfig& cfg);
/// F = [sigma_w I | sigma_c K] with unit-norm squared-exponential rows in K
/// (coupling points on the same line only).
Eigen::MatrixXd swot_noise_factor(const SwotConfig& cfg, const LocationSet& track);
/// One draw of the observation error F u, deterministic in seed.
Eigen::VectorXd swot_noise(const Eigen::MatrixXd& F, std::uint64_t seed);

SwotData make_swot(const SwotConfig& cfg);

nlohmann::json to_json(const SwotConfig& cfg);

}  // namespace igpk

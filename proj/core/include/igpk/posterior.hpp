#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include <Eigen/Core>

#include "igpk/kriging.hpp"
#include "igpk/location.hpp"
#include "igpk/structmat.hpp"
#include "igpk/variogram.hpp"

namespace igpk {

struct PosteriorOptions {
  std::optional<double> delta;
  /// On a failed downdate, factor the directly assembled covariance instead of
  /// throwing. The switch is recorded in clamp_log and used_direct.
  bool allow_direct_fallback = false;
};

/// N(mu, R_post' R_post) over a prediction lattice.
struct PosteriorGaussian {
  LocationSet lattice;
  Eigen::VectorXd mu;
  Eigen::MatrixXd R_post;  // upper triangular
  std::vector<ClampEvent> clamp_log;
  double delta = 0.0;
  bool used_direct = false;

  [[nodiscard]] Eigen::VectorXd sd() const;
  [[nodiscard]] Eigen::MatrixXd covariance() const;
};

/// Joint conditioning of the lattice on the observations under an intrinsic
/// prior with an unknown constant level. Uses the shifted matrix
/// delta e e' - Gamma on (t, s); the mean and covariance do not depend on delta.
PosteriorGaussian posterior_moments(const Observations& obs, const ObservationModel& om,
                                    const VariogramModel& model, const LocationSet& lattice,
                                    const PosteriorOptions& opts = {});

/// Conditioning under a stationary prior with mean zero.
PosteriorGaussian stationary_posterior(const Observations& obs, const ObservationModel& om,
                                       const VariogramModel& model, const LocationSet& lattice,
                                       const PosteriorOptions& opts = {});

/// mu + R_post' v.
Eigen::VectorXd realize(const PosteriorGaussian& pg, const Eigen::VectorXd& v);

/// k realizations as columns, deterministic in seed.
Eigen::MatrixXd sample_posterior(const PosteriorGaussian& pg, std::uint64_t seed, int k);

struct PriorPath {
  Location anchor;  // pinned at 0
  LocationSet points;
  Eigen::VectorXd values;
};

/// Lower factor G of the increment covariance of points relative to anchor.
Eigen::MatrixXd prior_increment_factor(const VariogramModel& model, const Location& anchor,
                                       const LocationSet& points);

PriorPath sample_prior_path(const VariogramModel& model, const Location& anchor,
                            const LocationSet& points, std::uint64_t seed);

/// k anchored prior draws as columns, sharing one factorization.
Eigen::MatrixXd sample_prior_paths(const VariogramModel& model, const Location& anchor,
                                   const LocationSet& points, std::uint64_t seed, int k);

/// k zero-mean draws under the stationary covariance sill - gamma.
Eigen::MatrixXd sample_stationary_prior(const VariogramModel& model, const LocationSet& points,
                                        std::uint64_t seed, int k);

/// Display helper: subtracts the median of v.
Eigen::VectorXd median_shift(const Eigen::VectorXd& v);

}  // namespace igpk

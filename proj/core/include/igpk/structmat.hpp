#pragma once

#include <optional>
#include <vector>

#include <Eigen/Core>

#include "igpk/location.hpp"
#include "igpk/variogram.hpp"

namespace igpk {

/// Variogram matrix Gamma_ij = gamma(s_i, s_j) with the points it was built on.
struct VariogramMatrix {
  Eigen::MatrixXd gamma;
  LocationSet locs;

  [[nodiscard]] Eigen::Index size() const { return gamma.rows(); }
};

VariogramMatrix build_gamma(const VariogramModel& model, const LocationSet& locs);
/// gamma(t, s_k) for every point of locs.
Eigen::VectorXd gamma_vector(const VariogramModel& model, const LocationSet& locs,
                             const Location& t);
/// |a| x |b| block of gamma(a_i, b_j).
Eigen::MatrixXd cross_gamma(const VariogramModel& model, const LocationSet& a,
                            const LocationSet& b);

struct CndDiagnostics {
  bool singular = false;
  int n_pos_eig = 0;
  Eigen::VectorXd eigenvalues;  // ascending
  Eigen::VectorXd perron;       // unit norm, sign-normalized
  double e_Ginv_e = 0.0;
};

/// Full symmetric eigendecomposition of Gamma: count of positive eigenvalues,
/// Perron vector, and e' Gamma^{-1} e. Values are left empty when Gamma is
/// numerically singular.
CndDiagnostics cnd_diagnostics(const Eigen::MatrixXd& gamma);

/// ||Gamma e||^2 / (e' Gamma e); 1.0 for a single point.
double choose_delta(const Eigen::MatrixXd& gamma);

/// Lower factor L with L L' = A + diag(bump). A pivot p at or below
/// tol = 1e-12 * ||A||_inf is replaced by max(tol, -p) and the change recorded
/// in bump.
struct BumpedCholesky {
  Eigen::MatrixXd L;
  Eigen::VectorXd bump;
  double tol = 0.0;
};

BumpedCholesky bumped_cholesky(const Eigen::MatrixXd& a);

/// Factor of delta e e' - Gamma.
struct ShiftedCholesky {
  double delta = 0.0;
  Eigen::MatrixXd L0;
  Eigen::VectorXd bump;
  bool bump_warning = false;  // total bump above 1e-6 ||Gamma||_inf
  int retries = 0;            // number of delta doublings

  [[nodiscard]] Eigen::Index size() const { return L0.rows(); }
  [[nodiscard]] double bump_max() const;
};

/// One factorization at the given delta, bumping pivots as needed.
ShiftedCholesky shifted_cholesky(const Eigen::MatrixXd& gamma, double delta);

/// Chooses delta (unless given) and factors; when the bump is large enough to
/// raise the warning, delta is doubled and the factorization retried up to six
/// times before the last bumped factor is accepted.
ShiftedCholesky factor_shifted(const Eigen::MatrixXd& gamma,
                               std::optional<double> delta = std::nullopt);

/// factor_shifted with delta chosen for the augmented matrix over (s, t), so
/// that the twisted factor at gamma_t exists; delta is doubled (up to six
/// times) while the border pivot rho^2 is negative.
ShiftedCholesky factor_shifted_augmented(const Eigen::MatrixXd& gamma,
                                         const Eigen::VectorXd& gamma_t);

/// Border of the shifted factor for one target: L0 r = delta e - gamma_t,
/// rho = sqrt(delta - ||r||^2).
struct TwistedFactor {
  Eigen::VectorXd r;
  double rho = 0.0;
  bool clamped = false;
};

TwistedFactor twisted_factor(const ShiftedCholesky& sc, const Eigen::VectorXd& gamma_t);

/// Lower-triangular G with G G' = gamma_t e' + e gamma_t' - Gamma.
struct IncrementCovFactor {
  Eigen::MatrixXd G;
};

/// Two-phase Givens reduction of [-rho e' ; L0' - r e'] to triangular form,
/// O(n^2) per target.
IncrementCovFactor increment_factor(const ShiftedCholesky& sc, const TwistedFactor& tf);

/// Directly assembled M(t) = gamma_t e' + e gamma_t' - Gamma.
Eigen::MatrixXd increment_covariance(const Eigen::MatrixXd& gamma,
                                     const Eigen::VectorXd& gamma_t);

/// Upper-triangular R with R'R = sigma^2 F F' + delta e e' - Gamma, by Givens
/// updates of L0' with the columns of sigma F. An empty F means the identity.
Eigen::MatrixXd noisy_shifted_factor(const ShiftedCholesky& sc, double sigma,
                                     const Eigen::MatrixXd& F);

/// In-place rank-one update: R'R <- R'R + x x' (R upper triangular).
void cholesky_update_row(Eigen::MatrixXd& r, Eigen::VectorXd x);

struct ClampEvent {
  Eigen::Index row = 0;  // downdated row of B, or lattice index for direct fallbacks
  double value = 0.0;    // offending quantity before clamping
};

struct DowndateResult {
  Eigen::MatrixXd R;
  std::vector<ClampEvent> clamps;
};

/// Upper-triangular factor of R'R - B'B, one row of B at a time. Small
/// negative residuals (down to -1e-8) are clamped and recorded; anything larger
/// throws NumericError.
DowndateResult cholesky_downdate(const Eigen::MatrixXd& r, const Eigen::MatrixXd& b);

enum class IncrementKind { TargetRelative, Consecutive };

/// Increment matrix over (t, s_1, ..., s_n) with the congruence J mapping the
/// target-relative D to it (J = I for TargetRelative).
struct IncrementMap {
  IncrementKind kind = IncrementKind::TargetRelative;
  Eigen::MatrixXd D;  // n x (n+1)
  Eigen::MatrixXd J;  // n x n
};

IncrementMap increment_map(IncrementKind kind, int n);

/// [[0, gamma_t'], [gamma_t, Gamma]].
Eigen::MatrixXd augmented_gamma(const Eigen::MatrixXd& gamma, const Eigen::VectorXd& gamma_t);

}  // namespace igpk

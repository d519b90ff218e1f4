#include <algorithm>
#include <chrono>
#include <cmath>
#include <random>

#include <Eigen/Cholesky>

#include <igpk/error.hpp>
#include <igpk/structmat.hpp>
#include <igpk_cli/cli.hpp>

namespace igpk::cli {

namespace {

using Clock = std::chrono::steady_clock;
// Each timing repeats its call for at least this long (seconds).
constexpr double kMinTime = 0.05;

// Seconds per call, repeating f until at least min_total has elapsed.
template <class F>
double time_per_call(F&& f, double min_total) {
  int calls = 0;
  const auto t0 = Clock::now();
  double elapsed = 0.0;
  do {
    f();
    ++calls;
    elapsed = std::chrono::duration<double>(Clock::now() - t0).count();
  } while (elapsed < min_total);
  return elapsed / calls;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

}  // namespace

std::vector<BenchRow> run_bench(const std::vector<int>& ns, int reps, std::uint64_t seed,
                                int threads) {
  if (ns.empty()) throw ConfigError("bench needs at least one n");
  if (!std::is_sorted(ns.begin(), ns.end()) || ns.front() < 2) {
    throw ConfigError("bench sizes must be ascending and at least 2");
  }
  if (reps < 1) throw ConfigError("bench needs at least one rep");
  const auto model = VariogramModel::stationary_exp(1.0, 3.0);
  std::vector<BenchRow> rows;
  for (const int n : ns) {
    std::mt19937_64 rng(derive_seed(seed, static_cast<std::uint32_t>(n)));
    std::uniform_real_distribution<double> u(0.0, 1.0);
    Eigen::MatrixXd p(n, 2);
    for (Eigen::Index i = 0; i < p.size(); ++i) p.data()[i] = u(rng);
    const LocationSet locs(p);
    const Eigen::MatrixXd gamma = build_gamma(model, locs).gamma;
    const auto sc = factor_shifted(gamma);

    std::vector<Eigen::VectorXd> targets(static_cast<std::size_t>(reps));
    for (auto& gt : targets) gt = gamma_vector(model, locs, Location{u(rng), u(rng)});

    std::vector<double> twisted(targets.size());
    std::vector<double> direct(targets.size());
    parallel_for(targets.size(), threads, [&](std::size_t k) {
      const auto& gt = targets[k];
      twisted[k] = time_per_call(
          [&] {
            const auto tf = twisted_factor(sc, gt);
            const auto g = increment_factor(sc, tf);
            if (!std::isfinite(g.G(0, 0))) throw NumericError("bench: non-finite factor");
          },
          kMinTime);
      direct[k] = time_per_call(
          [&] {
            Eigen::LLT<Eigen::MatrixXd> llt(increment_covariance(gamma, gt));
            if (llt.info() != Eigen::Success) throw NumericError("bench: direct Cholesky failed");
          },
          kMinTime);
    });
    rows.push_back({n, "twisted", median(twisted)});
    rows.push_back({n, "direct", median(direct)});
  }
  return rows;
}

double bench_slope(const std::vector<BenchRow>& rows, const std::string& method) {
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  int m = 0;
  for (const auto& r : rows) {
    if (r.method != method) continue;
    const double x = std::log(static_cast<double>(r.n));
    const double y = std::log(r.seconds);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++m;
  }
  if (m < 2) throw ConfigError("slope needs timings at two or more sizes");
  return (m * sxy - sx * sy) / (m * sxx - sx * sx);
}

}  // namespace igpk::cli

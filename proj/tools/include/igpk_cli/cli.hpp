#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include <igpk/kriging.hpp>

namespace igpk::cli {

/// Parsed --method string: igp, igp0, limit, rational:perron|ones|rinv,
/// shepard, gshepard, jk:<degree>.
struct MethodSpec {
  WeightMethod method = WeightMethod::Igp;
  CSource source = CSource::Perron;
  int degree = 0;
};

/// Throws ConfigError on anything it does not recognize.
MethodSpec parse_method(const std::string& text);

/// Deterministic sub-seed for stream (a, b) of a run seed.
std::uint64_t derive_seed(std::uint64_t seed, std::uint32_t a, std::uint32_t b = 0);

/// Runs f(i) for i in [0, n) on up to `threads` threads. Each index is visited
/// exactly once, so results written by index do not depend on the thread count.
void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& f);

struct BenchRow {
  int n = 0;
  std::string method;  // "twisted" or "direct"
  double seconds = 0.0;  // median per-target time over reps
};

/// Per-target factorization timings of the twisted path against a dense
/// Cholesky of the assembled increment covariance.
std::vector<BenchRow> run_bench(const std::vector<int>& ns, int reps, std::uint64_t seed,
                                int threads = 1);

/// Least-squares slope of log(seconds) against log(n) for one method.
double bench_slope(const std::vector<BenchRow>& rows, const std::string& method);

void demo_fig1(const std::filesystem::path& outdir, std::uint64_t seed);
void demo_swot(const std::filesystem::path& outdir, std::uint64_t seed);

/// Full command line; returns the process exit code (0 ok, 1 numeric failure,
/// 2 configuration error).
int run(int argc, char** argv);

}  // namespace igpk::cli

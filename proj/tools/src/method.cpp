#include <algorithm>
#include <charconv>
#include <random>
#include <thread>

#include <igpk/error.hpp>
#include <igpk_cli/cli.hpp>

namespace igpk::cli {

MethodSpec parse_method(const std::string& text) {
  MethodSpec m;
  if (text == "igp") {
    m.method = WeightMethod::Igp;
  } else if (text == "igp0") {
    m.method = WeightMethod::IgpNoiseFree;
  } else if (text == "limit") {
    m.method = WeightMethod::Limit;
  } else if (text == "rational:perron" || text == "rational") {
    m.method = WeightMethod::Rational;
    m.source = CSource::Perron;
  } else if (text == "rational:ones") {
    m.method = WeightMethod::Rational;
    m.source = CSource::Ones;
  } else if (text == "rational:rinv") {
    m.method = WeightMethod::Rational;
    m.source = CSource::RInvE;
  } else if (text == "shepard") {
    m.method = WeightMethod::Shepard;
  } else if (text == "gshepard") {
    m.method = WeightMethod::GammaShepard;
  } else if (text.rfind("jk:", 0) == 0) {
    m.method = WeightMethod::JosephKangResidual;
    const char* b = text.data() + 3;
    const char* e = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(b, e, m.degree);
    if (ec != std::errc() || ptr != e || b == e || m.degree < 0) {
      throw ConfigError("bad polynomial degree in method '" + text + "'");
    }
  } else {
    throw ConfigError("unknown method '" + text + "'");
  }
  return m;
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint32_t a, std::uint32_t b) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32), a, b};
  std::uint32_t out[2];
  seq.generate(out, out + 2);
  return (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
}

void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& f) {
  const auto t = static_cast<std::size_t>(std::clamp(threads, 1, 256));
  if (t == 1 || n < 2) {
    for (std::size_t i = 0; i < n; ++i) f(i);
    return;
  }
  std::vector<std::exception_ptr> errors(t);
  {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < t; ++w) {
      pool.emplace_back([&, w] {
        try {
          for (std::size_t i = w; i < n; i += t) f(i);
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    }
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace igpk::cli

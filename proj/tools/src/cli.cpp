#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include <igpk/csv.hpp>
#include <igpk/error.hpp>
#include <igpk/log.hpp>
#include <igpk/posterior.hpp>
#include <igpk/structmat.hpp>
#include <igpk/variogram.hpp>
#include <igpk_cli/cli.hpp>
#include <spdlog/spdlog.h>

namespace igpk::cli {

namespace {

constexpr std::uint64_t kDefaultSeed = 20240607;

struct RunConfig {
  std::string model_path;
  std::string obs_path;
  std::string targets_path;
  std::string method = "igp";
  std::string out;
  std::optional<double> sigma;
  std::optional<double> delta;
  std::uint64_t seed = kDefaultSeed;
  int threads = 1;
  double dmin = 0.0;
  double dmax = 1.0;
  int steps = 11;
  int draws = 3;
  std::string prior = "intrinsic";
  std::vector<int> ns{256, 512, 1024};
  int reps = 5;
};

VariogramModel load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open model file " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(path + ": " + e.what());
  }
  return model_from_json(j);
}

void emit(const RunConfig& rc, const CsvTable& t) {
  if (!rc.out.empty()) {
    write_csv(rc.out, t);
    return;
  }
  std::cout << [&] {
    std::ostringstream s;
    for (std::size_t i = 0; i < t.header.size(); ++i) s << (i ? "," : "") << t.header[i];
    s << '\n';
    for (const auto& r : t.rows) {
      for (std::size_t i = 0; i < r.size(); ++i) s << (i ? "," : "") << r[i];
      s << '\n';
    }
    return s.str();
  }();
}

void emit_json(const RunConfig& rc, const nlohmann::json& j) {
  if (rc.out.empty()) {
    std::cout << j.dump(2) << '\n';
    return;
  }
  std::ofstream out(rc.out, std::ios::binary);
  out << j.dump(2) << '\n';
  if (!out) throw ConfigError("failed writing " + rc.out);
}

std::vector<std::string> coord_cells(const LocationSet& locs, std::size_t i) {
  std::vector<std::string> r;
  for (int c = 0; c < locs.dim(); ++c) {
    r.push_back(format_double(locs.matrix()(static_cast<Eigen::Index>(i), c)));
  }
  return r;
}

ObservationModel observation_model(const RunConfig& rc) {
  ObservationModel om;
  om.sigma = rc.sigma.value_or(0.0);
  if (om.sigma < 0.0) throw ConfigError("--sigma must be nonnegative");
  return om;
}

void check_dims(const Observations& obs, const LocationSet& targets) {
  if (obs.locs.dim() != targets.dim()) {
    throw ConfigError("observation and target files have different dimensions");
  }
}

void cmd_variogram(const RunConfig& rc) {
  if (rc.steps < 1) throw ConfigError("--steps must be positive");
  if (!(rc.dmin >= 0.0) || !(rc.dmax >= rc.dmin)) throw ConfigError("need 0 <= dmin <= dmax");
  const auto model = load_model(rc.model_path);
  CsvTable t{{"d", "gamma"}, {}};
  for (int i = 0; i < rc.steps; ++i) {
    const double d = rc.steps == 1 ? rc.dmin : rc.dmin + (rc.dmax - rc.dmin) * i / (rc.steps - 1);
    t.rows.push_back({format_double(d), format_double(model.at_distance(d))});
  }
  emit(rc, t);
}

void cmd_predict(const RunConfig& rc) {
  const auto spec = parse_method(rc.method);
  const auto model = load_model(rc.model_path);
  const auto obs = read_observations(rc.obs_path);
  const auto targets = read_locations(rc.targets_path);
  check_dims(obs, targets);
  const auto om = observation_model(rc);
  const Eigen::Index n = obs.size();

  std::optional<IgpKriging> igp;
  Eigen::MatrixXd gamma;
  SillSpec sill;
  RationalConfig rat{spec.source, {}};
  switch (spec.method) {
    case WeightMethod::Igp:
      igp.emplace(obs.locs, model, om, rc.delta);
      break;
    case WeightMethod::IgpNoiseFree:
      if (om.sigma > 0.0) log().warn("igp0 ignores --sigma");
      gamma = build_gamma(model, obs.locs).gamma;
      break;
    case WeightMethod::Limit:
    case WeightMethod::Rational: {
      const auto s = model.sill();
      if (!s) throw ConfigError("method '" + rc.method + "' needs a stationary model with a sill");
      sill.vartheta2 = *s;
      gamma = build_gamma(model, obs.locs).gamma;
      break;
    }
    default:
      break;
  }
  const DistanceFn dist = [&model](const Location& a, const Location& b) {
    return model.distance(a, b);
  };

  std::vector<std::vector<std::string>> rows(targets.size());
  parallel_for(targets.size(), rc.threads, [&](std::size_t i) {
    const Location t = targets[i];
    KrigingWeights w;
    double value = 0.0;
    switch (spec.method) {
      case WeightMethod::Igp:
        w = igp->weights(t);
        break;
      case WeightMethod::IgpNoiseFree:
        w = igp_weights_noise_free(gamma, gamma_vector(model, obs.locs, t));
        break;
      case WeightMethod::Limit:
        w = limit_weights(gamma, gamma_vector(model, obs.locs, t), sill);
        break;
      case WeightMethod::Rational:
        w = rational_weights(gamma, gamma_vector(model, obs.locs, t), sill, rat);
        break;
      case WeightMethod::Shepard:
        w = shepard_weights(obs.locs, t, dist);
        break;
      case WeightMethod::GammaShepard:
        w = gamma_shepard_weights(model, obs.locs, t);
        break;
      case WeightMethod::JosephKangResidual: {
        const auto jk = joseph_kang_predict(obs, t, spec.degree, dist);
        w = jk.weights;
        value = jk.value;
        break;
      }
    }
    if (spec.method != WeightMethod::JosephKangResidual) value = predict(w, obs.y);
    auto r = coord_cells(targets, i);
    r.push_back(format_double(value));
    r.push_back(format_double(w.lambda.sum()));
    for (Eigen::Index k = 0; k < n; ++k) r.push_back(format_double(w.lambda[k]));
    rows[i] = std::move(r);
  });

  CsvTable t;
  t.header = coord_names(targets.dim());
  t.header.push_back("value");
  t.header.push_back("sum_lambda");
  for (Eigen::Index k = 0; k < n; ++k) t.header.push_back("w" + std::to_string(k));
  t.rows = std::move(rows);
  emit(rc, t);
}

PosteriorGaussian posterior_from(const RunConfig& rc, const VariogramModel& model,
                                 const Observations& obs, const LocationSet& targets) {
  PosteriorOptions opts;
  opts.delta = rc.delta;
  opts.allow_direct_fallback = true;
  const auto om = observation_model(rc);
  if (rc.prior == "intrinsic") return posterior_moments(obs, om, model, targets, opts);
  if (rc.prior == "stationary") {
    if (!model.sill()) throw ConfigError("--prior stationary needs a model with a sill");
    return stationary_posterior(obs, om, model, targets, opts);
  }
  throw ConfigError("--prior must be intrinsic or stationary");
}

void cmd_posterior(const RunConfig& rc) {
  const auto model = load_model(rc.model_path);
  const auto obs = read_observations(rc.obs_path);
  const auto targets = read_locations(rc.targets_path);
  check_dims(obs, targets);
  const auto pg = posterior_from(rc, model, obs, targets);
  const Eigen::VectorXd sd = pg.sd();
  CsvTable t;
  t.header = coord_names(targets.dim());
  t.header.push_back("mu");
  t.header.push_back("sd");
  for (std::size_t i = 0; i < pg.lattice.size(); ++i) {
    auto r = coord_cells(pg.lattice, i);
    r.push_back(format_double(pg.mu[static_cast<Eigen::Index>(i)]));
    r.push_back(format_double(sd[static_cast<Eigen::Index>(i)]));
    t.rows.push_back(std::move(r));
  }
  emit(rc, t);
}

void cmd_sample(const RunConfig& rc) {
  if (rc.draws < 1) throw ConfigError("--draws must be positive");
  const auto model = load_model(rc.model_path);
  const auto targets = read_locations(rc.targets_path);
  Eigen::MatrixXd draws;
  LocationSet pts = targets;
  if (rc.obs_path.empty()) {
    // Prior draws pinned to 0 at the first target.
    if (targets.size() < 2) throw ConfigError("prior sampling needs at least two targets");
    const auto rest = LocationSet(targets.matrix().bottomRows(targets.matrix().rows() - 1));
    draws.resize(static_cast<Eigen::Index>(targets.size()), rc.draws);
    draws.row(0).setZero();
    draws.bottomRows(draws.rows() - 1) =
        sample_prior_paths(model, targets[0], rest, rc.seed, rc.draws);
  } else {
    const auto obs = read_observations(rc.obs_path);
    check_dims(obs, targets);
    const auto pg = posterior_from(rc, model, obs, targets);
    pts = pg.lattice;
    draws = sample_posterior(pg, rc.seed, rc.draws);
  }
  CsvTable t;
  t.header = coord_names(pts.dim());
  for (int j = 0; j < rc.draws; ++j) t.header.push_back("draw_" + std::to_string(j));
  for (std::size_t i = 0; i < pts.size(); ++i) {
    auto r = coord_cells(pts, i);
    for (int j = 0; j < rc.draws; ++j) {
      r.push_back(format_double(draws(static_cast<Eigen::Index>(i), j)));
    }
    t.rows.push_back(std::move(r));
  }
  emit(rc, t);
}

void cmd_bench(const RunConfig& rc) {
  const auto rows = run_bench(rc.ns, rc.reps, rc.seed, rc.threads);
  CsvTable t{{"n", "method", "seconds"}, {}};
  for (const auto& r : rows) t.rows.push_back({std::to_string(r.n), r.method, format_double(r.seconds)});
  emit(rc, t);
}

void cmd_diag_cnd(const RunConfig& rc) {
  const auto model = load_model(rc.model_path);
  LocationSet locs;
  if (!rc.targets_path.empty()) {
    locs = read_locations(rc.targets_path);
  } else if (!rc.obs_path.empty()) {
    locs = read_observations(rc.obs_path).locs;
  } else {
    throw ConfigError("diag cnd needs --targets or --obs");
  }
  const Eigen::MatrixXd gamma = build_gamma(model, locs).gamma;
  const auto d = cnd_diagnostics(gamma);
  nlohmann::json j{{"n", locs.size()}, {"singular", d.singular}};
  if (!d.singular) {
    j["n_positive_eigenvalues"] = d.n_pos_eig;
    j["eigenvalue_min"] = d.eigenvalues.minCoeff();
    j["eigenvalue_max"] = d.eigenvalues.maxCoeff();
    j["perron_min"] = d.perron.minCoeff();
    j["e_Ginv_e"] = d.e_Ginv_e;
    const auto sc = factor_shifted(gamma, rc.delta);
    j["delta"] = sc.delta;
    j["delta_retries"] = sc.retries;
    j["bump_max"] = sc.bump_max();
  }
  emit_json(rc, j);
}

}  // namespace

int run(int argc, char** argv) {
  CLI::App app{"Intrinsic-GP kriging toolkit"};
  app.require_subcommand(1);
  RunConfig rc;

  auto add_model = [&](CLI::App* c) {
    return c->add_option("--model", rc.model_path, "Variogram model JSON")->required()->check(CLI::ExistingFile);
  };
  auto add_out = [&](CLI::App* c) { c->add_option("--out", rc.out, "Output file (default stdout)"); };
  auto add_obs = [&](CLI::App* c) {
    return c->add_option("--obs", rc.obs_path, "Observations CSV (coordinates, value)")->check(CLI::ExistingFile);
  };
  auto add_targets = [&](CLI::App* c) {
    return c->add_option("--targets", rc.targets_path, "Target locations CSV")->check(CLI::ExistingFile);
  };
  auto add_common = [&](CLI::App* c) {
    c->add_option("--sigma", rc.sigma, "Observation noise standard deviation");
    c->add_option("--delta", rc.delta, "Override the rank-one shift");
  };

  auto* vario = app.add_subcommand("variogram", "Tabulate a variogram");
  add_model(vario);
  add_out(vario);
  vario->add_option("--dmin", rc.dmin);
  vario->add_option("--dmax", rc.dmax);
  vario->add_option("--steps", rc.steps);

  auto* pred = app.add_subcommand("predict", "Kriging predictions and weights");
  add_model(pred);
  add_obs(pred)->required();
  add_targets(pred)->required();
  add_out(pred);
  add_common(pred);
  pred->add_option("--method", rc.method,
                   "igp, igp0, limit, rational:perron|ones|rinv, shepard, gshepard, jk:<degree>");
  pred->add_option("--threads", rc.threads);

  auto* post = app.add_subcommand("posterior", "Posterior mean and standard deviation");
  add_model(post);
  add_obs(post)->required();
  add_targets(post)->required();
  add_out(post);
  add_common(post);
  post->add_option("--prior", rc.prior, "intrinsic or stationary");

  auto* samp = app.add_subcommand("sample", "Posterior (or, without --obs, prior) realizations");
  add_model(samp);
  add_obs(samp);
  add_targets(samp)->required();
  add_out(samp);
  add_common(samp);
  samp->add_option("--prior", rc.prior, "intrinsic or stationary");
  samp->add_option("--seed", rc.seed);
  samp->add_option("--draws", rc.draws);

  auto* demo = app.add_subcommand("demo", "Reproduce the demonstrations");
  demo->require_subcommand(1);
  auto* fig1 = demo->add_subcommand("fig1", "1-d seven-point comparison");
  auto* swot = demo->add_subcommand("swot", "Synthetic altimetry field");
  for (auto* c : {fig1, swot}) {
    c->add_option("--out", rc.out, "Output directory")->required();
    c->add_option("--seed", rc.seed);
  }

  auto* bench = app.add_subcommand("bench", "Twisted vs direct factorization timings");
  bench->add_option("--n", rc.ns, "Ascending problem sizes")->delimiter(',');
  bench->add_option("--reps", rc.reps);
  bench->add_option("--seed", rc.seed);
  bench->add_option("--threads", rc.threads);
  add_out(bench);

  auto* diag = app.add_subcommand("diag", "Diagnostics");
  diag->require_subcommand(1);
  auto* cnd = diag->add_subcommand("cnd", "Eigenstructure of the variogram matrix");
  add_model(cnd);
  add_obs(cnd);
  add_targets(cnd);
  add_out(cnd);
  cnd->add_option("--delta", rc.delta);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (rc.threads < 1) throw ConfigError("--threads must be positive");
    if (*vario) cmd_variogram(rc);
    else if (*pred) cmd_predict(rc);
    else if (*post) cmd_posterior(rc);
    else if (*samp) cmd_sample(rc);
    else if (*fig1) demo_fig1(rc.out, rc.seed);
    else if (*swot) demo_swot(rc.out, rc.seed);
    else if (*bench) cmd_bench(rc);
    else if (*cnd) cmd_diag_cnd(rc);
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "igpk: %s\n", e.what());
    return 2;
  } catch (const DomainError& e) {
    std::fprintf(stderr, "igpk: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "igpk: %s\n", e.what());
    return 1;
  }
  return 0;
}

}  // namespace igpk::cli

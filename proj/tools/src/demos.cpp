#include <fstream>

#include <igpk/csv.hpp>
#include <igpk/error.hpp>
#include <igpk/log.hpp>
#include <igpk/posterior.hpp>
#include <igpk/simdata.hpp>
#include <igpk_cli/cli.hpp>
#include <spdlog/spdlog.h>

namespace igpk::cli {

namespace {

constexpr int kDraws = 3;

void ensure_dir(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec || !std::filesystem::is_directory(dir)) {
    throw ConfigError("cannot create output directory " + dir.string());
  }
}

std::vector<std::string> row(std::initializer_list<std::string> head,
                             std::initializer_list<double> values) {
  std::vector<std::string> r(head);
  for (const double v : values) r.push_back(format_double(v));
  return r;
}

void append_points(CsvTable& t, const std::string& model, const LocationSet& x,
                   const Eigen::VectorXd& v, const Eigen::VectorXd* sd = nullptr) {
  for (std::size_t i = 0; i < x.size(); ++i) {
    const auto k = static_cast<Eigen::Index>(i);
    if (sd) {
      t.rows.push_back(row({model}, {x.matrix()(k, 0), v[k], (*sd)[k]}));
    } else {
      t.rows.push_back(row({model}, {x.matrix()(k, 0), v[k]}));
    }
  }
}

CsvTable xy_table(const LocationSet& pts, std::vector<Eigen::VectorXd> cols,
                  std::vector<std::string> names) {
  CsvTable t;
  t.header = {"x", "y"};
  t.header.insert(t.header.end(), names.begin(), names.end());
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const auto k = static_cast<Eigen::Index>(i);
    std::vector<std::string> r{format_double(pts.matrix()(k, 0)), format_double(pts.matrix()(k, 1))};
    for (const auto& c : cols) r.push_back(format_double(c[k]));
    t.rows.push_back(std::move(r));
  }
  return t;
}

}  // namespace

void demo_fig1(const std::filesystem::path& outdir, std::uint64_t seed) {
  ensure_dir(outdir);
  DemoConfig1D cfg;
  cfg.seed = seed;
  const auto demo = make_demo_1d(cfg);

  CsvTable obs{{"x", "value"}, {}};
  for (Eigen::Index k = 0; k < demo.obs.size(); ++k) {
    obs.rows.push_back(row({}, {demo.obs.locs.matrix()(k, 0), demo.obs.y[k]}));
  }
  write_csv(outdir / "observations.csv", obs);

  // Prior draws live on the plain grid; intrinsic ones are pinned to 0 at its left end.
  Eigen::VectorXd grid(cfg.lattice_steps);
  for (int i = 0; i < cfg.lattice_steps; ++i) {
    grid[i] = cfg.lattice_lo + (cfg.lattice_hi - cfg.lattice_lo) * i / (cfg.lattice_steps - 1);
  }
  const LocationSet grid_set(grid);
  const LocationSet grid_tail(grid.tail(grid.size() - 1));
  const Location anchor{grid[0]};

  CsvTable vario{{"model", "row", "intrinsic", "d", "gamma"}, {}};
  CsvTable prior{{"model", "draw", "x", "value"}, {}};
  CsvTable mean{{"model", "x", "mu", "sd"}, {}};
  CsvTable post{{"model", "draw", "x", "value"}, {}};
  PosteriorOptions popts;
  popts.allow_direct_fallback = true;

  for (std::size_t m = 0; m < demo.models.size(); ++m) {
    const auto& v = demo.models[m];
    const auto idx = static_cast<std::uint32_t>(m);
    for (int i = 0; i <= 150; ++i) {
      const double d = 0.01 * i;
      vario.rows.push_back(
          row({v.name, v.row, v.intrinsic ? "1" : "0"}, {d, v.model.at_distance(d)}));
    }

    Eigen::MatrixXd draws(grid.size(), kDraws);
    if (v.intrinsic) {
      draws.row(0).setZero();
      draws.bottomRows(grid.size() - 1) =
          sample_prior_paths(v.model, anchor, grid_tail, derive_seed(seed, idx, 1), kDraws);
    } else {
      draws = sample_stationary_prior(v.model, grid_set, derive_seed(seed, idx, 1), kDraws);
    }
    for (int j = 0; j < kDraws; ++j) {
      for (Eigen::Index i = 0; i < grid.size(); ++i) {
        prior.rows.push_back(row({v.name, std::to_string(j)}, {grid[i], draws(i, j)}));
      }
    }

    const auto pg = v.intrinsic ? posterior_moments(demo.obs, {}, v.model, demo.lattice, popts)
                                : stationary_posterior(demo.obs, {}, v.model, demo.lattice, popts);
    if (pg.used_direct) log().info("fig1 {}: posterior factored directly", v.name);
    const Eigen::VectorXd sd = pg.sd();
    append_points(mean, v.name, pg.lattice, pg.mu, &sd);
    const Eigen::MatrixXd pd = sample_posterior(pg, derive_seed(seed, idx, 2), kDraws);
    for (int j = 0; j < kDraws; ++j) {
      for (Eigen::Index i = 0; i < pd.rows(); ++i) {
        post.rows.push_back(row({v.name, std::to_string(j)}, {pg.lattice.matrix()(i, 0), pd(i, j)}));
      }
    }
  }
  write_csv(outdir / "variograms.csv", vario);
  write_csv(outdir / "prior_draws.csv", prior);
  write_csv(outdir / "post_mean.csv", mean);
  write_csv(outdir / "post_draws.csv", post);
}

void demo_swot(const std::filesystem::path& outdir, std::uint64_t seed) {
  ensure_dir(outdir);
  SwotConfig cfg;
  cfg.seed = seed;
  const auto data = make_swot(cfg);
  PosteriorOptions popts;
  popts.allow_direct_fallback = true;
  const auto pg = posterior_moments(data.obs, data.om, data.model, data.grid, popts);
  const Eigen::MatrixXd draws = sample_posterior(pg, derive_seed(seed, 0, 3), kDraws);

  write_csv(outdir / "truth.csv", xy_table(data.grid, {data.truth_grid}, {"value"}));
  write_csv(outdir / "truth_track.csv", xy_table(data.track, {data.truth_track}, {"value"}));
  write_csv(outdir / "obs.csv", xy_table(data.obs.locs, {data.obs.y}, {"value"}));
  write_csv(outdir / "locations.csv", xy_table(data.track, {}, {}));
  CsvTable indexed{{"loc", "y"}, {}};
  for (Eigen::Index k = 0; k < data.obs.size(); ++k) {
    indexed.rows.push_back({std::to_string(k), format_double(data.obs.y[k])});
  }
  write_csv(outdir / "observations.csv", indexed);
  write_csv(outdir / "post_mean.csv", xy_table(pg.lattice, {pg.mu, pg.sd()}, {"mu", "sd"}));
  for (int j = 0; j < kDraws; ++j) {
    write_csv(outdir / ("draws_" + std::to_string(j) + ".csv"),
              xy_table(pg.lattice, {draws.col(j)}, {"value"}));
  }

  auto echo = data.config_echo;
  echo["posterior"] = {{"delta", pg.delta},
                       {"used_direct", pg.used_direct},
                       {"clamp_events", pg.clamp_log.size()}};
  std::ofstream out(outdir / "config.json", std::ios::binary);
  out << echo.dump(2) << '\n';
  if (!out) throw ConfigError("failed writing " + (outdir / "config.json").string());
}

}  // namespace igpk::cli

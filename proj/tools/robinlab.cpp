// robinlab: regularized traces, the log-HLS functional, and its extremals
// on model surfaces.  Subcommands: trace, minimize, verify.

#include <chrono>
#include <cstdlib>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "robinlab/config.hpp"
#include "robinlab/conformal.hpp"
#include "robinlab/errors.hpp"
#include "robinlab/extremal.hpp"
#include "robinlab/green.hpp"
#include "robinlab/report.hpp"
#include "robinlab/rng.hpp"
#include "robinlab/spectral.hpp"

namespace rl = robinlab;

namespace {

using Model = rl::SpectralModel<double>;
using Factor = rl::ConformalFactor<double>;

struct Timer {
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
        .count();
  }
};

Model build_model(const rl::RunConfig& c) {
  const int L = c.effective_truncation();
  const int res = c.effective_resolution();
  if (c.surface == "sphere") {
    auto grid = rl::build_sphere_grid<double>(c.n, res);
    return Model::sphere(c.n, c.volume, L, grid);
  }
  auto grid = rl::build_torus_grid<double>(c.basis, res);
  return Model::torus(c.basis, L, grid);
}

rl::Json config_json(const rl::RunConfig& c) {
  rl::Json j = rl::Json::object();
  j.set("surface", rl::Json::str(c.surface));
  if (c.surface == "sphere") {
    j.set("n", rl::Json::integer(c.n));
    j.set("volume", rl::Json::real(c.volume));
  } else {
    rl::Json rows = rl::Json::array();
    for (int r = 0; r < 2; ++r) {
      rl::Json row = rl::Json::array();
      row.push(rl::Json::real(c.basis(r, 0)));
      row.push(rl::Json::real(c.basis(r, 1)));
      rows.push(std::move(row));
    }
    j.set("basis", std::move(rows));
  }
  j.set("truncation", rl::Json::integer(c.effective_truncation()));
  j.set("resolution", rl::Json::integer(c.effective_resolution()));
  rl::Json eps = rl::Json::array();
  for (double e : c.eps_schedule) eps.push(rl::Json::real(e));
  j.set("eps_schedule", std::move(eps));
  j.set("tol", rl::Json::real(c.tol));
  j.set("budget", rl::Json::integer(c.budget));
  j.set("seed", rl::Json::integer(std::int64_t(c.seed)));
  j.set("samples", rl::Json::integer(c.samples));
  j.set("start", rl::Json::str(c.start));
  return j;
}

void emit_report(const rl::RunConfig& c, const std::string& command,
                 rl::Json results, rl::Json diagnostics, const Timer& timer) {
  rl::Json report = rl::Json::object();
  report.set("command", rl::Json::str(command));
  report.set("config", config_json(c));
  report.set("results", std::move(results));
  report.set("diagnostics", std::move(diagnostics));
  report.set("wall_time_seconds", rl::Json::real(timer.seconds()));
  const std::string text = report.dump();
  if (c.out.empty())
    std::cout << text;
  else
    rl::write_text_file(c.out, text);
}

Factor start_field(const rl::RunConfig& c, const Model& model) {
  if (c.start == "uniform") {
    return Factor::from_samples(
        model.grid(), Eigen::VectorXd::Ones(model.grid().size()));
  }
  if (c.start == "random") {
    rl::Xoshiro256pp rng(c.seed);
    return rl::random_lognormal_factor(model, rng,
                                       std::max(2, model.truncation() / 4), 0.4);
  }
  if (c.start.rfind("file:", 0) == 0) {
    Eigen::VectorXd v = rl::read_csv(c.start.substr(5));
    if (v.size() != model.grid().size())
      throw rl::ConfigError("config: field 'start' file length does not match the grid");
    return Factor::from_samples(model.grid(), v).normalized(
        model.grid(), model.surface().volume);
  }
  throw rl::ConfigError("config: field 'start' must be uniform, random, or file:PATH");
}

int run_trace(const rl::RunConfig& c, const std::string& dump_mass,
              const std::string& dump_spectrum) {
  Timer timer;
  Model model = build_model(c);
  Eigen::VectorXd mass = rl::robin_mass_field(model);
  rl::AppendixReport<double> rep;
  rep.trace_robin = rl::trace_robin(model, mass);
  rl::ZetaTrace<double> z = rl::zeta_finite_part(model);
  rep.trace_zeta = z.value;
  rep.zeta_error = z.error_estimate;
  rep.c_n = rl::anomaly_constant<double>(model.surface().dim).value;
  rep.anomaly = rep.c_n * model.surface().volume;
  rep.defect = std::abs(rep.trace_robin - rep.trace_zeta - rep.anomaly);

  if (!dump_mass.empty()) rl::dump_csv(dump_mass, mass);
  if (!dump_spectrum.empty()) {
    std::ostringstream os;
    os << "index,eigenvalue,multiplicity\n";
    auto clusters = model.eigenvalue_clusters();
    for (size_t i = 0; i < clusters.size(); ++i)
      os << i << "," << rl::format_real(clusters[i].first) << ","
         << clusters[i].second << "\n";
    rl::write_text_file(dump_spectrum, os.str());
  }

  rl::Json results = rl::Json::object();
  results.set("trace_robin", rl::Json::real(rep.trace_robin));
  results.set("trace_zeta", rl::Json::real(rep.trace_zeta));
  results.set("anomaly_c_n", rl::Json::real(rep.c_n));
  results.set("anomaly_times_volume", rl::Json::real(rep.anomaly));
  results.set("defect", rl::Json::real(rep.defect));
  rl::Json diag = rl::Json::object();
  diag.set("zeta_extrapolation_error", rl::Json::real(rep.zeta_error));
  diag.set("zeta_residue", rl::Json::real(z.residue));
  emit_report(c, "trace", std::move(results), std::move(diag), timer);
  return 0;
}

int run_minimize(const rl::RunConfig& c, const std::string& dump_field) {
  Timer timer;
  Model model = build_model(c);
  Eigen::VectorXd mass = rl::robin_mass_field(model);
  Factor f0 = start_field(c, model);
  rl::MinimizeOptions<double> opt;
  opt.tol = c.tol;
  opt.max_steps_per_stage = c.budget;
  opt.rich_log = true;
  rl::MinimizerState<double> state =
      rl::minimize(model, mass, c.eps_schedule, f0, opt);

  // run log: one JSON object per accepted iteration
  for (const auto& rec : state.history) {
    std::cout << "{\"step\": " << rec.step
              << ", \"epsilon\": " << rl::format_real(rec.epsilon)
              << ", \"mu\": " << rl::format_real(rec.mu)
              << ", \"residual_norm\": " << rl::format_real(rec.residual_norm)
              << ", \"mass_std\": " << rl::format_real(rec.mass_std)
              << ", \"concentration\": " << rl::format_real(rec.concentration)
              << "}\n";
  }
  if (!dump_field.empty()) rl::dump_csv(dump_field, state.factor.samples);

  rl::Json results = rl::Json::object();
  results.set("mu", rl::Json::real(state.report.mu));
  results.set("term_mass", rl::Json::real(state.report.term_mass));
  results.set("term_entropy", rl::Json::real(state.report.term_entropy));
  results.set("term_quadratic", rl::Json::real(state.report.term_quadratic));
  results.set("residual_norm", rl::Json::real(state.residual_norm));
  results.set("mass_std", rl::Json::real(state.mass_std));
  results.set("steps", rl::Json::integer(state.steps));
  results.set("converged", rl::Json::boolean(state.converged));
  results.set("regime", rl::Json::str(state.regime));
  rl::Json conc = rl::Json::array();
  for (const auto& ci : state.concentration) {
    rl::Json entry = rl::Json::object();
    entry.set("delta", rl::Json::real(ci.delta));
    entry.set("fraction", rl::Json::real(ci.fraction));
    conc.push(std::move(entry));
  }
  rl::Json diag = rl::Json::object();
  diag.set("concentration", std::move(conc));
  diag.set("budget_exhausted", rl::Json::boolean(state.budget_exhausted));
  emit_report(c, "minimize", std::move(results), std::move(diag), timer);
  return state.budget_exhausted && !state.converged ? 4 : 0;
}

int run_verify(const rl::RunConfig& c, const std::string& which) {
  Timer timer;
  rl::Json results = rl::Json::object();
  rl::Json diag = rl::Json::object();
  bool pass = true;

  if (which == "hls") {
    if (c.surface != "sphere")
      throw rl::ConfigError("verify hls: field 'surface' must be sphere");
    Model model = build_model(c);
    Eigen::VectorXd mass = rl::robin_mass_field(model);
    rl::Xoshiro256pp rng(c.seed);
    std::vector<Factor> ensemble;
    for (int i = 0; i < c.samples; ++i)
      ensemble.push_back(rl::random_lognormal_factor(
          model, rng, std::max(2, model.truncation() / 3), 0.5));
    const Eigen::Vector3d pole(0.0, 0.0, 1.0);
    std::vector<double> mobius_taus = {1.5, 2.0, 3.0};
    std::vector<size_t> mobius_at;
    for (double tau : mobius_taus) {
      mobius_at.push_back(ensemble.size());
      ensemble.push_back(rl::mobius_jacobian(model, tau, pole));
    }
    try {
      rl::SharpHlsReport<double> rep =
          rl::verify_sharp_hls(model, mass, ensemble, 1e-6);
      results.set("trace", rl::Json::real(rep.trace));
      results.set("min_gap", rl::Json::real(rep.min_gap));
      rl::Json mg = rl::Json::array();
      for (size_t k = 0; k < mobius_taus.size(); ++k) {
        const double gap = rep.gaps[mobius_at[k]];
        mg.push(rl::Json::real(gap));
        if (std::abs(gap) > 1e-4) pass = false;
      }
      results.set("mobius_gaps", std::move(mg));
      rl::ProbeReport<double> weak = rl::weak_hls_probe(model, ensemble);
      results.set("weak_hls_min", rl::Json::real(weak.min_value));
      results.set("linfty_entropy_sup",
                  rl::Json::real(rl::linfty_entropy_probe(model, ensemble, 0.1)));
    } catch (const rl::InequalityViolated& e) {
      pass = false;
      diag.set("violation", rl::Json::str(e.what()));
      // locate and dump the offending density
      const double trace = mass.dot(model.grid().weights);
      size_t worst = 0;
      double min_gap = std::numeric_limits<double>::infinity();
      for (size_t k = 0; k < ensemble.size(); ++k) {
        const double gap = rl::mu(model, mass, ensemble[k]).mu - trace;
        if (gap < min_gap) {
          min_gap = gap;
          worst = k;
        }
      }
      const std::string witness =
          (c.out.empty() ? std::string("hls_witness") : c.out) + ".witness.csv";
      rl::dump_csv(witness, ensemble[worst].samples);
      diag.set("witness_index", rl::Json::integer(std::int64_t(worst)));
      diag.set("witness_csv", rl::Json::str(witness));
      diag.set("min_gap", rl::Json::real(min_gap));
    }
  } else if (which == "duality") {
    if (c.surface != "sphere")
      throw rl::ConfigError("verify duality: field 'surface' must be sphere "
                            "(constant-mass extremal background)");
    Model model = build_model(c);
    rl::Xoshiro256pp rng(c.seed);
    std::vector<Eigen::VectorXd> fields;
    for (int i = 0; i < c.samples; ++i)
      fields.push_back(rl::random_band_limited(
          model, rng, std::max(2, model.truncation() / 3), 1.5));
    Factor mob = rl::mobius_jacobian(model, 2.0, Eigen::Vector3d(0, 0, 1));
    fields.push_back(mob.samples.array().log());
    try {
      rl::DualityReport<double> rep = rl::verify_duality(model, fields, 1e-6);
      const double equality_gap = rl::duality_gap(model, fields.back());
      results.set("min_gap", rl::Json::real(rep.min_gap));
      results.set("equality_gap", rl::Json::real(equality_gap));
      results.set("max_jensen_defect", rl::Json::real(rep.max_jensen_defect));
      if (std::abs(equality_gap) > 1e-4) pass = false;
      if (rep.max_jensen_defect > 1e-10) pass = false;
    } catch (const rl::InequalityViolated& e) {
      pass = false;
      diag.set("violation", rl::Json::str(e.what()));
      size_t worst = 0;
      double min_gap = std::numeric_limits<double>::infinity();
      for (size_t k = 0; k < fields.size(); ++k) {
        const double gap = rl::duality_gap(model, fields[k]);
        if (gap < min_gap) {
          min_gap = gap;
          worst = k;
        }
      }
      const std::string witness =
          (c.out.empty() ? std::string("duality_witness") : c.out) +
          ".witness.csv";
      rl::dump_csv(witness, fields[worst]);
      diag.set("witness_index", rl::Json::integer(std::int64_t(worst)));
      diag.set("witness_csv", rl::Json::str(witness));
      diag.set("min_gap", rl::Json::real(min_gap));
    }
  } else if (which == "appendix") {
    Model model = build_model(c);
    rl::AppendixReport<double> rep = rl::verify_appendix_identity(model);
    results.set("trace_robin", rl::Json::real(rep.trace_robin));
    results.set("trace_zeta", rl::Json::real(rep.trace_zeta));
    results.set("anomaly_times_volume", rl::Json::real(rep.anomaly));
    results.set("defect", rl::Json::real(rep.defect));
    if (!(rep.defect < 1e-3)) pass = false;
  } else if (which == "conformal-identity") {
    Model model = build_model(c);
    Eigen::VectorXd mass = rl::robin_mass_field(model);
    rl::Xoshiro256pp rng(c.seed);
    double worst = 0.0;
    const int count = c.samples;
    try {
      for (int i = 0; i < count; ++i) {
        Factor f = rl::random_lognormal_factor(
            model, rng, std::max(2, model.truncation() / 3), 0.5);
        rl::TraceConformalReport<double> rep = rl::trace_conformal(model, mass, f);
        worst = std::max(worst, rep.defect / (1.0 + std::abs(rep.mu)));
      }
    } catch (const rl::IdentityCheckFailed& e) {
      pass = false;
      diag.set("violation", rl::Json::str(e.what()));
    }
    results.set("samples", rl::Json::integer(count));
    results.set("max_relative_defect", rl::Json::real(worst));
  } else if (which == "scale-invariance") {
    // compactly supported bump sampled on a fine grid, then the exact
    // lambda = 2 rescaling h(x) = f(x/2)/4 on the doubled-spacing grid
    const int half = 48;
    const double h = 1.0 / 32.0;
    const int size = 2 * half + 1;
    Eigen::MatrixXd f(size, size);
    for (int i = 0; i < size; ++i)
      for (int j = 0; j < size; ++j) {
        const double x = (i - half) * h, y = (j - half) * h;
        const double r2 = x * x + y * y;
        f(i, j) = r2 < 1.0 ? std::exp(-1.0 / (1.0 - r2)) : 0.0;
      }
    rl::FlatReport<double> fine = rl::mu_flat(f, h);
    const Eigen::MatrixXd quarter = f / 4.0;
    rl::FlatReport<double> coarse = rl::mu_flat(quarter, 2.0 * h);
    const double v_defect =
        std::abs(fine.total_mass - coarse.total_mass) / fine.total_mass;
    const double mu_defect = std::abs(fine.mu - coarse.mu);
    results.set("mass_fine", rl::Json::real(fine.total_mass));
    results.set("mu_fine", rl::Json::real(fine.mu));
    results.set("mass_relative_defect", rl::Json::real(v_defect));
    results.set("mu_defect", rl::Json::real(mu_defect));
    if (!(v_defect <= 1e-12 && mu_defect <= 1e-6)) pass = false;
  } else {
    throw rl::ConfigError("verify: unknown check '" + which +
                          "' (expected hls, duality, appendix, conformal-identity, scale-invariance)");
  }

  results.set("pass", rl::Json::boolean(pass));
  emit_report(c, "verify " + which, std::move(results), std::move(diag), timer);
  return pass ? 0 : 5;
}

void add_common_options(CLI::App* cmd, rl::RunConfig& config,
                        std::string& config_path, std::string& basis_csv,
                        std::string& eps_csv) {
  cmd->add_option("--config", config_path, "configuration file");
  cmd->add_option("--surface", config.surface, "sphere | torus");
  cmd->add_option("--n", config.n, "sphere dimension (even)");
  cmd->add_option("--volume", config.volume, "target volume");
  cmd->add_option("--basis", basis_csv, "torus basis a,b,c,d (row major)");
  cmd->add_option("--truncation", config.truncation, "eigenbasis truncation");
  cmd->add_option("--resolution", config.resolution, "grid resolution");
  cmd->add_option("--eps-schedule", eps_csv, "decreasing csv, e.g. 0.2,0.1,0");
  cmd->add_option("--tol", config.tol, "residual tolerance");
  cmd->add_option("--budget", config.budget, "max steps per stage");
  cmd->add_option("--seed", config.seed, "ensemble seed");
  cmd->add_option("--samples", config.samples, "ensemble size");
  cmd->add_option("--start", config.start, "uniform | random | file:PATH");
  cmd->add_option("--out", config.out, "report path (default stdout)");
}

std::vector<double> parse_csv_list(const std::string& field, const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    char* end = nullptr;
    double v = std::strtod(item.c_str(), &end);
    if (end == item.c_str())
      throw rl::ConfigError("config: malformed entry in field '" + field + "'");
    out.push_back(v);
  }
  if (out.empty()) throw rl::ConfigError("config: field '" + field + "' is empty");
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  if (const char* threads = std::getenv("ROBINLAB_THREADS")) {
    const int cap = std::atoi(threads);
    if (cap > 0) Eigen::setNbThreads(cap);
  }

  CLI::App app{"numerical laboratory for regularized traces and log-HLS extremals"};
  app.require_subcommand(1);

  rl::RunConfig config;
  std::string config_path, basis_csv, eps_csv;
  std::string dump_mass, dump_spectrum, dump_field, verify_which;

  CLI::App* trace = app.add_subcommand("trace", "regularized traces and the anomaly defect");
  add_common_options(trace, config, config_path, basis_csv, eps_csv);
  trace->add_option("--dump-mass", dump_mass, "CSV of the Robin mass field");
  trace->add_option("--dump-spectrum", dump_spectrum,
                    "CSV of (index, eigenvalue, multiplicity)");

  CLI::App* minimize = app.add_subcommand("minimize", "minimize the trace functional");
  add_common_options(minimize, config, config_path, basis_csv, eps_csv);
  minimize->add_option("--dump-field", dump_field, "CSV of the final density");

  CLI::App* verify = app.add_subcommand("verify", "run a verification suite");
  verify->add_option("which", verify_which,
                     "hls | duality | appendix | conformal-identity | scale-invariance")
      ->required();
  add_common_options(verify, config, config_path, basis_csv, eps_csv);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    CLI::App* active = trace->parsed() ? trace
                       : minimize->parsed() ? minimize
                                            : verify;
    // file config first, explicit flags override
    if (active->count("--config")) {
      rl::RunConfig from_file = rl::load_config_file(config_path);
      if (!active->count("--surface")) config.surface = from_file.surface;
      if (!active->count("--n")) config.n = from_file.n;
      if (!active->count("--volume")) config.volume = from_file.volume;
      config.basis = from_file.basis;
      if (!active->count("--truncation")) config.truncation = from_file.truncation;
      if (!active->count("--resolution")) config.resolution = from_file.resolution;
      if (!active->count("--eps-schedule")) config.eps_schedule = from_file.eps_schedule;
      if (!active->count("--tol")) config.tol = from_file.tol;
      if (!active->count("--budget")) config.budget = from_file.budget;
      if (!active->count("--seed")) config.seed = from_file.seed;
      if (!active->count("--samples")) config.samples = from_file.samples;
      if (!active->count("--start")) config.start = from_file.start;
      if (!active->count("--out")) config.out = from_file.out;
    }
    if (active->count("--basis")) {
      std::vector<double> b = parse_csv_list("basis", basis_csv);
      if (b.size() != 4)
        throw rl::ConfigError("config: malformed field 'basis' (need 4 entries a,b,c,d)");
      config.basis << b[0], b[1], b[2], b[3];
    }
    if (active->count("--eps-schedule"))
      config.eps_schedule = parse_csv_list("eps_schedule", eps_csv);
    if (config.surface != "sphere" && config.surface != "torus")
      throw rl::ConfigError("config: field 'surface' must be sphere or torus");

    if (trace->parsed()) return run_trace(config, dump_mass, dump_spectrum);
    if (minimize->parsed()) return run_minimize(config, dump_field);
    return run_verify(config, verify_which);
  } catch (const rl::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const rl::ExtrapolationUnstable& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const rl::LineSearchFailed& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const rl::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

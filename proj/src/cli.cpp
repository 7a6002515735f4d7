#include "chebcon/cli.hpp"

#include <fstream>
#include <ostream>
#include <sstream>
#include <utility>

#include "CLI11.hpp"
#include "chebcon/config.hpp"
#include "chebcon/csv.hpp"
#include "chebcon/runner.hpp"
#include "chebcon/selftest.hpp"

namespace chebcon {

std::string to_string(Subcommand sub) {
  switch (sub) {
    case Subcommand::Run: return "run";
    case Subcommand::Convergence: return "convergence";
    case Subcommand::Privacy: return "privacy";
    case Subcommand::Robustness: return "robustness";
    case Subcommand::Oracle: return "oracle";
    case Subcommand::Selftest: return "selftest";
  }
  return "unknown";
}

Command parse_args(int argc, const char* const* argv) {
  CLI::App app{"Private Chebyshev-proxy consensus optimisation simulator", "chebcon"};
  app.require_subcommand(1, 1);

  Command cmd;
  std::string config;
  std::string out;
  std::uint64_t seed = 0;
  std::vector<std::string> families;
  int verbose = 0;

  app.add_option("--config", config, "scenario config (.json or .toml)");
  app.add_option("--out", out, "output directory (created if absent)");
  app.add_option("--seed", seed, "master seed override");
  app.add_option("--families", families, "noise families for privacy")->delimiter(',');
  app.add_option("--rates", cmd.rates, "link failure rates for robustness")->delimiter(',');
  app.add_option("--epsilons", cmd.epsilons, "decreasing tolerances for convergence")->delimiter(',');
  app.add_option("--trials", cmd.trials, "Monte-Carlo trials for privacy");
  app.add_option("--seeds", cmd.seeds, "seeds per failure rate for robustness");
  app.add_flag("-v", verbose, "verbosity, repeat for more");

  const std::pair<const char*, const char*> subs[] = {
      {"run", "one end-to-end run"},
      {"convergence", "stopping round and error across tolerances"},
      {"privacy", "analytic and empirical disclosure probabilities"},
      {"robustness", "rounds to tolerance across link failure rates"},
      {"oracle", "brute-force optimum of the average objective"},
      {"selftest", "built-in example checks"},
  };
  for (const auto& [name, help] : subs) app.add_subcommand(name, help)->fallthrough();

  std::vector<std::string> args;
  for (int k = argc - 1; k >= 1; --k) args.emplace_back(argv[k]);
  try {
    app.parse(args);
  } catch (const CLI::CallForHelp&) {
    throw UsageError(app.help(), kExitOk);
  } catch (const CLI::ParseError& e) {
    throw UsageError(std::string(e.what()) + "\n" + app.help(), kExitConfigError);
  }

  const std::string name = app.get_subcommands().front()->get_name();
  for (Subcommand s : {Subcommand::Run, Subcommand::Convergence, Subcommand::Privacy, Subcommand::Robustness,
                       Subcommand::Oracle, Subcommand::Selftest}) {
    if (to_string(s) == name) cmd.sub = s;
  }
  if (!config.empty()) {
    if (!std::filesystem::exists(config)) {
      throw UsageError("config file not found: " + config + "\n" + app.help(), kExitConfigError);
    }
    cmd.config = config;
  }
  if (!out.empty()) cmd.out = out;
  if (app.count("--seed")) cmd.seed = seed;
  try {
    for (const auto& f : families) cmd.families.push_back(parse_noise_family(f));
  } catch (const Error& e) {
    throw UsageError(e.what(), kExitConfigError);
  }
  cmd.verbosity = verbose;
  return cmd;
}

namespace {

class Manifest {
 public:
  Manifest(std::filesystem::path dir, std::uint64_t seed) : dir_(std::move(dir)), seed_(seed) {}

  std::filesystem::path add(const std::string& name) {
    files_.push_back(name);
    return dir_ / name;
  }

  void write() const {
    std::ofstream out(dir_ / "manifest.txt", std::ios::binary);
    out << "# file seed\n";
    for (const auto& f : files_) out << f << " seed=" << seed_ << '\n';
  }

 private:
  std::filesystem::path dir_;
  std::uint64_t seed_;
  std::vector<std::string> files_;
};

std::string join(const std::vector<double>& v) {
  std::string s;
  for (std::size_t k = 0; k < v.size(); ++k) s += (k ? ";" : "") + format_number(v[k]);
  return s;
}

using ull = unsigned long long;

CsvTable trace_table(const std::vector<TraceRow>& trace) {
  CsvTable t({"round", "max_ratio_error", "mass_residual", "stopped_flag"});
  for (const auto& r : trace) {
    t.add({ull(r.round), r.max_ratio_error, r.mass_residual, ull(r.stopped ? 1 : 0)});
  }
  return t;
}

int do_run(const ScenarioConfig& cfg, const Command& cmd, Manifest& manifest, std::ostream& out) {
  RunReport rep;
  try {
    rep = run_prcpoa(cfg);
  } catch (const DisseminationNotConverged& e) {
    trace_table(e.trace()).write(manifest.add("trace.csv"));
    manifest.write();
    throw;
  }

  CsvTable agents({"agent", "f_e_star", "x_p_star", "error", "certified_gap", "grid_fallback", "degree",
                   "evaluations", "stop_round", "lo", "hi", "coefficients"});
  for (std::size_t i = 0; i < rep.agents.size(); ++i) {
    const auto& a = rep.agents[i];
    agents.add({ull(i), a.f_e_star, a.x_p_star, a.error, a.certified_gap, ull(a.grid_fallback ? 1 : 0), ull(a.degree),
                ull(a.evaluations), ull(a.stop_round), a.interval.lo(), a.interval.hi(), join(a.estimate)});
  }
  agents.write(manifest.add("run_report.csv"));

  CsvTable summary({"f_star", "x_f_star", "max_error", "global_degree", "U", "rounds", "communication_rounds",
                    "delta", "max_deviation"});
  summary.add({rep.f_star, rep.x_f_star, rep.max_error, ull(rep.global_degree), ull(rep.stop_window),
               ull(rep.rounds), ull(rep.communication_rounds), rep.delta, rep.max_deviation});
  summary.write(manifest.add("summary.csv"));

  trace_table(rep.trace).write(manifest.add("trace.csv"));

  std::ofstream graphs(manifest.add("graphs.txt"), std::ios::binary);
  write_schedule(graphs, cfg.graph_sequence(), 0, rep.communication_rounds + 1);

  out << "f_star=" << format_number(rep.f_star) << " max_error=" << format_number(rep.max_error)
      << " rounds=" << rep.rounds << " m=" << rep.global_degree << '\n';
  (void)cmd;
  return rep.max_error <= cfg.epsilon ? kExitOk : kExitScenarioFailure;
}

int do_convergence(const ScenarioConfig& cfg, const Command& cmd, Manifest& manifest, std::ostream& out) {
  std::vector<double> eps = cmd.epsilons;
  if (eps.empty()) {
    for (int k = 2; k <= 10; ++k) eps.push_back(std::pow(10.0, -k));
  }
  std::vector<RunReport> reports;
  const auto rows = scenario_convergence(cfg, eps, &reports);
  CsvTable t({"epsilon", "K", "error"});
  CsvTable c({"epsilon", "global_degree", "max_evaluations", "communication_rounds"});
  bool ok = true;
  for (const auto& r : rows) {
    t.add({r.epsilon, ull(r.K), r.error});
    c.add({r.epsilon, ull(r.global_degree), ull(r.max_evaluations), ull(r.communication_rounds)});
    ok = ok && r.error <= r.epsilon;
  }
  t.write(manifest.add("convergence.csv"));
  c.write(manifest.add("complexity.csv"));
  if (reports.size() >= 2) {
    const auto s = complexity_report(reports);
    out << "rounds vs log10(1/eps): slope=" << format_number(s.rounds_vs_log_inv_eps.slope)
        << " r2=" << format_number(s.rounds_vs_log_inv_eps.r2) << '\n';
  }
  return ok ? kExitOk : kExitScenarioFailure;
}

int do_privacy(const ScenarioConfig& cfg, const Command& cmd, Manifest& manifest, std::ostream& out) {
  std::vector<NoiseFamily> fams = cmd.families;
  if (fams.empty()) fams = {NoiseFamily::Uniform, NoiseFamily::Normal, NoiseFamily::Laplace};
  std::vector<double> alphas;
  for (int k = 1; k <= 50; ++k) alphas.push_back(1.5 * k / 50.0);
  const auto rows = scenario_privacy(cfg, alphas, fams, cmd.trials);
  CsvTable t({"family", "alpha_k", "beta_k_analytic", "beta_k_empirical", "trials"});
  bool ok = true;
  for (const auto& r : rows) {
    t.add({to_string(r.family), r.alpha_k, r.analytic, r.empirical, ull(r.trials)});
    if (r.trials > 0) {
      const double sigma = std::sqrt(r.analytic * (1.0 - r.analytic) / static_cast<double>(r.trials));
      ok = ok && r.empirical <= r.analytic + 3.0 * sigma;
    }
  }
  t.write(manifest.add("privacy.csv"));
  out << rows.size() << " privacy rows" << (ok ? "" : " (empirical rate above bound)") << '\n';
  return ok ? kExitOk : kExitScenarioFailure;
}

int do_robustness(const ScenarioConfig& cfg, const Command& cmd, Manifest& manifest, std::ostream& out) {
  std::vector<double> rates = cmd.rates;
  if (rates.empty()) rates = {0.0, 0.1, 0.3, 0.5};
  const auto rows = scenario_robustness(cfg, rates, cmd.seeds);
  CsvTable t({"rate", "window", "U", "mean_rounds", "runs", "failures"});
  bool ok = true;
  for (const auto& r : rows) {
    t.add({r.rate, ull(r.window), ull(r.stop_window), r.mean_rounds, ull(r.runs), ull(r.failures)});
    ok = ok && r.failures == 0;
    out << "rate=" << format_number(r.rate) << " mean_rounds=" << format_number(r.mean_rounds) << '\n';
  }
  t.write(manifest.add("robustness.csv"));
  return ok ? kExitOk : kExitScenarioFailure;
}

int do_oracle(const ScenarioConfig& cfg, std::ostream& out) {
  const auto objs = cfg.resolved_objectives();
  const auto cons = cfg.resolved_constraints();
  double lo = cons.front().lo(), hi = cons.front().hi();
  for (const auto& c : cons) {
    lo = std::max(lo, c.lo());
    hi = std::min(hi, c.hi());
  }
  if (!(lo < hi)) throw InfeasibleConstraints("local constraint sets have an empty intersection");
  const double n = static_cast<double>(objs.size());
  const auto opt = brute_force_optimum(
      [&](double x) {
        double s = 0.0;
        for (const auto& o : objs) s += o(x);
        return s / n;
      },
      Interval(lo, hi), cfg.oracle_grid);
  out << "f_star=" << format_number(opt.value) << " x_f_star=" << format_number(opt.x) << '\n';
  return kExitOk;
}

int do_selftest(std::ostream& out) {
  const auto results = run_selftest();
  bool all = true;
  for (const auto& m : results) {
    out << m.module << ": " << (m.failures.empty() ? "PASS" : "FAIL") << " (" << m.checks - m.failures.size() << "/"
        << m.checks << ")\n";
    for (const auto& f : m.failures) out << "  " << f << '\n';
    all = all && m.failures.empty();
  }
  return all ? kExitOk : kExitScenarioFailure;
}

}  // namespace

int execute(const Command& cmd, std::ostream& out, std::ostream& err) {
  try {
    if (cmd.sub == Subcommand::Selftest) return do_selftest(out);

    ScenarioConfig cfg = cmd.config ? load_config(*cmd.config) : default_scenario();
    if (cmd.seed) cfg.seed = *cmd.seed;
    cfg.validate();
    if (cmd.verbosity > 0) err << "chebcon " << to_string(cmd.sub) << ": N=" << cfg.N << " seed=" << cfg.seed << '\n';
    if (cmd.sub == Subcommand::Oracle) return do_oracle(cfg, out);

    std::filesystem::create_directories(cmd.out);
    Manifest manifest(cmd.out, cfg.seed);
    int code = kExitOk;
    switch (cmd.sub) {
      case Subcommand::Run: code = do_run(cfg, cmd, manifest, out); break;
      case Subcommand::Convergence: code = do_convergence(cfg, cmd, manifest, out); break;
      case Subcommand::Privacy: code = do_privacy(cfg, cmd, manifest, out); break;
      case Subcommand::Robustness: code = do_robustness(cfg, cmd, manifest, out); break;
      default: break;
    }
    manifest.write();
    if (cmd.verbosity > 0) err << "wrote " << (cmd.out / "manifest.txt").string() << '\n';
    return code;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfigError;
  } catch (const UnsupportedFamily& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfigError;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "output error: " << e.what() << '\n';
    return kExitConfigError;
  } catch (const Error& e) {
    err << "scenario failed: " << e.what() << '\n';
    return kExitScenarioFailure;
  }
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  Command cmd;
  try {
    cmd = parse_args(argc, argv);
  } catch (const UsageError& e) {
    (e.code() == kExitOk ? out : err) << e.what() << '\n';
    return e.code();
  }
  return execute(cmd, out, err);
}

}  // namespace chebcon

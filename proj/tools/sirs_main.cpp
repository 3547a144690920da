// Command-line front end: scenario configs in, trajectories, threshold
// reports, equilibrium tables, theorem verdicts and parameter sweeps out.
//
// Exit codes: 0 success, 1 usage/parse/validation error, 2 a verification
// verdict was Violated, 3 numeric failure.

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "sirs/analysis.hpp"
#include "sirs/config.hpp"
#include "sirs/equilibria.hpp"
#include "sirs/flow.hpp"
#include "sirs/reproduction.hpp"
#include "sirs/text.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitViolated = 2;
constexpr int kExitNumeric = 3;

sirs::ScenarioConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open config file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return sirs::parse_config(buf.str());
}

struct OutputTarget {
  std::ofstream file;
  std::ostream* stream = &std::cout;
  void open(const std::string& path) {
    if (path.empty()) return;
    file.open(path);
    if (!file) throw std::invalid_argument("cannot open output file '" + path + "'");
    stream = &file;
  }
};

std::string fmt(double x) { return sirs::format_double(x); }

std::string fmt_complex(const std::complex<double>& z) {
  std::string s = fmt(z.real());
  if (z.imag() != 0) s += (z.imag() > 0 ? "+" : "-") + fmt(std::abs(z.imag())) + "i";
  return s;
}

int cmd_r0(const sirs::ScenarioConfig& cfg, bool with_operator, int grid_n,
           sirs::OutputFormat format, OutputTarget& out) {
  const auto rep = sirs::monodromy_report(cfg.params, with_operator, grid_n);
  auto& os = *out.stream;
  const char* verdict = rep.verdict == sirs::ThresholdVerdict::Subcritical ? "subcritical"
                        : rep.verdict == sirs::ThresholdVerdict::Critical  ? "critical"
                                                                           : "supercritical";
  if (format == sirs::OutputFormat::Csv) {
    os << "rho,r0_bisection,r0_closed_form,r0_operator,verdict\n";
    os << fmt(rep.rho) << "," << fmt(rep.r0_bisect) << ","
       << (rep.r0_closed ? fmt(*rep.r0_closed) : "") << ","
       << (rep.r0_operator ? fmt(*rep.r0_operator) : "") << "," << verdict << "\n";
  } else {
    os << "rho(Phi)         = " << fmt(rep.rho) << "\n";
    os << "R0 (bisection)   = " << fmt(rep.r0_bisect) << "\n";
    if (rep.r0_closed) os << "R0 (closed form) = " << fmt(*rep.r0_closed) << "\n";
    if (rep.r0_operator) os << "R0 (operator)    = " << fmt(*rep.r0_operator) << "\n";
    os << "verdict          = " << verdict << "\n";
    if (cfg.params.beta1 == 0 && cfg.params.beta2 == 0) os << "note             = no transmission\n";
  }
  return kExitOk;
}

int cmd_simulate(const sirs::ScenarioConfig& cfg, double t_end, double stride,
                 OutputTarget& out) {
  if (cfg.initial_points.empty())
    throw std::invalid_argument("simulate: config provides no initial_point");
  const auto traj = sirs::solve(cfg.params, cfg.initial_points.front(), t_end, cfg.flow, stride);
  auto& os = *out.stream;
  os << "t,S,Ia,Is,R,season\n";
  for (const auto& s : traj.samples) {
    const double R = cfg.params.N - s.state[0] - s.state[1] - s.state[2];
    os << fmt(s.t) << "," << fmt(s.state[0]) << "," << fmt(s.state[1]) << ","
       << fmt(s.state[2]) << "," << fmt(R) << "," << sirs::season_name(s.season.which) << "\n";
  }
  return kExitOk;
}

int cmd_equilibria(const sirs::ScenarioConfig& cfg, sirs::OutputFormat format,
                   OutputTarget& out) {
  if (!cfg.params.autonomous())
    throw std::invalid_argument(
        "equilibria: closed forms exist only for beta1 == beta2 scenarios");
  const auto reports = sirs::classify(cfg.params);
  auto& os = *out.stream;
  if (format == sirs::OutputFormat::Csv) {
    os << "kind,S,Ia,Is,stability,eig1,eig2,eig3\n";
    for (const auto& r : reports) {
      os << sirs::kind_name(r.kind) << "," << fmt(r.state[0]) << "," << fmt(r.state[1]) << ","
         << fmt(r.state[2]) << "," << sirs::stability_name(r.stability);
      for (const auto& ev : r.eigenvalues) os << "," << fmt_complex(ev);
      os << "\n";
    }
  } else {
    for (const auto& r : reports) {
      os << sirs::kind_name(r.kind) << " (" << fmt(r.state[0]) << ", " << fmt(r.state[1]) << ", "
         << fmt(r.state[2]) << ")\n";
      os << "  stability   = " << sirs::stability_name(r.stability) << "\n";
      os << "  eigenvalues =";
      for (const auto& ev : r.eigenvalues) os << " " << fmt_complex(ev);
      os << "\n";
      if (r.certificate) {
        const auto& c = *r.certificate;
        os << "  routh-hurwitz: xi0 = " << fmt(c.xi0) << ", xi2 = " << fmt(c.xi2)
           << ", xi2*xi1 - xi0 = " << fmt(c.margin) << "\n";
      }
    }
  }
  return kExitOk;
}

int cmd_verify(const sirs::ScenarioConfig& cfg, std::vector<std::string> theorems, int samples,
               double horizon, double delta_r, std::uint64_t seed, OutputTarget& out) {
  const auto& p = cfg.params;
  if (theorems.empty()) theorems = {"all"};
  const bool all = std::find(theorems.begin(), theorems.end(), "all") != theorems.end();

  std::vector<std::string> selected;
  if (all) {
    const double r0 = sirs::r0_bisection(p);
    if (p.autonomous() && r0 <= 1) selected.push_back("4.5");
    if (!p.autonomous() && r0 < 1) selected.push_back("3.4");
    if (r0 > 1 && p.mu > 0 && p.mu < 1 && p.alpha * p.beta1 > 0) selected.push_back("3.5");
    if (p.autonomous() && r0 > 1 && p.mu > 0 && p.mu < 1) {
      selected.push_back("4.7");
      selected.push_back("4.8");
    }
    if (selected.empty())
      throw std::invalid_argument("verify: no theorem hypothesis matches this scenario");
  } else
    selected = theorems;

  auto& os = *out.stream;
  os << "seed = " << seed << "\n";
  bool violated = false;
  for (const auto& id : selected) {
    sirs::VerdictReport<double> rep;
    if (id == "3.4" || id == "4.5")
      rep = sirs::check_extinction(p, samples, horizon, seed, cfg.flow);
    else if (id == "3.5")
      rep = sirs::check_persistence(p, samples, horizon, seed, cfg.flow);
    else if (id == "4.7")
      rep = sirs::check_near_equal_rates(p, 0.0, samples, seed, horizon, cfg.flow);
    else if (id == "4.8") {
      const double dr = delta_r >= 0 ? delta_r : 0.1 * (p.d + p.r_a);
      rep = sirs::check_near_equal_rates(p, dr, samples, seed, horizon, cfg.flow);
    } else
      throw std::invalid_argument("verify: unknown theorem id '" + id +
                                  "' (use 3.4, 3.5, 4.5, 4.7, 4.8 or all)");
    violated = violated || rep.outcome == sirs::Outcome::Violated;

    os << "theorem " << rep.theorem_id << ": " << sirs::outcome_name(rep.outcome) << "\n";
    for (const auto& [k, v] : rep.hypothesis) os << "  " << k << " = " << fmt(v) << "\n";
    for (const auto& [k, v] : rep.evidence) os << "  " << k << " = " << fmt(v) << "\n";
    if (rep.witness)
      os << "  witness: p0 = (" << fmt(rep.witness->p0[0]) << ", " << fmt(rep.witness->p0[1])
         << ", " << fmt(rep.witness->p0[2]) << ") at t = " << fmt(rep.witness->t) << "\n";
    if (!rep.note.empty()) os << "  note: " << rep.note << "\n";
  }
  return violated ? kExitViolated : kExitOk;
}

int cmd_sweep(const sirs::ScenarioConfig& cfg, const std::string& axis_str,
              const std::string& grid_str, OutputTarget& out) {
  sirs::SweepAxis axis;
  if (axis_str == "theta")
    axis = sirs::SweepAxis::Theta;
  else if (axis_str == "beta2")
    axis = sirs::SweepAxis::Beta2;
  else if (axis_str == "mu")
    axis = sirs::SweepAxis::Mu;
  else if (axis_str == "alpha")
    axis = sirs::SweepAxis::Alpha;
  else
    throw std::invalid_argument("sweep: axis must be one of theta, beta2, mu, alpha");

  std::vector<double> grid;
  std::stringstream ss(grid_str);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    double v;
    if (!sirs::parse_double(item, v))
      throw std::invalid_argument("sweep: invalid grid value '" + item + "'");
    grid.push_back(v);
  }

  const auto rows = sirs::threshold_sweep(cfg.params, axis, grid);
  auto& os = *out.stream;
  os << axis_str << ",rho,r0\n";
  for (const auto& row : rows) {
    if (!row.ok()) {
      std::cerr << "sweep: skipped " << axis_str << " = " << fmt(row.axis_value) << ": "
                << row.error << "\n";
      continue;
    }
    os << fmt(row.axis_value) << "," << fmt(row.rho) << "," << fmt(row.r0) << "\n";
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Seasonal SIRS epidemic model: simulation and threshold analysis"};
  app.require_subcommand(1);
  app.fallthrough();  // global flags may follow the subcommand

  std::string config_path;
  std::string format_str;
  std::string out_path;
  std::optional<std::uint64_t> seed_flag;
  app.add_option("--config", config_path, "scenario config file")->required();
  app.add_option("--format", format_str, "output format: csv or text");
  app.add_option("--out", out_path, "output path (default: config output.path or stdout)");
  app.add_option("--seed", seed_flag, "override the config seed");

  auto* sub_r0 = app.add_subcommand("r0", "reproduction number and threshold verdict");
  bool with_operator = false;
  int grid_n = 2048;
  sub_r0->add_flag("--operator-oracle", with_operator,
                   "also evaluate the next-infection-operator quadrature");
  sub_r0->add_option("--grid-n", grid_n, "operator quadrature grid points per period");

  auto* sub_sim = app.add_subcommand("simulate", "integrate and emit a CSV trajectory");
  double t_end = 0, stride = 0;
  sub_sim->add_option("--t-end", t_end, "end time")->required();
  sub_sim->add_option("--stride", stride, "sampling stride (0 = every accepted step)");

  auto* sub_eq = app.add_subcommand("equilibria", "closed-form equilibria with stability");

  auto* sub_verify = app.add_subcommand("verify", "empirical theorem checks");
  std::vector<std::string> theorems;
  int samples = 100;
  double horizon = 0, delta_r = -1;
  sub_verify->add_option("--theorem", theorems, "3.4 | 3.5 | 4.5 | 4.7 | 4.8 | all");
  sub_verify->add_option("--samples", samples, "initial points per check");
  sub_verify->add_option("--horizon", horizon, "simulation horizon (0 = adaptive)");
  sub_verify->add_option("--delta-r", delta_r, "recovery-rate gap for 4.8");

  auto* sub_sweep = app.add_subcommand("sweep", "threshold quantities along one parameter axis");
  std::string axis_str, grid_str;
  sub_sweep->add_option("--axis", axis_str, "theta | beta2 | mu | alpha")->required();
  sub_sweep->add_option("--grid", grid_str, "comma-separated axis values");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    app.exit(e);
    return kExitUsage;
  }

  try {
    sirs::ScenarioConfig cfg = load_config(config_path);
    if (seed_flag) cfg.seed = *seed_flag;
    if (!format_str.empty()) {
      if (format_str == "csv")
        cfg.format = sirs::OutputFormat::Csv;
      else if (format_str == "text")
        cfg.format = sirs::OutputFormat::Text;
      else
        throw std::invalid_argument("--format must be csv or text");
    }
    if (!out_path.empty()) cfg.output_path = out_path;

    OutputTarget out;
    out.open(cfg.output_path);

    if (*sub_r0) return cmd_r0(cfg, with_operator, grid_n, cfg.format, out);
    if (*sub_sim) return cmd_simulate(cfg, t_end, stride, out);
    if (*sub_eq) return cmd_equilibria(cfg, cfg.format, out);
    if (*sub_verify)
      return cmd_verify(cfg, theorems, samples, horizon, delta_r, cfg.seed, out);
    if (*sub_sweep) return cmd_sweep(cfg, axis_str, grid_str, out);
    return kExitUsage;
  } catch (const sirs::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::domain_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "numeric failure: " << e.what() << "\n";
    return kExitNumeric;
  }
}

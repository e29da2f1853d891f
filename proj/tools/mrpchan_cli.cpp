#include <CLI11.hpp>
#include <fmt/format.h>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "mrpchan/config.hpp"
#include "mrpchan/error.hpp"
#include "mrpchan/limits.hpp"
#include "mrpchan/log.hpp"
#include "mrpchan/renewal.hpp"
#include "mrpchan/simulate.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace mrpchan;

namespace {

/// Everything a subcommand needs, filled from the flags.
struct RunConfig {
  std::string model;
  std::string config_path;
  std::string out;
  std::string mode = "exact";
  std::string which = "f_tau";
  std::vector<double> T;
  double h = 0.0;
  std::size_t n_traj = 100000;
  std::uint64_t seed = 1;
  unsigned threads = 1;
  std::string pi_grid = "0:1:0.05";
  double pi = 0.5;
  std::string command;
};

ModelConfig load_model(const RunConfig& rc) {
  if (!rc.config_path.empty() && !rc.model.empty()) throw InputError("give either --model or --config, not both");
  if (!rc.config_path.empty()) return load_config(rc.config_path);
  if (rc.model.empty()) throw InputError("no model given (use --model or --config)");
  return builtin_config(rc.model);
}

std::string num(double v) { return fmt::format("{:.17g}", v); }

double single_T(const RunConfig& rc) {
  if (rc.T.size() != 1) throw InputError("--T needs exactly one value for this command");
  if (!(rc.T[0] > 0.0)) throw InputError("--T must be positive");
  return rc.T[0];
}

std::vector<double> parse_pi_grid(const std::string& s) {
  std::vector<double> out;
  auto to_d = [&](const std::string& x) {
    try {
      std::size_t pos = 0;
      const double v = std::stod(x, &pos);
      if (pos != x.size()) throw std::invalid_argument(x);
      return v;
    } catch (const std::exception&) {
      throw InputError("bad --pi-grid value '" + x + "'");
    }
  };
  if (s.find(':') != std::string::npos) {
    std::stringstream ss(s);
    std::string a, b, c;
    std::getline(ss, a, ':');
    std::getline(ss, b, ':');
    std::getline(ss, c, ':');
    const double lo = to_d(a), hi = to_d(b), step = to_d(c);
    if (!(step > 0.0) || hi < lo) throw InputError("--pi-grid expects start:stop:step with step > 0");
    const auto n = static_cast<std::size_t>(std::floor((hi - lo) / step + 1e-9));
    for (std::size_t i = 0; i <= n; ++i) out.push_back(std::min(hi, lo + static_cast<double>(i) * step));
  } else {
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(to_d(item));
  }
  if (out.empty()) throw InputError("empty --pi-grid");
  for (double p : out)
    if (!(p >= 0.0 && p <= 1.0)) throw InputError("--pi-grid values must lie in [0, 1]");
  return out;
}

json meta(const RunConfig& rc, const ModelConfig& m, bool seeded) {
  json j{{"version", MRPCHAN_VERSION}, {"command", rc.command}, {"config_hash", m.hash()}};
  if (seeded) j["seed"] = rc.seed;
  return j;
}

std::string csv_header(const RunConfig& rc, const ModelConfig& m, bool seeded) {
  std::string s = fmt::format("# mrpchan {}\n# command: {}\n# config_hash: {}\n", MRPCHAN_VERSION, rc.command, m.hash());
  if (seeded) s += fmt::format("# seed: {}\n", rc.seed);
  return s;
}

/// Writes to <out>/<name> (plus the config document) or to stdout without --out.
void emit(const RunConfig& rc, const ModelConfig& m, const std::string& name, const std::string& body) {
  if (rc.out.empty()) {
    std::cout << body;
    return;
  }
  fs::create_directories(rc.out);
  std::ofstream(fs::path(rc.out) / name, std::ios::binary) << body;
  std::ofstream(fs::path(rc.out) / "config.json", std::ios::binary) << m.document.dump(2) << "\n";
}

const Channel& need_channel(const ModelConfig& m) {
  if (m.kind != "channel") throw InputError("this command needs a channel model");
  return m.channel;
}

void add_series(std::string& csv, const std::string& name, const ExpPoly& f, double T, double h) {
  const auto n = static_cast<std::size_t>(std::llround(T / h));
  for (std::size_t i = 0; i <= n; ++i) {
    const double t = static_cast<double>(i) * h;
    csv += fmt::format("{},{},{}\n", num(t), name, num(f(t)));
  }
}

void add_grid(std::string& csv, const std::string& prefix, const GridFunction& g) {
  for (std::size_t s = 0; s < g.values.size(); ++s)
    for (std::size_t i = 0; i < g.points(); ++i)
      csv += fmt::format("{},{}{},{}\n", num(g.t(i)), prefix, g.labels[s], num(g.values[s][i]));
}

int cmd_density(const RunConfig& rc) {
  const ModelConfig m = load_model(rc);
  std::vector<std::pair<std::string, SemiMarkovKernel>> kernels;
  if (m.kind == "static") {
    for (std::size_t b = 0; b < m.static_model.blocks.size(); ++b) {
      kernels.emplace_back(m.block_names[b], m.static_model.blocks[b]);
    }
  } else {
    const ChannelSystems cs = prepare_channel(m.channel);
    kernels.emplace_back("output", cs.output.sys.filtered());
    kernels.emplace_back("joint", cs.joint.sys.filtered());
  }
  double scale = 0.0;
  for (const auto& [name, k] : kernels)
    for (std::size_t y = 0; y < k.size(); ++y) scale = std::max(scale, k.mean_sojourn(y));
  const double T = rc.T.empty() ? 5.0 * scale : single_T(rc);
  const double h = rc.h > 0.0 ? rc.h : T / 1000.0;
  if (!(h > 0.0) || !std::isfinite(T)) throw InputError("cannot choose a grid; give --T and --h");

  std::string csv = csv_header(rc, m, false) + "t,series,value\n";
  const bool many = kernels.size() > 1;
  for (const auto& [name, k] : kernels) {
    if (rc.which == "f_tau") {
      if (k.size() != 1) continue;
      add_series(csv, name, k.q(0, 0), T, h);
    } else if (rc.which == "filtered-kernel") {
      for (std::size_t a = 0; a < k.size(); ++a)
        for (std::size_t b = 0; b < k.size(); ++b)
          if (!k.q(a, b).is_zero()) add_series(csv, name + ":" + k.label(a) + "->" + k.label(b), k.q(a, b), T, h);
    } else if (rc.which == "renewal-density") {
      std::size_t start = 0;
      if (m.kind == "static") start = k.index(m.static_model.initial);
      std::vector<double> eta(k.size(), 0.0);
      eta[start] = 1.0;
      add_grid(csv, many ? name + ":" : "", volterra_solve(k, observed_start(k, eta), T, h));
    } else {
      throw InputError("--which must be f_tau, filtered-kernel or renewal-density");
    }
  }
  emit(rc, m, "density.csv", csv);
  return 0;
}

int cmd_mi(const RunConfig& rc) {
  const ModelConfig m = load_model(rc);
  const double T = single_T(rc);
  json out{{"schema", kConfigSchema}, {"T", T}, {"mode", rc.mode}};
  const bool mc = rc.mode == "mc";
  if (!mc && rc.mode != "exact") throw InputError("--mode must be exact or mc");
  if (m.kind == "static") {
    if (!mc) throw CapabilityError("exact mode needs a channel model; use --mode mc");
    MCOptions opt{rc.n_traj, rc.seed, rc.threads};
    const MCGrid g = mc_mi_static(m.static_model, binary_priors({rc.pi}), {T}, opt);
    out["pi"] = rc.pi;
    out["mi"] = g.value[0][0];
    out["se"] = g.se[0][0];
    out["samples"] = g.samples;
    out["discarded"] = g.discarded;
  } else {
    const ChannelSystems cs = prepare_channel(m.channel);
    if (mc) {
      const MCEstimate e = mc_mi_dynamic(m.channel, cs, T, MCOptions{rc.n_traj, rc.seed, rc.threads});
      out["mi"] = e.value;
      out["se"] = e.se;
      out["samples"] = e.samples;
      out["discarded"] = e.discarded;
    } else {
      const ExactMI e = mi_exact(cs, T);
      out["mi"] = e.mi;
      out["terms"] = {{"joint", e.joint_term}, {"output", e.output_term}};
    }
  }
  out["meta"] = meta(rc, m, mc);
  emit(rc, m, "mi.json", out.dump(2) + "\n");
  return 0;
}

json terms_json(const MirResult& r) {
  json a = json::array();
  for (const auto& t : r.terms)
    a.push_back({{"from", t.from}, {"inv_m", t.inv_m}, {"p", t.law.p}, {"entropy", t.law.entropy},
                 {"e_log_s", t.law.e_log_s}, {"value", t.value}});
  return {{"terms", a}, {"value", r.value}};
}

int cmd_mir(const RunConfig& rc) {
  const ModelConfig m = load_model(rc);
  const ChannelMir r = mir_channel(prepare_channel(need_channel(m)));
  json out{{"schema", kConfigSchema}, {"mir", r.mir}, {"formula", r.formula}, {"joint", terms_json(r.joint)},
           {"output", terms_json(r.output)}, {"meta", meta(rc, m, false)}};
  emit(rc, m, "mir.json", out.dump(2) + "\n");
  return 0;
}

int cmd_contour(const RunConfig& rc) {
  const ModelConfig m = load_model(rc);
  if (m.kind != "static" || m.static_model.blocks.size() != 2)
    throw InputError("contour needs a static model with two blocks");
  if (rc.T.empty()) throw InputError("contour needs --T (one or more horizons)");
  std::vector<double> Ts = rc.T;
  std::sort(Ts.begin(), Ts.end());
  const auto pis = parse_pi_grid(rc.pi_grid);
  const MCGrid g = mc_mi_static(m.static_model, binary_priors(pis), Ts, MCOptions{rc.n_traj, rc.seed, rc.threads});

  std::string csv = csv_header(rc, m, true) + "T,pi,mi,se\n";
  for (std::size_t j = 0; j < Ts.size(); ++j)
    for (std::size_t p = 0; p < pis.size(); ++p)
      csv += fmt::format("{},{},{},{}\n", num(Ts[j]), num(pis[p]), num(g.value[p][j]), num(g.se[p][j]));
  std::size_t best = 0;
  for (std::size_t p = 1; p < pis.size(); ++p)
    if (g.value[p].back() > g.value[best].back()) best = p;
  json summary{{"schema", kConfigSchema}, {"T_max", Ts.back()},     {"argmax_pi", pis[best]},
               {"mi_max", g.value[best].back()}, {"se", g.se[best].back()}, {"samples", g.samples},
               {"discarded", g.discarded},        {"meta", meta(rc, m, true)}};
  if (rc.out.empty()) {
    std::cout << csv;
    std::cerr << summary.dump() << "\n";
  } else {
    emit(rc, m, "contour.csv", csv);
    emit(rc, m, "contour.json", summary.dump(2) + "\n");
  }
  return 0;
}

int cmd_simulate(const RunConfig& rc) {
  const ModelConfig m = load_model(rc);
  const double T = single_T(rc);
  const fs::path dir = rc.out.empty() ? fs::path(".") : fs::path(rc.out);
  fs::create_directories(dir);
  for (std::size_t i = 0; i < rc.n_traj; ++i) {
    const SemiMarkovKernel* k = nullptr;
    std::string start, extra;
    if (m.kind == "static") {
      auto rng = trajectory_rng(rc.seed, i, 0);
      const std::size_t c = uniform01(rng) < rc.pi ? 1 : 0;
      k = &m.static_model.blocks.at(std::min(c, m.static_model.blocks.size() - 1));
      start = m.static_model.initial;
      extra = fmt::format("# block: {}\n", m.block_names.at(c));
    } else {
      k = &m.channel.kernel;
      start = m.channel.initial;
    }
    const Trajectory tr = simulate_mrp(*k, k->index(start), T, rc.seed, i);
    std::string csv = csv_header(rc, m, true) + fmt::format("# trajectory: {}\n", i) + extra + "t,mark\n";
    csv += fmt::format("{},{}\n", num(0.0), k->label(tr.initial));
    for (std::size_t e = 0; e < tr.times.size(); ++e) csv += fmt::format("{},{}\n", num(tr.times[e]), k->label(tr.states[e]));
    std::ofstream(dir / fmt::format("traj_{:06d}.csv", i), std::ios::binary) << csv;
  }
  std::ofstream(dir / "config.json", std::ios::binary) << m.document.dump(2) << "\n";
  return 0;
}

void report(const std::string& kind, const std::string& what) {
  std::cerr << json{{"error", kind}, {"message", what}}.dump() << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Mutual information of Markov renewal channels"};
  app.require_subcommand(1);
  RunConfig rc;

  auto common = [&](CLI::App* sub) {
    sub->set_help_flag("--help", "Print this help message and exit");
    sub->add_option("--model", rc.model, "Built-in model name");
    sub->add_option("--config", rc.config_path, "Model config file (JSON)");
    sub->add_option("--out", rc.out, "Output directory");
  };
  auto* density = app.add_subcommand("density", "Densities on a grid as CSV");
  common(density);
  density->add_option("--which", rc.which, "f_tau | filtered-kernel | renewal-density");
  density->add_option("--T", rc.T, "Grid end")->delimiter(',');
  density->add_option("--h", rc.h, "Grid step");

  auto* mi = app.add_subcommand("mi", "Finite-horizon mutual information as JSON");
  common(mi);
  mi->add_option("--mode", rc.mode, "exact | mc");
  mi->add_option("--T", rc.T, "Horizon")->required()->delimiter(',');
  mi->add_option("--n-traj", rc.n_traj, "Monte Carlo trajectories");
  mi->add_option("--seed", rc.seed, "Random seed");
  mi->add_option("--threads", rc.threads, "Worker threads");
  mi->add_option("--pi", rc.pi, "Prior P(C = 1) for static models");

  auto* mir = app.add_subcommand("mir", "Mutual information rate as JSON");
  common(mir);

  auto* contour = app.add_subcommand("contour", "I(C; Y_[0,T]) over a prior and horizon grid");
  common(contour);
  contour->add_option("--T", rc.T, "Horizons, comma separated")->required()->delimiter(',');
  contour->add_option("--pi-grid", rc.pi_grid, "start:stop:step or comma list");
  contour->add_option("--n-traj", rc.n_traj, "Monte Carlo trajectories");
  contour->add_option("--seed", rc.seed, "Random seed");
  contour->add_option("--threads", rc.threads, "Worker threads");

  auto* simulate = app.add_subcommand("simulate", "Trajectory CSV files");
  common(simulate);
  simulate->add_option("--T", rc.T, "Horizon")->required()->delimiter(',');
  simulate->add_option("--n-traj", rc.n_traj, "Number of trajectories")->default_val(10);
  simulate->add_option("--seed", rc.seed, "Random seed");
  simulate->add_option("--pi", rc.pi, "Prior P(C = 1) for static models");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    report("usage", e.what());
    return 2;
  }

  try {
    logger();
    auto* sub = app.get_subcommands().front();
    rc.command = sub->get_name();
    if (rc.threads == 0) throw InputError("--threads must be at least 1");
    if (sub == density) return cmd_density(rc);
    if (sub == mi) return cmd_mi(rc);
    if (sub == mir) return cmd_mir(rc);
    if (sub == contour) return cmd_contour(rc);
    return cmd_simulate(rc);
  } catch (const InputError& e) {
    report("input", e.what());
    return 2;
  } catch (const CapabilityError& e) {
    report("capability", e.what());
    return 2;
  } catch (const NumericError& e) {
    report("numeric", e.what());
    return 1;
  } catch (const std::exception& e) {
    report("internal", e.what());
    return 1;
  }
}

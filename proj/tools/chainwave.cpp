// chainwave: traces, parameter sweeps, Monte Carlo ensembles and oracle checks
// for state transfer through chains with ramped end couplings.

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "chainwave/chainwave.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace chainwave;
using namespace chainwave::schedule;

namespace {

struct ChainArgs {
  int n = 10;
  double j_xy = 1.0;
  double j_z = 0.0;
  double b = 0.0;
  std::optional<double> dt;
  std::string out_dir = ".";
  unsigned threads = 0;

  [[nodiscard]] ChainSpec spec() const { return ChainSpec::uniform(n, j_xy, j_z, b); }
};

void add_chain_options(CLI::App* app, ChainArgs& a) {
  app->add_option("--n", a.n, "Number of sites");
  app->add_option("--jxy", a.j_xy, "Hopping strength J_xy");
  app->add_option("--jz", a.j_z, "Ising anisotropy J_z");
  app->add_option("--b", a.b, "Uniform field B");
  app->add_option("--dt", a.dt, "Integrator step (default: chosen from the ramp times)");
  app->add_option("--out-dir", a.out_dir, "Directory for output files");
  app->add_option("--threads", a.threads, "Worker threads (0 = all cores)");
}

FidelityMode parse_mode(const std::string& s) {
  return s == "averaged" ? FidelityMode::averaged : FidelityMode::phase_optimized;
}

// Every option of `app` that has a long name, with its effective value, keyed
// so that the result can be fed back through --config.
json effective_parameters(const CLI::App* app) {
  json out = json::object();
  for (const CLI::Option* opt : app->get_options()) {
    const std::string name = opt->get_single_name();
    if (opt->get_lnames().empty() || name == "help" || name == "config") continue;
    if (opt->get_expected_min() == 0) {
      out[name] = opt->count() > 0;
      continue;
    }
    std::string text;
    if (opt->count() > 0)
      text = opt->as<std::string>();
    else
      text = opt->get_default_str();
    if (text.empty()) continue;
    const json parsed = json::parse(text, nullptr, false);
    out[name] = parsed.is_number() ? parsed : json(text);
  }
  return out;
}

fs::path prepare_dir(const std::string& dir) {
  fs::path p(dir);
  fs::create_directories(p);
  return p;
}

void write_file(const fs::path& path, const std::string& body) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write " + path.string());
  os << body;
}

template <class Fn>
std::string render(Fn&& fn) {
  std::ostringstream os;
  fn(os);
  return os.str();
}

json sidecar(const std::string& command, const CLI::App* sub, const ChainSpec& spec) {
  return {{"command", command},
          {"parameters", effective_parameters(sub)},
          {"chain", io::to_json(spec)}};
}

double static_peak(const ChainSpec& spec, std::optional<double> dt) {
  RunOptions run;
  run.t_end = 20.0;
  run.dt = dt;
  return first_maximum(record_trace(spec, Static{}, Static{}, run)).f;
}

// ---------------------------------------------------------------------------
// simulate

struct SimulateArgs {
  ChainArgs chain;
  std::string schedule = "fermi";
  bool is_static = false;
  bool compare_static = false;
  double t_i = 0.0;
  double t_f = 6.2;
  double tau = 1.0;
  double a = 1.0;
  double t_end = 20.0;
  std::string fidelity = "phase_optimized";
};

std::pair<CouplingSchedule, CouplingSchedule> schedules_for(const std::string& kind, double t_i, double t_f,
                                                            double tau, double a) {
  if (kind == "static") return {Static{}, Static{}};
  if (kind == "power") return {PowerOn{tau, a}, PowerOff{t_f, tau, a}};
  if (kind == "instant") return {InstantOn{t_i}, FermiOff{t_f, tau}};
  return {FermiOn{t_i, tau}, FermiOff{t_f, tau}};
}

int run_simulate(const SimulateArgs& a, const CLI::App* sub) {
  const auto spec = a.chain.spec();
  const auto [first, last] = schedules_for(a.is_static ? "static" : a.schedule, a.t_i, a.t_f, a.tau, a.a);
  const auto mode = parse_mode(a.fidelity);
  RunOptions run;
  run.t_end = a.t_end;
  run.dt = a.chain.dt;

  const auto trace = record_trace(spec, first, last, run);
  const auto summary = summarize(trace, mode);
  const auto dir = prepare_dir(a.chain.out_dir);

  json meta = sidecar("simulate", sub, spec);
  meta["first"] = first.describe();
  meta["last"] = last.describe();
  meta["integrator"] = {{"dt", trace.integrator.dt}, {"norm_tol", trace.integrator.norm_tol}};
  meta["fidelity_mode"] = to_string(mode);
  meta["summary"] = io::to_json(summary);
  meta["files"] = json::array({"trace.csv"});
  write_file(dir / "trace.csv", render([&](std::ostream& os) { io::write_trace_csv(os, trace); }));

  std::cout << "schedule " << first.describe() << " / " << last.describe() << '\n';
  if (summary.first_max)
    std::cout << "first maximum F=" << io::num(summary.first_max->f) << " at t=" << io::num(summary.first_max->t)
              << '\n';
  else
    std::cout << "no fidelity maximum above 0.55 in the trace\n";
  if (summary.f_stationary) std::cout << "stationary F_d=" << io::num(*summary.f_stationary) << '\n';

  if (a.compare_static && !a.is_static && a.schedule != "static") {
    const auto stat = record_trace(spec, Static{}, Static{}, run);
    const auto ss = summarize(stat, mode);
    meta["static_summary"] = io::to_json(ss);
    meta["files"].push_back("trace_static.csv");
    write_file(dir / "trace_static.csv", render([&](std::ostream& os) { io::write_trace_csv(os, stat); }));
    if (ss.first_max) std::cout << "static first maximum F0=" << io::num(ss.first_max->f) << '\n';
  }
  write_file(dir / "simulate.json", meta.dump(2) + "\n");
  return 0;
}

// ---------------------------------------------------------------------------
// sweep

struct SweepArgs {
  ChainArgs chain;
  std::string tau = "0.05:2:40";
  std::string tf = "4:9:40";
  double t_i = 0.0;
  std::string quantity = "stationary";
  std::string on = "fermi";
  bool powerlaw = false;
  std::string a = "0.1:1:10";
  std::size_t budget = 12;
  int rounds = 2;
  std::string fidelity = "phase_optimized";
};

int run_sweep(const SweepArgs& a, const CLI::App* sub) {
  const auto spec = a.chain.spec();
  const auto dir = prepare_dir(a.chain.out_dir);
  const double f0 = static_peak(spec, a.chain.dt);
  json meta = sidecar("sweep", sub, spec);
  meta["static_first_max"] = f0;

  if (a.powerlaw) {
    PowerlawOptions po;
    po.threads = a.chain.threads;
    po.dt = a.chain.dt;
    po.rounds = a.rounds;
    if (sub->count("--tau") > 0 || sub->count("--tf") > 0) {
      const auto tr = io::parse_range(a.tau);
      const auto fr = io::parse_range(a.tf);
      po.box = Box{tr.lo, tr.hi, fr.lo, fr.hi};
    }
    const auto pts = sweep_powerlaw(spec, io::parse_range(a.a).values(), a.budget, po);
    write_file(dir / "powerlaw.csv", render([&](std::ostream& os) { io::write_powerlaw_csv(os, pts); }));
    bool all_above = true;
    for (const auto& p : pts) {
      all_above = all_above && p.f_first_max > f0;
      std::cout << "a=" << io::num(p.a) << " first maximum " << io::num(p.f_first_max) << " at tau="
                << io::num(p.best_tau) << " t_f=" << io::num(p.best_tf) << '\n';
    }
    std::cout << "static F0=" << io::num(f0) << (all_above ? ", every exponent beats it\n" : "\n");
    meta["box"] = {po.box.tau_lo, po.box.tau_hi, po.box.tf_lo, po.box.tf_hi};
    meta["all_above_static"] = all_above;
    meta["files"] = json::array({"powerlaw.csv"});
    write_file(dir / "sweep.json", meta.dump(2) + "\n");
    return 0;
  }

  SweepOptions so;
  so.t_i = a.t_i;
  so.on = a.on == "instant" ? OnRamp::instant : OnRamp::fermi;
  so.threads = a.chain.threads;
  so.dt = a.chain.dt;
  so.mode = parse_mode(a.fidelity);
  const auto q = a.quantity == "first_max" ? SweepQuantity::first_max : SweepQuantity::stationary;
  const auto grid = sweep_tau_tf(spec, io::parse_range(a.tau).values(), io::parse_range(a.tf).values(), so);
  const std::string file = "sweep_" + a.quantity + ".csv";
  write_file(dir / file, render([&](std::ostream& os) { io::write_heatmap_csv(os, grid, q); }));

  std::size_t missing = 0;
  for (const auto& c : grid.cells) missing += c.get(q) ? 0 : 1;
  meta["missing_cells"] = missing;
  meta["files"] = json::array({file});
  if (const auto best = grid.best(q)) {
    const double v = *best->get(q);
    meta["best"] = {{"tau", best->tau}, {"t_f", best->t_f}, {"value", v}, {"gain_over_static", v - f0}};
    if (grid.cells.size() == 1)
      std::cout << io::num(v) << '\n';
    else
      std::cout << "best " << a.quantity << " " << io::num(v) << " at tau=" << io::num(best->tau)
                << " t_f=" << io::num(best->t_f) << " (static F0=" << io::num(f0) << ", gain "
                << io::num(v - f0) << ")\n";
  } else {
    std::cout << "no cell produced a value\n";
  }
  if (missing > 0) std::cout << missing << " of " << grid.cells.size() << " cells have no value\n";
  write_file(dir / "sweep.json", meta.dump(2) + "\n");
  return 0;
}

// ---------------------------------------------------------------------------
// ensemble

struct EnsembleArgs {
  ChainArgs chain;
  std::string mode = "disorder";
  double strength = 0.07;
  std::size_t samples = 1000;
  std::uint64_t seed = 7;
  double t_i = 0.0;
  double t_f = 6.2;
  double tau = 0.325;
  std::size_t bins = 40;
  double amplitude = 0.02;
};

int run_ensemble(const EnsembleArgs& a, const CLI::App* sub) {
  const auto spec = a.chain.spec();
  const CouplingSchedule on = FermiOn{a.t_i, a.tau};
  const CouplingSchedule off = FermiOff{a.t_f, a.tau};
  EnsembleOptions eo;
  eo.threads = a.chain.threads;
  eo.bins = a.bins;
  eo.dt = a.chain.dt;
  eo.noise_amplitude = a.amplitude;

  const auto dir = prepare_dir(a.chain.out_dir);
  const std::string stem = "ensemble_" + a.mode;
  json meta = sidecar("ensemble", sub, spec);
  meta["seed"] = a.seed;
  meta["first"] = on.describe();
  meta["last"] = off.describe();

  EnsembleReport r;
  try {
    r = a.mode == "fluctuation" ? fluctuation_ensemble(spec, on, off, a.samples, a.seed, eo)
                                : disorder_ensemble(spec, on, off, a.samples, a.strength, a.seed, eo);
  } catch (const EnsembleAborted& e) {
    meta["aborted"] = e.what();
    write_file(dir / (stem + ".json"), meta.dump(2) + "\n");
    throw;
  }

  write_file(dir / (stem + "_samples.csv"), render([&](std::ostream& os) { io::write_samples_csv(os, r); }));
  write_file(dir / (stem + "_histogram.csv"),
             render([&](std::ostream& os) { io::write_histogram_csv(os, r.histogram); }));
  write_file(dir / (stem + "_difference_histogram.csv"),
             render([&](std::ostream& os) { io::write_histogram_csv(os, r.difference_histogram); }));
  meta["stats"] = io::to_json(r.stats);
  meta["difference_stats"] = io::to_json(r.difference_stats);
  meta["failed"] = r.failed;
  meta["files"] = json::array({stem + "_samples.csv", stem + "_histogram.csv", stem + "_difference_histogram.csv"});
  write_file(dir / (stem + ".json"), meta.dump(2) + "\n");

  const char* ref = a.mode == "fluctuation" ? "noiseless F_d" : "static first maximum";
  std::cout << r.samples.size() << " samples, " << r.failed << " failed\n"
            << "F_d mean " << io::num(r.stats.mean) << " sd " << io::num(r.stats.stddev) << " range ["
            << io::num(r.stats.min) << ", " << io::num(r.stats.max) << "]\n"
            << "difference to " << ref << ": mean " << io::num(r.difference_stats.mean) << " +- "
            << io::num(r.difference_stats.standard_error()) << " range [" << io::num(r.difference_stats.min) << ", "
            << io::num(r.difference_stats.max) << "]\n";
  return 0;
}

// ---------------------------------------------------------------------------
// verify

struct VerifyArgs {
  ChainArgs chain;
  std::string schedule = "fermi";
  double t_i = 0.0;
  double t_f = 4.0;
  double tau = 0.5;
  double a = 0.5;
  double t_end = 8.0;
  std::uint64_t seed = 7;
  bool quadrature = false;
  int points = 10000;
};

int run_verify(VerifyArgs a, const CLI::App* sub) {
  if (sub->count("--n") == 0) a.chain.n = 6;
  const auto spec = a.chain.spec();
  std::pair<CouplingSchedule, CouplingSchedule> sched;
  if (a.schedule == "noisy") {
    const double step = 0.036 * a.tau;
    sched = {CouplingSchedule::noisy(FermiOn{a.t_i, a.tau}, draw_noise_track(step, a.t_end, 0.02, derive_seed(a.seed, 0))),
             CouplingSchedule::noisy(FermiOff{a.t_f, a.tau},
                                     draw_noise_track(step, a.t_end, 0.02, derive_seed(a.seed, 1)))};
  } else {
    sched = schedules_for(a.schedule, a.t_i, a.t_f, a.tau, a.a);
    if (a.schedule == "instant") sched.second = InstantOff{a.t_f};
  }
  const auto& [first, last] = sched;

  RunOptions run;
  run.t_end = a.t_end;
  run.dt = a.chain.dt;
  json meta = sidecar("verify", sub, spec);
  meta["first"] = first.describe();
  meta["last"] = last.describe();
  bool ok = true;

  const auto cmp = oracle::compare_with_sector(spec, first, last, run);
  const bool trace_ok = cmp.max_deviation < 1e-6;
  ok = ok && trace_ok;
  meta["trace_max_deviation"] = cmp.max_deviation;
  meta["trace_points"] = cmp.points;
  std::cout << (trace_ok ? "PASS" : "FAIL") << " full-space vs sector averaged fidelity: max deviation "
            << io::num(cmp.max_deviation) << " over " << cmp.points << " points\n";

  const HamiltonianView h(spec, first, last);
  const auto conv = convergence_check(h, SectorState::sender(spec.n), a.t_end, integrator_for(h, run));
  ok = ok && conv.converged;
  meta["step_halving_discrepancy"] = conv.discrepancy;
  std::cout << (conv.converged ? "PASS" : "FAIL") << " step halving: max amplitude change "
            << io::num(conv.discrepancy) << '\n';

  if (a.quadrature) {
    const auto trace = record_trace(spec, first, last, run);
    std::size_t idx = trace.samples.size() - 1;
    try {
      idx = first_maximum(trace, FidelityMode::averaged).index;
    } catch (const NoMaximum&) {
    }
    const auto& s = trace.samples[idx];
    const oracle::FullSpaceHamiltonian fh(spec, first, last);
    const auto ch = oracle::full_space_channel(fh, run.t_start, s.t, trace.integrator.dt);
    const double q = oracle::bloch_average_quadrature([&](cplx x, cplx y) { return ch.rho(x, y); }, a.points);
    const double dev = std::abs(q - s.f_avg);
    const bool q_ok = dev < 1e-5;
    ok = ok && q_ok;
    meta["quadrature"] = {{"t", s.t}, {"closed_form", s.f_avg}, {"quadrature", q}, {"points", a.points}};
    std::cout << (q_ok ? "PASS" : "FAIL") << " closed form vs " << a.points << "-point quadrature at t="
              << io::num(s.t) << ": " << io::num(dev) << '\n';
  }
  meta["passed"] = ok;
  write_file(prepare_dir(a.chain.out_dir) / "verify.json", meta.dump(2) + "\n");
  return ok ? 0 : 1;
}

// ---------------------------------------------------------------------------
// --config: JSON keys are long option names; values are spliced in right after
// the subcommand so explicit flags, which come later, take precedence.

std::vector<std::string> expand_config(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  std::string path;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) {
      path = args[i + 1];
      args.erase(args.begin() + static_cast<long>(i), args.begin() + static_cast<long>(i) + 2);
      break;
    }
    if (args[i].rfind("--config=", 0) == 0) {
      path = args[i].substr(9);
      args.erase(args.begin() + static_cast<long>(i));
      break;
    }
  }
  if (path.empty()) return args;

  std::ifstream in(path);
  if (!in) throw CLI::FileError::Missing(path);
  json cfg;
  try {
    cfg = json::parse(in);
  } catch (const json::exception& e) {
    throw CLI::ConversionError("config " + path + ": " + e.what());
  }
  if (!cfg.is_object()) throw CLI::ConversionError("config " + path + " must hold a JSON object");
  if (cfg.contains("parameters") && cfg["parameters"].is_object()) cfg = cfg["parameters"];

  std::vector<std::string> injected;
  const bool env_seed = std::getenv("CHAINWAVE_SEED") != nullptr;
  for (const auto& [key, value] : cfg.items()) {
    if (key == "seed" && env_seed) continue;
    if (value.is_boolean()) {
      if (value.get<bool>()) injected.push_back("--" + key);
    } else if (value.is_string()) {
      injected.push_back("--" + key + "=" + value.get<std::string>());
    } else if (value.is_number()) {
      injected.push_back("--" + key + "=" + value.dump());
    } else {
      throw CLI::ConversionError("config key '" + key + "' must be a number, string or boolean");
    }
  }
  static const std::vector<std::string> commands{"simulate", "sweep", "ensemble", "verify"};
  auto at = std::find_if(args.begin(), args.end(),
                         [](const std::string& s) { return std::find(commands.begin(), commands.end(), s) != commands.end(); });
  if (at == args.end()) throw CLI::CallForHelp();
  args.insert(at + 1, injected.begin(), injected.end());
  return args;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"State transfer through qubit chains with ramped end couplings", "chainwave"};
  app.require_subcommand(1);
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast)->always_capture_default();
  app.add_option("--config", "JSON file whose keys are option names");

  const auto fidelity_modes = CLI::IsMember({"phase_optimized", "averaged"});

  SimulateArgs sim;
  auto* s = app.add_subcommand("simulate", "Fidelity trace of a single run");
  add_chain_options(s, sim.chain);
  s->add_option("--schedule", sim.schedule, "Ramp family")->check(CLI::IsMember({"fermi", "power", "static", "instant"}));
  s->add_flag("--static", sim.is_static, "Constant couplings (same as --schedule static)");
  s->add_flag("--compare-static", sim.compare_static, "Also write the constant-coupling trace");
  s->add_option("--ti", sim.t_i, "Switch-on time");
  s->add_option("--tf", sim.t_f, "Switch-off time");
  s->add_option("--tau", sim.tau, "Ramp time");
  s->add_option("--a", sim.a, "Power-law exponent")->check(CLI::PositiveNumber);
  s->add_option("--t-end", sim.t_end, "End of the trace");
  s->add_option("--fidelity", sim.fidelity, "Curve used for peak detection")->check(fidelity_modes);

  SweepArgs sw;
  auto* w = app.add_subcommand("sweep", "Grid scan over ramp time and switch-off time");
  add_chain_options(w, sw.chain);
  w->add_option("--tau", sw.tau, "Ramp times lo:hi:count (box bounds with --powerlaw)");
  w->add_option("--tf", sw.tf, "Switch-off times lo:hi:count (box bounds with --powerlaw)");
  w->add_option("--ti", sw.t_i, "Switch-on time");
  w->add_option("--quantity", sw.quantity, "Value per cell")->check(CLI::IsMember({"stationary", "first_max"}));
  w->add_option("--on", sw.on, "Switch-on profile")->check(CLI::IsMember({"fermi", "instant"}));
  w->add_flag("--powerlaw", sw.powerlaw, "Optimize power-law ramps for each exponent instead");
  w->add_option("--a", sw.a, "Exponents lo:hi:count");
  w->add_option("--budget", sw.budget, "Coarse grid points per axis for --powerlaw")->check(CLI::PositiveNumber);
  w->add_option("--rounds", sw.rounds, "Refinement rounds for --powerlaw")->check(CLI::NonNegativeNumber);
  w->add_option("--fidelity", sw.fidelity, "Curve used for peak detection")->check(fidelity_modes);

  EnsembleArgs en;
  auto* e = app.add_subcommand("ensemble", "Monte Carlo over bond disorder or coupling noise");
  add_chain_options(e, en.chain);
  e->add_option("--mode", en.mode, "Ensemble kind")->check(CLI::IsMember({"disorder", "fluctuation"}));
  e->add_option("--strength", en.strength, "Disorder draws are uniform on [0, strength]")->check(CLI::NonNegativeNumber);
  e->add_option("--samples", en.samples, "Number of realizations")->check(CLI::PositiveNumber);
  e->add_option("--seed", en.seed, "Base seed; sample i uses seed + i")->envname("CHAINWAVE_SEED");
  e->add_option("--ti", en.t_i, "Switch-on time");
  e->add_option("--tf", en.t_f, "Switch-off time");
  e->add_option("--tau", en.tau, "Ramp time");
  e->add_option("--bins", en.bins, "Histogram bins")->check(CLI::PositiveNumber);
  e->add_option("--amplitude", en.amplitude, "Noise heights are uniform on [0, amplitude]")
      ->check(CLI::NonNegativeNumber);

  VerifyArgs ve;
  auto* v = app.add_subcommand("verify", "Compare against full Hilbert-space evolution");
  add_chain_options(v, ve.chain);
  v->add_option("--schedule", ve.schedule, "Ramp family")
      ->check(CLI::IsMember({"fermi", "power", "static", "instant", "noisy"}));
  v->add_option("--ti", ve.t_i, "Switch-on time");
  v->add_option("--tf", ve.t_f, "Switch-off time");
  v->add_option("--tau", ve.tau, "Ramp time");
  v->add_option("--a", ve.a, "Power-law exponent")->check(CLI::PositiveNumber);
  v->add_option("--t-end", ve.t_end, "End of the comparison window");
  v->add_option("--seed", ve.seed, "Seed for --schedule noisy")->envname("CHAINWAVE_SEED");
  v->add_flag("--quadrature", ve.quadrature, "Also check the Bloch average by quadrature");
  v->add_option("--points", ve.points, "Quadrature points")->check(CLI::Range(100, 10000000));

  try {
    auto args = expand_config(argc, argv);
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const CLI::ParseError& err) {
    return app.exit(err);
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << '\n';
    return 2;
  }

  try {
    if (s->parsed()) return run_simulate(sim, s);
    if (w->parsed()) return run_sweep(sw, w);
    if (e->parsed()) return run_ensemble(en, e);
    return run_verify(ve, v);
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << '\n';
    return 1;
  }
}

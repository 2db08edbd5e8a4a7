#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "acm/collider.hpp"
#include "acm/config.hpp"
#include "acm/csv.hpp"
#include "acm/energetics.hpp"
#include "acm/entropy.hpp"
#include "acm/fieldobs.hpp"
#include "acm/obe.hpp"
#include "acm/parallel.hpp"
#include "acm/svg.hpp"
#include "acm/verify.hpp"

namespace acm {

struct CommandOptions {
  bool svg = true;
  unsigned threads = 0;
};

struct CommandOutput {
  std::vector<std::string> files;
  nlohmann::json summary;
  bool passed = true;
};

// Mean flows of a collision-engine run over its final window, in units of
// gamma*hbar*omega0. The ledger samples every `stride`-th step in the window.
struct SimulatedSteady {
  double bW_S = 0.0;
  double bW_f = 0.0;
  double bQ_S = 0.0;
  double bQ_f = 0.0;
  double W_self = 0.0;
  double W = 0.0;
  double Q = 0.0;
  int fock_dim = 0;
};

inline SimulatedSteady simulated_steady(const ModelParams& p, double t_total = 20.0, double window = 5.0,
                                        long stride = 10) {
  const Collider engine(p);
  const long n = std::lround(t_total / (p.gamma * p.dt));
  const long from = n - std::lround(window / (p.gamma * p.dt));
  EnergyLedger ledger(std::max(0L, from), n, stride);
  TrajectoryOptions opts;
  opts.record_stride = n;
  run_trajectory(engine, ground_state(), n, {&ledger}, opts);
  const double u = p.gamma * p.omega0;
  SimulatedSteady r;
  r.W = ledger.mean_flow(3, p) / u;
  r.Q = ledger.mean_flow(4, p) / u;
  r.bW_S = ledger.mean_flow(5, p) / u;
  r.bW_f = ledger.mean_flow(6, p) / u;
  r.bQ_S = ledger.mean_flow(7, p) / u;
  r.bQ_f = ledger.mean_flow(8, p) / u;
  r.W_self = ledger.mean_flow(9, p) / u;
  r.fock_dim = engine.fock_dim();
  return r;
}

inline std::filesystem::path prepare_output_dir(const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory '" + dir + "': " + ec.message());
  const auto probe = std::filesystem::path(dir) / ".write_probe";
  {
    std::ofstream f(probe);
    if (!f) throw IoError("output directory '" + dir + "' is not writable");
  }
  std::filesystem::remove(probe, ec);
  return dir;
}

inline void write_file(const std::filesystem::path& path, const std::string& content, CommandOutput& out) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open '" + path.string() + "' for writing");
  f << content;
  if (!f) throw IoError("write failed for '" + path.string() + "'");
  out.files.push_back(path.string());
}

inline void echo_params(CsvWriter& w, const RunConfig& cfg) {
  const ModelParams& p = cfg.params;
  w.comment("run", cfg.run);
  w.comment("gamma", p.gamma);
  w.comment("rabi", p.rabi);
  w.comment("omega0", p.omega0);
  w.comment("omegaL", p.omegaL);
  w.comment("nbar", p.nbar);
  w.comment("dt", p.dt);
  w.comment("fock_dim", p.fock_dim);
  w.comment("n_steps", static_cast<double>(cfg.n_steps));
  w.comment("seed", static_cast<double>(cfg.seed));
  w.comment("initial", cfg.initial);
}

inline nlohmann::json meta_json(const RunConfig& cfg) {
  nlohmann::json j;
  j["config"] = cfg;
  j["warnings"] = cfg.params.regime_warnings();
  return j;
}

inline std::vector<std::string> header(std::initializer_list<std::string> a, const std::vector<std::string>& b = {}) {
  std::vector<std::string> h(a);
  h.insert(h.end(), b.begin(), b.end());
  return h;
}

inline CommandOutput cmd_simulate(const RunConfig& cfg, const CommandOptions& opt = {}) {
  cfg.validate();
  const auto dir = prepare_output_dir(cfg.output_dir);
  const ModelParams& p = cfg.params;
  const Collider engine(p);
  EnergyLedger ledger;
  TrajectoryOptions topts;
  topts.record_stride = std::max(1L, cfg.n_steps / 1000);
  const TrajectoryRecord rec = run_trajectory(engine, cfg.initial_state(), cfg.n_steps, {&ledger}, topts);
  const EntropyReport ent = entropy_report(rec, ledger);
  const double u = p.gamma * p.omega0;
  CommandOutput out;

  std::ostringstream traj;
  {
    CsvWriter w(traj);
    echo_params(w, cfg);
    w.comment("engine_fock_dim", engine.fock_dim());
    w.comment("energy_unit", "hbar*omega0");
    std::vector<std::string> cum;
    for (int k = 0; k < LEDGER_COLUMNS; ++k) cum.push_back(std::string("cum_") + LEDGER_NAMES[k]);
    w.record(header({"t", "x", "y", "z", "p_e"}, cum));
    for (std::size_t i = 0; i < rec.t.size(); ++i) {
      const Bloch b = rec.bloch(i);
      const CplxMatrix sr = rec.rotating(i);
      std::vector<double> row{rec.t[i], b.x, b.y, b.z, sr(EXCITED, EXCITED).real()};
      const long n = std::lround(rec.t[i] / p.dt);
      for (int k = 0; k < LEDGER_COLUMNS; ++k)
        row.push_back(n > 0 ? ledger.cumulative()[static_cast<std::size_t>(n - 1)][static_cast<std::size_t>(k)] / p.omega0 : 0.0);
      w.row(row);
    }
  }
  write_file(dir / "trajectory.csv", traj.str(), out);

  std::ostringstream led;
  {
    CsvWriter w(led);
    echo_params(w, cfg);
    w.comment("energy_unit", "gamma*hbar*omega0");
    std::vector<std::string> names(LEDGER_NAMES, LEDGER_NAMES + LEDGER_COLUMNS);
    w.record(header({"t"}, names));
    const auto& rows = ledger.rows();
    for (std::size_t i = 0; i < rows.size(); i += static_cast<std::size_t>(topts.record_stride)) {
      std::vector<double> row{rows[i].t};
      for (int k = 0; k < LEDGER_COLUMNS; ++k) row.push_back(ledger_value(rows[i], k) / (p.dt * u));
      w.row(row);
    }
  }
  write_file(dir / "ledger.csv", led.str(), out);

  std::ostringstream ph;
  std::vector<double> ts, fw, fq, fs, fdrive;
  {
    CsvWriter w(ph);
    echo_params(w, cfg);
    w.comment("photon_unit", "gamma (photons per unit time / gamma)");
    w.record({"t", "n_in", "n_out", "n_stim", "n_spont", "n_otimes", "n_chi"});
    for (std::size_t i = 0; i < rec.t.size(); ++i) {
      const PhotonFlows f = photon_flows(rec.states[i], p, rec.t[i]);
      w.row({rec.t[i], f.n_in / p.gamma, f.n_out / p.gamma, f.n_stim / p.gamma, f.n_spont / p.gamma,
             f.n_otimes / p.gamma, f.n_chi / p.gamma});
      const Flows fl = flows_from_bloch(rec.states[i], rec.t[i], p);
      ts.push_back(rec.t[i] * p.gamma);
      fw.push_back(fl.bW_S / u);
      fq.push_back(fl.bQ_S / u);
      fs.push_back(fl.W_self / u);
      fdrive.push_back(fl.W / u);
    }
  }
  write_file(dir / "photons.csv", ph.str(), out);

  std::ostringstream en;
  {
    CsvWriter w(en);
    echo_params(w, cfg);
    w.comment("beta", ent.beta);
    w.record({"t", "dS_S", "Sigma", "bSigma", "Sigma_minus_bSigma"});
    for (std::size_t i = 0; i < ent.t.size(); ++i)
      w.row({ent.t[i], ent.dS_S[i], ent.Sigma[i], ent.bSigma[i], ent.Sigma_minus_bSigma[i]});
  }
  write_file(dir / "entropy.csv", en.str(), out);

  if (opt.svg) {
    LineChart c;
    c.title = "Energy flows along the trajectory";
    c.xlabel = "gamma t";
    c.ylabel = "flow / (gamma hbar omega0)";
    c.notes.push_back("rabi = " + short_number(p.rabi) + ", nbar = " + short_number(p.nbar) +
                      ", delta = " + short_number(p.detuning()));
    c.series = {{"b-work (atom)", ts, fw, "#1f77b4"},
                {"b-heat (atom)", ts, fq, "#d62728"},
                {"self-work", ts, fs, "#2ca02c"},
                {"drive work", ts, fdrive, "#9467bd", true}};
    write_file(dir / "flows.svg", render_svg(c), out);
  }

  const CplxMatrix sf = rec.rotating(rec.t.size() - 1);
  out.summary = meta_json(cfg);
  out.summary["engine_fock_dim"] = engine.fock_dim();
  out.summary["final_p_e"] = sf(EXCITED, EXCITED).real();
  const auto& last = ledger.cumulative().back();
  out.summary["cumulative_balance_residual"] = last[10] / p.omega0;
  write_file(dir / "meta.json", out.summary.dump(2) + "\n", out);
  return out;
}

inline CommandOutput cmd_steady(const RunConfig& cfg, const CommandOptions& opt = {}) {
  (void)opt;
  cfg.validate();
  const auto dir = prepare_output_dir(cfg.output_dir);
  const ModelParams& p = cfg.params;
  const Liouvillian L = build_liouvillian(p);
  const CplxMatrix s = steady_state(L);
  const Flows f = flows_from_rotating(s, p);
  const SimulatedSteady e = simulated_steady(p);
  const double u = p.gamma * p.omega0, sat = saturation(p);
  const bool resonant = p.detuning() == 0.0;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  const Bloch b = bloch_of(s);

  CommandOutput out;
  std::ostringstream os;
  {
    CsvWriter w(os);
    echo_params(w, cfg);
    w.comment("saturation", sat);
    w.comment("engine_fock_dim", e.fock_dim);
    w.comment("energy_unit", "gamma*hbar*omega0");
    w.record({"quantity", "obe", "formula", "engine"});
    auto row = [&](const std::string& name, double obe, double formula, double engine) {
      w.record({name, format_number(obe), format_number(formula), format_number(engine)});
    };
    row("x", b.x, nan, nan);
    row("y", b.y, nan, nan);
    row("z", b.z, nan, nan);
    row("bW_S", f.bW_S / u, resonant ? steady_bwork(sat, p.nbar) : nan, e.bW_S);
    row("bW_f", f.bW_f / u, nan, e.bW_f);
    row("bQ_S", f.bQ_S / u, nan, e.bQ_S);
    row("bQ_f", f.bQ_f / u, nan, e.bQ_f);
    row("W_self", f.W_self / u, resonant ? steady_selfwork(sat, p.nbar) : nan, e.W_self);
    row("W", f.W / u, nan, e.W);
    row("Q", f.Q / u, nan, e.Q);
  }
  write_file(dir / "steady.csv", os.str(), out);
  out.summary = meta_json(cfg);
  out.summary["saturation"] = sat;
  out.summary["bW_S"] = f.bW_S / u;
  out.summary["W_self"] = f.W_self / u;
  return out;
}

inline CommandOutput cmd_spectrum(const RunConfig& cfg, const CommandOptions& opt = {}) {
  cfg.validate();
  const auto dir = prepare_output_dir(cfg.output_dir);
  const ModelParams& p = cfg.params;
  const SpectrumResult r = incoherent_spectrum(p);
  const SpectralEnergetics se = spectral_energetics(r, p);
  const double integral = spectrum_integral(r);
  std::vector<SpectralLine> lines;
  try {
    lines = fit_spectral_lines(r, p);
  } catch (const ConditioningError&) {
  }

  CommandOutput out;
  std::ostringstream os;
  {
    CsvWriter w(os);
    echo_params(w, cfg);
    w.comment("elastic_weight", r.elastic_weight);
    w.comment("n_chi", r.n_chi);
    w.comment("integral", integral);
    w.comment("nbar_floor", r.nbar_floor);
    w.comment("bw_f_line", se.bw_f_line);
    w.comment("bq_f_integral", se.bq_f_integral);
    for (std::size_t i = 0; i < lines.size(); ++i) w.comment("line_" + std::to_string(i), lines[i].center);
    w.record({"omega", "sdot_chi", "bq_density"});
    for (std::size_t i = 0; i < r.omega.size(); ++i) w.row({r.omega[i], r.sdot_chi[i], se.bq_density[i]});
  }
  write_file(dir / "spectrum.csv", os.str(), out);

  if (opt.svg) {
    LineChart c;
    c.title = "Correlation spectrum";
    c.xlabel = "(omega - omegaL) / gamma";
    c.ylabel = "spectral photon flow";
    c.notes.push_back("elastic weight at omegaL = " + short_number(r.elastic_weight) + " (not drawn)");
    Series s{"incoherent part", {}, r.sdot_chi};
    for (double w : r.omega) s.x.push_back((w - p.omegaL) / p.gamma);
    c.series.push_back(std::move(s));
    write_file(dir / "spectrum.svg", render_svg(c), out);
  }

  out.summary = meta_json(cfg);
  out.summary["elastic_weight"] = r.elastic_weight;
  out.summary["n_chi"] = r.n_chi;
  out.summary["integral"] = integral;
  out.summary["max_imag"] = r.max_imag;
  nlohmann::json jl = nlohmann::json::array();
  for (const auto& l : lines) jl.push_back({{"center", l.center}, {"half_width", l.half_width}});
  out.summary["lines"] = jl;
  write_file(dir / "meta.json", out.summary.dump(2) + "\n", out);
  return out;
}

// Saturation values for the simulated overlay: fixed fractions of the range.
inline std::vector<double> overlay_points(const SweepSpec& s) {
  std::vector<double> v;
  for (double f : {0.025, 0.05, 0.1, 0.2, 0.3, 0.5, 0.75, 1.0}) v.push_back(s.from + f * (s.to - s.from));
  return v;
}

inline ModelParams sweep_point(const ModelParams& base, const std::string& axis, double v, double nbar) {
  ModelParams p = base;
  if (axis == "s") {
    p.nbar = nbar;
    p.rabi = rabi_for_saturation(v, p);
  } else if (axis == "nbar") {
    p.nbar = v;
  } else {
    p.omegaL = p.omega0 - v;
  }
  return p;
}

inline CommandOutput cmd_sweep(const RunConfig& cfg, const CommandOptions& opt = {}) {
  cfg.validate();
  const auto dir = prepare_output_dir(cfg.output_dir);
  const SweepSpec& sw = cfg.sweep;
  const double u = cfg.params.gamma * cfg.params.omega0;
  const std::vector<double> families = sw.axis == "s" ? std::vector<double>{0.0, 0.5, 2.0}
                                                      : std::vector<double>{cfg.params.nbar};
  std::vector<double> axis(static_cast<std::size_t>(sw.points));
  for (int i = 0; i < sw.points; ++i) axis[static_cast<std::size_t>(i)] = sw.from + (sw.to - sw.from) * i / (sw.points - 1);

  std::vector<std::vector<double>> selfwork(families.size()), bwork(families.size());
  for (std::size_t f = 0; f < families.size(); ++f)
    for (double v : axis) {
      const ModelParams p = sweep_point(cfg.params, sw.axis, v, families[f]);
      if (sw.axis == "s" && p.detuning() == 0.0) {
        selfwork[f].push_back(steady_selfwork(v, families[f]));
        bwork[f].push_back(steady_bwork(v, families[f]));
      } else {
        const Flows fl = steady_flows(p);
        selfwork[f].push_back(fl.W_self / u);
        bwork[f].push_back(fl.bW_S / u);
      }
    }

  struct Job {
    std::size_t family;
    double v;
  };
  std::vector<Job> jobs;
  for (std::size_t f = 0; f < families.size(); ++f)
    for (double v : overlay_points(sw)) jobs.push_back({f, v});
  const auto sims = parallel_map(
      jobs, [&](const Job& j) { return simulated_steady(sweep_point(cfg.params, sw.axis, j.v, families[j.family])); },
      opt.threads);

  auto label = [&](std::size_t f) { return "nbar=" + short_number(families[f]); };
  CommandOutput out;
  std::ostringstream os;
  {
    CsvWriter w(os);
    echo_params(w, cfg);
    w.comment("axis", sw.axis);
    w.comment("energy_unit", "gamma*hbar*omega0");
    std::vector<std::string> h{sw.axis};
    for (std::size_t f = 0; f < families.size(); ++f) h.push_back("W_self_" + label(f));
    for (std::size_t f = 0; f < families.size(); ++f) h.push_back("bW_S_" + label(f));
    w.record(h);
    for (std::size_t i = 0; i < axis.size(); ++i) {
      std::vector<double> row{axis[i]};
      for (const auto& c : selfwork) row.push_back(c[i]);
      for (const auto& c : bwork) row.push_back(c[i]);
      w.row(row);
    }
  }
  write_file(dir / "sweep.csv", os.str(), out);

  std::ostringstream ps;
  {
    CsvWriter w(ps);
    echo_params(w, cfg);
    w.comment("axis", sw.axis);
    w.comment("window", "mean over the last 5/gamma of a 20/gamma run");
    w.record({sw.axis, "nbar", "fock_dim", "W_self", "bW_S", "bQ_S", "bW_f", "bQ_f"});
    for (std::size_t k = 0; k < jobs.size(); ++k) {
      const auto& s = sims[k];
      w.row({jobs[k].v, families[jobs[k].family], static_cast<double>(s.fock_dim), s.W_self, s.bW_S, s.bQ_S, s.bW_f,
             s.bQ_f});
    }
  }
  write_file(dir / "sweep_points.csv", ps.str(), out);

  if (opt.svg) {
    static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c"};
    LineChart c;
    c.title = "Steady-state self-work flow";
    c.xlabel = sw.axis == "s" ? "saturation s" : (sw.axis == "nbar" ? "nbar" : "detuning / gamma");
    c.ylabel = "W_self / (gamma hbar omega0)";
    c.notes.push_back("lines: closed form, dots: collision engine");
    for (std::size_t f = 0; f < families.size(); ++f) {
      c.series.push_back({label(f), axis, selfwork[f], colors[f % 3]});
      Series pts{label(f) + " engine", {}, {}, colors[f % 3], false, true};
      for (std::size_t k = 0; k < jobs.size(); ++k)
        if (jobs[k].family == f) {
          pts.x.push_back(jobs[k].v);
          pts.y.push_back(sims[k].W_self);
        }
      c.series.push_back(std::move(pts));
    }
    write_file(dir / "sweep.svg", render_svg(c), out);
  }

  out.summary = meta_json(cfg);
  double worst = 0.0;
  for (std::size_t k = 0; k < jobs.size(); ++k) {
    const ModelParams p = sweep_point(cfg.params, sw.axis, jobs[k].v, families[jobs[k].family]);
    const double ref = sw.axis == "s" && p.detuning() == 0.0 ? steady_selfwork(jobs[k].v, p.nbar)
                                                             : steady_flows(p).W_self / u;
    if (ref != 0.0) worst = std::max(worst, std::abs(sims[k].W_self / ref - 1.0));
  }
  out.summary["overlay_max_relative_deviation"] = worst;
  write_file(dir / "meta.json", out.summary.dump(2) + "\n", out);
  return out;
}

inline CommandOutput cmd_verify(const RunConfig& cfg, const CommandOptions& opt = {}, VerifyHooks hooks = {}) {
  (void)opt;
  cfg.validate();
  const auto dir = prepare_output_dir(cfg.output_dir);
  const VerifyReport rep = run_verification(cfg, std::move(hooks));
  CommandOutput out;
  out.summary = report_json(rep);
  out.passed = rep.passed();
  write_file(dir / "report.json", out.summary.dump(2) + "\n", out);
  return out;
}

inline CommandOutput run_command(const RunConfig& cfg, const CommandOptions& opt = {}) {
  if (cfg.run == "simulate") return cmd_simulate(cfg, opt);
  if (cfg.run == "steady") return cmd_steady(cfg, opt);
  if (cfg.run == "spectrum") return cmd_spectrum(cfg, opt);
  if (cfg.run == "sweep") return cmd_sweep(cfg, opt);
  return cmd_verify(cfg, opt);
}

}  // namespace acm

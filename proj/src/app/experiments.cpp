#include "app/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "core/dynamics.hpp"
#include "core/hardware.hpp"
#include "core/model.hpp"
#include "core/multistage.hpp"
#include "core/opensys.hpp"
#include "core/parallel.hpp"
#include "core/topology.hpp"

namespace oampump::app {

namespace {

[[noreturn]] void config_error(const std::string& what) { throw Error(ErrorCode::Config, what); }

struct PointResult {
  json results = json::object();
  std::vector<Table> tables;
};

using Runner = std::function<PointResult(const Params&, std::uint64_t seed)>;

// ---------------------------------------------------------------------------
// Shared keys

KeySpec num(std::string name, json fallback, std::optional<double> min = std::nullopt,
            std::optional<double> max = std::nullopt) {
  return {std::move(name), KeyType::Number, std::move(fallback), {}, min, max};
}

KeySpec integer(std::string name, json fallback, std::optional<double> min = std::nullopt,
                std::optional<double> max = std::nullopt) {
  return {std::move(name), KeyType::Integer, std::move(fallback), {}, min, max};
}

KeySpec choice(std::string name, std::string fallback, std::vector<std::string> choices) {
  return {std::move(name), KeyType::String, std::move(fallback), std::move(choices)};
}

void add_model_keys(Schema& s) {
  s.push_back(num("J0", 5.0, 1e-9));
  s.push_back(num("J1", 1.0, 1e-9));
  s.push_back(num("period", 21.0, 1e-6));
  s.push_back(choice("orientation", "clockwise", {"clockwise", "counterclockwise"}));
}

void add_loop_keys(Schema& s) {
  s.push_back(choice("loop", "rectangle", {"rectangle", "circle"}));
  s.push_back(num("center_beta0", kPi / 2));
  s.push_back(num("center_beta1", kPi / 2));
  s.push_back(num("radius", 1.0, 0.0));
}

RiceMeleParams model(const Params& p) { return {p.number("J0"), p.number("J1")}; }

Orientation orientation(const Params& p) {
  return p.string("orientation") == "clockwise" ? Orientation::Clockwise : Orientation::Counterclockwise;
}

PumpSchedule loop(const Params& p, double cycles = 1.0) {
  const RiceMeleParams m = model(p);
  if (p.string("loop") == "circle")
    return circular_pump_loop({p.number("center_beta0"), p.number("center_beta1")}, p.number("radius"),
                              p.number("period"), orientation(p), cycles);
  return default_pump_loop(m, p.number("period"), orientation(p), cycles);
}

Band band(const Params& p) { return p.string("band") == "lower" ? Band::Lower : Band::Upper; }

int even_l0(const Params& p) {
  const int l0 = p.int32("l0");
  if (l0 % 2 != 0) config_error("'l0' must be even (first site of a unit cell)");
  return l0;
}

/// Lattice around l0 wide enough for `cells` cells of motion either way.
LatticeConfig pump_lattice(const Params& p, int l0, double cycles) {
  int n = p.int32("sites");
  if (n == 0) n = std::max(42, 2 * (2 * static_cast<int>(std::ceil(cycles)) + 16));
  if (n < 16 || n % 2 != 0) config_error("'sites' must be an even number >= 16 (or 0 for automatic)");
  return LatticeConfig::centered(l0, n);
}

std::vector<double> merge_times(std::vector<double> a, const std::vector<double>& b) {
  a.insert(a.end(), b.begin(), b.end());
  std::sort(a.begin(), a.end());
  a.erase(std::unique(a.begin(), a.end(), [](double x, double y) { return y - x < 1e-9; }), a.end());
  return a;
}

std::vector<int> half_cycle_list(double cycles) {
  std::vector<int> m;
  for (int i = 1; i <= static_cast<int>(std::floor(2.0 * cycles + 1e-9)); ++i) m.push_back(i);
  return m;
}

std::vector<double> half_cycle_times(double t0, double period, const std::vector<int>& ms) {
  std::vector<double> t{t0};
  for (int m : ms) t.push_back(t0 + 0.5 * m * period);
  return t;
}

Table distribution_table(const std::string& name, const Trajectory& tr) {
  Table t;
  t.name = name;
  t.columns.push_back("t");
  for (int i = 0; i < tr.lattice.site_count(); ++i) t.columns.push_back("P_" + std::to_string(tr.lattice.oam(i)));
  t.columns.push_back("mean_l");
  for (std::size_t s = 0; s < tr.size(); ++s) {
    std::vector<double> row{tr.times[s]};
    for (int i = 0; i < tr.lattice.site_count(); ++i) row.push_back(tr.probabilities[s][i]);
    row.push_back(tr.mean_l[s]);
    t.rows.push_back(std::move(row));
  }
  return t;
}

// ---------------------------------------------------------------------------
// bands

Schema bands_schema() {
  Schema s;
  add_model_keys(s);
  add_loop_keys(s);
  s.push_back(integer("n_k", 64, 4, 4096));
  s.push_back(integer("n_t", 64, 4, 4096));
  return s;
}

PointResult run_bands(const Params& p, std::uint64_t) {
  const RiceMeleParams m = model(p);
  const BandGrid g = band_energies(loop(p), m, p.int32("n_k"), p.int32("n_t"));
  PointResult r;
  Table t{"bands", {"t", "k", "E_lower", "E_upper"}, {}};
  for (int j = 0; j < g.n_t; ++j)
    for (int i = 0; i < g.n_k; ++i) t.rows.push_back({g.t[j], g.k[i], g.lower(i, j), g.upper(i, j)});
  r.tables.push_back(std::move(t));
  r.results["min_gap"] = g.min_gap;
  r.results["grid_min_gap"] = g.grid_min_gap;
  r.results["start_lower_width"] = g.lower.col(0).maxCoeff() - g.lower.col(0).minCoeff();
  r.results["start_upper_width"] = g.upper.col(0).maxCoeff() - g.upper.col(0).minCoeff();
  return r;
}

// ---------------------------------------------------------------------------
// chern

Schema chern_schema() {
  Schema s;
  add_model_keys(s);
  add_loop_keys(s);
  s.push_back(integer("n_k", 64, 4, 4096));
  s.push_back(integer("n_t", 64, 4, 4096));
  return s;
}

PointResult run_chern(const Params& p, std::uint64_t) {
  const RiceMeleParams m = model(p);
  const PumpSchedule sch = loop(p);
  const int nk = p.int32("n_k"), nt = p.int32("n_t");
  const CurvatureGrid lo = berry_curvature(sch, m, Band::Lower, nk, nt);
  const CurvatureGrid up = berry_curvature(sch, m, Band::Upper, nk, nt);
  PointResult r;
  r.results["lower"] = std::lround(lo.total() / kTwoPi);
  r.results["upper"] = std::lround(up.total() / kTwoPi);
  r.results["winding_lower"] = winding_number(sch, m, Band::Lower, nk, nt);
  r.results["winding_upper"] = winding_number(sch, m, Band::Upper, nk, nt);
  r.results["min_gap"] = loop_min_gap(sch, m);
  Table t{"curvature", {"t", "k", "flux_lower", "flux_upper"}, {}};
  for (int j = 0; j < nt; ++j)
    for (int i = 0; i < nk; ++i)
      t.rows.push_back({sch.period() * j / nt, kTwoPi * i / nk, lo.flux(i, j), up.flux(i, j)});
  r.tables.push_back(std::move(t));
  return r;
}

// ---------------------------------------------------------------------------
// pump

Schema pump_schema() {
  Schema s;
  add_model_keys(s);
  s.push_back(num("cycles", 2.0, 0.0, 1000.0));
  s.push_back(integer("l0", 0, -1000000, 1000000));
  s.push_back(choice("band", "lower", {"lower", "upper"}));
  s.push_back(integer("sites", 0, 0, 100000));
  s.push_back(num("dt", 0.25, 1e-4));
  return s;
}

PointResult run_pump(const Params& p, std::uint64_t) {
  const RiceMeleParams m = model(p);
  const double T = p.number("period"), cycles = p.number("cycles");
  const int l0 = even_l0(p);
  const Band b = band(p);
  PumpProblem pr;
  pr.params = m;
  pr.schedule = default_pump_loop(m, T, orientation(p), cycles);
  const LatticeConfig lat = pump_lattice(p, l0, cycles);
  const LatticeState psi0 = wannier_state(lat, m, {0.0, 0.0}, b, l0 / 2);
  const std::vector<int> ms = half_cycle_list(cycles);
  const auto times = merge_times(uniform_times(0.0, cycles * T, p.number("dt")), half_cycle_times(0.0, T, ms));
  const Trajectory tr = evolve(psi0, pr, times);
  int dir = orientation(p) == Orientation::Clockwise ? 1 : -1;
  if (b == Band::Upper) dir = -dir;
  const int start = b == Band::Lower ? l0 : l0 + 1;

  PointResult r;
  r.tables.push_back(distribution_table("pump", tr));
  json hc = json::array();
  for (const PumpResult& q : pump_report(tr, start, T, ms, dir))
    hc.push_back({{"half_cycles", q.half_cycles}, {"time", q.time}, {"target_l", q.target_l},
                  {"displacement", q.displacement}, {"purity", q.purity}});
  r.results["half_cycles"] = hc;
  r.results["initial_mean"] = tr.mean_l.front();
  r.results["final_mean"] = tr.mean_l.back();
  r.results["displacement"] = tr.mean_l.back() - tr.mean_l.front();
  r.results["max_edge_population"] = tr.max_edge_population;
  r.results["step"] = tr.step;
  return r;
}

// ---------------------------------------------------------------------------
// purity

Schema purity_schema() {
  Schema s;
  s.push_back({"ratios", KeyType::NumberList, json::array({2.0, 5.0, 10.0}), {}, 1e-9});
  s.push_back({"half_cycles", KeyType::IntegerList, json::array({1, 2, 3, 4}), {}, 1, 1000});
  s.push_back(num("J1", 1.0, 1e-9));
  s.push_back(num("period", 21.0, 1e-6));
  return s;
}

PointResult run_purity(const Params& p, std::uint64_t) {
  const std::vector<double> ratios = p.numbers("ratios");
  std::vector<int> ms;
  for (long long m : p.integers("half_cycles")) ms.push_back(static_cast<int>(m));
  std::sort(ms.begin(), ms.end());
  ms.erase(std::unique(ms.begin(), ms.end()), ms.end());
  const double T = p.number("period"), j1 = p.number("J1");
  const double cycles = 0.5 * ms.back();
  std::vector<std::vector<PumpResult>> res(ratios.size());
  parallel_for(ratios.size(), [&](std::size_t i) {
    const RiceMeleParams m{ratios[i] * j1, j1};
    PumpProblem pr;
    pr.params = m;
    pr.schedule = default_pump_loop(m, T, Orientation::Clockwise, cycles);
    const LatticeConfig lat = LatticeConfig::centered(0, std::max(42, 2 * (ms.back() + 16)));
    const Trajectory tr = evolve(wannier_state(lat, m, {0, 0}, Band::Lower, 0), pr, half_cycle_times(0.0, T, ms));
    res[i] = pump_report(tr, 0, T, ms, 1);
  });
  PointResult r;
  Table t{"purity", {"ratio", "half_cycles", "purity", "displacement"}, {}};
  json rows = json::array();
  bool increasing = true;
  for (std::size_t i = 0; i < ratios.size(); ++i)
    for (std::size_t k = 0; k < ms.size(); ++k) {
      const PumpResult& q = res[i][k];
      t.rows.push_back({ratios[i], static_cast<double>(ms[k]), q.purity, q.displacement});
      rows.push_back({{"ratio", ratios[i]}, {"half_cycles", ms[k]}, {"purity", q.purity}, {"displacement", q.displacement}});
      if (i > 0 && ratios[i] > ratios[i - 1] && !(q.purity > res[i - 1][k].purity)) increasing = false;
    }
  r.tables.push_back(std::move(t));
  r.results["points"] = rows;
  r.results["purity_increases_with_ratio"] = increasing;
  return r;
}

// ---------------------------------------------------------------------------
// disorder

Schema disorder_schema() {
  Schema s;
  add_model_keys(s);
  s.push_back(choice("kind", "phase", {"phase", "onsite"}));
  s.push_back(num("sigma", 0.1, 0.0));
  s.push_back({"per_site", KeyType::Bool, true});
  s.push_back(integer("trials", 100, 1, 100000));
  s.push_back(num("cycles", 1.0, 0.5, 1000.0));
  s.push_back(integer("sites", 64, 16, 100000));
  return s;
}

PointResult run_disorder(const Params& p, std::uint64_t seed) {
  const RiceMeleParams m = model(p);
  const double T = p.number("period"), cycles = p.number("cycles");
  DisorderSpec spec;
  spec.kind = p.string("kind") == "phase" ? DisorderKind::Phase : DisorderKind::Onsite;
  (spec.kind == DisorderKind::Phase ? spec.sigma_phase : spec.sigma_detune) = p.number("sigma");
  spec.per_site = p.flag("per_site");
  spec.seed = seed;
  spec.trials = p.int32("trials");
  spec.validate();
  const int n = p.int32("sites");
  if (n % 2 != 0) config_error("'sites' must be even");
  const LatticeConfig lat = LatticeConfig::centered(0, n);
  const std::vector<int> ms = half_cycle_list(cycles);
  const int dir = orientation(p) == Orientation::Clockwise ? 1 : -1;

  struct TrialResult {
    DisorderDraw draw;
    std::vector<PumpResult> report;
  };
  std::vector<TrialResult> trials(spec.trials);
  parallel_for(trials.size(), [&](std::size_t i) {
    PumpProblem pr;
    pr.params = m;
    pr.schedule = default_pump_loop(m, T, orientation(p), cycles);
    trials[i].draw = sample_disorder(spec, static_cast<int>(i), lat);
    pr.phase_offset = trials[i].draw.phase_offset;
    pr.onsite_shift = trials[i].draw.onsite_shift;
    // start in the lower band of the shifted loop rather than quenching into it
    const LatticeState psi0 = wannier_state(lat, m, pr.phase_offset, Band::Lower, 0);
    const Trajectory tr = evolve(psi0, pr, half_cycle_times(0.0, T, ms));
    trials[i].report = pump_report(tr, 0, T, ms, dir);
  });

  PointResult r;
  Table per_half{"disorder", {"half_cycles", "t", "mean_displacement", "std_displacement", "mean_purity"}, {}};
  json hc = json::array();
  for (std::size_t k = 0; k < ms.size(); ++k) {
    double s = 0.0, s2 = 0.0, pur = 0.0;
    for (const auto& t : trials) {
      s += t.report[k].displacement;
      pur += t.report[k].purity;
    }
    const double mean = s / trials.size();
    for (const auto& t : trials) s2 += std::pow(t.report[k].displacement - mean, 2);
    const double sd = trials.size() > 1 ? std::sqrt(s2 / (trials.size() - 1)) : 0.0;
    per_half.rows.push_back({static_cast<double>(ms[k]), 0.5 * ms[k] * T, mean, sd, pur / trials.size()});
    hc.push_back({{"half_cycles", ms[k]}, {"mean_displacement", mean}, {"std_displacement", sd},
                  {"mean_purity", pur / trials.size()}});
  }
  Table per_trial{"trials", {"trial", "beta0_offset", "beta1_offset", "max_shift", "displacement", "purity"}, {}};
  for (std::size_t i = 0; i < trials.size(); ++i) {
    double max_shift = 0.0;
    for (double v : trials[i].draw.onsite_shift) max_shift = std::max(max_shift, std::abs(v));
    per_trial.rows.push_back({static_cast<double>(i), trials[i].draw.phase_offset.beta0,
                              trials[i].draw.phase_offset.beta1, max_shift,
                              trials[i].report.back().displacement, trials[i].report.back().purity});
  }
  const double full = per_half.rows.back()[2];
  r.results["half_cycles"] = hc;
  r.results["mean_displacement_per_cycle"] = full / (0.5 * ms.back());
  r.results["trials"] = spec.trials;
  r.tables.push_back(std::move(per_half));
  r.tables.push_back(std::move(per_trial));
  return r;
}

// ---------------------------------------------------------------------------
// iosim

Schema iosim_schema() {
  Schema s;
  add_model_keys(s);
  s.push_back(num("cycles", 1.0, 0.5, 100.0));
  s.push_back(num("rate", 0.2, 1e-6));
  s.push_back(num("center", 5.0));
  s.push_back(integer("l0", 0, -1000000, 1000000));
  s.push_back(num("kappa0", 0.0, 0.0));
  s.push_back(choice("ramp", "optimize", {"optimize", "matched", "manual"}));
  s.push_back(num("kappa_peak", 1.434, 0.0));
  s.push_back(num("fall_begin", 2.316));
  s.push_back(num("fall_end", 7.868));
  s.push_back(num("release", 30.0, 0.0));
  s.push_back(num("release_rise", 2.0, 1e-6));
  s.push_back(integer("sites", 0, 0, 100000));
  s.push_back(num("dt", 0.1, 1e-4));
  return s;
}

PointResult run_iosim(const Params& p, std::uint64_t) {
  const RiceMeleParams m = model(p);
  const double T = p.number("period"), cycles = p.number("cycles");
  const int l0 = even_l0(p);
  GaussianPulse pulse;
  pulse.center = p.number("center");
  pulse.rate = p.number("rate");
  pulse.carrier = flat_band_carrier(m);
  const DriveSpec drive = gaussian_drive(pulse, l0);
  PumpProblem probe;
  probe.params = m;
  probe.schedule = default_pump_loop(m, T, orientation(p));

  CaptureOptimum ramp;
  const std::string mode = p.string("ramp");
  if (mode == "optimize") {
    ramp = optimize_capture(drive, LatticeConfig::centered(l0, 16), probe, p.number("kappa0"));
  } else if (mode == "matched") {
    ramp = bandwidth_matched_ramp(pulse, m);
  } else {
    ramp.kappa_peak = p.number("kappa_peak");
    ramp.fall_begin = p.number("fall_begin");
    ramp.fall_end = p.number("fall_end");
    if (!(ramp.fall_end > ramp.fall_begin && ramp.fall_begin >= drive.t_begin))
      config_error("manual ramp needs t_begin <= fall_begin < fall_end");
  }

  ProtocolSpec s;
  s.capture = {drive.t_begin, ramp.fall_end};
  s.capture_fall = ramp.fall_end - std::max(ramp.fall_begin, drive.t_begin);
  s.pump_begin = ramp.fall_end;
  s.pump_cycles = cycles;
  s.period = T;
  s.release = {s.pump_end(), s.pump_end() + p.number("release")};
  s.release_rise = std::min(p.number("release_rise"), p.number("release"));
  s.kappa_peak = ramp.kappa_peak;
  s.kappa0 = p.number("kappa0");
  const CouplingSchedule coupling = protocol_schedule(s);

  PumpProblem pr = probe;
  pr.schedule = default_pump_loop(m, T, orientation(p), cycles).delayed(s.pump_begin);
  const LatticeConfig lat = pump_lattice(p, l0, cycles);
  const LatticeState vac{lat, Eigen::VectorXcd::Zero(lat.site_count()), drive.t_begin};
  const double t_end = std::max(s.release.end, drive.t_end);
  const auto times = merge_times(uniform_times(drive.t_begin, t_end, p.number("dt")),
                                 {s.pump_begin, s.pump_end(), s.release.begin, t_end});
  const LangevinResult res = langevin_evolve(vac, pr, drive, coupling, times);

  const int dir = orientation(p) == Orientation::Clockwise ? 1 : -1;
  const int target = l0 + dir * static_cast<int>(std::lround(2.0 * cycles));
  const Trajectory& tr = res.trajectory;
  const std::size_t ib = tr.index_at(s.pump_begin), ie = tr.index_at(s.pump_end());
  const double input = res.budget.input;
  const double lower = band_population(tr.states[ib], pr, s.pump_begin, Band::Lower);
  const Eigen::VectorXd released = res.emitted_between(s.pump_end(), t_end);
  const auto ti = lat.index_of(target);

  PointResult r;
  Table t{"iosim", {"t", "kappa_e", "in_re", "in_im", "in_power", "out_power", "photons", "mean_l"}, {}};
  for (int i = 0; i < lat.site_count(); ++i) t.columns.push_back("out_" + std::to_string(lat.oam(i)));
  for (std::size_t k = 0; k < tr.size(); ++k) {
    std::vector<double> row{tr.times[k], res.kappa_e[k], res.input[k].real(), res.input[k].imag(),
                            std::norm(res.input[k]), res.output[k].squaredNorm(), tr.norm[k], tr.mean_l[k]};
    for (int i = 0; i < lat.site_count(); ++i) row.push_back(std::norm(res.output[k][i]));
    t.rows.push_back(std::move(row));
  }
  r.tables.push_back(std::move(t));
  r.results["ramp"] = {{"kappa_peak", ramp.kappa_peak}, {"fall_begin", ramp.fall_begin}, {"fall_end", ramp.fall_end}};
  r.results["capture_efficiency"] = lower / input;
  r.results["captured_fraction"] = tr.norm[ib] / input;
  r.results["pump_displacement"] = tr.mean_l[ie] - tr.mean_l[ib];
  r.results["target_l"] = target;
  r.results["release_emitted"] = released.sum();
  r.results["release_purity"] = ti && released.sum() > 0.0 ? released[*ti] / released.sum() : 0.0;
  r.results["budget"] = {{"initial", res.budget.initial},   {"input", res.budget.input},
                         {"captured", res.budget.captured}, {"emitted", res.budget.emitted},
                         {"lost", res.budget.lost},         {"relative_residual", res.budget.relative_residual()}};
  r.results["windows"] = {{"capture", {s.capture.begin, s.capture.end}},
                          {"pump", {s.pump_begin, s.pump_end()}},
                          {"release", {s.release.begin, s.release.end}}};
  return r;
}

// ---------------------------------------------------------------------------
// geometry

Schema geometry_schema() {
  Schema s;
  s.push_back(num("F", 0.1, 1e-9));
  s.push_back(num("wavelength", 1e-6, 1e-12));
  s.push_back(num("fsr_hz", 1e9, 1.0));
  s.push_back(num("j1_hz", 4e6, 1e-9));
  s.push_back(num("dx_min", -40e-6));
  s.push_back(num("dx_max", 40e-6));
  s.push_back(num("dy_min", -40e-6));
  s.push_back(num("dy_max", 40e-6));
  s.push_back(integer("nx", 81, 1, 10000));
  s.push_back(integer("ny", 81, 1, 10000));
  return s;
}

PointResult run_geometry(const Params& p, std::uint64_t) {
  CavityGeometry g;
  g.f = p.number("F");
  g.wavelength = p.number("wavelength");
  g.omega_f = kTwoPi * p.number("fsr_hz");
  const double j1 = kTwoPi * p.number("j1_hz");
  const int nx = p.int32("nx"), ny = p.int32("ny");
  const double x0 = p.number("dx_min"), x1 = p.number("dx_max");
  const double y0 = p.number("dy_min"), y1 = p.number("dy_max");
  if (x1 < x0 || y1 < y0) config_error("scan ranges must satisfy min <= max");
  auto at = [&](double dx, double dy) {
    CavityGeometry c = g;
    c.x = g.f + dx;
    c.y = g.f + dy;
    c.validate();
    return c;
  };
  PointResult r;
  Table t{"geometry", {"x", "y", "dx", "dy", "half_trace", "stable", "delta_omega_over_4J1"}, {}};
  int stable = 0;
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) {
      const double dx = nx > 1 ? x0 + (x1 - x0) * i / (nx - 1) : x0;
      const double dy = ny > 1 ? y0 + (y1 - y0) * j / (ny - 1) : y0;
      const CavityGeometry c = at(dx, dy);
      const bool ok = is_stable(c);
      stable += ok;
      const double d = ok ? degeneracy_detuning(c) / (4.0 * j1) : std::nan("");
      t.rows.push_back({c.x, c.y, dx, dy, half_trace(c), ok ? 1.0 : 0.0, d});
    }
  r.tables.push_back(std::move(t));
  // delta omega = 0.05 J1 along the diagonal X - F = Y - F
  double lo = 0.0, hi = 1e-6;
  while (degeneracy_detuning(at(hi, hi)) < 0.05 * j1 && hi < 0.5 * g.f) hi *= 2.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    (degeneracy_detuning(at(mid, mid)) < 0.05 * j1 ? lo : hi) = mid;
  }
  r.results["half_trace_at_F"] = half_trace(at(0.0, 0.0));
  r.results["degenerate_at_F"] = std::abs(half_trace(at(0.0, 0.0)) - 1.0) < 1e-12;
  r.results["contour_0p05_J1_um"] = 0.5 * (lo + hi) * 1e6;
  r.results["stable_fraction"] = static_cast<double>(stable) / (nx * ny);
  return r;
}

// ---------------------------------------------------------------------------
// plan

Schema plan_schema() {
  Schema s;
  s.push_back(integer("delta_l", nullptr, -1e15, 1e15));
  s.push_back(integer("base", 10, 2, 1000));
  s.push_back(integer("stages", 0, 0, 60));
  s.push_back(choice("mode", "unsigned", {"unsigned", "balanced"}));
  s.push_back(integer("l_max", 0, 0, 1e15));
  s.push_back({"simulate", KeyType::Bool, false});
  s.push_back(num("J0", 5.0, 1e-9));
  s.push_back(num("J1", 1.0, 1e-9));
  s.push_back(num("period", 21.0, 1e-6));
  return s;
}

PointResult run_plan(const Params& p, std::uint64_t) {
  const long long dl = p.integer("delta_l");
  const int base = p.int32("base");
  const DigitMode mode = p.string("mode") == "unsigned" ? DigitMode::Unsigned : DigitMode::Balanced;
  int stages = p.int32("stages");
  StagePlan plan;
  if (stages > 0) {
    plan = plan_switch(dl, base, stages, mode);
  } else {
    for (stages = 1;; ++stages) {
      try {
        plan = plan_switch(dl, base, stages, mode);
        break;
      } catch (const Error& e) {
        if (e.code() != ErrorCode::Unrepresentable || stages >= 60) throw;
      }
    }
  }
  const long long l_max = p.integer("l_max") > 0 ? p.integer("l_max") : std::max(1LL, std::llabs(dl));
  const PlanBounds bounds = plan_bounds(l_max, base);
  const double T = p.number("period");

  PointResult r;
  r.results["digits"] = plan.digits;
  json steps = json::array(), cyc = json::array();
  Table t{"plan", {"stage", "step", "digit", "cycles"}, {}};
  for (int n = 0; n < static_cast<int>(plan.digits.size()); ++n) {
    steps.push_back(plan.step(n));
    cyc.push_back(plan.cycles(n));
    t.rows.push_back({static_cast<double>(n), static_cast<double>(plan.step(n)),
                      static_cast<double>(plan.digits[n]), plan.cycles(n)});
  }
  r.tables.push_back(std::move(t));
  r.results["steps"] = steps;
  r.results["cycles"] = cyc;
  r.results["stages"] = static_cast<int>(plan.digits.size());
  r.results["total_periods"] = plan.total_periods();
  r.results["total_time"] = plan.total_periods() * T;
  r.results["bounds"] = {{"l_max", l_max}, {"max_stages", bounds.max_stages}, {"max_periods", bounds.max_periods}};
  r.results["within_bounds"] = static_cast<int>(plan.digits.size()) <= std::max(bounds.max_stages, 1) &&
                               plan.total_periods() <= bounds.max_periods + 1e-9;
  if (p.flag("simulate")) {
    const MultistageRun run = execute_plan(plan, {p.number("J0"), p.number("J1")}, T);
    Table st{"stages", {"stage", "step", "cycles", "mean_before", "mean_after"}, {}};
    for (const StageRun& s : run.stages)
      st.rows.push_back({static_cast<double>(s.stage), static_cast<double>(s.step), s.cycles, s.mean_before, s.mean_after});
    r.tables.push_back(std::move(st));
    r.results["simulated"] = {{"initial_mean", run.initial_mean},
                              {"final_mean", run.final_mean},
                              {"displacement", run.displacement}};
  }
  return r;
}

// ---------------------------------------------------------------------------

struct Experiment {
  Schema schema;
  Runner run;
  bool stochastic = false;
};

const std::map<std::string, Experiment>& registry() {
  static const std::map<std::string, Experiment> r = {
      {"bands", {bands_schema(), run_bands}},
      {"chern", {chern_schema(), run_chern}},
      {"pump", {pump_schema(), run_pump}},
      {"purity", {purity_schema(), run_purity}},
      {"disorder", {disorder_schema(), run_disorder, true}},
      {"iosim", {iosim_schema(), run_iosim}},
      {"geometry", {geometry_schema(), run_geometry}},
      {"plan", {plan_schema(), run_plan}},
  };
  return r;
}

const Experiment& lookup(const std::string& name) {
  const auto& r = registry();
  const auto it = r.find(name);
  if (it == r.end()) config_error("unknown experiment '" + name + "'");
  return it->second;
}

json rounded(const json& j) {
  if (j.is_number_float()) return round12(j.get<double>());
  if (j.is_array() || j.is_object()) {
    json out = j;
    for (auto it = out.begin(); it != out.end(); ++it) *it = rounded(*it);
    return out;
  }
  return j;
}

}  // namespace

std::string Table::to_csv() const {
  std::ostringstream os;
  for (std::size_t i = 0; i < columns.size(); ++i) os << (i ? "," : "") << columns[i];
  os << '\n';
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << format12(row[i]);
    os << '\n';
  }
  return os.str();
}

const std::vector<std::string>& experiment_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> v;
    for (const auto& [k, e] : registry()) {
      (void)e;
      v.push_back(k);
    }
    return v;
  }();
  return names;
}

bool is_stochastic(const std::string& experiment) { return lookup(experiment).stochastic; }

const Schema& experiment_schema(const std::string& experiment) { return lookup(experiment).schema; }

ExperimentOutput run_experiment(const std::string& experiment, const json& config,
                                std::optional<std::uint64_t> seed) {
  const Experiment& e = lookup(experiment);
  if (!config.is_object()) config_error("config must be a JSON object");
  json cfg = config;
  if (cfg.contains("experiment")) {
    if (!cfg["experiment"].is_string() || cfg["experiment"].get<std::string>() != experiment)
      config_error("config is for experiment '" + cfg["experiment"].dump() + "', not '" + experiment + "'");
    cfg.erase("experiment");
  }
  std::uint64_t used_seed = 0;
  if (e.stochastic) {
    if (seed) {
      used_seed = *seed;
    } else if (!cfg.contains("seed")) {
      config_error("experiment '" + experiment + "' needs a seed (config key or --seed)");
    } else if (cfg["seed"].is_number_unsigned()) {
      used_seed = cfg["seed"].get<std::uint64_t>();
    } else {
      config_error("'seed' must be a non-negative integer");
    }
    cfg.erase("seed");
  } else if (seed) {
    config_error("experiment '" + experiment + "' is deterministic and takes no seed");
  }
  const std::vector<Params> points = expand_config(cfg, e.schema);

  std::vector<PointResult> results(points.size());
  parallel_for(points.size(), [&](std::size_t i) { results[i] = e.run(points[i], used_seed); });

  ExperimentOutput out;
  json summary;
  summary["experiment"] = experiment;
  if (e.stochastic) summary["seed"] = used_seed;
  const bool sweep = points.size() > 1;
  auto file_name = [&](const std::string& table, std::size_t i) {
    if (!sweep) return table + ".csv";
    char idx[16];
    std::snprintf(idx, sizeof idx, "_%03zu", i);
    return table + idx + ".csv";
  };
  json entries = json::array();
  for (std::size_t i = 0; i < points.size(); ++i) {
    const json& params = points[i].values();
    json files = json::array();
    for (const Table& t : results[i].tables) {
      out.files.emplace_back(file_name(t.name, i), t.to_csv());
      files.push_back(file_name(t.name, i));
    }
    if (sweep) {
      entries.push_back({{"index", i}, {"params", params}, {"results", results[i].results}, {"files", files}});
    } else {
      summary["params"] = params;
      summary["results"] = results[i].results;
      summary["files"] = files;
    }
  }
  if (sweep) summary["points"] = entries;
  out.summary = rounded(summary);
  return out;
}

void write_output(const ExperimentOutput& out, const std::string& dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::Config, "cannot create output directory '" + dir + "': " + ec.message());
  auto put = [&](const std::string& name, const std::string& text) {
    const fs::path path = fs::path(dir) / name;
    std::ofstream f(path, std::ios::binary);
    f << text;
    if (!f) throw Error(ErrorCode::Config, "cannot write '" + path.string() + "'");
  };
  for (const auto& [name, text] : out.files) put(name, text);
  put("summary.json", out.summary.dump(2) + "\n");
}

int exit_code(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument:
    case ErrorCode::Config:
    case ErrorCode::Unrepresentable:
      return 2;
    case ErrorCode::GapClosed:
    case ErrorCode::EdgeLeak:
    case ErrorCode::StepFailure:
    case ErrorCode::Unstable:
      return 3;
  }
  return 3;
}

}  // namespace oampump::app

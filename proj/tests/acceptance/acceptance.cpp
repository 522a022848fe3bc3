// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <chrono>
#include <cstdarg>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "core/dynamics.hpp"
#include "core/hardware.hpp"
#include "core/model.hpp"
#include "core/multistage.hpp"
#include "core/opensys.hpp"
#include "core/parallel.hpp"
#include "core/topology.hpp"
#include "support/lindblad.hpp"

using namespace oampump;

namespace {

const RiceMeleParams kP{5.0, 1.0};
constexpr double kT = 21.0;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, ...) __attribute__((format(printf, 1, 2)));
std::string fmt(const char* f, ...) {
  char buf[1024];
  va_list ap;
  va_start(ap, f);
  std::vsnprintf(buf, sizeof buf, f, ap);
  va_end(ap);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

PumpProblem pump_problem(const RiceMeleParams& p, double cycles) {
  PumpProblem pr;
  pr.params = p;
  pr.schedule = default_pump_loop(p, kT, Orientation::Clockwise, cycles);
  return pr;
}

std::vector<double> half_cycle_times(int m) {
  std::vector<double> t;
  for (int i = 0; i <= m; ++i) t.push_back(0.5 * kT * i);
  return t;
}

// 1 -------------------------------------------------------------------------
Outcome chern_quantization() {
  const auto t0 = std::chrono::steady_clock::now();
  const PumpSchedule loop = default_pump_loop(kP, kT);
  bool ok = true;
  std::string d;
  for (int n : {32, 64}) {
    const int lo = chern_number(loop, kP, Band::Lower, n, n);
    const int up = chern_number(loop, kP, Band::Upper, n, n);
    ok = ok && lo == 1 && up == -1;
    d += fmt("%d^2: C-=%+d C+=%+d; ", n, lo, up);
  }
  // circle that does not enclose the critical point (pi/2, pi/2)
  const PumpSchedule trivial = circular_pump_loop({kPi / 2 + 1.2, kPi / 2}, 0.8, kT);
  const int c0 = chern_number(trivial, kP, Band::Lower, 32, 32);
  ok = ok && c0 == 0;
  const double s = seconds_since(t0);
  ok = ok && s < 1.0;
  d += fmt("non-enclosing C-=%d; %.3f s (limit 1 s)", c0, s);
  return {ok, d};
}

// 2 -------------------------------------------------------------------------
Outcome quantized_pumping() {
  const auto t0 = std::chrono::steady_clock::now();
  const LatticeConfig lat = LatticeConfig::centered(0);
  const Trajectory tr = evolve(wannier_state(lat, kP, {0, 0}, Band::Lower, 0), pump_problem(kP, 2), half_cycle_times(4));
  const double d1 = tr.mean_l[1] - tr.mean_l[0];
  const double d2 = tr.mean_l[2] - tr.mean_l[0];
  const double d4 = tr.mean_l[4] - tr.mean_l[0];
  const double s = seconds_since(t0);
  const bool ok = std::abs(d1 - 1.0) <= 0.05 && std::abs(d2 - 2.0) <= 0.05 && std::abs(d4 - 4.0) <= 0.1 && s < 10.0;
  return {ok, fmt("T/2: %.4f (1 +- 0.05), T: %.4f (2 +- 0.05), 2T: %.4f (4 +- 0.1); %.2f s (limit 10 s)", d1, d2, d4, s)};
}

// 3 -------------------------------------------------------------------------
Outcome purity_trend() {
  const auto t0 = std::chrono::steady_clock::now();
  const std::vector<double> ratios{2.0, 5.0, 10.0};
  std::vector<std::vector<double>> purity(ratios.size());
  parallel_for(ratios.size(), [&](std::size_t i) {
    const RiceMeleParams p{ratios[i], 1.0};
    const LatticeConfig lat = LatticeConfig::centered(0);
    const Trajectory tr = evolve(wannier_state(lat, p, {0, 0}, Band::Lower, 0), pump_problem(p, 2), half_cycle_times(4));
    for (const PumpResult& r : pump_report(tr, 0, kT, {1, 2, 3, 4}, 1)) purity[i].push_back(r.purity);
  });
  bool ok = true;
  std::string d;
  for (int m = 0; m < 4; ++m) {
    ok = ok && purity[0][m] < purity[1][m] && purity[1][m] < purity[2][m];
    d += fmt("m=%d: %.4f<%.4f<%.4f; ", m + 1, purity[0][m], purity[1][m], purity[2][m]);
  }
  ok = ok && purity[2][0] > 0.99;
  const double s = seconds_since(t0);
  ok = ok && s < 60.0;
  d += fmt("purity(10, m=1)=%.5f (> 0.99); %.2f s (limit 60 s)", purity[2][0], s);
  return {ok, d};
}

// 4 -------------------------------------------------------------------------
Outcome phase_disorder() {
  const auto t0 = std::chrono::steady_clock::now();
  DisorderSpec spec;
  spec.kind = DisorderKind::Phase;
  spec.sigma_phase = 0.1;
  spec.seed = 20240611;
  spec.trials = 100;
  const LatticeConfig lat = LatticeConfig::centered(0);
  std::vector<double> disp(spec.trials);
  parallel_for(disp.size(), [&](std::size_t i) {
    PumpProblem pr = pump_problem(kP, 1);
    pr.phase_offset = sample_disorder(spec, static_cast<int>(i), lat).phase_offset;
    const Trajectory tr = evolve(wannier_state(lat, kP, pr.phase_offset, Band::Lower, 0), pr, {0.0, kT});
    disp[i] = tr.mean_l[1] - tr.mean_l[0];
  });
  double mean = 0.0, lo = 1e9, hi = -1e9;
  for (double x : disp) {
    mean += x / disp.size();
    lo = std::min(lo, x);
    hi = std::max(hi, x);
  }
  const double s = seconds_since(t0);
  const bool ok = std::abs(mean - 2.0) <= 0.1 && s < 300.0;
  return {ok, fmt("100 trials, sigma=0.1 rad: mean %.4f per cycle (2 +- 0.1), range [%.3f, %.3f]; %.1f s (limit 300 s)",
                  mean, lo, hi, s)};
}

// 5 -------------------------------------------------------------------------
Outcome loss_factorization() {
  const double k0 = 0.02;
  const LatticeConfig lat = LatticeConfig::centered(0, 48);
  const LatticeState w = wannier_state(lat, kP, {0, 0}, Band::Lower, 0);
  const PumpProblem pr = pump_problem(kP, 2);
  const auto ts = uniform_times(0.0, 2 * kT, 0.5);
  const Trajectory closed = evolve(w, pr, ts);
  const LangevinResult lossy = langevin_evolve(w, pr, DriveSpec{}, CouplingSchedule::constant(0.0, k0), ts);
  double d1 = 0.0;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    const LossyFactorization f = lossy_factorization(closed, k0, ts[i]);
    d1 = std::max(d1, (lossy.trajectory.probabilities[i] - f.survival * closed.probabilities[i]).cwiseAbs().maxCoeff());
  }
  const double survival = lossy.trajectory.norm.back();

  // six-site chain against a dense master-equation integration
  const LatticeConfig six{0, 5, 1, Boundary::Open};
  PumpProblem p6;
  p6.params = kP;
  p6.schedule = default_pump_loop(kP, 6.0);
  LatticeState a0 = LatticeState::localized(six, 2);
  a0.amplitudes[3] = cplx(0.3, 0.4);
  a0.amplitudes /= a0.amplitudes.norm();
  EvolveOptions opt;
  opt.check_edges = false;
  opt.tolerance = 1e-11;
  const double k6 = 0.1;
  const auto t6 = uniform_times(0.0, 6.0, 1.0);
  const LangevinResult l6 = langevin_evolve(a0, p6, DriveSpec{}, CouplingSchedule::constant(0.0, k6), t6, opt);
  const Trajectory c6 = evolve(a0, p6, t6, opt);
  oracle::Mat rho = oracle::Mat::Zero(7, 7);
  rho.bottomRightCorner(6, 6) = a0.amplitudes * a0.amplitudes.adjoint();
  auto h1 = [&](double t) { return oracle::Mat(p6.hamiltonian(six, t).dense()); };
  double d2 = 0.0;
  for (std::size_t i = 1; i < t6.size(); ++i) {
    rho = oracle::evolve_rk4(rho, h1, k6, t6[i - 1], t6[i], 4000);
    const LossyFactorization f = lossy_factorization(c6, k6, t6[i]);
    for (int l = 0; l < 6; ++l) {
      d2 = std::max(d2, std::abs(rho(l + 1, l + 1).real() - l6.trajectory.probabilities[i][l]));
      d2 = std::max(d2, std::abs(rho(l + 1, l + 1).real() - f.survival * f.distribution[l]));
    }
  }
  const bool ok = d1 <= 1e-8 && d2 <= 1e-8;
  return {ok, fmt("Langevin vs e^{-k0 t} closed: max |dP| = %.2e (1e-8), survival(2T) = %.6f; "
                  "master equation 6 sites: max |dP| = %.2e (1e-8)",
                  d1, survival, d2)};
}

// 6 -------------------------------------------------------------------------
Outcome switch_protocol() {
  GaussianPulse g;
  g.carrier = flat_band_carrier(kP);
  const DriveSpec d = gaussian_drive(g, 0);
  const CaptureOptimum o = optimize_capture(d, LatticeConfig::centered(0, 16), pump_problem(kP, 1));
  ProtocolSpec s;
  s.capture = {d.t_begin, o.fall_end};
  s.capture_fall = o.fall_end - o.fall_begin;
  s.pump_begin = o.fall_end;
  s.pump_cycles = 1.0;
  s.period = kT;
  s.release = {s.pump_end(), s.pump_end() + 30.0};
  s.release_rise = 2.0;
  s.kappa_peak = o.kappa_peak;
  const LatticeConfig lat = LatticeConfig::centered(0);
  PumpProblem pr = pump_problem(kP, 1);
  pr.schedule = pr.schedule.delayed(s.pump_begin);
  const LatticeState vac{lat, Eigen::VectorXcd::Zero(lat.site_count()), d.t_begin};
  const LangevinResult r = langevin_evolve(vac, pr, d, protocol_schedule(s), {s.pump_begin, s.pump_end(), s.release.end});
  const double eff = band_population(r.trajectory.states[0], pr, s.pump_begin, Band::Lower) / r.budget.input;
  const Eigen::VectorXd rel = r.emitted_between(s.pump_end(), s.release.end);
  const double purity = rel[*lat.index_of(2)] / rel.sum();
  const bool ok = purity > 0.95 && eff >= 0.85 && r.budget.relative_residual() <= 1e-6;
  return {ok, fmt("capture efficiency %.4f (>= 0.85), release purity in l0+2 %.4f (> 0.95), budget residual %.1e (1e-6)",
                  eff, purity, r.budget.relative_residual())};
}

// 7 -------------------------------------------------------------------------
Outcome onsite_disorder() {
  const auto t0 = std::chrono::steady_clock::now();
  const LatticeConfig lat{-20, 20, 1, Boundary::Open};
  const LatticeState psi0 = wannier_state(lat, kP, {0, 0}, Band::Lower, 0);
  const std::vector<double> sigmas{0.0, 0.05, 0.1, 0.15, 0.2, 0.3, 0.5, 1.0, 2.0};
  const int trials = 100;
  std::vector<double> mean(sigmas.size(), 0.0);
  std::vector<double> disp(sigmas.size() * trials);
  parallel_for(disp.size(), [&](std::size_t k) {
    const std::size_t si = k / trials;
    DisorderSpec spec;
    spec.kind = DisorderKind::Onsite;
    spec.sigma_detune = sigmas[si];
    spec.seed = 77;
    spec.trials = trials;
    PumpProblem pr = pump_problem(kP, 1);
    pr.onsite_shift = sample_disorder(spec, static_cast<int>(k % trials), lat).onsite_shift;
    EvolveOptions opt;
    opt.check_edges = false;
    const Trajectory tr = evolve(psi0, pr, {0.0, kT}, opt);
    disp[k] = tr.mean_l[1] - tr.mean_l[0];
  });
  for (std::size_t k = 0; k < disp.size(); ++k) mean[k / trials] += disp[k] / trials;
  std::string curve;
  bool monotone = true;
  for (std::size_t i = 0; i < sigmas.size(); ++i) {
    curve += fmt("%s%.2f:%.3f", i ? " " : "", sigmas[i] * 20.0, mean[i]);
    if (i > 0 && std::abs(mean[i] - 2.0) + 0.02 < std::abs(mean[i - 1] - 2.0)) monotone = false;
  }
  const double quantized = mean[1];        // sigma = 0.05 J1 per |l|
  const double at_4j1 = mean[4];           // max-|l| shift scale 20 * 0.2 = 4 J1
  const bool ok = std::abs(quantized - 2.0) <= 0.15 && std::abs(at_4j1 - 2.0) > 0.5 && monotone;
  return {ok, fmt("%d trials/point, |l|<=20; sigma 0.05: %.3f (2 +- 0.15); max-|l| shift 4 J1: %.3f (needs |d-2| > 0.5); "
                  "monotone %s; curve [shift@|l|=20 : mean disp] %s; %.1f s",
                  trials, quantized, at_4j1, monotone ? "yes" : "no", curve.c_str(), seconds_since(t0))};
}

// 8 -------------------------------------------------------------------------
Outcome flat_band() {
  auto max_err = [](const RiceMeleParams& p, double beta1) {
    double e = 0.0;
    for (int i = 0; i < 2048; ++i) {
      const double k = kTwoPi * i / 2048;
      const double exact = bloch_hamiltonian(k, {0.0, beta1}, p).norm();
      e = std::max(e, std::abs(exact - flat_band_approx(k, beta1, p)));
    }
    return e;
  };
  const double e1 = max_err({1.0, 0.2}, kPi / 2), e2 = max_err({1.0, 0.1}, kPi / 2);
  const double ratio = e1 / e2;
  double flat = 0.0;
  for (double b1 : {0.0, kPi}) {
    double lo = 1e9, hi = -1e9;
    for (int i = 0; i < 2048; ++i) {
      const double e = bloch_hamiltonian(kTwoPi * i / 2048, {0.0, b1}, kP).norm();
      lo = std::min(lo, e);
      hi = std::max(hi, e);
    }
    flat = std::max(flat, hi - lo);
  }
  const bool ok = ratio >= 14.0 && ratio <= 18.0 && flat <= 1e-12;
  return {ok, fmt("error ratio J1/J0 0.2 -> 0.1: %.2f (16 +- 2); bandwidth at beta1 in {0, pi}: %.1e (1e-12)", ratio, flat)};
}

// 9 -------------------------------------------------------------------------
Outcome multistage() {
  const StagePlan p512 = plan_switch(512, 10, 3);
  bool ok = p512.total_periods() == 4.0;
  std::string d = fmt("plan(512): %.1f T (4 T); ", p512.total_periods());
  bool bound = true;
  for (int q = 1; q <= 6; ++q) {
    long long v = 1;
    for (int i = 0; i < q; ++i) v *= 10;
    const StagePlan pq = plan_switch(v, 10, q + 1);
    double cyc = 0.0;
    for (int c : pq.digits) cyc += std::abs(0.5 * c);
    bound = bound && cyc <= 5.0 * q;
  }
  ok = ok && bound;
  d += fmt("plan(10^q) cycles <= 5q for q<=6: %s; ", bound ? "yes" : "no");
  const StagePlan p24 = plan_switch(24, 10, 2);
  const MultistageRun run = execute_plan(p24, kP, kT);
  ok = ok && run.stages.size() == 2 && std::abs(run.final_mean - 24.0) <= 0.1;
  d += fmt("2-stage simulation of 24: <l> = %.4f (24 +- 0.1)", run.final_mean);
  return {ok, d};
}

// 10 ------------------------------------------------------------------------
Outcome geometry() {
  CavityGeometry g;
  const double h0 = half_trace(g);
  const Eigen::Matrix2d m0 = round_trip_abcd(g);
  const double id_err = (m0 - Eigen::Matrix2d::Identity()).cwiseAbs().maxCoeff();
  int mismatch = 0, points = 0;
  for (int i = -20; i <= 20; ++i)
    for (int j = -20; j <= 20; ++j) {
      if (i == 0 || j == 0) continue;  // boundary itself
      CavityGeometry c = g;
      c.x = g.f + i * 2e-3;
      c.y = g.f + j * 2e-3;
      ++points;
      if (is_stable(c) != ((c.x - g.f) * (c.y - g.f) > 0.0)) ++mismatch;
    }
  // contour delta omega = 0.05 J1 along X - F = Y - F
  const PhysicalScale scale;
  auto detune = [&](double e) {
    CavityGeometry c = g;
    c.x = g.f + e;
    c.y = g.f + e;
    return degeneracy_detuning(c);
  };
  double lo = 0.0, hi = 1e-3;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    (detune(mid) < 0.05 * scale.j1 ? lo : hi) = mid;
  }
  const double um = 0.5 * (lo + hi) * 1e6;
  const bool ok = std::abs(h0 - 1.0) < 1e-12 && id_err < 1e-12 && mismatch == 0 && std::abs(um - 10.0) <= 2.0;
  return {ok, fmt("X=Y=F: (A+D)/2 = %.15f, |M - I| = %.1e; stability vs sign((X-F)(Y-F)): %d/%d mismatches; "
                  "0.05 J1 contour at sqrt((X-F)(Y-F)) = %.2f um (10 +- 2)",
                  h0, id_err, mismatch, points, um)};
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria = {
      {"Chern quantization", chern_quantization},
      {"Quantized pumping", quantized_pumping},
      {"Purity trend", purity_trend},
      {"Phase-disorder robustness", phase_disorder},
      {"Loss factorization oracle", loss_factorization},
      {"Switch protocol", switch_protocol},
      {"On-site disorder threshold", onsite_disorder},
      {"Flat-band approximation", flat_band},
      {"Multistage arithmetic", multistage},
      {"Geometry", geometry},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += !o.pass;
    std::printf("[%s] %2zu %s: %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].name, o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}

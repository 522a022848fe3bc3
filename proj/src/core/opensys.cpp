#include "core/opensys.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "core/error.hpp"
#include "core/parallel.hpp"
#include "core/propagator.hpp"

namespace oampump {

cplx DriveSpec::operator()(double t) const {
  if (!active() || t < t_begin || t > t_end) return 0.0;
  return field(t);
}

double DriveSpec::energy(int intervals) const {
  if (!active()) return 0.0;
  const int n = intervals + intervals % 2;
  const double h = (t_end - t_begin) / n;
  double s = 0.0;
  for (int i = 0; i <= n; ++i) {
    const double w = (i == 0 || i == n) ? 1.0 : (i % 2 ? 4.0 : 2.0);
    s += w * std::norm((*this)(t_begin + i * h));
  }
  return s * h / 3.0;
}

double GaussianPulse::bandwidth() const { return 2.0 * std::sqrt(2.0 * rate * std::log(2.0)); }

double GaussianPulse::half_window() const { return std::sqrt(16.0 * std::log(10.0) / (2.0 * rate)); }

DriveSpec gaussian_drive(const GaussianPulse& pulse, int l0) {
  require(pulse.rate > 0.0 && std::isfinite(pulse.rate), "pulse rate must be positive");
  const double amp = std::pow(2.0 * pulse.rate / kPi, 0.25);
  DriveSpec d;
  d.l0 = l0;
  d.t_begin = pulse.center - pulse.half_window();
  d.t_end = pulse.center + pulse.half_window();
  d.field = [pulse, amp](double t) {
    const double x = t - pulse.center;
    return amp * std::exp(cplx(-pulse.rate * x * x, -pulse.carrier * t));
  };
  return d;
}

double flat_band_carrier(const RiceMeleParams& p) {
  return -std::sqrt(4.0 * p.j0 * p.j0 + 4.0 * p.j1 * p.j1);
}

// ---------------------------------------------------------------------------

void CouplingSchedule::validate() const {
  require(std::isfinite(kappa0) && kappa0 >= 0.0, "kappa0 must be non-negative");
  require(ramps.empty() || ramps.size() + 1 == knots.size(), "one ramp per coupling interval");
  for (std::size_t i = 0; i < knots.size(); ++i) {
    require(std::isfinite(knots[i].kappa_e) && knots[i].kappa_e >= 0.0,
            "kappa_e must be non-negative");
    require(i == 0 || knots[i].t > knots[i - 1].t, "coupling knots must be strictly increasing");
  }
  for (Ramp r : ramps) require(r != Ramp::MixingAngle, "coupling ramps are linear or raised-cosine");
}

namespace {

double ramp_value(Ramp r, double u) { return r == Ramp::Linear ? u : 0.5 - 0.5 * std::cos(kPi * u); }

// int_0^u s(v) dv
double ramp_area(Ramp r, double u) {
  return r == Ramp::Linear ? 0.5 * u * u : 0.5 * u - std::sin(kPi * u) / (2.0 * kPi);
}

}  // namespace

double CouplingSchedule::kappa_e(double t) const {
  if (knots.empty()) return 0.0;
  if (t <= knots.front().t) return knots.front().kappa_e;
  if (t >= knots.back().t) return knots.back().kappa_e;
  const auto it = std::upper_bound(knots.begin(), knots.end(), t,
                                   [](double v, const Knot& k) { return v < k.t; });
  const std::size_t i = static_cast<std::size_t>(it - knots.begin()) - 1;
  const Ramp r = ramps.empty() ? Ramp::Linear : ramps[i];
  const double u = (t - knots[i].t) / (knots[i + 1].t - knots[i].t);
  return knots[i].kappa_e + (knots[i + 1].kappa_e - knots[i].kappa_e) * ramp_value(r, u);
}

double CouplingSchedule::integral_e(double t0, double t1) const {
  if (t1 <= t0 || knots.empty()) return 0.0;
  double total = 0.0;
  const double first = knots.front().t, last = knots.back().t;
  if (t0 < first) total += knots.front().kappa_e * (std::min(t1, first) - t0);
  if (t1 > last) total += knots.back().kappa_e * (t1 - std::max(t0, last));
  for (std::size_t i = 0; i + 1 < knots.size(); ++i) {
    const double a = std::max(t0, knots[i].t), b = std::min(t1, knots[i + 1].t);
    if (b <= a) continue;
    const double len = knots[i + 1].t - knots[i].t;
    const Ramp r = ramps.empty() ? Ramp::Linear : ramps[i];
    const double ua = (a - knots[i].t) / len, ub = (b - knots[i].t) / len;
    total += len * (knots[i].kappa_e * (ub - ua) +
                    (knots[i + 1].kappa_e - knots[i].kappa_e) * (ramp_area(r, ub) - ramp_area(r, ua)));
  }
  return total;
}

std::vector<double> CouplingSchedule::breakpoints(double t0, double t1) const {
  std::vector<double> out;
  for (const auto& k : knots)
    if (k.t > t0 && k.t < t1) out.push_back(k.t);
  return out;
}

CouplingSchedule CouplingSchedule::constant(double kappa_e, double kappa0) {
  CouplingSchedule c;
  c.knots = {{0.0, kappa_e}};
  c.kappa0 = kappa0;
  c.validate();
  return c;
}

double EnergyBudget::relative_residual() const {
  const double scale = std::max(initial + input, std::numeric_limits<double>::min());
  return std::abs(residual()) / scale;
}

Eigen::VectorXd LangevinResult::emitted_between(double t0, double t1) const {
  const std::size_t a = trajectory.index_at(t0), b = trajectory.index_at(t1);
  return emitted_so_far[b] - emitted_so_far[a];
}

// ---------------------------------------------------------------------------

LangevinResult langevin_evolve(const LatticeState& a0, const PumpProblem& problem,
                               const DriveSpec& drive, const CouplingSchedule& coupling,
                               const std::vector<double>& sample_times,
                               const EvolveOptions& options) {
  const LatticeConfig& lattice = a0.lattice;
  lattice.validate();
  problem.params.validate();
  coupling.validate();
  const int n = lattice.site_count();
  require(a0.amplitudes.size() == n, "state size does not match the lattice");
  require(problem.onsite_shift.empty() || static_cast<int>(problem.onsite_shift.size()) == n,
          "onsite shift must have one entry per site");
  require(!sample_times.empty(), "no sample times requested");
  for (std::size_t i = 0; i < sample_times.size(); ++i) {
    require(sample_times[i] >= a0.time - 1e-12, "sample before the initial time");
    require(i == 0 || sample_times[i] > sample_times[i - 1], "sample times must increase");
  }
  const double t_begin = a0.time, t_end = sample_times.back();
  int drive_index = -1;
  if (drive.active()) {
    require(drive.t_begin >= t_begin - 1e-12 && drive.t_end <= t_end + 1e-12,
            "drive pulse extends outside the simulated window");
    const auto idx = lattice.index_of(drive.l0);
    require(idx.has_value(), "injection mode is outside the lattice");
    drive_index = *idx;
  }
  const bool open = lattice.boundary == Boundary::Open;
  if (open && options.check_edges) {
    const Eigen::VectorXd pr = a0.probabilities();
    const int m = std::min(options.support_margin, n);
    for (int i = 0; i < m; ++i)
      if (pr[i] > options.support_threshold || pr[n - 1 - i] > options.support_threshold)
        throw Error(ErrorCode::EdgeLeak, "initial state is too close to the truncation edge");
    if (drive_index >= 0 && (drive_index < m || drive_index >= n - m))
      throw Error(ErrorCode::EdgeLeak, "injection mode is too close to the truncation edge");
  }

  std::vector<double> nodes{t_begin};
  auto add = [&](const std::vector<double>& v) {
    for (double t : v)
      if (t > t_begin && t < t_end) nodes.push_back(t);
  };
  add(sample_times);
  add(problem.schedule.breakpoints(t_begin, t_end));
  add(coupling.breakpoints(t_begin, t_end));
  if (drive.active()) add({drive.t_begin, drive.t_end});
  nodes.push_back(t_end);
  std::sort(nodes.begin(), nodes.end());
  nodes.erase(std::unique(nodes.begin(), nodes.end(), [](double a, double b) { return b - a < 1e-12; }),
              nodes.end());

  const HamiltonianFn H = [&](double t) { return problem.hamiltonian(lattice, t); };
  // A frozen loop is propagated exactly in the eigenbasis.
  std::function<void(double, double, Eigen::VectorXcd&)> propagate;
  if (problem.schedule.is_frozen()) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(problem.hamiltonian(lattice, t_begin).dense());
    const Eigen::MatrixXcd V = es.eigenvectors();
    const Eigen::VectorXd E = es.eigenvalues();
    propagate = [V, E](double, double dt, Eigen::VectorXcd& v) {
      Eigen::VectorXcd c = V.adjoint() * v;
      for (Eigen::Index i = 0; i < c.size(); ++i) c[i] *= std::polar(1.0, -E[i] * dt);
      v = V * c;
    };
  } else {
    propagate = [&H](double t, double dt, Eigen::VectorXcd& v) { magnus4_step(H, t, dt, v); };
  }
  const double kappa0 = coupling.kappa0;
  auto decay = [&](double t0, double t1) {
    return std::exp(-0.5 * (kappa0 * (t1 - t0) + coupling.integral_e(t0, t1)));
  };
  static const double g1 = 0.5 - std::sqrt(3.0) / 6.0, g2 = 0.5 + std::sqrt(3.0) / 6.0;

  struct Flows {
    Eigen::VectorXd emit;
    double lost = 0.0;
    double in = 0.0;
  };
  auto flows = [&](const Eigen::VectorXcd& a, double t, bool driven) {
    const double ke = coupling.kappa_e(t);
    const cplx ein = driven ? drive(t) : cplx(0.0);
    Eigen::VectorXcd out = std::sqrt(ke) * a;
    if (drive_index >= 0) out[drive_index] -= ein;
    return Flows{out.cwiseAbs2(), kappa0 * a.squaredNorm(), std::norm(ein)};
  };

  auto run = [&](double h) {
    LangevinResult res;
    Trajectory& tr = res.trajectory;
    tr.lattice = lattice;
    tr.start_time = t_begin;
    tr.step = h;
    Eigen::VectorXcd a = a0.amplitudes;
    Eigen::VectorXd emitted = Eigen::VectorXd::Zero(n);
    double lost = 0.0, input = 0.0;
    std::size_t next_sample = 0;

    auto record = [&](double t) {
      LatticeState s{lattice, a, t};
      tr.times.push_back(t);
      tr.probabilities.push_back(s.probabilities());
      tr.norm.push_back(s.norm2());
      tr.mean_l.push_back(s.norm2() > 0.0 ? center_of_mass(s) : 0.0);
      tr.states.push_back(std::move(s));
      const double ke = coupling.kappa_e(t);
      const cplx ein = drive(t);
      Eigen::VectorXcd out = std::sqrt(ke) * a;
      if (drive_index >= 0) out[drive_index] -= ein;
      res.output.push_back(out);
      res.input.push_back(ein);
      res.kappa_e.push_back(ke);
      res.emitted_so_far.push_back(emitted);
      res.lost_so_far.push_back(lost);
      res.input_so_far.push_back(input);
    };
    if (std::abs(sample_times[0] - t_begin) <= 1e-12) {
      record(t_begin);
      ++next_sample;
    }

    for (std::size_t p = 1; p < nodes.size(); ++p) {
      const double A = nodes[p - 1], B = nodes[p];
      const bool driven = drive.active() && A >= drive.t_begin - 1e-12 && B <= drive.t_end + 1e-12;
      int steps = std::max(2, static_cast<int>(std::ceil((B - A) / h - 1e-9)));
      steps += steps % 2;
      const double hh = (B - A) / steps;
      Flows f = flows(a, A, driven);
      Eigen::VectorXd s_emit = f.emit;
      double s_lost = f.lost, s_in = f.in;
      double t = A;
      for (int j = 1; j <= steps; ++j) {
        const double te = (j == steps) ? B : A + j * hh;
        const double dt = te - t;
        Eigen::VectorXcd next = a;
        propagate(t, dt, next);
        next *= decay(t, te);
        if (driven && drive_index >= 0) {
          for (double c : {g1, g2}) {
            const double s = t + c * dt;
            Eigen::VectorXcd b = Eigen::VectorXcd::Zero(n);
            b[drive_index] = std::sqrt(coupling.kappa_e(s)) * drive(s);
            propagate(s, te - s, b);
            next += 0.5 * dt * decay(s, te) * b;
          }
        }
        a = std::move(next);
        t = te;
        if (open) {
          double e = 0.0;
          for (int i = 0; i < std::min(options.edge_sites, n); ++i)
            e = std::max({e, std::norm(a[i]), std::norm(a[n - 1 - i])});
          tr.max_edge_population = std::max(tr.max_edge_population, e);
          if (options.check_edges && e > options.edge_threshold)
            throw Error(ErrorCode::EdgeLeak, "edge-site population " + std::to_string(e) +
                                                 " at t=" + std::to_string(t) + "; enlarge the lattice");
        }
        f = flows(a, te, driven);
        const double w = (j == steps) ? 1.0 : (j % 2 ? 4.0 : 2.0);
        s_emit += w * f.emit;
        s_lost += w * f.lost;
        s_in += w * f.in;
      }
      emitted += s_emit * (hh / 3.0);
      lost += s_lost * hh / 3.0;
      input += s_in * hh / 3.0;
      while (next_sample < sample_times.size() && std::abs(sample_times[next_sample] - B) <= 1e-12) {
        record(B);
        ++next_sample;
      }
    }
    require(next_sample == sample_times.size(), "internal error: missed sample times");

    res.budget.initial = a0.norm2();
    res.budget.input = input;
    res.budget.captured = a.squaredNorm();
    res.budget.emitted = emitted.sum();
    res.budget.lost = lost;
    res.budget.emitted_by_mode = emitted;
    return res;
  };

  auto distance = [&](const LangevinResult& x, const LangevinResult& y) {
    const double scale = std::max(1.0, a0.norm2() + x.budget.input);
    double d = 0.0;
    for (std::size_t i = 0; i < x.trajectory.size(); ++i) {
      d = std::max(d, (x.trajectory.probabilities[i] - y.trajectory.probabilities[i]).cwiseAbs().maxCoeff() / scale);
      if (x.trajectory.norm[i] > 1e-6 * scale)
        d = std::max(d, std::abs(x.trajectory.mean_l[i] - y.trajectory.mean_l[i]));
    }
    d = std::max(d, std::abs(x.budget.emitted - y.budget.emitted) / scale);
    d = std::max(d, std::abs(x.budget.lost - y.budget.lost) / scale);
    d = std::max(d, std::abs(x.budget.input - y.budget.input) / scale);
    return d;
  };

  double h = options.initial_step;
  LangevinResult coarse = run(h);
  for (int r = 0; r < options.max_refinements; ++r) {
    h *= 0.5;
    LangevinResult fine = run(h);
    if (distance(coarse, fine) < options.tolerance) return fine;
    coarse = std::move(fine);
  }
  throw Error(ErrorCode::StepFailure, "open-system integrator did not reach tolerance");
}

LossyFactorization lossy_factorization(const Trajectory& closed, double kappa0, double t) {
  require(kappa0 >= 0.0, "kappa0 must be non-negative");
  const std::size_t i = closed.index_at(t);
  LossyFactorization out;
  out.survival = std::exp(-kappa0 * (t - closed.start_time));
  out.distribution = closed.probabilities[i] / closed.probabilities[i].sum();
  return out;
}

CouplingSchedule protocol_schedule(const ProtocolSpec& s) {
  require(s.capture.begin <= s.capture.end && s.capture.end <= s.pump_begin + 1e-12 &&
              s.pump_end() <= s.release.begin + 1e-12 && s.release.begin <= s.release.end,
          "protocol windows must be ordered and non-overlapping");
  require(s.pump_cycles >= 0.0 && s.period > 0.0, "invalid pump window");
  require(s.kappa_peak >= 0.0 && s.kappa0 >= 0.0, "coupling rates must be non-negative");
  CouplingSchedule c;
  c.kappa0 = s.kappa0;
  if (s.capture.length() > 0.0 && s.kappa_peak > 0.0) {
    require(s.capture_fall > 0.0 && s.capture_fall <= s.capture.length(),
            "capture fall must lie inside the capture window");
    if (s.capture_fall < s.capture.length()) {
      c.knots.push_back({s.capture.begin, s.kappa_peak});
      c.ramps.push_back(Ramp::Linear);
    }
    c.knots.push_back({s.capture.end - s.capture_fall, s.kappa_peak});
    c.ramps.push_back(Ramp::RaisedCosine);
    c.knots.push_back({s.capture.end, 0.0});
  }
  if (s.release.length() > 0.0 && s.kappa_peak > 0.0) {
    require(s.release_rise > 0.0 && s.release_rise <= s.release.length(),
            "release rise must lie inside the release window");
    if (!c.knots.empty()) c.ramps.push_back(Ramp::Linear);
    c.knots.push_back({s.release.begin, 0.0});
    c.ramps.push_back(Ramp::RaisedCosine);
    c.knots.push_back({s.release.begin + s.release_rise, s.kappa_peak});
    if (s.release_rise < s.release.length()) {
      c.ramps.push_back(Ramp::Linear);
      c.knots.push_back({s.release.end, s.kappa_peak});
    }
  }
  if (c.knots.empty()) c.knots.push_back({0.0, 0.0});
  // Drop duplicate knot times left by back-to-back windows.
  for (std::size_t i = 1; i < c.knots.size();) {
    if (c.knots[i].t - c.knots[i - 1].t <= 1e-12) {
      require(c.knots[i].kappa_e == c.knots[i - 1].kappa_e, "protocol windows touch with a coupling jump");
      c.knots.erase(c.knots.begin() + static_cast<long>(i));
      c.ramps.erase(c.ramps.begin() + static_cast<long>(i - 1));
    } else {
      ++i;
    }
  }
  c.validate();
  return c;
}

double matched_capture_coupling(const DriveSpec& drive, double t) {
  if (!drive.active() || t <= drive.t_begin) return 0.0;
  DriveSpec head = drive;
  head.t_end = std::min(t, drive.t_end);
  const double e = head.energy(4000);
  return e > 0.0 ? std::norm(drive(t)) / e : 0.0;
}

CaptureOptimum bandwidth_matched_ramp(const GaussianPulse& pulse, const RiceMeleParams& p) {
  require(pulse.rate > 0.0 && p.j0 > 0.0, "invalid pulse or lattice parameters");
  const double c = std::cos(0.5 * std::atan(p.j1 / p.j0));
  const double s = 1.0 / std::sqrt(pulse.rate);
  CaptureOptimum r;
  r.kappa_peak = 1.35 * pulse.bandwidth() / (c * c);
  r.fall_begin = pulse.center - 1.2004 * s;
  r.fall_end = r.fall_begin + 2.4830 * s;
  return r;
}

double capture_efficiency(const DriveSpec& drive, const LatticeConfig& lattice,
                          const PumpProblem& problem, double kappa_peak, double fall_begin,
                          double fall_end, double kappa0) {
  require(drive.active(), "capture needs an input pulse");
  require(fall_end > fall_begin && fall_begin >= drive.t_begin, "invalid capture ramp");
  PumpProblem frozen = problem;
  frozen.schedule = PumpSchedule::frozen(problem.schedule.at(problem.schedule.start_time()));
  CouplingSchedule c;
  c.kappa0 = kappa0;
  if (fall_begin > drive.t_begin) {
    c.knots = {{drive.t_begin, kappa_peak}, {fall_begin, kappa_peak}, {fall_end, 0.0}};
    c.ramps = {Ramp::Linear, Ramp::RaisedCosine};
  } else {
    c.knots = {{fall_begin, kappa_peak}, {fall_end, 0.0}};
    c.ramps = {Ramp::RaisedCosine};
  }
  const double t_end = std::max(fall_end, drive.t_end);
  LatticeState a0{lattice, Eigen::VectorXcd::Zero(lattice.site_count()), drive.t_begin};
  EvolveOptions opt;
  opt.tolerance = 1e-6;
  const LangevinResult r = langevin_evolve(a0, frozen, drive, c, {t_end}, opt);
  return band_population(r.trajectory.states.back(), frozen, t_end, Band::Lower) / r.budget.input;
}

CaptureOptimum optimize_capture(const DriveSpec& drive, const LatticeConfig& lattice,
                                const PumpProblem& problem, double kappa0, double kappa_max) {
  require(drive.active(), "capture needs an input pulse");
  if (kappa_max <= 0.0) kappa_max = 4.0 * problem.params.j0;
  const double t0 = drive.t_begin, t1 = drive.t_end;
  const double center = 0.5 * (t0 + t1);
  const double width = 0.25 * (t1 - t0);  // a few intensity standard deviations
  struct Candidate {
    double peak, fb, len;
  };
  CaptureOptimum best;
  // Candidates of one batch run concurrently; the best is picked in index order.
  auto run = [&](std::vector<Candidate> batch) {
    std::vector<double> eff(batch.size());
    for (Candidate& c : batch) {
      c.peak = std::min(c.peak, kappa_max);
      c.fb = std::max(c.fb, t0);
      c.len = std::max(c.len, 1e-3 * width);
    }
    parallel_for(batch.size(), [&](std::size_t i) {
      const Candidate& c = batch[i];
      eff[i] = capture_efficiency(drive, lattice, problem, c.peak, c.fb, c.fb + c.len, kappa0);
    });
    for (std::size_t i = 0; i < batch.size(); ++i) {
      ++best.evaluations;
      if (eff[i] > best.efficiency) {
        const Candidate& c = batch[i];
        best = {c.peak, c.fb, c.fb + c.len, eff[i], best.evaluations};
      }
    }
  };
  const double rate_scale = 1.0 / width;
  std::vector<Candidate> grid;
  for (double peak : {0.5, 1.0, 2.0, 4.0, 8.0})
    for (double fb : {-0.5, -0.25, 0.0, 0.25})
      for (double len : {0.25, 0.5, 1.0})
        grid.push_back({peak * rate_scale, center + fb * width, len * width});
  run(grid);
  // Pattern search around the best grid point.
  double sp = 0.25, sf = 0.1 * width, sl = 0.25;
  for (int it = 0; it < 40 && (sp > 1e-3 || sf > 1e-3 * width); ++it) {
    const CaptureOptimum base = best;
    const double len = base.fall_end - base.fall_begin;
    run({{base.kappa_peak * (1 + sp), base.fall_begin, len},
         {base.kappa_peak / (1 + sp), base.fall_begin, len},
         {base.kappa_peak, base.fall_begin + sf, len},
         {base.kappa_peak, base.fall_begin - sf, len},
         {base.kappa_peak, base.fall_begin, len * (1 + sl)},
         {base.kappa_peak, base.fall_begin, len / (1 + sl)}});
    if (best.efficiency <= base.efficiency + 1e-9) {
      sp *= 0.5;
      sf *= 0.5;
      sl *= 0.5;
    }
  }
  return best;
}

}  // namespace oampump

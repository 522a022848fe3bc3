#include "core/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "core/error.hpp"
#include "core/propagator.hpp"
#include "core/topology.hpp"

namespace oampump {

ChainHamiltonian PumpProblem::hamiltonian(const LatticeConfig& lattice, double t) const {
  const PhasePoint b = schedule.at(t);
  return chain_hamiltonian(lattice, {b.beta0 + phase_offset.beta0, b.beta1 + phase_offset.beta1},
                           params, onsite_shift);
}

std::size_t Trajectory::index_at(double t) const {
  auto it = std::lower_bound(times.begin(), times.end(), t - 1e-9);
  require(it != times.end() && std::abs(*it - t) <= 1e-9,
          "trajectory has no sample at t=" + std::to_string(t));
  return static_cast<std::size_t>(it - times.begin());
}

std::vector<double> uniform_times(double t0, double t1, double dt) {
  require(t1 >= t0 && dt > 0.0, "invalid sampling window");
  std::vector<double> out;
  const long n = static_cast<long>(std::floor((t1 - t0) / dt + 1e-9));
  for (long i = 0; i <= n; ++i) out.push_back(t0 + i * dt);
  if (t1 - out.back() > 1e-9) out.push_back(t1);
  else out.back() = t1;
  return out;
}

namespace {

double edge_population(const Eigen::VectorXcd& psi, int edge) {
  const int n = static_cast<int>(psi.size());
  double m = 0.0;
  for (int i = 0; i < std::min(edge, n); ++i) {
    m = std::max(m, std::norm(psi[i]));
    m = std::max(m, std::norm(psi[n - 1 - i]));
  }
  return m;
}

void record(Trajectory& tr, const LatticeConfig& lattice, const Eigen::VectorXcd& psi, double t) {
  LatticeState s{lattice, psi, t};
  tr.times.push_back(t);
  tr.probabilities.push_back(s.probabilities());
  tr.mean_l.push_back(center_of_mass(s));
  tr.norm.push_back(s.norm2());
  tr.states.push_back(std::move(s));
}

double trajectory_distance(const Trajectory& a, const Trajectory& b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    d = std::max(d, (a.probabilities[i] - b.probabilities[i]).cwiseAbs().maxCoeff());
    d = std::max(d, std::abs(a.mean_l[i] - b.mean_l[i]));
  }
  return d;
}

}  // namespace

Trajectory evolve(const LatticeState& psi0, const PumpProblem& problem,
                  const std::vector<double>& sample_times, const EvolveOptions& options) {
  const LatticeConfig& lattice = psi0.lattice;
  lattice.validate();
  problem.params.validate();
  const int n = lattice.site_count();
  require(psi0.amplitudes.size() == n, "state size does not match the lattice");
  require(problem.onsite_shift.empty() || static_cast<int>(problem.onsite_shift.size()) == n,
          "onsite shift must have one entry per site");
  require(!sample_times.empty(), "no sample times requested");
  require(options.initial_step > 0.0 && options.tolerance > 0.0, "invalid integrator options");
  for (std::size_t i = 0; i < sample_times.size(); ++i) {
    require(std::isfinite(sample_times[i]), "sample times must be finite");
    require(sample_times[i] >= psi0.time - 1e-12, "sample before the initial time");
    require(i == 0 || sample_times[i] > sample_times[i - 1], "sample times must increase");
  }
  const bool open = lattice.boundary == Boundary::Open;
  if (open && options.check_edges) {
    const Eigen::VectorXd pr = psi0.probabilities();
    const int m = std::min(options.support_margin, n);
    for (int i = 0; i < m; ++i)
      if (pr[i] > options.support_threshold || pr[n - 1 - i] > options.support_threshold)
        throw Error(ErrorCode::EdgeLeak, "initial state is within " +
                                             std::to_string(options.support_margin) +
                                             " sites of the truncation edge");
  }

  const double t_begin = psi0.time;
  const double t_end = sample_times.back();
  const std::vector<double> breaks = problem.schedule.breakpoints(t_begin, t_end);
  const std::vector<SingularPoint> singular = problem.schedule.singular_points(t_begin, t_end);
  const HamiltonianFn H = [&](double t) { return problem.hamiltonian(lattice, t); };

  auto run = [&](double h) {
    Trajectory tr;
    tr.lattice = lattice;
    tr.start_time = t_begin;
    tr.step = h;
    Eigen::VectorXcd psi = psi0.amplitudes;
    double t = t_begin;
    for (double ts : sample_times) {
      for (double te : step_grid(t, ts, h, breaks, singular)) {
        magnus4_step(H, t, te - t, psi);
        t = te;
        if (open) {
          const double e = edge_population(psi, options.edge_sites);
          tr.max_edge_population = std::max(tr.max_edge_population, e);
          if (options.check_edges && e > options.edge_threshold)
            throw Error(ErrorCode::EdgeLeak,
                        "edge-site population " + std::to_string(e) + " at t=" +
                            std::to_string(t) + "; enlarge the lattice");
        }
      }
      t = ts;
      record(tr, lattice, psi, ts);
    }
    return tr;
  };

  double h = options.initial_step;
  Trajectory coarse = run(h);
  for (int r = 0; r < options.max_refinements; ++r) {
    Trajectory fine = run(0.5 * h);
    const double d = trajectory_distance(coarse, fine);
    if (d < options.tolerance) return fine;
    // fourth order: the h vs h/2 distance scales as h^4; aim a factor 4 below tolerance
    const double shrink = std::clamp(std::pow(0.25 * options.tolerance / d, 0.25), 1.0 / 16.0, 0.5);
    h *= shrink;
    coarse = shrink == 0.5 ? std::move(fine) : run(h);
  }
  throw Error(ErrorCode::StepFailure, "integrator did not reach tolerance after " +
                                          std::to_string(options.max_refinements) +
                                          " step refinements");
}

LatticeState wannier_state(const LatticeConfig& lattice, const RiceMeleParams& p,
                           PhasePoint beta, Band band, int cell) {
  lattice.validate();
  p.validate();
  for (double a : {p.alpha0, p.alpha1})
    require(std::abs(std::remainder(a * lattice.step - kPi, kTwoPi)) < 1e-9,
            "Wannier states need alpha * step = pi (mod 2 pi)");
  const long l = 2L * cell * lattice.step;
  const auto idx = lattice.index_of(static_cast<int>(l));
  const int n = lattice.site_count();
  if (!idx || *idx % 2 != 0 || *idx + 1 >= n)
    throw Error(ErrorCode::InvalidArgument,
                "unit cell " + std::to_string(cell) + " is outside the truncated lattice");
  const int cells = n / 2;
  const int c0 = *idx / 2;
  const PhasePoint eff{beta.beta0 + lattice.l_min * p.alpha0, beta.beta1 + lattice.l_min * p.alpha1};
  LatticeState s{lattice, Eigen::VectorXcd::Zero(n), 0.0};
  for (int m = 0; m < cells; ++m) {
    const double k = kTwoPi * m / cells;
    const Eigen::Vector2cd u = bloch_eigenvector(bloch_hamiltonian(k, eff, p), band);
    for (int c = 0; c < cells; ++c) {
      const cplx ph = std::polar(1.0 / cells, (c - c0) * k);
      s.amplitudes[2 * c] += ph * u[0];
      s.amplitudes[2 * c + 1] += ph * u[1];
    }
  }
  s.amplitudes.normalize();
  return s;
}

double center_of_mass(const LatticeState& state) {
  const Eigen::VectorXd pr = state.probabilities();
  const double total = pr.sum();
  require(total > 0.0, "center of mass of an empty state");
  double acc = 0.0;
  for (int i = 0; i < pr.size(); ++i) acc += state.lattice.oam(i) * pr[i];
  return acc / total;
}

double cell_center_of_mass(const LatticeState& state) {
  const Eigen::VectorXd pr = state.probabilities();
  const double total = pr.sum();
  require(total > 0.0, "center of mass of an empty state");
  const int width = 2 * state.lattice.step;
  double acc = 0.0;
  for (int i = 0; i < pr.size(); ++i) {
    const int l = state.lattice.oam(i);
    const int j = (l >= 0 ? l : l - width + 1) / width;
    acc += j * pr[i];
  }
  return acc / total;
}

double band_population(const LatticeState& state, const PumpProblem& problem, double t,
                       Band band) {
  const Eigen::MatrixXcd H = problem.hamiltonian(state.lattice, t).dense();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(H);
  const int n = static_cast<int>(H.rows());
  const int half = n / 2;
  const Eigen::VectorXcd c = es.eigenvectors().adjoint() * state.amplitudes;
  return band == Band::Lower ? c.head(half).squaredNorm() : c.tail(n - half).squaredNorm();
}

double MomentumWeights::total() const {
  double s = 0.0;
  for (double w : weight) s += w;
  return s;
}

MomentumWeights momentum_weights(const LatticeState& state, const RiceMeleParams& p,
                                 PhasePoint beta, Band band) {
  const LatticeConfig& lattice = state.lattice;
  const int cells = lattice.site_count() / 2;
  require(cells >= 1, "need at least one unit cell");
  const PhasePoint eff{beta.beta0 + lattice.l_min * p.alpha0, beta.beta1 + lattice.l_min * p.alpha1};
  MomentumWeights out;
  for (int m = 0; m < cells; ++m) {
    const double k = kTwoPi * m / cells;
    const Eigen::Vector2cd u = bloch_eigenvector(bloch_hamiltonian(k, eff, p), band);
    cplx acc = 0.0;
    for (int c = 0; c < cells; ++c) {
      const cplx proj = std::conj(u[0]) * state.amplitudes[2 * c] +
                        std::conj(u[1]) * state.amplitudes[2 * c + 1];
      acc += std::polar(1.0, -c * k) * proj;
    }
    out.k.push_back(k);
    out.weight.push_back(std::norm(acc) / cells);
  }
  return out;
}

double mean_current(const MomentumWeights& weights, const PumpSchedule& schedule,
                    const RiceMeleParams& p, Band band, double t) {
  const PhasePoint b = schedule.at(t);
  double acc = 0.0;
  for (std::size_t i = 0; i < weights.k.size(); ++i) {
    if (weights.weight[i] == 0.0) continue;
    const double k = weights.k[i];
    acc += weights.weight[i] *
           (band_velocity(k, b, p, band) + local_curvature(k, t, schedule, p, band));
  }
  return acc;
}

double integrated_current(const MomentumWeights& weights, const PumpSchedule& schedule,
                          const RiceMeleParams& p, Band band, double t0, double t1,
                          double max_step) {
  double total = 0.0;
  double a = t0;
  double fa = mean_current(weights, schedule, p, band, a);
  for (double b : step_grid(t0, t1, max_step, schedule.breakpoints(t0, t1))) {
    const double fm = mean_current(weights, schedule, p, band, 0.5 * (a + b));
    const double fb = mean_current(weights, schedule, p, band, b);
    total += (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    a = b;
    fa = fb;
  }
  return total;
}

std::vector<PumpResult> pump_report(const Trajectory& traj, int l0, double period,
                                    const std::vector<int>& half_cycles, int direction) {
  require(!traj.times.empty(), "empty trajectory");
  require(period > 0.0, "period must be positive");
  std::vector<PumpResult> out;
  for (int m : half_cycles) {
    require(m >= 0, "half-cycle count must be non-negative");
    PumpResult r;
    r.half_cycles = m;
    r.time = traj.times.front() + 0.5 * m * period;
    const std::size_t i = traj.index_at(r.time);
    r.target_l = l0 + direction * m * traj.lattice.step;
    r.displacement = traj.mean_l[i] - traj.mean_l.front();
    r.purity = std::norm(traj.states[i].amplitude(r.target_l));
    r.final_state = traj.states[i];
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace oampump

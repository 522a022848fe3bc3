#pragma once

// Wannier-state preparation, closed-system evolution through a pump schedule
// and transport observables.

#include <vector>

#include <Eigen/Dense>

#include "core/model.hpp"

namespace oampump {

/// Everything that defines H(t) on a given lattice.
struct PumpProblem {
  RiceMeleParams params;
  PumpSchedule schedule = PumpSchedule::frozen({});
  PhasePoint phase_offset;           // constant (delta beta0, delta beta1)
  std::vector<double> onsite_shift;  // one entry per lattice site, or empty

  ChainHamiltonian hamiltonian(const LatticeConfig& lattice, double t) const;
};

struct EvolveOptions {
  double initial_step = 0.05;
  double tolerance = 1e-8;      // max change of P_l and <l> between refinements
  int max_refinements = 10;
  double edge_threshold = 1e-6;
  int edge_sites = 2;
  int support_margin = 6;       // initial state must vanish this close to an edge
  double support_threshold = 1e-10;
  bool check_edges = true;
};

struct Trajectory {
  LatticeConfig lattice;
  double start_time = 0.0;  // time of the initial state
  std::vector<double> times;
  std::vector<LatticeState> states;
  std::vector<Eigen::VectorXd> probabilities;
  std::vector<double> mean_l;
  std::vector<double> norm;
  double max_edge_population = 0.0;
  double step = 0.0;  // accepted substep

  std::size_t size() const { return times.size(); }
  /// Index of the sample at time t (within 1e-9), throws if absent.
  std::size_t index_at(double t) const;
};

/// Solves i dpsi/dt = H(t) psi from psi0.time, sampling at `sample_times`
/// (increasing, none before psi0.time).
Trajectory evolve(const LatticeState& psi0, const PumpProblem& problem,
                  const std::vector<double>& sample_times, const EvolveOptions& options = {});

/// Sample times t0, t0 + dt, ..., t1 (t1 always included).
std::vector<double> uniform_times(double t0, double t1, double dt);

/// Band Wannier function of unit cell j0 (sites l = 2 j0 step, (2 j0 + 1) step)
/// built as a uniform Bloch sum at phases `beta`.
LatticeState wannier_state(const LatticeConfig& lattice, const RiceMeleParams& p,
                           PhasePoint beta, Band band, int cell);

/// sum_l l P_l / sum_l P_l
double center_of_mass(const LatticeState& state);
/// Same in unit cells: cell j holds l = 2 j step and (2 j + 1) step.
double cell_center_of_mass(const LatticeState& state);

/// Population of the lower (or upper) half of the instantaneous spectrum.
double band_population(const LatticeState& state, const PumpProblem& problem, double t,
                       Band band);

struct MomentumWeights {
  std::vector<double> k;
  std::vector<double> weight;  // |psi_k|^2 projected on the band

  double total() const;
};

/// |psi_k|^2 from a DFT over whole unit cells with the bloch_eigenvector gauge.
MomentumWeights momentum_weights(const LatticeState& state, const RiceMeleParams& p,
                                 PhasePoint beta, Band band);

/// I(t) = sum_k |psi_k|^2 [d_k E + Omega_kt], in unit cells per time.
double mean_current(const MomentumWeights& weights, const PumpSchedule& schedule,
                    const RiceMeleParams& p, Band band, double t);

/// int_{t0}^{t1} I dt by composite Simpson on a grid aligned with the schedule.
double integrated_current(const MomentumWeights& weights, const PumpSchedule& schedule,
                          const RiceMeleParams& p, Band band, double t0, double t1,
                          double max_step = 0.01);

struct PumpResult {
  int half_cycles = 0;
  double time = 0.0;
  int target_l = 0;
  double displacement = 0.0;  // <l>(t_m) - <l>(t_0)
  double purity = 0.0;        // P_target(t_m)
  LatticeState final_state;
};

/// Displacement and purity at t0 + m T/2 for each m; the target site is
/// l0 + direction * m * step.
std::vector<PumpResult> pump_report(const Trajectory& traj, int l0, double period,
                                    const std::vector<int>& half_cycles, int direction = 1);

}  // namespace oampump

#pragma once

// Open-cavity dynamics: damped, driven amplitude equations with a tunable
// external coupling kappa_e(t), intrinsic loss kappa0 and the one-port
// input-output relation E_out,l = sqrt(kappa_e) a_l - delta_{l,l0} E_in.

#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "core/dynamics.hpp"
#include "core/model.hpp"

namespace oampump {

struct DriveSpec {
  std::function<cplx(double)> field;  // E_in(t) in sqrt(rate) units
  int l0 = 0;                         // injection mode
  double t_begin = 0.0;               // field is zero outside [t_begin, t_end]
  double t_end = 0.0;

  bool active() const { return static_cast<bool>(field) && t_end > t_begin; }
  cplx operator()(double t) const;
  /// int |E_in|^2 dt over the support (composite Simpson).
  double energy(int intervals = 20000) const;
};

/// exp(-i E t - rate (t - center)^2) scaled to unit energy, truncated where
/// |E_in|^2 drops below 1e-16 of its peak.
struct GaussianPulse {
  double center = 5.0;
  double rate = 0.2;
  double carrier = 0.0;

  /// Full width at half maximum of the power spectrum.
  double bandwidth() const;
  double half_window() const;
};

DriveSpec gaussian_drive(const GaussianPulse& pulse, int l0);

/// Carrier of the input pulse: lower flat-band energy -sqrt(4 J0^2 + 4 J1^2).
double flat_band_carrier(const RiceMeleParams& p);

struct CouplingSchedule {
  struct Knot {
    double t = 0.0;
    double kappa_e = 0.0;
  };
  std::vector<Knot> knots;   // kappa_e holds its end values outside the knots
  std::vector<Ramp> ramps;   // one per interval (Linear or RaisedCosine)
  double kappa0 = 0.0;

  void validate() const;
  double kappa_e(double t) const;
  double kappa(double t) const { return kappa0 + kappa_e(t); }
  /// int_{t0}^{t1} kappa_e dt, exact for both ramp shapes.
  double integral_e(double t0, double t1) const;
  std::vector<double> breakpoints(double t0, double t1) const;

  static CouplingSchedule constant(double kappa_e, double kappa0 = 0.0);
};

struct EnergyBudget {
  double initial = 0.0;   // ||a(t0)||^2
  double input = 0.0;     // int |E_in|^2
  double captured = 0.0;  // ||a(t1)||^2
  double emitted = 0.0;   // sum_l int |E_out,l|^2 (includes reflection in l0)
  double lost = 0.0;      // int kappa0 ||a||^2
  Eigen::VectorXd emitted_by_mode;

  double residual() const { return initial + input - captured - emitted - lost; }
  double relative_residual() const;
};

struct LangevinResult {
  Trajectory trajectory;                        // raw amplitudes (norm = photon number)
  std::vector<Eigen::VectorXcd> output;         // E_out per site at each sample
  std::vector<cplx> input;                      // E_in at each sample
  std::vector<double> kappa_e;                  // at each sample
  std::vector<Eigen::VectorXd> emitted_so_far;  // cumulative emitted energy per site
  std::vector<double> lost_so_far;
  std::vector<double> input_so_far;
  EnergyBudget budget;

  /// Emitted energy per site between two sample times.
  Eigen::VectorXd emitted_between(double t0, double t1) const;
};

/// Integrates da/dt = -i H(t) a - kappa(t)/2 a + delta_{l,l0} sqrt(kappa_e) E_in.
/// The step is halved until samples and energy flows change less than the
/// tolerance.
LangevinResult langevin_evolve(const LatticeState& a0, const PumpProblem& problem,
                               const DriveSpec& drive, const CouplingSchedule& coupling,
                               const std::vector<double>& sample_times,
                               const EvolveOptions& options = {});

struct LossyFactorization {
  double survival = 1.0;
  Eigen::VectorXd distribution;  // normalized P_l
};

/// Closed trajectory plus uniform loss: survival e^{-kappa0 (t - t0)}, N(l,t)
/// unchanged.
LossyFactorization lossy_factorization(const Trajectory& closed, double kappa0, double t);

struct Window {
  double begin = 0.0;
  double end = 0.0;
  double length() const { return end - begin; }
};

struct ProtocolSpec {
  Window capture;             // kappa_e = peak, then falls to 0 at capture.end
  double capture_fall = 0.0;  // raised-cosine fall duration inside the capture window
  double pump_begin = 0.0;
  double pump_cycles = 1.0;
  double period = 21.0;
  Window release;             // kappa_e rises from 0 at release.begin, then holds
  double release_rise = 0.0;
  double kappa_peak = 1.0;
  double kappa0 = 0.0;

  double pump_end() const { return pump_begin + pump_cycles * period; }
};

CouplingSchedule protocol_schedule(const ProtocolSpec& spec);

/// Coupling that absorbs the pulse perfectly into a single mode:
/// |E_in(t)|^2 / int_{t_begin}^{t} |E_in|^2.
double matched_capture_coupling(const DriveSpec& drive, double t);

struct CaptureOptimum {
  double kappa_peak = 0.0;
  double fall_begin = 0.0;
  double fall_end = 0.0;
  double efficiency = 0.0;  // lower-band energy after the fall over input energy
  int evaluations = 0;
};

/// Maximizes the lower-band captured fraction of the pulse with the loop frozen at its
/// start point, over the kappa_e peak and the start and length of the fall.
/// The peak is capped at kappa_max (default: the initial gap 4 J0) so the mode
/// linewidth never exceeds the band gap.
CaptureOptimum optimize_capture(const DriveSpec& drive, const LatticeConfig& lattice,
                                const PumpProblem& problem, double kappa0 = 0.0,
                                double kappa_max = 0.0);

/// Hold-then-fall capture ramp matched to a Gaussian pulse on the default loop:
/// w * kappa_peak = 1.35 * bandwidth, fall from center - 1.2004/sqrt(rate) over
/// 2.4830/sqrt(rate), with w = cos^2(atan(J1/J0)/2) the weight of l0 in the
/// lower flat-band mode.
CaptureOptimum bandwidth_matched_ramp(const GaussianPulse& pulse, const RiceMeleParams& p);

/// Fraction of the pulse captured into the lower band by one hold-then-fall
/// capture ramp.
double capture_efficiency(const DriveSpec& drive, const LatticeConfig& lattice,
                          const PumpProblem& problem, double kappa_peak, double fall_begin,
                          double fall_end, double kappa0 = 0.0);

}  // namespace oampump

#pragma once

// Synthetic OAM lattice: Rice-Mele / generalized AAH parameters, pump-loop
// schedules in the (beta0, beta1) phase plane, and the real-space and Bloch
// Hamiltonians built from them.
//
// Units: energies in J1, times in 1/J1 (hbar = 1). Conversions to physical
// rates live in hardware.hpp.

#include <complex>
#include <numbers>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace oampump {

using cplx = std::complex<double>;
inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Static couplings of the three auxiliary cavities (M0 = 0, M1 = M2 = step).
struct RiceMeleParams {
  double j0 = 5.0;
  double j1 = 1.0;
  double alpha0 = kPi;
  double alpha1 = kPi;

  void validate() const;
};

enum class Band { Lower, Upper };

/// Traversal sense of the pump loop in the (Delta, deltaJ) plane with Delta on
/// the horizontal axis. Clockwise pumps lower-band photons towards larger l.
enum class Orientation { Clockwise, Counterclockwise };

struct PhasePoint {
  double beta0 = 0.0;
  double beta1 = 0.0;
};

/// Interpolation profile s(u), u in [0,1], used inside a segment.
enum class Ramp {
  Linear,
  RaisedCosine,
  /// cos(s*pi) = r*cot(theta) with theta advancing linearly from atan(r) to
  /// pi - atan(r), r = J1/J0. Over a beta0 sweep of length pi this moves the
  /// two-site mixing angle at constant rate, so the detuning crosses zero
  /// slowly where the gap is 4*J1 and moves fast where it is ~4*J0.
  MixingAngle,
};

struct PumpSegment {
  enum class Shape { Line, Arc };

  double duration = 0.0;
  Shape shape = Shape::Line;
  // Line: straight path start -> end.
  PhasePoint start;
  PhasePoint end;
  // Arc: center + radius * (cos phi, sin phi), phi from phi_start to phi_end.
  PhasePoint center;
  double radius = 0.0;
  double phi_start = 0.0;
  double phi_end = 0.0;

  Ramp ramp = Ramp::Linear;
  double mixing_ratio = 0.0;  // r = J1/J0, only for Ramp::MixingAngle

  double progress(double u) const;
  PhasePoint at(double u) const;
  PhasePoint first() const { return at(0.0); }
  PhasePoint last() const { return at(1.0); }
  PumpSegment reversed() const;
};

/// A time where beta(t) behaves like sqrt|t - time| (end of a mixing-angle
/// ramp); steps are graded towards it inside +-width.
struct SingularPoint {
  double time = 0.0;
  double width = 0.0;
};

/// Time-dependent phases beta0(t), beta1(t): `n_cycles` laps of a closed loop
/// of period T starting at `start_time`. Before the start the phases sit at the
/// loop's first point; after the last lap they stay where the loop stopped
/// (half-integer cycles end half way round).
class PumpSchedule {
 public:
  PumpSchedule(std::vector<PumpSegment> loop, double n_cycles,
               double start_time = 0.0);

  /// Constant phases for all t (no segments, zero period).
  static PumpSchedule frozen(PhasePoint point);

  double period() const { return period_; }
  double n_cycles() const { return n_cycles_; }
  double start_time() const { return start_time_; }
  double end_time() const { return start_time_ + n_cycles_ * period_; }
  bool is_frozen() const { return segments_.empty(); }
  const std::vector<PumpSegment>& segments() const { return segments_; }

  PhasePoint at(double t) const;
  /// One lap, tau in [0, period].
  PhasePoint loop_at(double tau) const;
  /// Net phase advance over one lap (multiples of 2*pi for a closed loop).
  PhasePoint lap_shift() const;
  /// Distance of the lap's end from its start modulo 2*pi (0 when closed).
  double closure_error() const;
  bool closed(double tol = 1e-9) const { return closure_error() <= tol; }

  /// Times in the open interval (t0, t1) where beta(t) may have a kink.
  std::vector<double> breakpoints(double t0, double t1) const;
  /// Mixing-angle ramp ends whose grading window reaches into [t0, t1].
  std::vector<SingularPoint> singular_points(double t0, double t1) const;

  PumpSchedule reversed() const;
  PumpSchedule with_cycles(double n_cycles) const;
  PumpSchedule delayed(double start_time) const;

 private:
  std::vector<PumpSegment> segments_;
  PhasePoint hold_;
  double period_ = 0.0;
  double n_cycles_ = 0.0;
  double start_time_ = 0.0;
};

/// Knobs of the shipped rectangular loop.
struct PumpLoopShape {
  double beta1_fraction = 0.03;  // fraction of T spent in each beta1 sweep
  Ramp beta0_ramp = Ramp::MixingAngle;
  Ramp beta1_ramp = Ramp::RaisedCosine;

  /// Four equal linear segments.
  static PumpLoopShape uniform_linear() {
    return {0.25, Ramp::Linear, Ramp::Linear};
  }
};

/// Rectangular loop (0,0)->(pi,0)->(pi,pi)->(2pi,pi)->(2pi,2pi); it starts at
/// deltaJ = 2*J1, Delta = -4*J0 and reaches the opposite corner at T/2.
PumpSchedule default_pump_loop(const RiceMeleParams& p, double period,
                               Orientation orientation = Orientation::Clockwise,
                               double n_cycles = 1.0,
                               const PumpLoopShape& shape = {});

/// Circle of the given radius around `center` in the (beta0, beta1) plane.
/// Clockwise in (Delta, deltaJ) is counterclockwise here.
PumpSchedule circular_pump_loop(PhasePoint center, double radius, double period,
                                Orientation orientation = Orientation::Clockwise,
                                double n_cycles = 1.0);

struct DerivedCouplings {
  double delta = 0.0;  // neighbouring-site detuning
  cplx j_plus;         // intra-cell tunneling
  cplx j_minus;        // inter-cell tunneling

  double dimerization() const { return std::abs(j_plus) - std::abs(j_minus); }
};

DerivedCouplings derived_couplings(double beta0, double beta1,
                                   const RiceMeleParams& p);
inline DerivedCouplings derived_couplings(PhasePoint b, const RiceMeleParams& p) {
  return derived_couplings(b.beta0, b.beta1, p);
}

/// h(k,t) of H_k = h . sigma, in the basis (b_{j,1}, b_{j,2}) = (a_{2j},
/// a_{2j+1}) with Bloch amplitudes e^{ijk} u(k).
struct BlochVector {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  double norm() const;
  double energy(Band band) const { return band == Band::Lower ? -norm() : norm(); }
  Eigen::Matrix2cd matrix() const;
};

BlochVector bloch_hamiltonian(double k, double beta0, double beta1,
                              const RiceMeleParams& p);
inline BlochVector bloch_hamiltonian(double k, PhasePoint b, const RiceMeleParams& p) {
  return bloch_hamiltonian(k, b.beta0, b.beta1, p);
}

enum class Boundary { Open, Periodic };

/// Truncation of the OAM lattice. Sites are l = l_min + i*step; with step M the
/// SLMs shift OAM by M and only this residue class couples to l_min. Unit cell
/// j (relative) holds site indices 2j and 2j+1.
struct LatticeConfig {
  int l_min = -20;
  int l_max = 21;
  int step = 1;
  Boundary boundary = Boundary::Open;

  int site_count() const { return (l_max - l_min) / step + 1; }
  int oam(int index) const { return l_min + index * step; }
  std::optional<int> index_of(int l) const;
  void validate() const;

  /// `n_sites` sites around l0 with l0 on an even site index.
  static LatticeConfig centered(int l0, int n_sites = 42, int step = 1,
                                Boundary boundary = Boundary::Open);
};

struct LatticeState {
  LatticeConfig lattice;
  Eigen::VectorXcd amplitudes;
  double time = 0.0;

  double norm2() const { return amplitudes.squaredNorm(); }
  Eigen::VectorXd probabilities() const { return amplitudes.cwiseAbs2(); }
  cplx amplitude(int l) const;

  static LatticeState localized(const LatticeConfig& lattice, int l);
};

/// Tight-binding chain in site-index space: diagonal plus nearest-neighbour
/// links. hopping[i] = H(i+1, i); periodic chains carry one more entry that
/// links site n-1 to site 0, i.e. H(0, n-1).
struct ChainHamiltonian {
  Eigen::VectorXd onsite;
  Eigen::VectorXcd hopping;
  bool periodic = false;

  int size() const { return static_cast<int>(onsite.size()); }
  Eigen::MatrixXcd dense() const;
  /// y = H x
  void apply(const Eigen::VectorXcd& x, Eigen::VectorXcd& y) const;
  /// Gershgorin bound on the spectral radius.
  double norm_bound() const;

  /// a*A + b*B for chains with identical layout.
  static ChainHamiltonian combine(double a, const ChainHamiltonian& A, double b,
                                  const ChainHamiltonian& B);
};

ChainHamiltonian chain_hamiltonian(const LatticeConfig& lattice, PhasePoint beta,
                                   const RiceMeleParams& p,
                                   std::span<const double> onsite_shift = {});

/// Dense Hermitian matrix of the OAM lattice Hamiltonian. Rejects onsite
/// shifts with a nonzero imaginary part.
Eigen::MatrixXcd real_space_hamiltonian(const LatticeConfig& lattice, double beta0,
                                        double beta1, const RiceMeleParams& p,
                                        std::span<const cplx> onsite_shift = {});

}  // namespace oampump

#pragma once

// Physical layer: degenerate-cavity ray optics, optical-element rates, unit
// conversions and disorder generators.

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "core/model.hpp"

namespace oampump {

struct CavityGeometry {
  double x = 0.1;                 // m
  double y = 0.1;                 // m
  double f = 0.1;                 // m
  double wavelength = 1e-6;       // m
  double omega_f = kTwoPi * 1e9;  // rad/s
  int n = 0;                      // longitudinal index

  void validate() const;
};

enum class AbcdConvention {
  /// Mirrors act as thin lenses of focal length F/2; degenerate at X = Y = F.
  EffectiveFocal,
  /// Thin lenses of focal length F (not degenerate at X = Y = F).
  ThinLens,
};

/// Round trip P_Y L P_X L P_Y L P_X L (rightmost acts first).
Eigen::Matrix2d round_trip_abcd(const CavityGeometry& geom,
                                AbcdConvention convention = AbcdConvention::EffectiveFocal);

/// (A + D) / 2 of the round trip.
double half_trace(const CavityGeometry& geom,
                  AbcdConvention convention = AbcdConvention::EffectiveFocal);

bool is_stable(const CavityGeometry& geom,
               AbcdConvention convention = AbcdConvention::EffectiveFocal);

/// Transverse-mode spacing arccos((A+D)/2) / (2 pi) * Omega_F.
double transverse_spacing(const CavityGeometry& geom);

/// n Omega_F + (2p + |l| + 1) arccos((A+D)/2) / (2 pi) Omega_F.
double mode_frequency(int p, int l, const CavityGeometry& geom);

/// w0^2 = (lambda F / 2 pi) sqrt((X-F)/(Y-F)).
double beam_waist(const CavityGeometry& geom);

/// delta omega = 3 arccos((A+D)/2) / (2 pi) Omega_F (rad/s).
double degeneracy_detuning(const CavityGeometry& geom);

/// delta omega_l = |l| delta omega for each lattice site (same units as delta).
std::vector<double> degeneracy_shifts(const LatticeConfig& lattice, double delta);

struct BeamSplitterSpec {
  cplx r;
  cplx t;

  void validate() const;
};

/// J_s = Omega_F |r|^2 / (2 pi (1 + |t|^2)).
double tunneling_from_bs(const BeamSplitterSpec& bs, double omega_f);

/// kappa_e = |r_P|^2 Omega_F / (2 pi), valid for |r_P|^2 << 1.
double kappa_from_tbs(cplx r_p, double omega_f);

/// Lattice rates in rad/s; simulations run in units of J1.
struct PhysicalScale {
  double omega_f = kTwoPi * 1e9;
  double j0 = kTwoPi * 20e6;
  double j1 = kTwoPi * 4e6;

  RiceMeleParams params() const { return {j0 / j1, 1.0}; }
  double to_seconds(double t_in_inverse_j1) const { return t_in_inverse_j1 / j1; }
  double to_inverse_j1(double seconds) const { return seconds * j1; }
  double rate_to_j1(double rad_per_s) const { return rad_per_s / j1; }
  double rate_from_j1(double value) const { return value * j1; }
  static double to_hz(double rad_per_s) { return rad_per_s / kTwoPi; }
};

enum class DisorderKind { Phase, Onsite };

struct DisorderSpec {
  DisorderKind kind = DisorderKind::Phase;
  double sigma_phase = 0.0;   // rad, for delta beta0 and delta beta1
  double sigma_detune = 0.0;  // J1 per |l|
  bool per_site = true;       // onsite: independent draw per site, else one global draw
  std::uint64_t seed = 0;
  int trials = 1;

  void validate() const;
};

struct DisorderDraw {
  PhasePoint phase_offset;
  std::vector<double> onsite_shift;  // empty for phase disorder
};

/// Reproducible Gaussian draw for one trial.
DisorderDraw sample_disorder(const DisorderSpec& spec, int trial, const LatticeConfig& lattice);

}  // namespace oampump

#include "core/hardware.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "core/error.hpp"

namespace oampump {

void CavityGeometry::validate() const {
  require(x > 0.0 && y > 0.0 && f > 0.0 && wavelength > 0.0 && omega_f > 0.0,
          "cavity lengths, wavelength and FSR must be positive");
}

Eigen::Matrix2d round_trip_abcd(const CavityGeometry& g, AbcdConvention convention) {
  g.validate();
  const double focal = convention == AbcdConvention::EffectiveFocal ? 0.5 * g.f : g.f;
  Eigen::Matrix2d lens, px, py;
  lens << 1.0, 0.0, -1.0 / focal, 1.0;
  px << 1.0, g.x, 0.0, 1.0;
  py << 1.0, g.y, 0.0, 1.0;
  const Eigen::Matrix2d half = py * lens * px * lens;
  return half * half;
}

double half_trace(const CavityGeometry& g, AbcdConvention convention) {
  const Eigen::Matrix2d m = round_trip_abcd(g, convention);
  return 0.5 * (m(0, 0) + m(1, 1));
}

bool is_stable(const CavityGeometry& g, AbcdConvention convention) {
  return std::abs(half_trace(g, convention)) <= 1.0 + 1e-12;
}

namespace {

double mode_angle(const CavityGeometry& g) {
  const double h = half_trace(g);
  if (std::abs(h) > 1.0 + 1e-12)
    throw Error(ErrorCode::Unstable, "cavity is unstable: |A+D| > 2");
  return std::acos(std::clamp(h, -1.0, 1.0));
}

}  // namespace

double transverse_spacing(const CavityGeometry& g) { return mode_angle(g) / kTwoPi * g.omega_f; }

double mode_frequency(int p, int l, const CavityGeometry& g) {
  require(p >= 0, "radial index must be non-negative");
  return g.n * g.omega_f + (2.0 * p + std::abs(l) + 1.0) * transverse_spacing(g);
}

double beam_waist(const CavityGeometry& g) {
  g.validate();
  const double dx = g.x - g.f, dy = g.y - g.f;
  if (dx == 0.0 || dy == 0.0 || (dx > 0.0) != (dy > 0.0) || !is_stable(g))
    throw Error(ErrorCode::Unstable,
                "beam waist needs a stable cavity with X-F and Y-F nonzero and of equal sign");
  return std::sqrt(g.wavelength * g.f / kTwoPi * std::sqrt(dx / dy));
}

double degeneracy_detuning(const CavityGeometry& g) { return 3.0 * transverse_spacing(g); }

std::vector<double> degeneracy_shifts(const LatticeConfig& lattice, double delta) {
  std::vector<double> out;
  for (int i = 0; i < lattice.site_count(); ++i) out.push_back(std::abs(lattice.oam(i)) * delta);
  return out;
}

void BeamSplitterSpec::validate() const {
  require(std::norm(r) + std::norm(t) <= 1.0 + 1e-12, "beam splitter must satisfy |r|^2+|t|^2 <= 1");
}

double tunneling_from_bs(const BeamSplitterSpec& bs, double omega_f) {
  bs.validate();
  return omega_f * std::norm(bs.r) / (kTwoPi * (1.0 + std::norm(bs.t)));
}

double kappa_from_tbs(cplx r_p, double omega_f) {
  require(std::norm(r_p) <= 1.0, "|r_P| must not exceed 1");
  return std::norm(r_p) * omega_f / kTwoPi;
}

void DisorderSpec::validate() const {
  require(sigma_phase >= 0.0 && sigma_detune >= 0.0, "disorder strengths must be non-negative");
  require(trials >= 1, "need at least one disorder trial");
}

DisorderDraw sample_disorder(const DisorderSpec& spec, int trial, const LatticeConfig& lattice) {
  spec.validate();
  require(trial >= 0, "trial index must be non-negative");
  std::seed_seq seq{static_cast<std::uint32_t>(spec.seed), static_cast<std::uint32_t>(spec.seed >> 32),
                    static_cast<std::uint32_t>(trial), 0x6f616du};
  std::mt19937_64 rng(seq);
  std::normal_distribution<double> gauss(0.0, 1.0);
  DisorderDraw d;
  if (spec.kind == DisorderKind::Phase) {
    d.phase_offset.beta0 = spec.sigma_phase * gauss(rng);
    d.phase_offset.beta1 = spec.sigma_phase * gauss(rng);
    return d;
  }
  const double global = gauss(rng);
  for (int i = 0; i < lattice.site_count(); ++i) {
    const double g = spec.per_site ? gauss(rng) : global;
    d.onsite_shift.push_back(std::abs(lattice.oam(i)) * spec.sigma_detune * g);
  }
  return d;
}

}  // namespace oampump

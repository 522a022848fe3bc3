#include "core/model.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "core/error.hpp"

namespace oampump {

void RiceMeleParams::validate() const {
  require(std::isfinite(j0) && j0 > 0.0, "J0 must be positive");
  require(std::isfinite(j1) && j1 > 0.0, "J1 must be positive");
  require(std::isfinite(alpha0) && std::isfinite(alpha1), "alpha must be finite");
}

// ---------------------------------------------------------------------------
// Segments and schedules
// ---------------------------------------------------------------------------

double PumpSegment::progress(double u) const {
  u = std::clamp(u, 0.0, 1.0);
  switch (ramp) {
    case Ramp::Linear:
      return u;
    case Ramp::RaisedCosine:
      return 0.5 - 0.5 * std::cos(kPi * u);
    case Ramp::MixingAngle: {
      if (u <= 0.0 || u >= 1.0) return u;
      const double theta0 = std::atan(mixing_ratio);
      const double theta = theta0 + (kPi - 2.0 * theta0) * u;
      const double c = std::clamp(mixing_ratio * std::cos(theta) / std::sin(theta), -1.0, 1.0);
      return std::acos(c) / kPi;
    }
  }
  return u;
}

PhasePoint PumpSegment::at(double u) const {
  const double s = progress(u);
  if (shape == Shape::Arc) {
    const double phi = phi_start + (phi_end - phi_start) * s;
    return {center.beta0 + radius * std::cos(phi), center.beta1 + radius * std::sin(phi)};
  }
  return {start.beta0 + (end.beta0 - start.beta0) * s,
          start.beta1 + (end.beta1 - start.beta1) * s};
}

PumpSegment PumpSegment::reversed() const {
  // All ramps satisfy s(1-u) = 1 - s(u), so swapping the endpoints suffices.
  PumpSegment r = *this;
  std::swap(r.start, r.end);
  std::swap(r.phi_start, r.phi_end);
  return r;
}

namespace {

bool is_half_integer(double n) {
  return std::abs(2.0 * n - std::round(2.0 * n)) < 1e-9;
}

double wrap_distance(double a) {
  const double r = std::remainder(a, kTwoPi);
  return std::abs(r);
}

}  // namespace

PumpSchedule::PumpSchedule(std::vector<PumpSegment> loop, double n_cycles,
                           double start_time)
    : segments_(std::move(loop)), n_cycles_(n_cycles), start_time_(start_time) {
  require(!segments_.empty(), "pump loop needs at least one segment");
  require(std::isfinite(n_cycles) && n_cycles >= 0.0 && is_half_integer(n_cycles),
          "n_cycles must be a non-negative half-integer");
  require(std::isfinite(start_time), "start time must be finite");
  for (const auto& s : segments_) {
    require(std::isfinite(s.duration) && s.duration > 0.0,
            "segment durations must be positive");
    require(s.ramp != Ramp::MixingAngle || s.mixing_ratio > 0.0,
            "mixing-angle ramp needs a positive J1/J0 ratio");
    period_ += s.duration;
  }
  for (std::size_t i = 1; i < segments_.size(); ++i) {
    const PhasePoint a = segments_[i - 1].last();
    const PhasePoint b = segments_[i].first();
    require(std::hypot(a.beta0 - b.beta0, a.beta1 - b.beta1) < 1e-9,
            "pump segments must be contiguous");
  }
  hold_ = segments_.front().first();
}

PumpSchedule PumpSchedule::frozen(PhasePoint point) {
  PumpSegment s;
  s.duration = 1.0;
  s.start = s.end = point;
  PumpSchedule out({s}, 0.0);
  out.segments_.clear();
  out.period_ = 0.0;
  out.hold_ = point;
  return out;
}

PhasePoint PumpSchedule::loop_at(double tau) const {
  if (segments_.empty()) return hold_;
  double acc = 0.0;
  for (const auto& s : segments_) {
    if (tau <= acc + s.duration) return s.at((tau - acc) / s.duration);
    acc += s.duration;
  }
  return segments_.back().last();
}

PhasePoint PumpSchedule::lap_shift() const {
  if (segments_.empty()) return {};
  const PhasePoint a = segments_.front().first();
  const PhasePoint b = segments_.back().last();
  return {b.beta0 - a.beta0, b.beta1 - a.beta1};
}

double PumpSchedule::closure_error() const {
  const PhasePoint d = lap_shift();
  return std::max(wrap_distance(d.beta0), wrap_distance(d.beta1));
}

PhasePoint PumpSchedule::at(double t) const {
  if (segments_.empty() || t <= start_time_) return hold_;
  double tau = std::min(t, end_time()) - start_time_;
  double laps = std::floor(tau / period_);
  double rest = tau - laps * period_;
  // The end of a whole lap is reported as the end of that lap, not the start
  // of the next, so the final point carries the accumulated phase.
  if (rest == 0.0 && laps > 0.0) {
    laps -= 1.0;
    rest = period_;
  }
  const PhasePoint shift = lap_shift();
  const PhasePoint p = loop_at(rest);
  return {p.beta0 + laps * shift.beta0, p.beta1 + laps * shift.beta1};
}

std::vector<double> PumpSchedule::breakpoints(double t0, double t1) const {
  std::vector<double> out;
  if (segments_.empty()) return out;
  auto push = [&](double t) {
    if (t > t0 && t < t1) out.push_back(t);
  };
  push(start_time_);
  const double stop = end_time();
  const int laps = static_cast<int>(std::ceil(n_cycles_)) + 1;
  for (int lap = 0; lap < laps; ++lap) {
    double acc = start_time_ + lap * period_;
    for (const auto& s : segments_) {
      acc += s.duration;
      if (acc > stop + 1e-12) break;
      push(acc);
    }
  }
  push(stop);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end(),
                        [](double a, double b) { return std::abs(a - b) < 1e-12; }),
            out.end());
  return out;
}

std::vector<SingularPoint> PumpSchedule::singular_points(double t0, double t1) const {
  std::vector<SingularPoint> out;
  if (segments_.empty()) return out;
  const double stop = end_time();
  const int laps = static_cast<int>(std::ceil(n_cycles_)) + 1;
  for (int lap = 0; lap < laps; ++lap) {
    double acc = start_time_ + lap * period_;
    for (const auto& s : segments_) {
      const double a = acc, b = acc + s.duration;
      acc = b;
      if (a > stop + 1e-12) break;
      if (s.ramp != Ramp::MixingAngle) continue;
      const double w = 0.125 * s.duration;
      for (double t : {a, std::min(b, stop)})
        if (t + w >= t0 && t - w <= t1) out.push_back({t, w});
    }
  }
  std::sort(out.begin(), out.end(), [](const SingularPoint& x, const SingularPoint& y) { return x.time < y.time; });
  out.erase(std::unique(out.begin(), out.end(),
                        [](const SingularPoint& x, const SingularPoint& y) { return std::abs(x.time - y.time) < 1e-12; }),
            out.end());
  return out;
}

PumpSchedule PumpSchedule::reversed() const {
  if (segments_.empty()) return *this;
  std::vector<PumpSegment> rev;
  rev.reserve(segments_.size());
  for (auto it = segments_.rbegin(); it != segments_.rend(); ++it) rev.push_back(it->reversed());
  return PumpSchedule(std::move(rev), n_cycles_, start_time_);
}

PumpSchedule PumpSchedule::with_cycles(double n_cycles) const {
  if (segments_.empty()) return *this;
  return PumpSchedule(segments_, n_cycles, start_time_);
}

PumpSchedule PumpSchedule::delayed(double start_time) const {
  if (segments_.empty()) return *this;
  return PumpSchedule(segments_, n_cycles_, start_time);
}

PumpSchedule default_pump_loop(const RiceMeleParams& p, double period,
                               Orientation orientation, double n_cycles,
                               const PumpLoopShape& shape) {
  p.validate();
  require(std::isfinite(period) && period > 0.0, "pump period must be positive");
  require(shape.beta1_fraction > 0.0 && shape.beta1_fraction < 0.5,
          "beta1 sweep fraction must lie in (0, 0.5)");
  const double f1 = shape.beta1_fraction;
  const double f0 = 0.5 - f1;
  const double ratio = p.j1 / p.j0;

  auto line = [&](double frac, PhasePoint a, PhasePoint b, Ramp ramp) {
    PumpSegment s;
    s.duration = frac * period;
    s.start = a;
    s.end = b;
    s.ramp = ramp;
    s.mixing_ratio = ramp == Ramp::MixingAngle ? ratio : 0.0;
    return s;
  };
  std::vector<PumpSegment> segs{
      line(f0, {0.0, 0.0}, {kPi, 0.0}, shape.beta0_ramp),
      line(f1, {kPi, 0.0}, {kPi, kPi}, shape.beta1_ramp),
      line(f0, {kPi, kPi}, {kTwoPi, kPi}, shape.beta0_ramp),
      line(f1, {kTwoPi, kPi}, {kTwoPi, kTwoPi}, shape.beta1_ramp),
  };
  PumpSchedule loop(std::move(segs), n_cycles);
  return orientation == Orientation::Clockwise ? loop : loop.reversed();
}

PumpSchedule circular_pump_loop(PhasePoint center, double radius, double period,
                                Orientation orientation, double n_cycles) {
  require(std::isfinite(period) && period > 0.0, "pump period must be positive");
  require(std::isfinite(radius) && radius >= 0.0, "radius must be non-negative");
  PumpSegment s;
  s.duration = period;
  s.shape = PumpSegment::Shape::Arc;
  s.center = center;
  s.radius = radius;
  // Start on the Delta < 0, deltaJ > 0 side like the rectangular loop.
  s.phi_start = -0.75 * kPi;
  s.phi_end = s.phi_start + (orientation == Orientation::Clockwise ? kTwoPi : -kTwoPi);
  return PumpSchedule({s}, n_cycles);
}

// ---------------------------------------------------------------------------
// Couplings and Bloch Hamiltonian
// ---------------------------------------------------------------------------

DerivedCouplings derived_couplings(double beta0, double beta1, const RiceMeleParams& p) {
  const cplx phase = std::polar(1.0, beta1);
  return {-4.0 * p.j0 * std::cos(beta0), p.j1 * (1.0 + phase), p.j1 * (1.0 - phase)};
}

double BlochVector::norm() const { return std::sqrt(x * x + y * y + z * z); }

Eigen::Matrix2cd BlochVector::matrix() const {
  Eigen::Matrix2cd m;
  m << cplx(z, 0.0), cplx(x, -y), cplx(x, y), cplx(-z, 0.0);
  return m;
}

BlochVector bloch_hamiltonian(double k, double beta0, double beta1,
                              const RiceMeleParams& p) {
  const DerivedCouplings c = derived_couplings(beta0, beta1, p);
  const cplx w = -(c.j_plus + std::conj(c.j_minus) * std::polar(1.0, k));
  return {w.real(), w.imag(), 0.5 * c.delta};
}

// ---------------------------------------------------------------------------
// Lattice
// ---------------------------------------------------------------------------

std::optional<int> LatticeConfig::index_of(int l) const {
  if (l < l_min || l > l_max || (l - l_min) % step != 0) return std::nullopt;
  return (l - l_min) / step;
}

void LatticeConfig::validate() const {
  require(step >= 1, "SLM step must be >= 1");
  require(l_max > l_min, "lattice needs at least two sites");
  require((l_max - l_min) % step == 0, "lattice bounds must be a whole number of steps apart");
  require(boundary == Boundary::Open || site_count() % 2 == 0,
          "periodic lattice must hold whole unit cells");
}

LatticeConfig LatticeConfig::centered(int l0, int n_sites, int step, Boundary boundary) {
  require(n_sites >= 2, "lattice needs at least two sites");
  require(step >= 1, "SLM step must be >= 1");
  const int below = 2 * ((n_sites / 2) / 2);
  LatticeConfig c;
  c.l_min = l0 - below * step;
  c.l_max = c.l_min + (n_sites - 1) * step;
  c.step = step;
  c.boundary = boundary;
  c.validate();
  return c;
}

cplx LatticeState::amplitude(int l) const {
  const auto i = lattice.index_of(l);
  return i ? amplitudes[*i] : cplx(0.0);
}

LatticeState LatticeState::localized(const LatticeConfig& lattice, int l) {
  lattice.validate();
  const auto i = lattice.index_of(l);
  require(i.has_value(), "site l=" + std::to_string(l) + " is outside the lattice");
  LatticeState s{lattice, Eigen::VectorXcd::Zero(lattice.site_count()), 0.0};
  s.amplitudes[*i] = 1.0;
  return s;
}

Eigen::MatrixXcd ChainHamiltonian::dense() const {
  const int n = size();
  Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(n, n);
  for (int i = 0; i < n; ++i) h(i, i) = onsite[i];
  for (int i = 0; i < hopping.size(); ++i) {
    const int a = i;
    const int b = (i + 1) % n;
    h(b, a) += hopping[i];
    h(a, b) += std::conj(hopping[i]);
  }
  return h;
}

void ChainHamiltonian::apply(const Eigen::VectorXcd& x, Eigen::VectorXcd& y) const {
  const int n = size();
  y.resize(n);
  const cplx* xs = x.data();
  cplx* ys = y.data();
  const cplx* hs = hopping.data();
  const int m = static_cast<int>(hopping.size());
  for (int i = 0; i < n; ++i) ys[i] = onsite[i] * xs[i];
  for (int i = 0; i < std::min(m, n - 1); ++i) {
    ys[i + 1] += hs[i] * xs[i];
    ys[i] += std::conj(hs[i]) * xs[i + 1];
  }
  if (m == n && n > 0) {  // periodic closing bond n-1 -> 0
    ys[0] += hs[n - 1] * xs[n - 1];
    ys[n - 1] += std::conj(hs[n - 1]) * xs[0];
  }
}

double ChainHamiltonian::norm_bound() const {
  const int n = size();
  Eigen::VectorXd row = onsite.cwiseAbs();
  for (int i = 0; i < hopping.size(); ++i) {
    const double a = std::abs(hopping[i]);
    row[i] += a;
    row[(i + 1) % n] += a;
  }
  return n == 0 ? 0.0 : row.maxCoeff();
}

ChainHamiltonian ChainHamiltonian::combine(double a, const ChainHamiltonian& A, double b,
                                           const ChainHamiltonian& B) {
  return {a * A.onsite + b * B.onsite, a * A.hopping + b * B.hopping, A.periodic};
}

ChainHamiltonian chain_hamiltonian(const LatticeConfig& lattice, PhasePoint beta,
                                   const RiceMeleParams& p,
                                   std::span<const double> onsite_shift) {
  lattice.validate();
  const int n = lattice.site_count();
  require(onsite_shift.empty() || static_cast<int>(onsite_shift.size()) == n,
          "onsite shift must have one entry per site");
  const bool periodic = lattice.boundary == Boundary::Periodic;
  ChainHamiltonian h;
  h.periodic = periodic;
  h.onsite.resize(n);
  h.hopping.resize(periodic ? n : n - 1);
  for (int i = 0; i < n; ++i) {
    const double l = lattice.oam(i);
    h.onsite[i] = -2.0 * p.j0 * std::cos(l * p.alpha0 + beta.beta0) +
                  (onsite_shift.empty() ? 0.0 : onsite_shift[i]);
  }
  for (int i = 0; i < h.hopping.size(); ++i) {
    const double l = lattice.oam(i);
    h.hopping[i] = -p.j1 * (std::polar(1.0, l * p.alpha1 + beta.beta1) + 1.0);
  }
  return h;
}

Eigen::MatrixXcd real_space_hamiltonian(const LatticeConfig& lattice, double beta0,
                                        double beta1, const RiceMeleParams& p,
                                        std::span<const cplx> onsite_shift) {
  std::vector<double> shift;
  shift.reserve(onsite_shift.size());
  for (const cplx& v : onsite_shift) {
    require(v.imag() == 0.0 && std::isfinite(v.real()),
            "onsite shift must be real (Hermitian Hamiltonian)");
    shift.push_back(v.real());
  }
  return chain_hamiltonian(lattice, {beta0, beta1}, p, shift).dense();
}

}  // namespace oampump

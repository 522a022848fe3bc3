#include "core/topology.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "core/error.hpp"
#include "core/propagator.hpp"

namespace oampump {

double gap_tolerance(const RiceMeleParams& p) { return 1e-6 * p.j1; }

Eigen::Vector2cd bloch_eigenvector(const BlochVector& h, Band band) {
  const double r = h.norm();
  const cplx w(h.x, h.y);
  Eigen::Vector2cd a, b;
  if (r == 0.0) {
    return band == Band::Lower ? Eigen::Vector2cd(1.0, 0.0) : Eigen::Vector2cd(0.0, 1.0);
  }
  if (band == Band::Lower) {
    a << r - h.z, -w;
    b << -std::conj(w), r + h.z;
  } else {
    a << std::conj(w), r - h.z;
    b << r + h.z, w;
  }
  Eigen::Vector2cd v = a.squaredNorm() >= b.squaredNorm() ? a : b;
  v.normalize();
  const int big = std::abs(v[0]) >= std::abs(v[1]) ? 0 : 1;
  v *= std::conj(v[big]) / std::abs(v[big]);
  return v;
}

namespace {

void require_loop(const PumpSchedule& s) {
  require(!s.is_frozen() && s.period() > 0.0, "topology needs a pump loop with positive period");
  require(s.closed(1e-9), "pump loop is not closed modulo 2*pi");
}

double direct_gap(PhasePoint b, const RiceMeleParams& p) {
  const DerivedCouplings c = derived_couplings(b, p);
  const double dj = std::abs(c.j_plus) - std::abs(c.j_minus);
  return 2.0 * std::sqrt(0.25 * c.delta * c.delta + dj * dj);
}

Eigen::Vector3d unit(const BlochVector& h) {
  Eigen::Vector3d v(h.x, h.y, h.z);
  const double n = v.norm();
  return n > 0.0 ? Eigen::Vector3d(v / n) : v;
}

double link(const Eigen::Vector2cd& a, const Eigen::Vector2cd& b) {
  return std::arg(a.dot(b));
}

}  // namespace

double loop_min_gap(const PumpSchedule& schedule, const RiceMeleParams& p) {
  require_loop(schedule);
  auto gap = [&](double tau) { return direct_gap(schedule.loop_at(tau), p); };
  double best = std::numeric_limits<double>::infinity();
  double acc = 0.0;
  for (const auto& seg : schedule.segments()) {
    const int n = 2000;
    double bt = acc, bg = gap(acc);
    for (int i = 1; i <= n; ++i) {
      const double tau = acc + seg.duration * i / n;
      const double g = gap(tau);
      if (g < bg) { bg = g; bt = tau; }
    }
    double lo = std::max(acc, bt - seg.duration / n), hi = std::min(acc + seg.duration, bt + seg.duration / n);
    const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
    for (int it = 0; it < 100; ++it) {
      const double m1 = hi - phi * (hi - lo), m2 = lo + phi * (hi - lo);
      if (gap(m1) < gap(m2)) hi = m2; else lo = m1;
    }
    best = std::min({best, bg, gap(0.5 * (lo + hi))});
    acc += seg.duration;
  }
  return best;
}

BandGrid band_energies(const PumpSchedule& schedule, const RiceMeleParams& p, int n_k,
                       int n_t) {
  require(n_k >= 2 && n_t >= 2, "grid needs at least 2 points per axis");
  require_loop(schedule);
  p.validate();
  BandGrid g;
  g.n_k = n_k;
  g.n_t = n_t;
  g.lower.resize(n_k, n_t);
  g.upper.resize(n_k, n_t);
  for (int m = 0; m < n_k; ++m) g.k.push_back(kTwoPi * m / n_k);
  for (int j = 0; j < n_t; ++j) g.t.push_back(schedule.period() * j / n_t);
  g.grid_min_gap = std::numeric_limits<double>::infinity();
  for (int j = 0; j < n_t; ++j) {
    const PhasePoint b = schedule.loop_at(g.t[j]);
    for (int m = 0; m < n_k; ++m) {
      const double e = bloch_hamiltonian(g.k[m], b, p).norm();
      g.lower(m, j) = -e;
      g.upper(m, j) = e;
      g.grid_min_gap = std::min(g.grid_min_gap, 2.0 * e);
    }
  }
  g.min_gap = std::min(g.grid_min_gap, loop_min_gap(schedule, p));
  return g;
}

EigenGrid eigen_grid(const PumpSchedule& schedule, const RiceMeleParams& p, Band band,
                     int n_k, int n_t) {
  require(n_k >= 2 && n_t >= 2, "grid needs at least 2 points per axis");
  require_loop(schedule);
  p.validate();
  EigenGrid g;
  g.n_k = n_k;
  g.n_t = n_t;
  g.band = band;
  g.u.resize(static_cast<std::size_t>(n_k) * n_t);
  g.hhat.resize(g.u.size());
  g.min_gap = std::numeric_limits<double>::infinity();
  for (int j = 0; j < n_t; ++j) {
    const PhasePoint b = schedule.loop_at(schedule.period() * j / n_t);
    for (int m = 0; m < n_k; ++m) {
      const BlochVector h = bloch_hamiltonian(kTwoPi * m / n_k, b, p);
      g.min_gap = std::min(g.min_gap, 2.0 * h.norm());
      g.u[m + n_k * j] = bloch_eigenvector(h, band);
      g.hhat[m + n_k * j] = unit(h);
    }
  }
  if (g.min_gap < gap_tolerance(p))
    throw Error(ErrorCode::GapClosed,
                "band gap closes on the (k,t) grid (min gap " + std::to_string(g.min_gap) +
                    "); the loop passes through the critical point");
  return g;
}

CurvatureGrid plaquette_flux(const EigenGrid& g) {
  CurvatureGrid c;
  c.n_k = g.n_k;
  c.n_t = g.n_t;
  c.band = g.band;
  c.flux.resize(g.n_k, g.n_t);
  for (int j = 0; j < g.n_t; ++j) {
    const int j1 = (j + 1) % g.n_t;
    for (int m = 0; m < g.n_k; ++m) {
      const int m1 = (m + 1) % g.n_k;
      const cplx w = g.at(m, j).dot(g.at(m1, j)) * g.at(m1, j).dot(g.at(m1, j1)) *
                     g.at(m1, j1).dot(g.at(m, j1)) * g.at(m, j1).dot(g.at(m, j));
      double f = std::arg(w);
      if (f == -kPi) f = kPi;
      c.flux(m, j) = f;
    }
  }
  return c;
}

CurvatureGrid berry_curvature(const PumpSchedule& schedule, const RiceMeleParams& p,
                              Band band, int n_k, int n_t) {
  return plaquette_flux(eigen_grid(schedule, p, band, n_k, n_t));
}

int chern_number(const PumpSchedule& schedule, const RiceMeleParams& p, Band band, int n_k,
                 int n_t) {
  return static_cast<int>(std::lround(berry_curvature(schedule, p, band, n_k, n_t).total() / kTwoPi));
}

int winding_number(const PumpSchedule& schedule, const RiceMeleParams& p, Band band, int n_k,
                   int n_t) {
  const EigenGrid g = eigen_grid(schedule, p, band, n_k, n_t);
  const double s = band == Band::Lower ? -1.0 : 1.0;
  auto solid = [](const Eigen::Vector3d& a, const Eigen::Vector3d& b, const Eigen::Vector3d& c) {
    return 2.0 * std::atan2(a.dot(b.cross(c)), 1.0 + a.dot(b) + b.dot(c) + c.dot(a));
  };
  double total = 0.0;
  for (int j = 0; j < g.n_t; ++j) {
    const int j1 = (j + 1) % g.n_t;
    for (int m = 0; m < g.n_k; ++m) {
      const int m1 = (m + 1) % g.n_k;
      const Eigen::Vector3d a = s * g.hhat[m + g.n_k * j];
      const Eigen::Vector3d b = s * g.hhat[m1 + g.n_k * j];
      const Eigen::Vector3d c = s * g.hhat[m1 + g.n_k * j1];
      const Eigen::Vector3d d = s * g.hhat[m + g.n_k * j1];
      total += solid(a, b, c) + solid(a, c, d);
    }
  }
  return static_cast<int>(std::lround(total / (2.0 * kTwoPi)));
}

double berry_phase(double k, const PumpSchedule& schedule, const RiceMeleParams& p,
                   Band band, double t, int steps_per_period) {
  const double t0 = schedule.start_time();
  require(t >= t0 - 1e-12 && t <= schedule.end_time() + 1e-12,
          "time outside the pump schedule");
  require(steps_per_period >= 4, "need at least 4 steps per period");
  if (t <= t0 || schedule.is_frozen()) return 0.0;
  const double tol = gap_tolerance(p);
  auto state = [&](double tt) {
    const BlochVector h = bloch_hamiltonian(k, schedule.at(tt), p);
    if (2.0 * h.norm() < tol) throw Error(ErrorCode::GapClosed, "band gap closes along the path");
    return bloch_eigenvector(h, band);
  };
  const auto grid =
      step_grid(t0, t, schedule.period() / steps_per_period, schedule.breakpoints(t0, t));
  Eigen::Vector2cd prev = state(t0);
  double gamma = 0.0;
  for (double tt : grid) {
    const Eigen::Vector2cd cur = state(tt);
    gamma -= link(prev, cur);
    prev = cur;
  }
  return gamma;
}

double band_velocity(double k, PhasePoint beta, const RiceMeleParams& p, Band band) {
  const DerivedCouplings c = derived_couplings(beta, p);
  const cplx e = std::polar(1.0, k);
  const cplx w = -(c.j_plus + std::conj(c.j_minus) * e);
  const cplx dw = -std::conj(c.j_minus) * cplx(0.0, 1.0) * e;
  const double r = std::sqrt(std::norm(w) + 0.25 * c.delta * c.delta);
  if (r == 0.0) return 0.0;
  const double v = std::real(std::conj(w) * dw) / r;
  return band == Band::Lower ? -v : v;
}

double local_curvature(double k, double t, const PumpSchedule& schedule,
                       const RiceMeleParams& p, Band band) {
  const double dk = 1e-4;
  const double dt = 1e-4;
  auto u = [&](double kk, double tt) {
    const BlochVector h = bloch_hamiltonian(kk, schedule.at(tt), p);
    if (2.0 * h.norm() < gap_tolerance(p))
      throw Error(ErrorCode::GapClosed, "band gap closes at the requested point");
    return bloch_eigenvector(h, band);
  };
  const Eigen::Vector2cd a = u(k - 0.5 * dk, t - 0.5 * dt);
  const Eigen::Vector2cd b = u(k + 0.5 * dk, t - 0.5 * dt);
  const Eigen::Vector2cd c = u(k + 0.5 * dk, t + 0.5 * dt);
  const Eigen::Vector2cd d = u(k - 0.5 * dk, t + 0.5 * dt);
  const cplx w = a.dot(b) * b.dot(c) * c.dot(d) * d.dot(a);
  return std::arg(w) / (dk * dt);
}

double flat_band_approx(double k, double beta1, const RiceMeleParams& p, Band band) {
  p.validate();
  const double e = 2.0 * p.j0 + p.j1 * p.j1 / p.j0 +
                   p.j1 * p.j1 / (2.0 * p.j0) * (std::cos(k) - std::cos(k - 2.0 * beta1));
  return band == Band::Upper ? e : -e;
}

}  // namespace oampump

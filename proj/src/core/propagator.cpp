#include "core/propagator.hpp"

#include <algorithm>
#include <cmath>

#include "core/error.hpp"

namespace oampump {

Eigen::VectorXcd expmv(const ChainHamiltonian& H, double h, const Eigen::VectorXcd& v) {
  const double scale = std::abs(h) * H.norm_bound();
  const int parts = std::max(1, static_cast<int>(std::ceil(scale)));
  const cplx factor(0.0, -h / parts);
  Eigen::VectorXcd out = v;
  Eigen::VectorXcd term(v.size()), tmp(v.size());
  for (int s = 0; s < parts; ++s) {
    term = out;
    Eigen::VectorXcd acc = out;
    const double ref2 = 1e-34 * out.squaredNorm();
    for (int k = 1; k < 40; ++k) {
      H.apply(term, tmp);
      term = tmp * (factor / static_cast<double>(k));
      acc += term;
      if (term.squaredNorm() <= ref2) break;
    }
    out = std::move(acc);
  }
  return out;
}

void magnus4_step(const HamiltonianFn& H, double t, double h, Eigen::VectorXcd& psi) {
  static const double c1 = 0.5 - std::sqrt(3.0) / 6.0;
  static const double c2 = 0.5 + std::sqrt(3.0) / 6.0;
  static const double a1 = (3.0 - 2.0 * std::sqrt(3.0)) / 12.0;
  static const double a2 = (3.0 + 2.0 * std::sqrt(3.0)) / 12.0;
  const ChainHamiltonian h1 = H(t + c1 * h);
  const ChainHamiltonian h2 = H(t + c2 * h);
  psi = expmv(ChainHamiltonian::combine(a2, h1, a1, h2), h, psi);
  psi = expmv(ChainHamiltonian::combine(a1, h1, a2, h2), h, psi);
}

std::vector<double> step_grid(double t0, double t1, double max_step,
                              const std::vector<double>& breaks, bool even_count) {
  require(max_step > 0.0, "step must be positive");
  std::vector<double> nodes{t0};
  for (double b : breaks)
    if (b > t0 + 1e-12 && b < t1 - 1e-12) nodes.push_back(b);
  nodes.push_back(t1);
  std::sort(nodes.begin(), nodes.end());
  std::vector<double> out;
  for (std::size_t i = 1; i < nodes.size(); ++i) {
    const double a = nodes[i - 1], b = nodes[i];
    if (b - a <= 1e-13) continue;
    int n = std::max(1, static_cast<int>(std::ceil((b - a) / max_step - 1e-9)));
    if (even_count && n % 2) ++n;
    for (int j = 1; j < n; ++j) out.push_back(a + (b - a) * j / n);
    out.push_back(b);
  }
  return out;
}

namespace {

// Stretched clock: phi' = (width / d)^(2/3) within width of a singular point, 1 elsewhere.
double stretched(double t, const std::vector<SingularPoint>& singular) {
  double phi = t;
  for (const SingularPoint& p : singular) {
    const double d = std::abs(t - p.time), w = p.width;
    const double c = d < w ? 3.0 * std::cbrt(w * w * d) - d : 2.0 * w;
    phi += t < p.time ? -c : c;
  }
  return phi;
}

}  // namespace

std::vector<double> step_grid(double t0, double t1, double max_step,
                              const std::vector<double>& breaks,
                              const std::vector<SingularPoint>& singular) {
  if (singular.empty()) return step_grid(t0, t1, max_step, breaks);
  require(max_step > 0.0, "step must be positive");
  std::vector<double> nodes{t0};
  for (double b : breaks)
    if (b > t0 + 1e-12 && b < t1 - 1e-12) nodes.push_back(b);
  nodes.push_back(t1);
  std::sort(nodes.begin(), nodes.end());
  std::vector<double> out;
  for (std::size_t i = 1; i < nodes.size(); ++i) {
    const double a = nodes[i - 1], b = nodes[i];
    if (b - a <= 1e-13) continue;
    const double pa = stretched(a, singular), pb = stretched(b, singular);
    const int n = std::max(1, static_cast<int>(std::ceil((pb - pa) / max_step - 1e-9)));
    double lo = a;
    for (int j = 1; j < n; ++j) {
      const double target = pa + (pb - pa) * j / n;
      double l = lo, r = b;
      for (int it = 0; it < 60 && r - l > 1e-15 * std::max(1.0, std::abs(b)); ++it) {
        const double m = 0.5 * (l + r);
        (stretched(m, singular) < target ? l : r) = m;
      }
      lo = 0.5 * (l + r);
      out.push_back(lo);
    }
    out.push_back(b);
  }
  return out;
}

}  // namespace oampump

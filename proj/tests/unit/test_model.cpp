#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "core/error.hpp"
#include "core/model.hpp"
#include "core/topology.hpp"

using namespace oampump;

TEST_CASE("derived couplings at the loop corners") {
  RiceMeleParams p{1.0, 1.0};
  auto c = derived_couplings(0.0, 0.0, p);
  CHECK(c.delta == doctest::Approx(-4.0));
  CHECK(std::abs(c.j_plus - cplx(2.0)) < 1e-15);
  CHECK(std::abs(c.j_minus) < 1e-15);

  c = derived_couplings(kPi, kPi, p);
  CHECK(c.delta == doctest::Approx(4.0));
  CHECK(std::abs(c.j_plus) < 1e-15);
  CHECK(std::abs(c.j_minus - cplx(2.0)) < 1e-15);

  c = derived_couplings(kPi / 2, kPi / 2, RiceMeleParams{5.0, 1.0});
  CHECK(std::abs(c.delta) < 1e-14);
  CHECK(std::abs(c.j_plus) == doctest::Approx(std::sqrt(2.0)));
  CHECK(std::abs(c.dimerization()) < 1e-14);
}

TEST_CASE("tunneling sum rule and dimerization formula") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-10.0, 10.0);
  RiceMeleParams p{3.0, 1.7};
  for (int i = 0; i < 100; ++i) {
    const double b1 = u(rng);
    const auto c = derived_couplings(u(rng), b1, p);
    CHECK(std::norm(c.j_plus) + std::norm(c.j_minus) == doctest::Approx(4 * p.j1 * p.j1));
    const double dj = 2 * p.j1 * (std::abs(std::cos(b1 / 2)) - std::abs(std::sin(b1 / 2)));
    CHECK(c.dimerization() == doctest::Approx(dj).epsilon(1e-12));
  }
}

TEST_CASE("Bloch vector at the flat start point") {
  RiceMeleParams p{5.0, 1.0};
  const BlochVector h = bloch_hamiltonian(0.0, 0.0, 0.0, p);
  CHECK(h.x == doctest::Approx(-2.0));
  CHECK(std::abs(h.y) < 1e-15);
  CHECK(h.z == doctest::Approx(-10.0));
  CHECK(h.energy(Band::Upper) == doctest::Approx(std::sqrt(104.0)));
  CHECK(h.energy(Band::Lower) == doctest::Approx(-std::sqrt(104.0)));
}

TEST_CASE("gap closes at the critical point") {
  RiceMeleParams p{5.0, 1.0};
  double best = 1e9;
  for (int i = 0; i <= 4000; ++i)
    best = std::min(best, bloch_hamiltonian(kTwoPi * i / 4000, kPi / 2, kPi / 2, p).norm());
  CHECK(best < 1e-12);
}

TEST_CASE("Bloch energies match a direct 2x2 eigensolve") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.0, kTwoPi);
  RiceMeleParams p{2.5, 0.8};
  for (int i = 0; i < 100; ++i) {
    const BlochVector h = bloch_hamiltonian(u(rng), u(rng), u(rng), p);
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2cd> es(h.matrix());
    CHECK(es.eigenvalues()[0] == doctest::Approx(h.energy(Band::Lower)).epsilon(1e-12));
    CHECK(es.eigenvalues()[1] == doctest::Approx(h.energy(Band::Upper)).epsilon(1e-12));
  }
}

TEST_CASE("periodic chain spectrum equals the Bloch bands") {
  RiceMeleParams p{5.0, 1.0};
  LatticeConfig cfg{0, 39, 1, Boundary::Periodic};
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, kTwoPi);
  for (int trial = 0; trial < 10; ++trial) {
    const double b0 = u(rng), b1 = u(rng);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(real_space_hamiltonian(cfg, b0, b1, p));
    std::vector<double> bloch;
    for (int m = 0; m < 20; ++m) {
      const double e = bloch_hamiltonian(kTwoPi * m / 20, b0, b1, p).norm();
      bloch.push_back(e);
      bloch.push_back(-e);
    }
    std::sort(bloch.begin(), bloch.end());
    double dev = 0.0;
    for (int i = 0; i < 40; ++i) dev = std::max(dev, std::abs(es.eigenvalues()[i] - bloch[i]));
    CHECK(dev < 1e-10);
  }
}

TEST_CASE("real-space Hamiltonian structure") {
  RiceMeleParams p{5.0, 1.0};
  LatticeConfig cfg{-6, 7};
  const double b0 = 0.3;
  const Eigen::MatrixXcd H = real_space_hamiltonian(cfg, b0, 0.0, p);
  CHECK((H - H.adjoint()).norm() < 1e-14);
  const double half_delta = 0.5 * derived_couplings(b0, 0.0, p).delta;
  for (int i = 0; i < cfg.site_count(); ++i) {
    const int l = cfg.oam(i);
    CHECK(H(i, i).real() == doctest::Approx((l % 2 == 0 ? 1 : -1) * half_delta));
  }
  // Fully dimerized: only (2j, 2j+1) pairs couple, with -2 J1.
  for (int i = 0; i + 1 < cfg.site_count(); ++i) {
    const int l = cfg.oam(i);
    if (l % 2 == 0) CHECK(std::abs(H(i + 1, i) - cplx(-2.0)) < 1e-14);
    else CHECK(std::abs(H(i + 1, i)) < 1e-14);
  }
  std::vector<cplx> bad(cfg.site_count(), 0.0);
  bad[3] = cplx(0.0, 0.1);
  CHECK_THROWS_AS(real_space_hamiltonian(cfg, 0.0, 0.0, p, bad), Error);
}

TEST_CASE("unit-cell translation symmetry") {
  RiceMeleParams p{5.0, 1.0};
  const ChainHamiltonian a = chain_hamiltonian({0, 19, 1, Boundary::Periodic}, {0.7, 1.9}, p);
  const ChainHamiltonian b = chain_hamiltonian({2, 21, 1, Boundary::Periodic}, {0.7, 1.9}, p);
  CHECK((a.onsite - b.onsite).norm() < 1e-12);
  CHECK((a.hopping - b.hopping).norm() < 1e-12);
}

TEST_CASE("chain matvec matches the dense matrix") {
  RiceMeleParams p{2.0, 1.0};
  for (Boundary bc : {Boundary::Open, Boundary::Periodic}) {
    const ChainHamiltonian h = chain_hamiltonian({-5, 6, 1, bc}, {0.4, 2.2}, p);
    Eigen::VectorXcd x = Eigen::VectorXcd::Random(h.size()), y;
    h.apply(x, y);
    CHECK((y - h.dense() * x).norm() < 1e-12);
    CHECK(h.norm_bound() >= h.dense().operatorNorm() - 1e-12);
  }
}

TEST_CASE("default loop corners and gap") {
  RiceMeleParams p{5.0, 1.0};
  const double T = 21.0;
  const PumpSchedule s = default_pump_loop(p, T);
  CHECK(s.period() == doctest::Approx(T));
  CHECK(s.closed());
  auto c = derived_couplings(s.at(0.0), p);
  CHECK(c.delta == doctest::Approx(-4 * p.j0));
  CHECK(c.dimerization() == doctest::Approx(2 * p.j1));
  c = derived_couplings(s.at(T / 2), p);
  CHECK(c.delta == doctest::Approx(4 * p.j0));
  CHECK(c.dimerization() == doctest::Approx(-2 * p.j1));
  CHECK(loop_min_gap(s, p) == doctest::Approx(4 * p.j1).epsilon(1e-9));
}

TEST_CASE("schedule holds and half cycles") {
  RiceMeleParams p{5.0, 1.0};
  const PumpSchedule s = default_pump_loop(p, 10.0, Orientation::Clockwise, 1.5).delayed(2.0);
  CHECK(s.end_time() == doctest::Approx(17.0));
  CHECK(s.at(-1.0).beta0 == 0.0);
  const PhasePoint end = s.at(100.0);
  CHECK(end.beta0 == doctest::Approx(3 * kPi));
  CHECK(end.beta1 == doctest::Approx(3 * kPi));
  const PhasePoint lap = s.at(12.0);
  CHECK(lap.beta0 == doctest::Approx(kTwoPi));
  const auto br = s.breakpoints(0.0, 20.0);
  CHECK(std::find_if(br.begin(), br.end(), [](double t) { return std::abs(t - 7.0) < 1e-12; }) != br.end());
  CHECK_THROWS_AS(default_pump_loop(p, 10.0, Orientation::Clockwise, 0.3), Error);
}

TEST_CASE("counterclockwise loop retraces the path") {
  RiceMeleParams p{5.0, 1.0};
  const PumpSchedule cw = default_pump_loop(p, 8.0);
  const PumpSchedule ccw = default_pump_loop(p, 8.0, Orientation::Counterclockwise);
  for (double t : {0.3, 1.7, 4.0, 6.9}) {
    const PhasePoint a = cw.loop_at(t), b = ccw.loop_at(8.0 - t);
    CHECK(a.beta0 - kTwoPi == doctest::Approx(b.beta0 - kTwoPi));
    CHECK(a.beta1 == doctest::Approx(b.beta1));
  }
}

TEST_CASE("lattice configuration") {
  const LatticeConfig c = LatticeConfig::centered(0);
  CHECK(c.l_min == -20);
  CHECK(c.l_max == 21);
  CHECK(c.site_count() == 42);
  const LatticeConfig s = LatticeConfig::centered(20, 12, 10);
  CHECK(s.index_of(20).value() % 2 == 0);
  CHECK(!s.index_of(25).has_value());
  CHECK_THROWS_AS((LatticeConfig{0, 4, 1, Boundary::Periodic}.validate()), Error);
  CHECK_THROWS_AS(LatticeState::localized(c, 40), Error);
}

#pragma once

// Band structure and topological invariants of the two-band Bloch Hamiltonian
// over one lap of a pump schedule.

#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "core/model.hpp"

namespace oampump {

/// Gap below which grids are rejected as passing through the critical point.
double gap_tolerance(const RiceMeleParams& p);

/// Band eigenvector of h.sigma with the largest-magnitude component real and
/// positive.
Eigen::Vector2cd bloch_eigenvector(const BlochVector& h, Band band);

struct BandGrid {
  int n_k = 0;
  int n_t = 0;
  std::vector<double> k;    // k_m = 2 pi m / n_k
  std::vector<double> t;    // t_j = j T / n_t over one lap
  Eigen::MatrixXd lower;    // (n_k, n_t)
  Eigen::MatrixXd upper;
  double grid_min_gap = 0.0;
  double min_gap = 0.0;     // grid minimum refined continuously in t
};

BandGrid band_energies(const PumpSchedule& schedule, const RiceMeleParams& p,
                       int n_k = 64, int n_t = 64);

/// Smallest direct gap min_k 2|h(k, beta(t))| over one lap.
double loop_min_gap(const PumpSchedule& schedule, const RiceMeleParams& p);

/// Eigenvectors of one band on the (k, t) torus of one lap.
struct EigenGrid {
  int n_k = 0;
  int n_t = 0;
  Band band = Band::Lower;
  std::vector<Eigen::Vector2cd> u;   // index m + n_k * j
  std::vector<Eigen::Vector3d> hhat; // unit Bloch vectors
  double min_gap = 0.0;

  const Eigen::Vector2cd& at(int m, int j) const { return u[m + n_k * j]; }
};

/// Throws GapClosed if the grid gap drops below gap_tolerance(p).
EigenGrid eigen_grid(const PumpSchedule& schedule, const RiceMeleParams& p, Band band,
                     int n_k = 64, int n_t = 64);

struct CurvatureGrid {
  int n_k = 0;
  int n_t = 0;
  Band band = Band::Lower;
  Eigen::MatrixXd flux;  // plaquette phases in (-pi, pi], (n_k, n_t)

  double total() const { return flux.sum(); }
};

/// Lattice field strength of each plaquette (k,t) -> (k+1,t) -> (k+1,t+1) -> (k,t+1).
CurvatureGrid plaquette_flux(const EigenGrid& grid);

CurvatureGrid berry_curvature(const PumpSchedule& schedule, const RiceMeleParams& p,
                              Band band, int n_k = 64, int n_t = 64);

int chern_number(const PumpSchedule& schedule, const RiceMeleParams& p, Band band,
                 int n_k = 64, int n_t = 64);

/// Degree of the map (k,t) -> -h/|h| (lower band) or +h/|h| (upper band).
int winding_number(const PumpSchedule& schedule, const RiceMeleParams& p, Band band,
                   int n_k = 64, int n_t = 64);

/// gamma(k,t) = i int_0^t <u|d_t u> dt' in the fixed gauge of bloch_eigenvector,
/// accumulated from overlaps on a fine grid aligned with the schedule kinks.
double berry_phase(double k, const PumpSchedule& schedule, const RiceMeleParams& p,
                   Band band, double t, int steps_per_period = 4096);

/// d_k E_band at (k, beta).
double band_velocity(double k, PhasePoint beta, const RiceMeleParams& p, Band band);

/// Omega_kt at (k, t) from a small gauge-invariant plaquette.
double local_curvature(double k, double t, const PumpSchedule& schedule,
                       const RiceMeleParams& p, Band band);

/// Second-order flat-band expansion of E_band at beta0 in {0, pi}.
double flat_band_approx(double k, double beta1, const RiceMeleParams& p,
                        Band band = Band::Upper);

}  // namespace oampump

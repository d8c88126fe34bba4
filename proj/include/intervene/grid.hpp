/**
 * Discretized Markov-kernel engine on uniform momentum grids: trapezoidal
 * quadrature, measurement reweighting, control shifts/convolutions, and the
 * two-particle collision map with internal-noise convolution. Serves as the
 * numerical oracle for the closed-form Gaussian engine.
 *
 * Invariants maintained by every operation: non-negativity (exact), unit
 * trapezoidal mass (to 1e-9 before the final exact normalization), and a
 * leakage guard (mass in the outer 5% of the grid must stay below 1e-6).
 */
#pragma once

#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "intervene/gaussian.hpp"

namespace intervene::grid {

// === errors =============================================================

/// Probability mass reached the grid edge (outer-5% band above 1e-6) or left it.
struct leakage_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Feature too narrow for the grid spacing.
struct resolution_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Measurement outcome has (numerically) zero probability under the state.
struct outcome_incompatible_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// === domain types =======================================================

/// Uniform 1D grid of `points` nodes on [lower, upper].
struct Grid1D {
    double lower = -8.0;
    double upper = 8.0;
    int points = 4096;  // >= 16

    double h() const { return (upper - lower) / (points - 1); }
    double node(int i) const { return lower + i * h(); }
    bool operator==(const Grid1D&) const = default;
};

void validate(const Grid1D& g);

/// Non-negative density sampled on a 1D grid (unit trapezoidal mass).
struct GridDistribution {
    Grid1D grid;
    std::vector<double> values;  // size == grid.points, all >= 0
};

/// Non-negative joint density on grid_a x grid_b, row-major over p_a:
/// values[ia * grid_b.points + ib] = density(p_a = node_a(ia), p_b = node_b(ib)).
struct JointDistribution {
    Grid1D grid_a;
    Grid1D grid_b;
    std::vector<double> values;
};

// === quadrature helpers =================================================

double trapezoid_mass(const GridDistribution& d);
double trapezoid_mass(const JointDistribution& d);
double mean(const GridDistribution& d);
double variance(const GridDistribution& d);
double l1_distance(const GridDistribution& a, const GridDistribution& b);  // same grid
double l1_distance(const JointDistribution& a, const JointDistribution& b);

/// Mass in the outer 5% of nodes (both ends; both axes for joints).
double leakage(const GridDistribution& d);
double leakage(const JointDistribution& d);

/// Divide by the trapezoidal mass; throws std::runtime_error on mass <= 0.
void normalize(GridDistribution& d);
void normalize(JointDistribution& d);

/// Linear interpolation of the sampled density at momentum p (0 outside grid).
double interpolate(const GridDistribution& d, double p);

GridDistribution marginal_a(const JointDistribution& joint);
GridDistribution marginal_b(const JointDistribution& joint);

// === operations =========================================================

/// Sample a Gaussian on the grid and normalize. Requires the grid to span
/// mean +- 6 sd and to resolve the width (h <= sd/3).
GridDistribution discretize(const gauss::GaussianMoment& g, const Grid1D& grid);

/// Bayes update for outcome x: multiply by N(x; coupling*p, sigma) and
/// renormalize. Returns (posterior, outcome probability density P(x)).
std::pair<GridDistribution, double> measurement_update(const GridDistribution& d,
                                                       const gauss::MeasurementModel& model,
                                                       double x);

/// Control map: Gaussian convolution of `added_variance` (0 = none) followed
/// by a translation of `shift` (exact index shift when lattice-aligned,
/// otherwise linear interpolation).
GridDistribution apply_control(const GridDistribution& d, double shift, double added_variance);

/// Outcome density P(x) = integral M(x|p) d(p) dp on x_grid, normalized over x.
GridDistribution intervention_probability(const GridDistribution& d,
                                          const gauss::MeasurementModel& model,
                                          const Grid1D& x_grid);

/// Two-particle collision with internal-noise density eps (must be symmetric
/// about 0 to L1 1e-9). Output joint over (p_a, p_b):
///   P_f(p_a,p_b) = integral d_eps  eps(e - (p_b - p_a)) Pa(p_a+e) Pb(p_b-e),
/// equal to the swapped product Pa(p_b)Pb(p_a) convolved along the (-1,+1)
/// direction with the eps profile. With equal axis grids the taps fall on
/// lattice points (index arithmetic only); unequal grids use the direct
/// per-cell quadrature fallback. `workers` 0 = hardware concurrency; results
/// are bitwise independent of the worker count.
JointDistribution collision_map(const GridDistribution& pa, const GridDistribution& pb,
                                const GridDistribution& eps, int workers = 0);

/// Noise-free collision (eps = delta): exact swap joint Pa(p_b) Pb(p_a).
JointDistribution collision_map(const GridDistribution& pa, const GridDistribution& pb);

// === serialization ======================================================

/// CSV, 17-significant-digit floats: "momentum,density".
void write_csv(const GridDistribution& d, std::ostream& os);
/// CSV long form: "p_a,p_b,density".
void write_csv(const JointDistribution& d, std::ostream& os);

}  // namespace intervene::grid

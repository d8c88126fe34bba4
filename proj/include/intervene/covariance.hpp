/**
 * Gaussian covariance-matrix backend for the three-mode collision model:
 * exact symplectic (Heisenberg) action of the two quadratic-generator
 * unitaries, swap quality, and partial-transpose entanglement tests.
 *
 * Conventions (fixed here, used everywhere): hbar = 1, vacuum quadrature
 * variance 1/2, physicality = all symplectic eigenvalues >= 1/2; quadrature
 * order (q_a, p_a, q_b, p_b, Q, P) with the auxiliary mode last; symplectic
 * form block-diagonal [[0,1],[-1,0]] per mode.
 */
#pragma once

#include <Eigen/Dense>

#include <vector>

namespace intervene::cov {

inline constexpr double kVacuumVariance = 0.5;
inline constexpr int kModes = 3;

using Vector6 = Eigen::Matrix<double, 6, 1>;
using Matrix6 = Eigen::Matrix<double, 6, 6>;

/// First and second moments of the three-mode Gaussian state.
struct CovarianceState {
    Vector6 mean = Vector6::Zero();
    Matrix6 covariance = Matrix6::Identity() * kVacuumVariance;
};

/// Affine symplectic transformation x -> S x + d.
struct SymplecticMap {
    Matrix6 matrix = Matrix6::Identity();
    Vector6 displacement = Vector6::Zero();
};

/// Single-mode (q, p) moments.
struct SingleModeState {
    Eigen::Vector2d mean = Eigen::Vector2d::Zero();
    Eigen::Matrix2d covariance = Eigen::Matrix2d::Identity() * kVacuumVariance;
};

/// Block-diagonal symplectic form for `modes` modes.
Eigen::MatrixXd symplectic_form(int modes = kModes);

/// Symmetric to 1e-12 and physical (symplectic eigenvalues >= 1/2 - 1e-10).
void validate(const CovarianceState& state);
/// S Omega S^T = Omega to 1e-12.
void validate(const SymplecticMap& map);
void validate(const SingleModeState& mode);

bool is_physical(const Eigen::MatrixXd& covariance, double tol = 1e-10);

/// Symplectic spectrum (positive halves, ascending) of a symmetric
/// positive-definite covariance, via the Hermitian matrix
/// i sqrt(C) Omega sqrt(C).
std::vector<double> symplectic_eigenvalues(const Eigen::MatrixXd& covariance);

// --- constructors -------------------------------------------------------

SingleModeState vacuum_mode();
SingleModeState coherent_mode(double q, double p);               // displaced vacuum
SingleModeState thermal_mode(double nbar);                       // variance (2 nbar + 1)/2
SingleModeState squeezed_mode(double var_q, double var_p);       // var_q * var_p >= 1/4
CovarianceState three_mode(const SingleModeState& a, const SingleModeState& b,
                           const SingleModeState& c);
SingleModeState reduce_mode(const CovarianceState& state, int mode);  // 0=a, 1=b, 2=auxiliary

// --- operations ---------------------------------------------------------

/// Heisenberg actions of the position-kick generator (S_U: q_a += Q,
/// q_b -= Q, P += p_b - p_a), the momentum-kick generator (S_V: p_a += P,
/// p_b -= P, Q += q_b - q_a), and their composition S_VU = S_V * S_U, which
/// realizes the momentum swap p_a <- p_b + P, p_b <- p_a - P.
struct GeneratorMaps {
    SymplecticMap s_u;
    SymplecticMap s_v;
    SymplecticMap s_vu;
};
GeneratorMaps symplectic_of_generators();

CovarianceState evolve(const CovarianceState& state, const SymplecticMap& map);

/// Momentum-sector overlap between the reduced final mode-a state and the
/// intended post-swap state (the initial mode-b moments): the classical
/// two-Gaussian overlap integral of the momentum marginals,
///   sqrt(2 sqrt(v1 v2)/(v1+v2)) * exp(-(m1-m2)^2/(4(v1+v2))).
/// Tends to 1 as the auxiliary P-variance tends to 0.
double swap_fidelity(const CovarianceState& state_f, const SingleModeState& target_b_initial);

/// Logarithmic negativity (nats) across the partition given by the listed
/// transposed modes: partial transpose = momentum sign flip on those modes,
/// then E_N = sum_k max(0, -ln(2 nu_k)) over the symplectic spectrum.
double log_negativity(const CovarianceState& state, const std::vector<int>& transposed_modes);

/// True iff the partially transposed covariance is itself a physical
/// covariance; false exactly when the partition carries log-negativity.
bool ppt_physicality(const CovarianceState& state, const std::vector<int>& transposed_modes);

}  // namespace intervene::cov

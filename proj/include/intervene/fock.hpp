/**
 * Truncated Fock-space engine for the harmonic-oscillator binary position
 * measurement: POVM/Kraus construction from the displacement length lambda,
 * conditional states, parity feedback, entropy/energy bookkeeping, the
 * thermalisation channel built from the measurement's flipped states, and a
 * generic measure-then-channel intervention.
 *
 * Conventions: natural units hbar = m = omega = 1 (omega configurable);
 * ground-state position variance 1/2; energy = frequency * Tr[n rho]
 * (zero-point excluded). Matrix functions of the position operator are
 * evaluated by exact Hermitian eigendecomposition, never by series.
 *
 * Guard policy: operations validate their *input* states (trace, positivity,
 * population of the top ceil(N/8) levels below 1e-8); derived states carry a
 * measurable truncation leakage that callers may report.
 */
#pragma once

#include <Eigen/Dense>

#include <complex>
#include <stdexcept>
#include <utility>
#include <vector>

namespace intervene::fock {

/// State or level too close to the truncation edge for a trustworthy answer.
struct truncation_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Conditioning on a measurement branch of (numerically) zero probability.
struct branch_probability_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Ground-state position variance in natural units.
inline constexpr double kGroundPositionVariance = 0.5;

/// Truncated oscillator Hilbert space.
struct FockSpace {
    int dim = 64;            // N >= 16
    double frequency = 1.0;  // omega > 0
};
void validate(const FockSpace& space);

/// Complex N x N operator; hermitian_flag asserts max |A - A^dag| < 1e-12.
struct OperatorMatrix {
    Eigen::MatrixXcd entries;
    bool hermitian_flag = false;
};
void validate(const OperatorMatrix& op);

/// The ladder/position/number/parity operator set on a space.
struct Operators {
    FockSpace space;
    OperatorMatrix lowering;   // a |n> = sqrt(n) |n-1>
    OperatorMatrix raising;    // a^dag
    OperatorMatrix position;   // q = sqrt(1/2) (a + a^dag)
    OperatorMatrix number;     // a^dag a
    OperatorMatrix parity;     // diag((-1)^n)
};
Operators build_operators(const FockSpace& space);

struct DensityMatrix {
    Eigen::MatrixXcd entries;
};
/// Trace 1 +- 1e-10, Hermitian to 1e-10, min eigenvalue >= -1e-10.
void validate(const DensityMatrix& rho);
/// Population of the top ceil(N/8) levels.
double truncation_leakage(const DensityMatrix& rho);
/// validate() plus truncation leakage < 1e-8; throws truncation_error naming `op`.
void enforce_guard(const DensityMatrix& rho, const char* op);

/// Truncated Bose-Einstein state; admitted only for nbar <= N/10.
DensityMatrix thermal_state(const FockSpace& space, double nbar);
/// Coherent-state vector (truncated, renormalized).
Eigen::VectorXcd coherent_state(const FockSpace& space, std::complex<double> alpha);
DensityMatrix pure_state(const Eigen::VectorXcd& psi);

double energy(const DensityMatrix& rho, const FockSpace& space);  // frequency * Tr[n rho]
double von_neumann_entropy(const DensityMatrix& rho);             // nats
std::complex<double> expectation(const DensityMatrix& rho, const Eigen::MatrixXcd& op);

/// Binary position-sign measurement of displacement length lambda:
///   M_pm = 1/2 (1 -+ i W),  W = (lambda + i q) (lambda^2 + q^2)^(-1/2),
/// with W unitary and POVM elements E_pm = 1/2 (1 pm q (lambda^2+q^2)^(-1/2)).
struct MeasurementPair {
    FockSpace space;
    double lambda = 0.0;            // displacement length, > 0
    double mu = 0.0;                // lambda / sqrt(ground position variance)
    OperatorMatrix m_plus;
    OperatorMatrix m_minus;
    OperatorMatrix e_plus;          // M+^dag M+
    OperatorMatrix e_minus;
    Eigen::MatrixXcd rotation;      // the unitary W
    Eigen::MatrixXd inverse_root;   // (lambda^2 + q^2)^(-1/2), real symmetric
};
MeasurementPair build_measurement(const FockSpace& space, double lambda);

/// Conditional state for result +1 or -1 and its probability.
std::pair<DensityMatrix, double> measure(const DensityMatrix& rho, const MeasurementPair& pair,
                                         int result);

/// Flipped state |psi_n> = 2 M+ |n> - |n> = -i W |n> (exactly unit norm).
Eigen::VectorXcd psi_state(int n, const MeasurementPair& pair);

/// Neighbour-overlap amplitude g_n from the spectral formula
/// sqrt(1/2) <n| (lambda^2+q^2)^(-1/2) |n>  (dimensionless).
double overlap_g(int n, const MeasurementPair& pair);
/// Directly computed overlap <phi_m^+ | phi_n^+> of normalized conditional
/// states of |m>, |n>; cross-check for overlap_g.
std::complex<double> conditional_overlap(int m, int n, const MeasurementPair& pair);

/// Entropy/energy bookkeeping of one measure-plus-parity-feedback round.
struct QuantumLedger {
    double probability_plus = 0.0;
    double probability_minus = 0.0;
    double energy_initial = 0.0;        // before measurement
    double energy_unconditional = 0.0;  // after measurement, outcome averaged
    double energy_final = 0.0;          // after feedback
    double entropy_initial = 0.0;
    double entropy_plus = 0.0;          // conditional branches
    double entropy_minus = 0.0;
    double entropy_unconditional = 0.0;
    double entropy_final = 0.0;
    double outcome_entropy = 0.0;       // H(p_+, p_-), nats
    double mutual_information = 0.0;    // S(unconditional) - sum_x P_x S(x)
};

/// Measure, then apply the parity operator on the - branch:
/// rho_f = M+ rho M+^dag + Pi M- rho M-^dag Pi^dag.
std::pair<DensityMatrix, QuantumLedger> parity_feedback(const DensityMatrix& rho,
                                                        const MeasurementPair& pair);

/// Average energy added by the unconditional measurement on a thermal
/// (diagonal) input: Tr[n rho'] - Tr[n rho], population-weighted.
double energy_increase(const DensityMatrix& rho_thermal, const MeasurementPair& pair);

/// Conditional-to-prior position-variance ratio V(q | +) / V(q).
double variance_ratio_gamma(const DensityMatrix& rho, const MeasurementPair& pair);

/// Channel E(rho) = sum_n rho_nn |psi_n><psi_n| that replaces each level's
/// flipped state by itself (trace preserving because W is unitary).
struct ThermalisationResult {
    DensityMatrix state;
    double entropy_change = 0.0;
    double energy_change = 0.0;
};
ThermalisationResult thermalisation_map(const DensityMatrix& rho, const MeasurementPair& pair);

/// Trace-preserving Kraus channel.
struct KrausChannel {
    std::vector<Eigen::MatrixXcd> operators;
};

/// Generic intervention: Kraus measurement {M_x} followed by an
/// outcome-indexed channel on each branch.
struct InterventionResult {
    std::vector<double> probabilities;
    std::vector<DensityMatrix> conditional_states;  // normalized per branch
    DensityMatrix unconditional;                    // probability-weighted sum
};
InterventionResult cptp_intervention(const DensityMatrix& rho,
                                     const std::vector<Eigen::MatrixXcd>& kraus,
                                     const std::vector<KrausChannel>& channels);

}  // namespace intervene::fock

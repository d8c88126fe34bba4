#include "intervene/covariance.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>
#include <string>

namespace intervene::cov {

namespace {

constexpr double kSymTol = 1e-12;
constexpr double kPhysTol = 1e-10;

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

Eigen::MatrixXd transpose_flip(int modes, const std::vector<int>& transposed) {
    Eigen::MatrixXd f = Eigen::MatrixXd::Identity(2 * modes, 2 * modes);
    for (int m : transposed) {
        if (m < 0 || m >= modes)
            throw std::invalid_argument("partial transpose: mode index out of range");
        f(2 * m + 1, 2 * m + 1) = -1.0;  // flip the momentum quadrature
    }
    return f;
}

}  // namespace

Eigen::MatrixXd symplectic_form(int modes) {
    Eigen::MatrixXd omega = Eigen::MatrixXd::Zero(2 * modes, 2 * modes);
    for (int m = 0; m < modes; ++m) {
        omega(2 * m, 2 * m + 1) = 1.0;
        omega(2 * m + 1, 2 * m) = -1.0;
    }
    return omega;
}

std::vector<double> symplectic_eigenvalues(const Eigen::MatrixXd& covariance) {
    const int n = static_cast<int>(covariance.rows());
    if (n % 2 != 0 || covariance.cols() != n)
        throw std::invalid_argument("symplectic_eigenvalues: need an even-dimensional square matrix");
    const Eigen::MatrixXd sym = 0.5 * (covariance + covariance.transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> root(sym);
    if (root.eigenvalues().minCoeff() <= 0.0)
        throw std::invalid_argument(
            "symplectic_eigenvalues: covariance must be positive definite (min eigenvalue " +
            fmt(root.eigenvalues().minCoeff()) + ")");
    const Eigen::MatrixXd half = root.operatorSqrt();
    const Eigen::MatrixXcd herm =
        std::complex<double>(0.0, 1.0) * (half * symplectic_form(n / 2) * half).cast<std::complex<double>>();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(herm, Eigen::EigenvaluesOnly);
    std::vector<double> out;  // spectrum is +-nu pairs; keep the positive half
    for (int k = 0; k < n; ++k)
        if (es.eigenvalues()(k) > 0.0) out.push_back(es.eigenvalues()(k));
    std::sort(out.begin(), out.end());
    return out;
}

bool is_physical(const Eigen::MatrixXd& covariance, double tol) {
    // The eigensolver resolves the vacuum floor only to ~eps * ||C||, so the
    // acceptance slack must scale with the covariance norm or extreme
    // squeezing produces false alarms.
    const double slack = tol * std::max(1.0, covariance.cwiseAbs().maxCoeff());
    for (double nu : symplectic_eigenvalues(covariance))
        if (nu < kVacuumVariance - slack) return false;
    return true;
}

void validate(const CovarianceState& state) {
    const double asym = (state.covariance - state.covariance.transpose()).cwiseAbs().maxCoeff();
    if (!(asym <= kSymTol))
        throw std::invalid_argument("CovarianceState: covariance asymmetry " + fmt(asym) +
                                    " exceeds 1e-12");
    if (!state.mean.allFinite() || !state.covariance.allFinite())
        throw std::invalid_argument("CovarianceState: non-finite moments");
    if (!is_physical(state.covariance, kPhysTol))
        throw std::invalid_argument(
            "CovarianceState: unphysical covariance (some symplectic eigenvalue < 1/2)");
}

void validate(const SymplecticMap& map) {
    const Eigen::MatrixXd omega = symplectic_form();
    const double dev = (map.matrix * omega * map.matrix.transpose() - omega).cwiseAbs().maxCoeff();
    if (!(dev <= kSymTol))
        throw std::invalid_argument("SymplecticMap: S Omega S^T deviates from Omega by " + fmt(dev));
    if (!map.displacement.allFinite())
        throw std::invalid_argument("SymplecticMap: non-finite displacement");
}

void validate(const SingleModeState& mode) {
    const double asym = std::abs(mode.covariance(0, 1) - mode.covariance(1, 0));
    if (!(asym <= kSymTol))
        throw std::invalid_argument("SingleModeState: covariance asymmetry " + fmt(asym));
    const double det = mode.covariance.determinant();
    if (!(det >= kVacuumVariance * kVacuumVariance * (1.0 - 1e-9)))
        throw std::invalid_argument(
            "SingleModeState: uncertainty product below the vacuum limit (det = " + fmt(det) + ")");
}

SingleModeState vacuum_mode() { return SingleModeState{}; }

SingleModeState coherent_mode(double q, double p) {
    SingleModeState s;
    s.mean << q, p;
    return s;
}

SingleModeState thermal_mode(double nbar) {
    if (!(nbar >= 0.0) || !std::isfinite(nbar))
        throw std::invalid_argument("thermal_mode: mean occupation must be >= 0");
    SingleModeState s;
    s.covariance = Eigen::Matrix2d::Identity() * ((2.0 * nbar + 1.0) * kVacuumVariance);
    return s;
}

SingleModeState squeezed_mode(double var_q, double var_p) {
    if (!(var_q > 0.0) || !(var_p > 0.0))
        throw std::invalid_argument("squeezed_mode: variances must be positive");
    SingleModeState s;
    s.covariance << var_q, 0.0, 0.0, var_p;
    validate(s);
    return s;
}

CovarianceState three_mode(const SingleModeState& a, const SingleModeState& b,
                           const SingleModeState& c) {
    validate(a);
    validate(b);
    validate(c);
    CovarianceState st;
    st.covariance.setZero();
    const SingleModeState* modes[kModes] = {&a, &b, &c};
    for (int m = 0; m < kModes; ++m) {
        st.mean.segment<2>(2 * m) = modes[m]->mean;
        st.covariance.block<2, 2>(2 * m, 2 * m) = modes[m]->covariance;
    }
    return st;
}

SingleModeState reduce_mode(const CovarianceState& state, int mode) {
    if (mode < 0 || mode >= kModes) throw std::invalid_argument("reduce_mode: mode must be 0..2");
    SingleModeState s;
    s.mean = state.mean.segment<2>(2 * mode);
    s.covariance = state.covariance.block<2, 2>(2 * mode, 2 * mode);
    return s;
}

GeneratorMaps symplectic_of_generators() {
    GeneratorMaps g;
    // Quadrature order: (q_a, p_a, q_b, p_b, Q, P).
    Matrix6& u = g.s_u.matrix;
    u.setIdentity();
    u(0, 4) = 1.0;   // q_a += Q
    u(2, 4) = -1.0;  // q_b -= Q
    u(5, 3) = 1.0;   // P += p_b
    u(5, 1) = -1.0;  // P -= p_a

    Matrix6& v = g.s_v.matrix;
    v.setIdentity();
    v(1, 5) = 1.0;   // p_a += P
    v(3, 5) = -1.0;  // p_b -= P
    v(4, 2) = 1.0;   // Q += q_b
    v(4, 0) = -1.0;  // Q -= q_a

    g.s_vu.matrix = v * u;
    return g;
}

CovarianceState evolve(const CovarianceState& state, const SymplecticMap& map) {
    validate(state);
    validate(map);
    CovarianceState out;
    out.mean = map.matrix * state.mean + map.displacement;
    out.covariance = map.matrix * state.covariance * map.matrix.transpose();
    out.covariance = 0.5 * (out.covariance + out.covariance.transpose());
    return out;
}

double swap_fidelity(const CovarianceState& state_f, const SingleModeState& target_b_initial) {
    validate(state_f);
    validate(target_b_initial);
    const SingleModeState a = reduce_mode(state_f, 0);
    const double v1 = a.covariance(1, 1), v2 = target_b_initial.covariance(1, 1);
    const double m1 = a.mean(1), m2 = target_b_initial.mean(1);
    if (!(v1 > 0.0) || !(v2 > 0.0))
        throw std::invalid_argument("swap_fidelity: momentum variances must be positive");
    return std::sqrt(2.0 * std::sqrt(v1 * v2) / (v1 + v2)) *
           std::exp(-(m1 - m2) * (m1 - m2) / (4.0 * (v1 + v2)));
}

double log_negativity(const CovarianceState& state, const std::vector<int>& transposed_modes) {
    validate(state);
    const Eigen::MatrixXd f = transpose_flip(kModes, transposed_modes);
    const Eigen::MatrixXd flipped = f * state.covariance * f;
    double en = 0.0;
    for (double nu : symplectic_eigenvalues(flipped))
        if (2.0 * nu < 1.0) en -= std::log(2.0 * nu);
    return en;
}

bool ppt_physicality(const CovarianceState& state, const std::vector<int>& transposed_modes) {
    validate(state);
    const Eigen::MatrixXd f = transpose_flip(kModes, transposed_modes);
    return is_physical(f * state.covariance * f, kPhysTol);
}

}  // namespace intervene::cov

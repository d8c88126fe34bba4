#include "intervene/fock.hpp"

#include <cmath>
#include <cstdio>
#include <string>

namespace intervene::fock {

namespace {

using Eigen::MatrixXcd;
using Eigen::MatrixXd;
using Eigen::VectorXcd;
using Eigen::VectorXd;
using cd = std::complex<double>;

constexpr double kHermTol = 1e-12;
constexpr double kStateTol = 1e-10;
constexpr double kGuardTol = 1e-8;
constexpr double kBranchTol = 1e-12;

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

MatrixXd position_matrix(int n) {
    MatrixXd q = MatrixXd::Zero(n, n);
    const double s = std::sqrt(kGroundPositionVariance);
    for (int k = 1; k < n; ++k) {
        const double v = s * std::sqrt(static_cast<double>(k));
        q(k - 1, k) = v;  // lowering part
        q(k, k - 1) = v;  // raising part
    }
    return q;
}

int guard_levels(int n) { return (n + 7) / 8; }

/// Hermitize to scrub accumulated 1e-17-scale asymmetry from products.
MatrixXcd hermitize(const MatrixXcd& m) { return 0.5 * (m + m.adjoint()); }

double real_trace(const MatrixXcd& m) { return m.trace().real(); }

OperatorMatrix as_operator(MatrixXcd m, bool hermitian) {
    return OperatorMatrix{std::move(m), hermitian};
}

void check_square(const MatrixXcd& m, const char* what) {
    if (m.rows() != m.cols() || m.rows() < 1)
        throw std::invalid_argument(std::string(what) + ": operator must be square");
}

}  // namespace

void validate(const FockSpace& space) {
    if (space.dim < 16) throw std::invalid_argument("FockSpace: need at least 16 levels");
    if (!(space.frequency > 0.0) || !std::isfinite(space.frequency))
        throw std::invalid_argument("FockSpace: frequency must be positive and finite");
}

void validate(const OperatorMatrix& op) {
    check_square(op.entries, "OperatorMatrix");
    if (op.hermitian_flag) {
        const double dev = (op.entries - op.entries.adjoint()).cwiseAbs().maxCoeff();
        if (!(dev < kHermTol))
            throw std::invalid_argument("OperatorMatrix: hermitian_flag set but max |A - A^dag| = " +
                                        fmt(dev));
    }
}

Operators build_operators(const FockSpace& space) {
    validate(space);
    const int n = space.dim;
    MatrixXcd a = MatrixXcd::Zero(n, n);
    for (int k = 1; k < n; ++k) a(k - 1, k) = std::sqrt(static_cast<double>(k));
    MatrixXcd parity = MatrixXcd::Zero(n, n);
    for (int k = 0; k < n; ++k) parity(k, k) = (k % 2 == 0) ? 1.0 : -1.0;
    Operators ops;
    ops.space = space;
    ops.raising = as_operator(a.adjoint(), false);
    ops.position = as_operator(position_matrix(n).cast<cd>(), true);
    ops.number = as_operator(ops.raising.entries * a, true);
    ops.parity = as_operator(std::move(parity), true);
    ops.lowering = as_operator(std::move(a), false);
    return ops;
}

void validate(const DensityMatrix& rho) {
    check_square(rho.entries, "DensityMatrix");
    const double tr = real_trace(rho.entries);
    if (!(std::abs(tr - 1.0) <= kStateTol))
        throw std::invalid_argument("DensityMatrix: trace = " + fmt(tr) + ", expected 1 within " +
                                    fmt(kStateTol));
    const double herm = (rho.entries - rho.entries.adjoint()).cwiseAbs().maxCoeff();
    if (!(herm <= kStateTol))
        throw std::invalid_argument("DensityMatrix: not Hermitian, max deviation " + fmt(herm));
    Eigen::SelfAdjointEigenSolver<MatrixXcd> es(hermitize(rho.entries),
                                                Eigen::EigenvaluesOnly);
    const double lo = es.eigenvalues().minCoeff();
    if (!(lo >= -kStateTol))
        throw std::invalid_argument("DensityMatrix: negative eigenvalue " + fmt(lo));
}

double truncation_leakage(const DensityMatrix& rho) {
    const int n = static_cast<int>(rho.entries.rows());
    const int g = guard_levels(n);
    double s = 0.0;
    for (int k = n - g; k < n; ++k) s += rho.entries(k, k).real();
    return s;
}

void enforce_guard(const DensityMatrix& rho, const char* op) {
    validate(rho);
    const double leak = truncation_leakage(rho);
    if (!(leak < kGuardTol))
        throw truncation_error(std::string(op) + ": truncation guard tripped, top-band population " +
                               fmt(leak) + " (limit " + fmt(kGuardTol) +
                               "); increase the space dimension");
}

DensityMatrix thermal_state(const FockSpace& space, double nbar) {
    validate(space);
    if (!(nbar >= 0.0) || !std::isfinite(nbar))
        throw std::invalid_argument("thermal_state: mean occupation must be >= 0");
    if (nbar > space.dim / 10.0)
        throw truncation_error("thermal_state: mean occupation " + fmt(nbar) +
                               " too large for " + std::to_string(space.dim) +
                               " levels (need nbar <= N/10)");
    const int n = space.dim;
    MatrixXcd rho = MatrixXcd::Zero(n, n);
    const double x = nbar / (1.0 + nbar);
    double w = 1.0, sum = 0.0;
    for (int k = 0; k < n; ++k, w *= x) {
        rho(k, k) = w;
        sum += w;
    }
    rho /= sum;
    return DensityMatrix{std::move(rho)};
}

VectorXcd coherent_state(const FockSpace& space, cd alpha) {
    validate(space);
    VectorXcd psi(space.dim);
    cd amp = 1.0;
    for (int k = 0; k < space.dim; ++k) {
        psi(k) = amp;
        amp *= alpha / std::sqrt(static_cast<double>(k + 1));
    }
    psi /= psi.norm();
    return psi;
}

DensityMatrix pure_state(const VectorXcd& psi) {
    const double nrm = psi.norm();
    if (!(nrm > 0.0)) throw std::invalid_argument("pure_state: zero vector");
    const VectorXcd u = psi / nrm;
    return DensityMatrix{u * u.adjoint()};
}

double energy(const DensityMatrix& rho, const FockSpace& space) {
    validate(space);
    const int n = static_cast<int>(rho.entries.rows());
    double s = 0.0;
    for (int k = 0; k < n; ++k) s += k * rho.entries(k, k).real();
    return space.frequency * s;
}

double von_neumann_entropy(const DensityMatrix& rho) {
    Eigen::SelfAdjointEigenSolver<MatrixXcd> es(hermitize(rho.entries),
                                                Eigen::EigenvaluesOnly);
    double s = 0.0;
    for (int k = 0; k < es.eigenvalues().size(); ++k) {
        const double p = es.eigenvalues()(k);
        if (p > 1e-15) s -= p * std::log(p);
    }
    return s;
}

cd expectation(const DensityMatrix& rho, const MatrixXcd& op) {
    return (op * rho.entries).trace();
}

MeasurementPair build_measurement(const FockSpace& space, double lambda) {
    validate(space);
    if (!(lambda > 0.0) || !std::isfinite(lambda))
        throw std::invalid_argument(
            "build_measurement: displacement length must be positive (zero makes the inverse "
            "square root singular at the origin)");
    const int n = space.dim;
    const MatrixXd q = position_matrix(n);
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(q);
    if (es.info() != Eigen::Success)
        throw std::runtime_error("build_measurement: position eigendecomposition failed");
    const VectorXd d = es.eigenvalues();
    const MatrixXd v = es.eigenvectors();
    VectorXd inv_root_eigs(n);
    for (int k = 0; k < n; ++k) inv_root_eigs(k) = 1.0 / std::sqrt(lambda * lambda + d(k) * d(k));
    const MatrixXd r = v * inv_root_eigs.asDiagonal() * v.transpose();

    MeasurementPair pair;
    pair.space = space;
    pair.lambda = lambda;
    pair.mu = lambda / std::sqrt(kGroundPositionVariance);
    pair.inverse_root = r;
    pair.rotation = lambda * r.cast<cd>() + cd(0.0, 1.0) * (q * r).cast<cd>();
    const MatrixXcd id = MatrixXcd::Identity(n, n);
    pair.m_plus = as_operator(0.5 * (id - cd(0.0, 1.0) * pair.rotation), false);
    pair.m_minus = as_operator(0.5 * (id + cd(0.0, 1.0) * pair.rotation), false);
    pair.e_plus = as_operator(hermitize(pair.m_plus.entries.adjoint() * pair.m_plus.entries), true);
    pair.e_minus =
        as_operator(hermitize(pair.m_minus.entries.adjoint() * pair.m_minus.entries), true);
    return pair;
}

std::pair<DensityMatrix, double> measure(const DensityMatrix& rho, const MeasurementPair& pair,
                                         int result) {
    validate(rho);
    if (result != 1 && result != -1)
        throw std::invalid_argument("measure: result must be +1 or -1");
    const OperatorMatrix& m = (result == 1) ? pair.m_plus : pair.m_minus;
    MatrixXcd num = hermitize(m.entries * rho.entries * m.entries.adjoint());
    const double p = real_trace(num);
    if (!(p > kBranchTol))
        throw branch_probability_error("measure: branch probability " + fmt(p) +
                                       " below 1e-12; outcome effectively impossible");
    num /= p;
    return {DensityMatrix{std::move(num)}, p};
}

VectorXcd psi_state(int n, const MeasurementPair& pair) {
    const int dim = pair.space.dim;
    if (n < 0 || n >= dim - guard_levels(dim))
        throw truncation_error("psi_state: level " + std::to_string(n) +
                               " inside the truncation guard band of a " + std::to_string(dim) +
                               "-level space");
    return cd(0.0, -1.0) * pair.rotation.col(n);
}

double overlap_g(int n, const MeasurementPair& pair) {
    const int dim = pair.space.dim;
    if (n < 0 || n >= dim - guard_levels(dim))
        throw truncation_error("overlap_g: level " + std::to_string(n) +
                               " inside the truncation guard band");
    return std::sqrt(kGroundPositionVariance) * pair.inverse_root(n, n);
}

cd conditional_overlap(int m, int n, const MeasurementPair& pair) {
    const int dim = pair.space.dim;
    const int guard = dim - guard_levels(dim);
    if (m < 0 || n < 0 || m >= guard || n >= guard)
        throw truncation_error("conditional_overlap: level inside the truncation guard band");
    VectorXcd em = VectorXcd::Zero(dim), en = VectorXcd::Zero(dim);
    em(m) = 1.0;
    en(n) = 1.0;
    const VectorXcd pm = pair.m_plus.entries * em;
    const VectorXcd pn = pair.m_plus.entries * en;
    return pm.dot(pn) / (pm.norm() * pn.norm());  // Eigen dot conjugates the left argument
}

std::pair<DensityMatrix, QuantumLedger> parity_feedback(const DensityMatrix& rho,
                                                        const MeasurementPair& pair) {
    enforce_guard(rho, "parity_feedback");
    const int n = pair.space.dim;
    if (rho.entries.rows() != n)
        throw std::invalid_argument("parity_feedback: state dimension does not match measurement");

    const MatrixXcd& mp = pair.m_plus.entries;
    const MatrixXcd& mm = pair.m_minus.entries;
    const MatrixXcd branch_plus = hermitize(mp * rho.entries * mp.adjoint());
    const MatrixXcd branch_minus = hermitize(mm * rho.entries * mm.adjoint());
    const double p_plus = real_trace(branch_plus);
    const double p_minus = real_trace(branch_minus);

    const MatrixXcd uncond = branch_plus + branch_minus;
    MatrixXcd flipped = branch_minus;
    for (int r = 0; r < n; ++r)
        for (int c = 0; c < n; ++c)
            if ((r + c) % 2 == 1) flipped(r, c) = -flipped(r, c);  // Pi X Pi^dag
    const MatrixXcd final_state = branch_plus + flipped;

    QuantumLedger led;
    led.probability_plus = p_plus;
    led.probability_minus = p_minus;
    led.energy_initial = energy(rho, pair.space);
    led.energy_unconditional = energy(DensityMatrix{uncond}, pair.space);
    led.energy_final = energy(DensityMatrix{final_state}, pair.space);
    led.entropy_initial = von_neumann_entropy(rho);
    led.entropy_plus = p_plus > kBranchTol
                           ? von_neumann_entropy(DensityMatrix{branch_plus / p_plus})
                           : 0.0;
    led.entropy_minus = p_minus > kBranchTol
                            ? von_neumann_entropy(DensityMatrix{branch_minus / p_minus})
                            : 0.0;
    led.entropy_unconditional = von_neumann_entropy(DensityMatrix{uncond});
    led.entropy_final = von_neumann_entropy(DensityMatrix{final_state});
    led.outcome_entropy = 0.0;
    for (double p : {p_plus, p_minus})
        if (p > 1e-15) led.outcome_entropy -= p * std::log(p);
    led.mutual_information =
        led.entropy_unconditional - p_plus * led.entropy_plus - p_minus * led.entropy_minus;
    return {DensityMatrix{final_state}, led};
}

double energy_increase(const DensityMatrix& rho_thermal, const MeasurementPair& pair) {
    enforce_guard(rho_thermal, "energy_increase");
    const int n = static_cast<int>(rho_thermal.entries.rows());
    MatrixXcd offdiag = rho_thermal.entries;
    offdiag.diagonal().setZero();
    if (offdiag.cwiseAbs().maxCoeff() > kStateTol)
        throw std::invalid_argument("energy_increase: expects a thermal (diagonal) input state");
    const MatrixXcd& mp = pair.m_plus.entries;
    const MatrixXcd& mm = pair.m_minus.entries;
    const MatrixXcd uncond =
        hermitize(mp * rho_thermal.entries * mp.adjoint() + mm * rho_thermal.entries * mm.adjoint());
    (void)n;
    return energy(DensityMatrix{uncond}, pair.space) - energy(rho_thermal, pair.space);
}

double variance_ratio_gamma(const DensityMatrix& rho, const MeasurementPair& pair) {
    enforce_guard(rho, "variance_ratio_gamma");
    const MatrixXcd q = position_matrix(pair.space.dim).cast<cd>();
    const MatrixXcd q2 = q * q;
    const auto var_of = [&](const DensityMatrix& s) {
        const double m1 = expectation(s, q).real();
        return expectation(s, q2).real() - m1 * m1;
    };
    const auto [plus, p] = measure(rho, pair, +1);
    (void)p;
    return var_of(plus) / var_of(rho);
}

ThermalisationResult thermalisation_map(const DensityMatrix& rho, const MeasurementPair& pair) {
    // Feedback outputs at small displacement legitimately populate high
    // levels, so this entry point uses a relaxed truncation threshold; the
    // caller should report truncation_leakage(rho) alongside the results.
    validate(rho);
    const double leak = truncation_leakage(rho);
    if (!(leak < 1e-2))
        throw truncation_error("thermalisation_map: top-band population " + fmt(leak) +
                               " too large even for the relaxed 1e-2 threshold; increase the "
                               "space dimension");
    const int n = pair.space.dim;
    if (rho.entries.rows() != n)
        throw std::invalid_argument("thermalisation_map: state dimension does not match measurement");
    // sum_n rho_nn |psi_n><psi_n| = W diag(rho) W^dag since |psi_n> = -i W |n>.
    VectorXcd diag(n);
    for (int k = 0; k < n; ++k) diag(k) = rho.entries(k, k).real();
    const MatrixXcd out = hermitize(pair.rotation * diag.asDiagonal() * pair.rotation.adjoint());
    const double tr = real_trace(out);
    if (!(std::abs(tr - 1.0) <= 1e-8))
        throw std::runtime_error("thermalisation_map: trace not preserved (trace = " + fmt(tr) + ")");
    ThermalisationResult res;
    res.state = DensityMatrix{out};
    res.entropy_change = von_neumann_entropy(res.state) - von_neumann_entropy(rho);
    res.energy_change = energy(res.state, pair.space) - energy(rho, pair.space);
    return res;
}

InterventionResult cptp_intervention(const DensityMatrix& rho,
                                     const std::vector<MatrixXcd>& kraus,
                                     const std::vector<KrausChannel>& channels) {
    validate(rho);
    if (kraus.empty()) throw std::invalid_argument("cptp_intervention: empty measurement set");
    if (channels.size() != kraus.size())
        throw std::invalid_argument("cptp_intervention: need one channel per measurement outcome");
    const int n = static_cast<int>(rho.entries.rows());
    const MatrixXcd id = MatrixXcd::Identity(n, n);

    MatrixXcd comp = MatrixXcd::Zero(n, n);
    for (const MatrixXcd& m : kraus) {
        check_square(m, "cptp_intervention");
        if (m.rows() != n)
            throw std::invalid_argument("cptp_intervention: operator dimension mismatch");
        comp += m.adjoint() * m;
    }
    if ((comp - id).cwiseAbs().maxCoeff() > 1e-10)
        throw std::invalid_argument("cptp_intervention: measurement set is not complete");
    for (const KrausChannel& ch : channels) {
        MatrixXcd tp = MatrixXcd::Zero(n, n);
        for (const MatrixXcd& k : ch.operators) {
            check_square(k, "cptp_intervention");
            if (k.rows() != n)
                throw std::invalid_argument("cptp_intervention: channel dimension mismatch");
            tp += k.adjoint() * k;
        }
        if ((tp - id).cwiseAbs().maxCoeff() > 1e-10)
            throw std::invalid_argument("cptp_intervention: channel is not trace preserving");
    }

    InterventionResult res;
    res.probabilities.resize(kraus.size());
    res.conditional_states.resize(kraus.size());
    MatrixXcd uncond = MatrixXcd::Zero(n, n);
    for (std::size_t x = 0; x < kraus.size(); ++x) {
        const MatrixXcd branch = hermitize(kraus[x] * rho.entries * kraus[x].adjoint());
        const double p = real_trace(branch);
        res.probabilities[x] = p;
        MatrixXcd mapped = MatrixXcd::Zero(n, n);
        for (const MatrixXcd& k : channels[x].operators)
            mapped += k * branch * k.adjoint();
        mapped = hermitize(mapped);
        uncond += mapped;
        res.conditional_states[x] =
            DensityMatrix{p > kBranchTol ? MatrixXcd(mapped / p) : MatrixXcd::Zero(n, n)};
    }
    res.unconditional = DensityMatrix{std::move(uncond)};
    return res;
}

}  // namespace intervene::fock

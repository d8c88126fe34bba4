/**
 * Acceptance gate: one self-contained check per shipped guarantee, each
 * printing exactly one PASS/FAIL line with its measured numbers. Tolerances
 * are pinned here, not configurable. Run with a criterion number (1-11) to
 * check one guarantee, or with no arguments to run the full gate; the exit
 * code is 0 only if every selected criterion passes.
 */
#include <algorithm>
#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <cstdlib>
#include <string>
#include <vector>

#include "intervene/covariance.hpp"
#include "intervene/fock.hpp"
#include "intervene/gaussian.hpp"
#include "intervene/grid.hpp"
#include "intervene/montecarlo.hpp"

namespace {

using namespace intervene;

// Pinned tolerances.
constexpr double kExact = 1e-12;        // closed-form identities
constexpr double kQuadrature = 1e-6;    // independent numerical integration
constexpr double kZLimit = 5.0;         // Monte Carlo z-score gate
constexpr double kGridRel = 1e-4;       // relative moment errors on the grid
constexpr double kDeltaL1 = 1e-3;       // noise-free joint vs swapped product
constexpr double kCompleteness = 1e-10; // Kraus/POVM completeness
constexpr double kEntropyWindow = 0.01; // ln-2 bookkeeping window (nats)
constexpr double kEnergyNeutral = 1e-10;
constexpr double kRobust = 1e-6;        // scalar drift when the basis doubles

std::string num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

/// Wall-clock stopwatch for the criteria that carry a runtime ceiling.
class Stopwatch {
  public:
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }

  private:
    std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

const double kSharpnessSweep[] = {1.5, 2.0, 5.0, 100.0};

gauss::MeasurementModel model_for(double c, const gauss::SystemContext& ctx) {
    // coupling 1, apparatus variance chosen so 1 + variance_th / sigma = c.
    return gauss::MeasurementModel{1.0, ctx.thermal_variance() / (c - 1.0)};
}

// --- criterion bodies ----------------------------------------------------

bool criterion1(std::string& detail) {
    const gauss::SystemContext ctx{1.0, 1.0};
    double max_dev = 0.0, prev = -1.0;
    bool monotone = true, below_one = true;
    for (double c : kSharpnessSweep) {
        const gauss::ThermoLedger led = gauss::intervene_to_zero(ctx, model_for(c, ctx));
        const double expected = ((c - 1.0) / c) * ((c - 1.0) / c);
        max_dev = std::max(max_dev, std::abs(led.efficiency - expected));
        monotone = monotone && led.efficiency > prev;
        below_one = below_one && led.efficiency < 1.0;
        prev = led.efficiency;
    }
    detail = "max |eta - ((C-1)/C)^2| = " + num(max_dev) + " over C in {1.5, 2, 5, 100}; " +
             (monotone ? "monotone rise toward 1" : "NOT monotone") +
             (below_one ? "" : "; eta reached 1 at finite C");
    return max_dev <= kExact && monotone && below_one;
}

bool criterion2(std::string& detail) {
    const Stopwatch clock;
    const gauss::SystemContext ctx{1.0, 1.0};
    const gauss::GaussianMoment prior{0.0, ctx.thermal_variance()};
    double max_dev = 0.0, max_quad = 0.0;
    for (double c : kSharpnessSweep) {
        const gauss::MeasurementModel model = model_for(c, ctx);
        const gauss::ThermoLedger led = gauss::intervene_to_zero(ctx, model);
        const double half_log = 0.5 * std::log(c);
        max_dev = std::max({max_dev, std::abs(led.entropy_change + half_log),
                            std::abs(led.mutual_information - half_log),
                            std::abs(led.entropy_change + led.mutual_information)});
        max_quad = std::max(max_quad, std::abs(gauss::mutual_information_quadrature(prior, model) -
                                               half_log));
    }
    const double sec = clock.seconds();
    detail = "max closed-form deviation " + num(max_dev) + " (tol 1e-12); max quadrature gap " +
             num(max_quad) + " (tol 1e-6); runtime " + num(sec) + " s (limit 1)";
    return max_dev <= kExact && max_quad <= kQuadrature && sec < 1.0;
}

bool criterion3(std::string& detail) {
    const gauss::SystemContext ctx{1.0, 1.0};
    const double v = ctx.thermal_variance(), m2 = 2.0 * ctx.mass;
    double max_dev = 0.0, min_margin = 1e300;
    for (double c : kSharpnessSweep) {
        const gauss::ThermoLedger led = gauss::intervene_to_zero(ctx, model_for(c, ctx));
        const double via_free_energy =
            -led.free_energy_change + ctx.temperature * led.mutual_information;
        const double closed_form = (v / m2) * (c - 1.0) / c;
        max_dev = std::max({max_dev, std::abs(led.extractable_work_bound - via_free_energy),
                            std::abs(led.extractable_work_bound - closed_form)});
        min_margin = std::min(min_margin, led.avg_work - led.extractable_work_bound);
    }
    detail = "max |W_ext - (-dF + T*I)| and closed-form deviation " + num(max_dev) +
             "; min (avg work - bound) = " + num(min_margin) + " > 0";
    return max_dev <= kExact && min_margin > 0.0;
}

bool criterion4(std::string& detail) {
    const Stopwatch clock;
    const gauss::SystemContext ctx{1.0, 1.0};
    const gauss::MeasurementModel model{1.0, 1.0};  // sharpness 2
    const std::int64_t n = 1000000;
    const std::uint64_t seed = 1;
    const mc::RunSummary s1 = mc::run_trials(ctx, model, n, seed);
    const gauss::ThermoLedger led = gauss::intervene_to_zero(ctx, model);
    const mc::ComparisonReport rep = mc::compare(s1, led);
    double max_z = 0.0;
    std::string zs;
    for (const mc::ZScore& z : rep.entries) {
        max_z = std::max(max_z, std::abs(z.z));
        if (!zs.empty()) zs += ", ";
        zs += z.quantity + " z=" + num(z.z);
    }
    const mc::RunSummary s2 = mc::run_trials(ctx, model, n, seed);
    bool bitwise = s1.mean_work == s2.mean_work && s1.se_work == s2.se_work &&
                   s1.mean_energy_change == s2.mean_energy_change &&
                   s1.se_energy_change == s2.se_energy_change &&
                   s1.empirical_efficiency == s2.empirical_efficiency &&
                   s1.binned_conditional_moments.size() == s2.binned_conditional_moments.size();
    if (bitwise)
        for (std::size_t i = 0; i < s1.binned_conditional_moments.size(); ++i) {
            const auto& a = s1.binned_conditional_moments[i];
            const auto& b = s2.binned_conditional_moments[i];
            bitwise = bitwise && a.count == b.count && a.mean_outcome == b.mean_outcome &&
                      a.mean_prior == b.mean_prior && a.var_prior == b.var_prior;
        }
    const double sec = clock.seconds();
    detail = "n=10^6, C=2: " + zs + " (limit 5); rerun with seed " + std::to_string(seed) +
             (bitwise ? " is bitwise identical" : " DIFFERS") + "; runtime " + num(sec) +
             " s (limit 30)";
    return !rep.any_flagged && max_z < kZLimit && bitwise && sec < 30.0;
}

bool criterion5(std::string& detail) {
    const gauss::SystemContext ctx{1.0, 2.0};  // thermal variance m kT = 2
    const gauss::EquivalentPair pair = gauss::equivalent_pair(ctx, 1.0, 0.5);
    const double mean_gap = std::abs(pair.final1.mean - pair.final2.mean);
    const double var_gap = std::abs(pair.final1.variance - pair.final2.variance);
    const bool ordered = pair.ledger2.efficiency < pair.ledger1.efficiency;
    detail = "final-state gaps: mean " + num(mean_gap) + ", variance " + num(var_gap) +
             " (tol 1e-12); efficiencies " + num(pair.ledger1.efficiency) + " vs " +
             num(pair.ledger2.efficiency) + (ordered ? " (noisy strictly lower)" : " (NOT ordered)");
    return mean_gap <= kExact && var_gap <= kExact && ordered;
}

bool criterion6(std::string& detail) {
    const Stopwatch clock;
    const grid::Grid1D g{-12.0, 12.0, 1024};
    const gauss::GaussianMoment in_a{0.5, 1.0}, in_b{-0.5, 1.5};
    const grid::GridDistribution pa = grid::discretize(in_a, g);
    const grid::GridDistribution pb = grid::discretize(in_b, g);

    double max_rel = 0.0, delta_l1 = -1.0;
    const auto rel = [](double measured, double expected) {
        return std::abs(measured - expected) / std::abs(expected);
    };
    for (double v : {0.0, 0.1, 1.0}) {
        grid::JointDistribution joint;
        if (v == 0.0) {
            joint = grid::collision_map(pa, pb);
            grid::JointDistribution crossed{
                g, g, std::vector<double>(static_cast<std::size_t>(g.points) * g.points)};
            for (int ia = 0; ia < g.points; ++ia)
                for (int ib = 0; ib < g.points; ++ib)
                    crossed.values[static_cast<std::size_t>(ia) * g.points + ib] =
                        pa.values[ib] * pb.values[ia];
            grid::normalize(crossed);
            delta_l1 = grid::l1_distance(joint, crossed);
        } else {
            // Noise lattice aligned with the collision lattice (same spacing).
            const int half = static_cast<int>(std::ceil(6.0 * std::sqrt(v) / g.h()));
            const grid::Grid1D eg{-half * g.h(), half * g.h(), 2 * half + 1};
            const grid::GridDistribution eps = grid::discretize(gauss::GaussianMoment{0.0, v}, eg);
            joint = grid::collision_map(pa, pb, eps);
        }
        const grid::GridDistribution ma = grid::marginal_a(joint);
        const grid::GridDistribution mb = grid::marginal_b(joint);
        max_rel = std::max({max_rel, rel(grid::mean(ma), in_b.mean),
                            rel(grid::mean(mb), in_a.mean),
                            rel(grid::variance(ma), in_b.variance + v),
                            rel(grid::variance(mb), in_a.variance + v)});
    }
    const double sec = clock.seconds();
    detail = "1024^2 grid, noise variance in {0, 0.1, 1}: max relative moment error " +
             num(max_rel) + " (tol 1e-4); noise-free joint L1 to swapped product " + num(delta_l1) +
             " (tol 1e-3); runtime " + num(sec) + " s (limit 60)";
    return max_rel <= kGridRel && delta_l1 >= 0.0 && delta_l1 <= kDeltaL1 && sec < 60.0;
}

bool criterion7(std::string& detail) {
    const fock::FockSpace space{64, 1.0};
    const Eigen::MatrixXcd id = Eigen::MatrixXcd::Identity(space.dim, space.dim);
    double max_dev = 0.0;
    for (double lambda : {1e-3, 0.1, 1.0, 10.0}) {
        const fock::MeasurementPair pair = fock::build_measurement(space, lambda);
        const double dev = (pair.m_plus.entries.adjoint() * pair.m_plus.entries +
                            pair.m_minus.entries.adjoint() * pair.m_minus.entries - id)
                               .cwiseAbs()
                               .maxCoeff();
        max_dev = std::max(max_dev, dev);
    }
    detail = "max completeness deviation " + num(max_dev) +
             " over displacement scales {1e-3, 0.1, 1, 10} at 64 levels (tol 1e-10)";
    return max_dev < kCompleteness;
}

bool criterion8(std::string& detail) {
    const Stopwatch clock;
    const double ln2 = std::log(2.0);
    const fock::FockSpace space{64, 1.0};
    const fock::MeasurementPair pair = fock::build_measurement(space, 1e-2);
    const fock::DensityMatrix rho = fock::thermal_state(space, 1.0);
    const auto [rho_f, led] = fock::parity_feedback(rho, pair);
    (void)rho_f;

    double h_pop = 0.0;  // population entropy of the pre-measurement state
    for (int k = 0; k < space.dim; ++k) {
        const double p = rho.entries(k, k).real();
        if (p > 1e-300) h_pop -= p * std::log(p);
    }
    const double budget = led.entropy_unconditional - h_pop;
    const double removed = led.entropy_unconditional - led.entropy_final;
    const double neutrality = std::abs(led.energy_final - led.energy_unconditional);

    const bool clause_budget = std::abs(budget - ln2) <= kEntropyWindow;
    const bool clause_removed = std::abs(removed - ln2) <= kEntropyWindow;
    const bool clause_neutral = neutrality <= kEnergyNeutral;
    const double sec = clock.seconds();
    detail = "measurement entropy budget " + num(budget) + " vs ln 2 = " + num(ln2) + " +- 0.01 (" +
             (clause_budget ? "within" : "OUTSIDE") + "); feedback removed " + num(removed) + " (" +
             (clause_removed ? "within" : "OUTSIDE") + "); energy neutrality " + num(neutrality) +
             " (tol 1e-10" + (clause_neutral ? ")" : ", EXCEEDED)") + "; runtime " + num(sec) +
             " s (limit 10); neighbouring conditional states overlap at finite displacement, so "
             "the budget sits below its small-displacement limit";
    return clause_budget && clause_removed && clause_neutral && sec < 10.0;
}

bool criterion9(std::string& detail) {
    const double ln2 = std::log(2.0);

    // Calibrated bound: at the displacement scale where the conditional
    // position variance is exactly half the prior variance, the measurement
    // energy increase obeys dE <= (2 nbar + 1) / 4 (frequency 1).
    struct BoundCase {
        double nbar;
        int dim;
    };
    bool bounded = true;
    double max_gamma_gap = 0.0;
    std::string part_a;
    for (const BoundCase c : {BoundCase{1.0, 64}, BoundCase{2.0, 64}, BoundCase{5.0, 128}}) {
        const fock::FockSpace space{c.dim, 1.0};
        const fock::DensityMatrix rho = fock::thermal_state(space, c.nbar);
        double lo = 1e-3, hi = 50.0;
        for (int it = 0; it < 60; ++it) {
            const double mid = std::sqrt(lo * hi);
            (fock::variance_ratio_gamma(rho, fock::build_measurement(space, mid)) < 0.5 ? lo : hi) =
                mid;
        }
        const double lambda = std::sqrt(lo * hi);
        const fock::MeasurementPair pair = fock::build_measurement(space, lambda);
        max_gamma_gap =
            std::max(max_gamma_gap, std::abs(fock::variance_ratio_gamma(rho, pair) - 0.5));
        const double de = fock::energy_increase(rho, pair);
        const double bound = (2.0 * c.nbar + 1.0) / 4.0;
        bounded = bounded && de <= bound + 1e-9;
        if (!part_a.empty()) part_a += ", ";
        part_a += "nbar " + num(c.nbar) + ": dE " + num(de) + " <= " + num(bound);
    }

    // High-temperature erasure cost, kT = 1 / ln(1 + 1/nbar), 10% slack: the
    // measurement's energy increase stays below kT ln 2, and so does the cost
    // of resetting the post-feedback state through the level-replacement map.
    bool erasure_ok = true;
    std::string part_b;
    for (const BoundCase c : {BoundCase{5.0, 128}, BoundCase{10.0, 256}, BoundCase{20.0, 512}}) {
        const fock::FockSpace space{c.dim, 1.0};
        const fock::DensityMatrix rho = fock::thermal_state(space, c.nbar);
        const fock::MeasurementPair pair = fock::build_measurement(space, 1e-2);
        const double de_meas = fock::energy_increase(rho, pair);
        const auto [rho_f, led] = fock::parity_feedback(rho, pair);
        (void)led;
        const fock::ThermalisationResult th = fock::thermalisation_map(rho_f, pair);
        const double limit = ln2 * 1.1 / std::log1p(1.0 / c.nbar);
        erasure_ok = erasure_ok && de_meas <= limit && std::abs(th.energy_change) <= limit;
        if (!part_b.empty()) part_b += ", ";
        part_b += "nbar " + num(c.nbar) + ": measurement dE " + num(de_meas) + " and reset |dE| " +
                  num(std::abs(th.energy_change)) + " <= " + num(limit);
    }

    detail = "half-variance calibration gap " + num(max_gamma_gap) + " (tol 1e-6); " + part_a +
             "; erasure: " + part_b;
    return max_gamma_gap <= 1e-6 && bounded && erasure_ok;
}

bool criterion10(std::string& detail) {
    const cov::GeneratorMaps maps = cov::symplectic_of_generators();
    const Eigen::MatrixXd om = cov::symplectic_form();
    double max_symp = 0.0;
    for (const cov::SymplecticMap* m : {&maps.s_u, &maps.s_v, &maps.s_vu})
        max_symp = std::max(max_symp, (m->matrix * om * m->matrix.transpose() - om)
                                          .cwiseAbs()
                                          .maxCoeff());

    const cov::SingleModeState mode_a = cov::coherent_mode(1.0, 0.5);
    const cov::SingleModeState mode_b = cov::coherent_mode(0.0, 0.0);
    double max_var_dev = 0.0;
    for (const cov::SingleModeState& aux :
         {cov::vacuum_mode(), cov::squeezed_mode(0.25 / 0.05, 0.05)}) {
        const cov::CovarianceState out =
            cov::evolve(cov::three_mode(mode_a, mode_b, aux), maps.s_vu);
        const double vp_aux = aux.covariance(1, 1);
        max_var_dev = std::max(
            {max_var_dev,
             std::abs(cov::reduce_mode(out, 0).covariance(1, 1) -
                      (mode_b.covariance(1, 1) + vp_aux)),
             std::abs(cov::reduce_mode(out, 1).covariance(1, 1) -
                      (mode_a.covariance(1, 1) + vp_aux))});
    }

    const cov::CovarianceState vac_out =
        cov::evolve(cov::three_mode(mode_a, mode_b, cov::vacuum_mode()), maps.s_vu);
    const double f_vac = cov::swap_fidelity(vac_out, mode_b);
    const cov::CovarianceState sharp_out = cov::evolve(
        cov::three_mode(mode_a, mode_b, cov::squeezed_mode(0.25 / 1e-6, 1e-6)), maps.s_vu);
    const double f_sharp = cov::swap_fidelity(sharp_out, mode_b);

    const cov::CovarianceState squeezed_out = cov::evolve(
        cov::three_mode(mode_a, mode_b, cov::squeezed_mode(0.25 / 0.05, 0.05)), maps.s_vu);
    const double en = cov::log_negativity(squeezed_out, {2});
    const bool ppt_broken = !cov::ppt_physicality(squeezed_out, {2});
    const double en_product =
        cov::log_negativity(cov::three_mode(mode_a, mode_b, cov::squeezed_mode(2.5, 0.1)), {2});

    detail = "symplectic deviation " + num(max_symp) + ", variance-addition deviation " +
             num(max_var_dev) + " (tol 1e-12); swap fidelity " + num(f_sharp) +
             " at P-variance 1e-6, " + num(f_vac) + " at vacuum; pair|aux negativity " + num(en) +
             " with PPT physicality " + (ppt_broken ? "broken" : "INTACT") +
             "; product-state negativity " + num(en_product);
    return max_symp <= kExact && max_var_dev <= kExact && f_sharp > 0.999 && f_vac < 1.0 &&
           en > 0.0 && ppt_broken && en_product <= kExact;
}

bool criterion11(std::string& detail) {
    const fock::FockSpace small{64, 1.0}, big{128, 1.0};
    const double lambda_resolved = 1.0;   // spectral spacing well below this scale
    const double lambda_reference = 1e-2; // reference operating point (under-resolved)

    // Full scalar set at the resolved scale, where every state in the round
    // (input, conditional, feedback output) passes the truncation guard.
    const fock::MeasurementPair p64 = fock::build_measurement(small, lambda_resolved);
    const fock::MeasurementPair p128 = fock::build_measurement(big, lambda_resolved);
    const fock::DensityMatrix t64 = fock::thermal_state(small, 1.0);
    const fock::DensityMatrix t128 = fock::thermal_state(big, 1.0);
    const auto [f64, l64] = fock::parity_feedback(t64, p64);
    const auto [f128, l128] = fock::parity_feedback(t128, p128);
    const bool derived_guarded = fock::truncation_leakage(f64) < 1e-8;

    double max_drift = 0.0;
    const auto drift = [&max_drift](double a, double b) {
        max_drift = std::max(max_drift, std::abs(b - a));
    };
    drift(l64.probability_plus, l128.probability_plus);
    drift(l64.energy_initial, l128.energy_initial);
    drift(l64.energy_unconditional, l128.energy_unconditional);
    drift(l64.energy_final, l128.energy_final);
    drift(l64.entropy_initial, l128.entropy_initial);
    drift(l64.entropy_unconditional, l128.entropy_unconditional);
    drift(l64.entropy_final, l128.entropy_final);
    drift(l64.mutual_information, l128.mutual_information);
    drift(fock::variance_ratio_gamma(t64, p64), fock::variance_ratio_gamma(t128, p128));
    drift(fock::energy_increase(t64, p64), fock::energy_increase(t128, p128));
    drift(fock::overlap_g(0, p64), fock::overlap_g(0, p128));

    // State-derived scalars of guard-passing states at any scale.
    const Eigen::VectorXcd c64 = fock::coherent_state(small, 1.0);
    const Eigen::VectorXcd c128 = fock::coherent_state(big, 1.0);
    drift(fock::energy(fock::pure_state(c64), small), fock::energy(fock::pure_state(c128), big));
    drift(fock::von_neumann_entropy(t64), fock::von_neumann_entropy(t128));
    drift(fock::energy(t64, small), fock::energy(t128, big));
    Eigen::VectorXcd n3_64 = Eigen::VectorXcd::Zero(small.dim);
    Eigen::VectorXcd n3_128 = Eigen::VectorXcd::Zero(big.dim);
    n3_64(3) = 1.0;
    n3_128(3) = 1.0;
    const fock::MeasurementPair r64 = fock::build_measurement(small, lambda_reference);
    const fock::MeasurementPair r128 = fock::build_measurement(big, lambda_reference);
    drift(fock::measure(fock::pure_state(n3_64), r64, +1).second,
          fock::measure(fock::pure_state(n3_128), r128, +1).second);
    drift(fock::measure(t64, r64, +1).second, fock::measure(t128, r128, +1).second);

    // Informational: at the under-resolved reference scale the *derived*
    // states fail the guard and the operator-level scalars do move.
    const double g_drift = std::abs(fock::overlap_g(0, r128) - fock::overlap_g(0, r64));
    const double de_drift =
        std::abs(fock::energy_increase(t128, r128) - fock::energy_increase(t64, r64));

    detail = "max drift of 16 reported scalars under 64 -> 128 at resolved scale " +
             num(max_drift) + " (tol 1e-6; derived states " +
             (derived_guarded ? "guard-clean" : "NOT guarded") +
             "); under-resolved reference scale drifts, outside the guarded scope: overlap "
             "amplitude " +
             num(g_drift) + ", measurement energy " + num(de_drift);
    return max_drift < kRobust && derived_guarded;
}

struct Criterion {
    int number;
    const char* description;
    bool (*run)(std::string&);
};

const Criterion kCriteria[] = {
    {1, "intervention efficiency equals ((C-1)/C)^2 and rises toward unity", criterion1},
    {2, "entropy change equals minus the information gain, confirmed by quadrature", criterion2},
    {3, "extractable-work bound equals -dF + T*I and stays strictly below average work",
     criterion3},
    {4, "Monte Carlo moments within |z| < 5 of the ledger; identical seed reproduces bitwise",
     criterion4},
    {5, "matched-output protocols coincide unconditionally; noisy variant strictly less efficient",
     criterion5},
    {6, "grid collision swaps means and adds noise variance; delta limit matches swapped product",
     criterion6},
    {7, "binary-measurement Kraus pair complete to 1e-10 across displacement scales", criterion7},
    {8, "entropy bookkeeping: ln-2 budget, ln-2 feedback removal, energy-neutral feedback",
     criterion8},
    {9, "energy increase bounded at the gamma = 1/2 boundary; high-temperature erasure cost",
     criterion9},
    {10, "covariance backend: symplectic maps, exact variance addition, fidelity and negativity",
     criterion10},
    {11, "doubling the basis moves no guarded-regime scalar by more than 1e-6", criterion11},
};

}  // namespace

int main(int argc, char** argv) {
    int selected = 0;
    if (argc > 1) {
        selected = std::atoi(argv[1]);
        if (selected < 1 || selected > 11) {
            std::fprintf(stderr, "usage: %s [criterion 1-11]\n", argv[0]);
            return 2;
        }
    }
    bool all_ok = true;
    for (const Criterion& c : kCriteria) {
        if (selected != 0 && c.number != selected) continue;
        std::string detail;
        bool ok = false;
        try {
            ok = c.run(detail);
        } catch (const std::exception& e) {
            detail = std::string("exception: ") + e.what();
        }
        std::printf("criterion %d: %s — %s: %s\n", c.number, ok ? "PASS" : "FAIL", c.description,
                    detail.c_str());
        std::fflush(stdout);
        all_ok = all_ok && ok;
    }
    return all_ok ? 0 : 1;
}

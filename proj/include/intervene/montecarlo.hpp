/**
 * Monte Carlo trial harness for the classical measure-and-shift protocol.
 * Samples momenta from the thermal prior, draws measurement outcomes, applies
 * the mean-zeroing impulse, and accumulates work/energy statistics that are
 * compared (as z-scores) against the closed-form thermodynamic ledger.
 *
 * Determinism contract: trial i's randomness is a pure function of
 * (seed, i) via a counter-based generator, and the summary reduction runs in
 * a fixed block order, so results are bitwise identical for any worker count.
 */
#pragma once

#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "intervene/gaussian.hpp"

namespace intervene::mc {

/// Requested trial count is too small for the acceptance thresholds.
struct statistical_power_error : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// One simulated intervention.
struct TrialRecord {
    double prior_sample = 0.0;   // momentum drawn from the thermal prior
    double outcome = 0.0;        // measurement record x
    double shift_applied = 0.0;  // impulse -(C-1)/C * (x/coupling)
    double work = 0.0;           // measurement-record energy (x/coupling)^2 / 2m, >= 0
    double post_momentum = 0.0;  // prior_sample + shift_applied
};

/// Per-outcome-bin conditional moments (32 equal-probability bins of the
/// analytic outcome distribution).
struct BinMoments {
    double x_lower = 0.0;        // bin edge (may be -inf / +inf at the ends)
    double x_upper = 0.0;
    std::int64_t count = 0;
    double mean_outcome = 0.0;   // average x within the bin
    double mean_prior = 0.0;     // E(p | bin)
    double var_prior = 0.0;      // V(p | bin), sample variance
};

struct RunSummary {
    std::int64_t n_trials = 0;
    std::uint64_t seed = 0;
    gauss::SystemContext context;
    gauss::MeasurementModel model;
    double sharpness = 0.0;              // C implied by (context, model)
    double mean_work = 0.0;
    double se_work = 0.0;                // sample std / sqrt(n)
    double mean_energy_change = 0.0;     // E[(p_f^2 - p_i^2)/2m]
    double se_energy_change = 0.0;
    double empirical_efficiency = 0.0;   // -mean_energy_change / mean_work
    std::vector<BinMoments> binned_conditional_moments;
};

/// One z-score line of a summary-vs-ledger comparison.
struct ZScore {
    std::string quantity;
    double simulated = 0.0;
    double analytic = 0.0;
    double standard_error = 0.0;
    double z = 0.0;
    bool flagged = false;  // |z| > 5
};

struct ComparisonReport {
    std::vector<ZScore> entries;
    bool any_flagged = false;
};

/// Deterministic reconstruction of trial i for the given seed.
TrialRecord make_trial(const gauss::SystemContext& ctx, const gauss::MeasurementModel& model,
                       std::uint64_t seed, std::int64_t i);

/// Run n >= 1000 trials (counter-based streams; block-ordered reduction).
RunSummary run_trials(const gauss::SystemContext& ctx, const gauss::MeasurementModel& model,
                      std::int64_t n, std::uint64_t seed);

/// z-scores of the empirical moments against the analytic ledger:
/// mean work, mean energy change, binned conditional-mean slope vs
/// (C-1)/(C*coupling), and the law-of-total-variance sum vs the prior
/// variance. Throws std::invalid_argument when the sharpness implied by the
/// summary does not match the ledger.
ComparisonReport compare(const RunSummary& summary, const gauss::ThermoLedger& ledger);

/// Stream the first `max_rows` trial records as CSV (17-significant-digit
/// floats); max_rows < 0 streams all n rows.
void write_trials_csv(const gauss::SystemContext& ctx, const gauss::MeasurementModel& model,
                      std::int64_t n, std::uint64_t seed, std::ostream& os,
                      std::int64_t max_rows = -1);

/// Inverse standard normal CDF (Acklam's rational approximation, |err| < 1.2e-9);
/// used for the equal-probability outcome bin edges.
double inverse_normal_cdf(double prob);

}  // namespace intervene::mc

#include "intervene/gaussian.hpp"

#include <cmath>
#include <limits>
#include <vector>

namespace intervene::gauss {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

double gaussian_pdf(double x, double mean, double variance) {
    const double d = x - mean;
    return std::exp(-0.5 * d * d / variance) / std::sqrt(kTwoPi * variance);
}

}  // namespace

// === validation =========================================================

void validate(const GaussianMoment& g) {
    if (!(g.variance > 0.0)) {
        throw std::invalid_argument("GaussianMoment: variance must be > 0, got " +
                                    std::to_string(g.variance));
    }
}

void validate(const MeasurementModel& m) {
    if (m.coupling == 0.0) {
        throw std::invalid_argument("MeasurementModel: coupling must be nonzero");
    }
    if (m.apparatus_variance < 0.0) {
        throw std::invalid_argument("MeasurementModel: apparatus_variance must be >= 0, got " +
                                    std::to_string(m.apparatus_variance));
    }
}

void validate(const SystemContext& c) {
    if (!(c.mass > 0.0) || !(c.temperature > 0.0)) {
        throw std::invalid_argument("SystemContext: mass and temperature must be > 0");
    }
}

// === measurement algebra ================================================

double sharpness(const GaussianMoment& prior, const MeasurementModel& model) {
    validate(prior);
    validate(model);
    if (model.ideal_limit()) {
        throw ideal_limit_error("sharpness: sigma = 0 is the ideal limit; use limit forms");
    }
    return 1.0 + model.coupling * model.coupling * prior.variance / model.apparatus_variance;
}

GaussianMoment outcome_distribution(const GaussianMoment& prior, const MeasurementModel& model) {
    validate(prior);
    validate(model);
    return {model.coupling * prior.mean,
            model.apparatus_variance + model.coupling * model.coupling * prior.variance};
}

GaussianMoment conditional_state(const GaussianMoment& prior, const MeasurementModel& model,
                                 double x) {
    const double c = sharpness(prior, model);  // validates; throws on ideal limit
    const double gain = (c - 1.0) / c;
    return {prior.mean + gain * (x / model.coupling - prior.mean), prior.variance / c};
}

double mutual_information(double sharpness_c) {
    if (!(sharpness_c >= 1.0)) {
        throw std::invalid_argument("mutual_information: sharpness must be >= 1, got " +
                                    std::to_string(sharpness_c));
    }
    return 0.5 * std::log(sharpness_c);
}

double mutual_information_quadrature(const GaussianMoment& prior, const MeasurementModel& model,
                                     int points_x, int points_p) {
    validate(prior);
    validate(model);
    if (model.ideal_limit()) {
        throw ideal_limit_error("mutual_information_quadrature: sigma = 0 not integrable");
    }
    if (points_x < 64 || points_p < 64) {
        throw std::invalid_argument("mutual_information_quadrature: need >= 64 points per axis");
    }
    const GaussianMoment out = outcome_distribution(prior, model);
    const double sp = std::sqrt(prior.variance);
    const double sx = std::sqrt(out.variance);
    const double p_lo = prior.mean - 8.0 * sp, p_hi = prior.mean + 8.0 * sp;
    const double x_lo = out.mean - 8.0 * sx, x_hi = out.mean + 8.0 * sx;
    const double hp = (p_hi - p_lo) / (points_p - 1);
    const double hx = (x_hi - x_lo) / (points_x - 1);

    // Pre-tabulate ln P(x) on the x lattice; trapezoid weights on both axes.
    std::vector<double> log_px(points_x);
    for (int j = 0; j < points_x; ++j) {
        log_px[j] = std::log(gaussian_pdf(x_lo + j * hx, out.mean, out.variance));
    }
    double total = 0.0;
    for (int i = 0; i < points_p; ++i) {
        const double p = p_lo + i * hp;
        const double wp = (i == 0 || i == points_p - 1) ? 0.5 : 1.0;
        const double fp = gaussian_pdf(p, prior.mean, prior.variance);
        const double kmean = model.coupling * p;
        double row = 0.0;
        for (int j = 0; j < points_x; ++j) {
            const double x = x_lo + j * hx;
            const double wx = (j == 0 || j == points_x - 1) ? 0.5 : 1.0;
            const double kxp = gaussian_pdf(x, kmean, model.apparatus_variance);
            if (kxp <= 0.0) continue;  // deep tail underflow: integrand -> 0
            row += wx * kxp * (std::log(kxp) - log_px[j]);
        }
        total += wp * fp * row;
    }
    return total * hp * hx;
}

// === control maps =======================================================

GaussianMoment conservative_shift(const GaussianMoment& state, double shift) {
    validate(state);
    return {state.mean + shift, state.variance};
}

GaussianMoment noisy_shift(const GaussianMoment& state, double shift, double added_variance) {
    validate(state);
    if (added_variance < 0.0) {
        throw std::invalid_argument("noisy_shift: added_variance must be >= 0");
    }
    return {state.mean + shift, state.variance + added_variance};
}

// === protocols ==========================================================

ThermoLedger intervene_to_zero(const SystemContext& ctx, const MeasurementModel& model) {
    validate(ctx);
    const double delta = ctx.thermal_variance();
    const GaussianMoment prior{0.0, delta};
    if (model.ideal_limit()) {
        // Perfect apparatus, opt-in via the explicit zero-variance flag: every
        // field takes its closed-form limiting value (not naive inf/inf
        // arithmetic). Information and entropy diverge; the work ledger does not.
        const double m2 = 2.0 * ctx.mass;
        ThermoLedger ledger;
        ledger.sharpness = std::numeric_limits<double>::infinity();
        ledger.avg_work = delta / m2;
        ledger.avg_energy_change = -delta / m2;
        ledger.efficiency = 1.0;
        ledger.mutual_information = std::numeric_limits<double>::infinity();
        ledger.entropy_change = -std::numeric_limits<double>::infinity();
        ledger.free_energy_change = std::numeric_limits<double>::infinity();
        ledger.extractable_work_bound = delta / m2;  // limit of (V/2m)(C-1)/C
        return ledger;
    }
    const double c = sharpness(prior, model);
    if (c <= 1.0 + 1e-12) {
        throw degenerate_measurement_error(
            "intervene_to_zero: sharpness ~ 1, average work diverges");
    }
    const double gain = (c - 1.0) / c;  // in (0, 1)
    const double m2 = 2.0 * ctx.mass;
    ThermoLedger ledger;
    ledger.sharpness = c;
    ledger.avg_work = (delta / m2) * c / (c - 1.0);  // measurement-record energy E[(x/mu)^2]/2m
    ledger.avg_energy_change = -(delta / m2) * gain;
    ledger.efficiency = gain * gain;
    ledger.mutual_information = 0.5 * std::log(c);
    ledger.entropy_change = -ledger.mutual_information;
    ledger.free_energy_change =
        ledger.avg_energy_change - ctx.temperature * ledger.entropy_change;
    ledger.extractable_work_bound =
        -ledger.free_energy_change + ctx.temperature * ledger.mutual_information;
    return ledger;
}

EquivalentPair equivalent_pair(const SystemContext& ctx, double target_variance, double noise) {
    validate(ctx);
    const double vth = ctx.thermal_variance();
    if (!(0.0 < noise && noise < target_variance && target_variance < vth)) {
        throw std::invalid_argument(
            "equivalent_pair: need 0 < noise < target_variance < mass*temperature");
    }
    const double m2 = 2.0 * ctx.mass;

    EquivalentPair pair;
    pair.sigma1 = 1.0 / (1.0 / target_variance - 1.0 / vth);
    pair.sigma2 = 1.0 / (1.0 / (target_variance - noise) - 1.0 / vth);

    const GaussianMoment prior{0.0, vth};
    const MeasurementModel model1{1.0, pair.sigma1};
    const MeasurementModel model2{1.0, pair.sigma2};
    const double c1 = sharpness(prior, model1);  // = vth / target_variance
    const double c2 = sharpness(prior, model2);  // = vth / (target_variance - noise)
    pair.outcome1 = outcome_distribution(prior, model1);
    pair.outcome2 = outcome_distribution(prior, model2);

    // Unconditional outputs: every conditional state is kicked to mean zero,
    // so the mixture is N(0, conditional variance [+ noise for protocol 2]).
    pair.final1 = {0.0, vth / c1};
    pair.final2 = {0.0, vth / c2 + noise};

    // Shared informational entries from the realized final state.
    const double c_eff = vth / pair.final1.variance;  // = c1
    const double info = 0.5 * std::log(c_eff);
    const double du = (pair.final1.variance - vth) / m2;

    auto make_ledger = [&](double control_work, double heating) {
        ThermoLedger led;
        led.sharpness = c_eff;
        led.avg_work = control_work + heating;
        led.avg_energy_change = du;
        led.efficiency = std::abs(du) / led.avg_work;
        led.mutual_information = info;
        led.entropy_change = -info;
        led.free_energy_change = du + ctx.temperature * info;
        led.extractable_work_bound = -led.free_energy_change + ctx.temperature * info;
        return led;
    };
    // E[shift^2]/2m with shift = -x (C-1)/C and Var(x) = sigma + vth = vth C/(C-1):
    // control work = (vth/2m)(C-1)/C.
    pair.ledger1 = make_ledger((vth / m2) * (c1 - 1.0) / c1, 0.0);
    pair.ledger2 = make_ledger((vth / m2) * (c2 - 1.0) / c2, noise / m2);
    return pair;
}

}  // namespace intervene::gauss

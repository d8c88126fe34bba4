#include "intervene/montecarlo.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <thread>

namespace intervene::mc {

namespace {

constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ull;
constexpr std::int64_t kBlock = 8192;  // trials per reduction block
constexpr int kBins = 32;
constexpr double kFlagThreshold = 5.0;

/// splitmix64 output function: the j-th draw of a seed's stream is a pure
/// function of (seed, j), which makes every trial worker-order independent.
std::uint64_t counter_draw(std::uint64_t seed, std::uint64_t j) {
    std::uint64_t z = seed + (j + 1) * kGamma;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

double to_unit(std::uint64_t u) {
    // (0,1): 53 mantissa bits plus a half-ulp offset so log() never sees 0.
    return static_cast<double>(u >> 11) * 0x1.0p-53 + 0x1.0p-54;
}

struct GaussPair {
    double z1, z2;
};

GaussPair box_muller(std::uint64_t seed, std::uint64_t trial) {
    const double u1 = to_unit(counter_draw(seed, 2 * trial));
    const double u2 = to_unit(counter_draw(seed, 2 * trial + 1));
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * M_PI * u2;
    return {r * std::cos(a), r * std::sin(a)};
}

struct BlockAcc {
    double sum_w = 0.0, sum_w2 = 0.0;
    double sum_de = 0.0, sum_de2 = 0.0;
    std::int64_t cnt[kBins] = {};
    double sx[kBins] = {};
    double sp[kBins] = {};
    double sp2[kBins] = {};
};

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

ZScore make_z(const std::string& name, double sim, double ana, double se) {
    ZScore zs{name, sim, ana, se, 0.0, false};
    const double diff = sim - ana;
    zs.z = (diff == 0.0) ? 0.0 : diff / se;  // se = 0 with diff != 0 -> +-inf, flagged
    zs.flagged = !(std::abs(zs.z) <= kFlagThreshold);
    return zs;
}

}  // namespace

double inverse_normal_cdf(double prob) {
    // Acklam's rational approximation, absolute error < 1.2e-9.
    if (!(prob > 0.0 && prob < 1.0))
        throw std::invalid_argument("inverse_normal_cdf: probability must lie in (0,1)");
    static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                               -2.759285104469687e+02, 1.383577518672690e+02,
                               -3.066479806614716e+01, 2.506628277459239e+00};
    static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                               -1.556989798598866e+02, 6.680131188771972e+01,
                               -1.328068155288572e+01};
    static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                               -2.400758277161838e+00, -2.549732539343734e+00,
                               4.374664141464968e+00, 2.938163982698783e+00};
    static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                               2.445134137142996e+00, 3.754408661907416e+00};
    const double plow = 0.02425, phigh = 1.0 - plow;
    double q, r;
    if (prob < plow) {
        q = std::sqrt(-2.0 * std::log(prob));
        return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
               ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    if (prob > phigh) {
        q = std::sqrt(-2.0 * std::log(1.0 - prob));
        return -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
               ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    q = prob - 0.5;
    r = q * q;
    return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
           (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
}

TrialRecord make_trial(const gauss::SystemContext& ctx, const gauss::MeasurementModel& model,
                       std::uint64_t seed, std::int64_t i) {
    const double prior_var = ctx.thermal_variance();
    const double c = gauss::sharpness(gauss::GaussianMoment{0.0, prior_var}, model);
    const GaussPair g = box_muller(seed, static_cast<std::uint64_t>(i));
    TrialRecord t;
    t.prior_sample = std::sqrt(prior_var) * g.z1;
    t.outcome = model.coupling * t.prior_sample + std::sqrt(model.apparatus_variance) * g.z2;
    const double record_momentum = t.outcome / model.coupling;
    t.shift_applied = -(c - 1.0) / c * record_momentum;
    t.work = record_momentum * record_momentum / (2.0 * ctx.mass);
    t.post_momentum = t.prior_sample + t.shift_applied;
    return t;
}

RunSummary run_trials(const gauss::SystemContext& ctx, const gauss::MeasurementModel& model,
                      std::int64_t n, std::uint64_t seed) {
    gauss::validate(ctx);
    gauss::validate(model);
    if (n < 1000)
        throw statistical_power_error(
            "run_trials: need at least 1000 trials for meaningful standard errors (got " +
            std::to_string(n) + ")");

    RunSummary s;
    s.n_trials = n;
    s.seed = seed;
    s.context = ctx;
    s.model = model;
    const double prior_var = ctx.thermal_variance();
    s.sharpness = gauss::sharpness(gauss::GaussianMoment{0.0, prior_var}, model);

    // Equal-probability outcome bins of the analytic record distribution.
    const gauss::GaussianMoment outdist =
        gauss::outcome_distribution(gauss::GaussianMoment{0.0, prior_var}, model);
    const double out_sd = std::sqrt(outdist.variance);
    std::vector<double> edges(kBins + 1);
    edges.front() = -std::numeric_limits<double>::infinity();
    edges.back() = std::numeric_limits<double>::infinity();
    for (int k = 1; k < kBins; ++k)
        edges[static_cast<std::size_t>(k)] =
            outdist.mean + out_sd * inverse_normal_cdf(static_cast<double>(k) / kBins);

    const auto bin_of = [&edges](double x) {
        int lo = 0, hi = kBins;  // invariant: edges[lo] <= x < edges[hi]
        while (hi - lo > 1) {
            const int mid = (lo + hi) / 2;
            (x < edges[static_cast<std::size_t>(mid)] ? hi : lo) = mid;
        }
        return lo;
    };

    const std::int64_t nblocks = (n + kBlock - 1) / kBlock;
    std::vector<BlockAcc> blocks(static_cast<std::size_t>(nblocks));

    const double inv2m = 1.0 / (2.0 * ctx.mass);
    const auto run_block_range = [&](std::int64_t blo, std::int64_t bhi) {
        for (std::int64_t b = blo; b < bhi; ++b) {
            BlockAcc& acc = blocks[static_cast<std::size_t>(b)];
            const std::int64_t ilo = b * kBlock, ihi = std::min(n, ilo + kBlock);
            for (std::int64_t i = ilo; i < ihi; ++i) {
                const TrialRecord t = make_trial(ctx, model, seed, i);
                const double de =
                    (t.post_momentum * t.post_momentum - t.prior_sample * t.prior_sample) * inv2m;
                acc.sum_w += t.work;
                acc.sum_w2 += t.work * t.work;
                acc.sum_de += de;
                acc.sum_de2 += de * de;
                const int k = bin_of(t.outcome);
                acc.cnt[k] += 1;
                acc.sx[k] += t.outcome;
                acc.sp[k] += t.prior_sample;
                acc.sp2[k] += t.prior_sample * t.prior_sample;
            }
        }
    };

    int workers = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    workers = static_cast<int>(std::min<std::int64_t>(workers, nblocks));
    if (workers <= 1) {
        run_block_range(0, nblocks);
    } else {
        std::vector<std::thread> pool;
        const std::int64_t chunk = (nblocks + workers - 1) / workers;
        for (int w = 0; w < workers; ++w) {
            const std::int64_t lo = w * chunk, hi = std::min<std::int64_t>(nblocks, lo + chunk);
            if (lo >= hi) break;
            pool.emplace_back([&run_block_range, lo, hi] { run_block_range(lo, hi); });
        }
        for (auto& t : pool) t.join();
    }

    // Fixed-order reduction over block index: bitwise worker-count independent.
    double sw = 0.0, sw2 = 0.0, sde = 0.0, sde2 = 0.0;
    std::int64_t cnt[kBins] = {};
    double sx[kBins] = {}, sp[kBins] = {}, sp2[kBins] = {};
    for (const BlockAcc& acc : blocks) {
        sw += acc.sum_w;
        sw2 += acc.sum_w2;
        sde += acc.sum_de;
        sde2 += acc.sum_de2;
        for (int k = 0; k < kBins; ++k) {
            cnt[k] += acc.cnt[k];
            sx[k] += acc.sx[k];
            sp[k] += acc.sp[k];
            sp2[k] += acc.sp2[k];
        }
    }

    const double dn = static_cast<double>(n);
    s.mean_work = sw / dn;
    s.mean_energy_change = sde / dn;
    s.se_work = std::sqrt(std::max(0.0, (sw2 - dn * s.mean_work * s.mean_work) / (dn - 1.0)) / dn);
    s.se_energy_change = std::sqrt(
        std::max(0.0, (sde2 - dn * s.mean_energy_change * s.mean_energy_change) / (dn - 1.0)) / dn);
    s.empirical_efficiency = -s.mean_energy_change / s.mean_work;

    s.binned_conditional_moments.resize(kBins);
    for (int k = 0; k < kBins; ++k) {
        BinMoments& bm = s.binned_conditional_moments[static_cast<std::size_t>(k)];
        bm.x_lower = edges[static_cast<std::size_t>(k)];
        bm.x_upper = edges[static_cast<std::size_t>(k) + 1];
        bm.count = cnt[k];
        if (cnt[k] > 0) {
            const double dc = static_cast<double>(cnt[k]);
            bm.mean_outcome = sx[k] / dc;
            bm.mean_prior = sp[k] / dc;
            bm.var_prior =
                cnt[k] > 1
                    ? std::max(0.0, (sp2[k] - dc * bm.mean_prior * bm.mean_prior) / (dc - 1.0))
                    : 0.0;
        }
    }
    return s;
}

ComparisonReport compare(const RunSummary& summary, const gauss::ThermoLedger& ledger) {
    // The ledger is the hypothesis under test: a deliberately wrong sharpness
    // must flow through and get flagged by the z-scores, so only structural
    // validity is rejected here.
    if (!(ledger.sharpness > 1.0) || !std::isfinite(ledger.sharpness) ||
        !std::isfinite(ledger.avg_work) || !std::isfinite(ledger.avg_energy_change))
        throw std::invalid_argument(
            "compare: configuration mismatch, ledger is not a valid finite-sharpness ledger "
            "(sharpness " +
            fmt(ledger.sharpness) + ")");
    if (summary.n_trials < 2 || !(summary.se_work > 0.0) || !(summary.se_energy_change > 0.0))
        throw std::invalid_argument(
            "compare: configuration mismatch, summary carries no usable standard errors");

    ComparisonReport rep;
    rep.entries.push_back(make_z("mean_work", summary.mean_work, ledger.avg_work, summary.se_work));
    rep.entries.push_back(make_z("mean_energy_change", summary.mean_energy_change,
                                 ledger.avg_energy_change, summary.se_energy_change));

    // Binned conditional mean vs record momentum: weighted least squares for
    // the slope, expected (C-1)/(C*coupling).
    double wsum = 0.0, xbar = 0.0, ybar = 0.0;
    std::vector<const BinMoments*> used;
    for (const BinMoments& bm : summary.binned_conditional_moments)
        if (bm.count >= 2) used.push_back(&bm);
    if (used.size() >= 3) {
        for (const BinMoments* bm : used) {
            const double w = static_cast<double>(bm->count);
            wsum += w;
            xbar += w * bm->mean_outcome;
            ybar += w * bm->mean_prior;
        }
        xbar /= wsum;
        ybar /= wsum;
        double sxx = 0.0, sxy = 0.0;
        for (const BinMoments* bm : used) {
            const double w = static_cast<double>(bm->count);
            const double dx = bm->mean_outcome - xbar;
            sxx += w * dx * dx;
            sxy += w * dx * (bm->mean_prior - ybar);
        }
        const double slope = sxy / sxx;
        double rss = 0.0;
        for (const BinMoments* bm : used) {
            const double fit = ybar + slope * (bm->mean_outcome - xbar);
            const double r = bm->mean_prior - fit;
            rss += static_cast<double>(bm->count) * r * r;
        }
        const double sigma2 = rss / (static_cast<double>(used.size()) - 2.0);
        const double se = std::sqrt(sigma2 / sxx);
        // Slope target from the ledger's sharpness (the hypothesis), with the
        // coupling taken from the run configuration.
        const double analytic =
            (ledger.sharpness - 1.0) / (ledger.sharpness * summary.model.coupling);
        rep.entries.push_back(make_z("conditional_mean_slope", slope, analytic, se));

        // Law of total variance: spread of bin means plus mean bin variance
        // must reproduce the prior variance.
        const double n = static_cast<double>(summary.n_trials);
        double pbar = 0.0;
        for (const BinMoments* bm : used) pbar += static_cast<double>(bm->count) * bm->mean_prior;
        pbar /= n;
        double total = 0.0;
        for (const BinMoments* bm : used) {
            const double w = static_cast<double>(bm->count) / n;
            const double dm = bm->mean_prior - pbar;
            total += w * (dm * dm + bm->var_prior);
        }
        const double prior_var = summary.context.thermal_variance();
        const double se_var = prior_var * std::sqrt(2.0 / (n - 1.0));
        rep.entries.push_back(make_z("total_variance", total, prior_var, se_var));
    }

    for (const ZScore& zs : rep.entries) rep.any_flagged = rep.any_flagged || zs.flagged;
    return rep;
}

void write_trials_csv(const gauss::SystemContext& ctx, const gauss::MeasurementModel& model,
                      std::int64_t n, std::uint64_t seed, std::ostream& os,
                      std::int64_t max_rows) {
    gauss::validate(ctx);
    gauss::validate(model);
    os << "trial,prior_sample,outcome,shift_applied,work,post_momentum\n";
    const std::int64_t rows = max_rows < 0 ? n : std::min(max_rows, n);
    for (std::int64_t i = 0; i < rows; ++i) {
        const TrialRecord t = make_trial(ctx, model, seed, i);
        os << i << ',' << fmt(t.prior_sample) << ',' << fmt(t.outcome) << ','
           << fmt(t.shift_applied) << ',' << fmt(t.work) << ',' << fmt(t.post_momentum) << '\n';
    }
}

}  // namespace intervene::mc

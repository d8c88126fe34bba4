#include "intervene/grid.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <thread>

namespace intervene::grid {

namespace {

constexpr double kMassTol = 1e-9;       // pre-normalization mass drift allowed
constexpr double kLeakTol = 1e-6;       // mass allowed in the outer 5% band
constexpr std::size_t kMaxJointCells = 1024ull * 1024ull;

double trap_weight(const Grid1D& g, int i) {
    const double h = g.h();
    return (i == 0 || i == g.points - 1) ? 0.5 * h : h;
}

double gauss_pdf(double x, double mean, double var) {
    const double d = x - mean;
    return std::exp(-0.5 * d * d / var) / std::sqrt(2.0 * M_PI * var);
}

void check_sized(const GridDistribution& d, const char* what) {
    validate(d.grid);
    if (d.values.size() != static_cast<std::size_t>(d.grid.points))
        throw std::invalid_argument(std::string(what) + ": values size does not match grid points");
}

int band_width(int points) { return std::max(1, static_cast<int>(std::floor(0.05 * points))); }

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

/// Enforce the shared post-conditions: mass within kMassTol of 1, then exact
/// normalization, then the outer-band leakage guard.
template <typename Dist>
void finalize(Dist& d, const char* op) {
    const double m = trapezoid_mass(d);
    if (!(std::abs(m - 1.0) <= kMassTol))
        throw leakage_error(std::string(op) + ": probability mass not conserved (mass = " +
                            fmt(m) + ", expected 1 within " + fmt(kMassTol) +
                            "); mass is leaving the grid");
    normalize(d);
    const double leak = leakage(d);
    if (!(leak < kLeakTol))
        throw leakage_error(std::string(op) + ": leakage guard tripped, outer-5% band holds " +
                            fmt(leak) + " probability mass (limit " + fmt(kLeakTol) +
                            "); enlarge the grid span");
}

}  // namespace

void validate(const Grid1D& g) {
    if (!(g.upper > g.lower) || !std::isfinite(g.lower) || !std::isfinite(g.upper))
        throw std::invalid_argument("Grid1D: need finite lower < upper");
    if (g.points < 16) throw std::invalid_argument("Grid1D: need at least 16 points");
}

// --- quadrature ---------------------------------------------------------

double trapezoid_mass(const GridDistribution& d) {
    double s = 0.0;
    for (int i = 0; i < d.grid.points; ++i) s += trap_weight(d.grid, i) * d.values[i];
    return s;
}

double trapezoid_mass(const JointDistribution& d) {
    const int na = d.grid_a.points, nb = d.grid_b.points;
    double s = 0.0;
    for (int ia = 0; ia < na; ++ia) {
        const double wa = trap_weight(d.grid_a, ia);
        double row = 0.0;
        for (int ib = 0; ib < nb; ++ib)
            row += trap_weight(d.grid_b, ib) * d.values[static_cast<std::size_t>(ia) * nb + ib];
        s += wa * row;
    }
    return s;
}

double mean(const GridDistribution& d) {
    double s = 0.0, m = 0.0;
    for (int i = 0; i < d.grid.points; ++i) {
        const double w = trap_weight(d.grid, i) * d.values[i];
        s += w;
        m += w * d.grid.node(i);
    }
    return m / s;
}

double variance(const GridDistribution& d) {
    const double mu = mean(d);
    double s = 0.0, v = 0.0;
    for (int i = 0; i < d.grid.points; ++i) {
        const double w = trap_weight(d.grid, i) * d.values[i];
        const double dx = d.grid.node(i) - mu;
        s += w;
        v += w * dx * dx;
    }
    return v / s;
}

double l1_distance(const GridDistribution& a, const GridDistribution& b) {
    if (!(a.grid == b.grid)) throw std::invalid_argument("l1_distance: grids differ");
    double s = 0.0;
    for (int i = 0; i < a.grid.points; ++i)
        s += trap_weight(a.grid, i) * std::abs(a.values[i] - b.values[i]);
    return s;
}

double l1_distance(const JointDistribution& a, const JointDistribution& b) {
    if (!(a.grid_a == b.grid_a) || !(a.grid_b == b.grid_b))
        throw std::invalid_argument("l1_distance: grids differ");
    const int na = a.grid_a.points, nb = a.grid_b.points;
    double s = 0.0;
    for (int ia = 0; ia < na; ++ia) {
        const double wa = trap_weight(a.grid_a, ia);
        for (int ib = 0; ib < nb; ++ib)
            s += wa * trap_weight(a.grid_b, ib) *
                 std::abs(a.values[static_cast<std::size_t>(ia) * nb + ib] -
                          b.values[static_cast<std::size_t>(ia) * nb + ib]);
    }
    return s;
}

double leakage(const GridDistribution& d) {
    const int n = d.grid.points, k = band_width(n);
    double s = 0.0;
    for (int i = 0; i < n; ++i)
        if (i < k || i >= n - k) s += trap_weight(d.grid, i) * d.values[i];
    return s;
}

double leakage(const JointDistribution& d) {
    const int na = d.grid_a.points, nb = d.grid_b.points;
    const int ka = band_width(na), kb = band_width(nb);
    double s = 0.0;
    for (int ia = 0; ia < na; ++ia) {
        const bool edge_a = ia < ka || ia >= na - ka;
        const double wa = trap_weight(d.grid_a, ia);
        for (int ib = 0; ib < nb; ++ib) {
            if (!edge_a && !(ib < kb || ib >= nb - kb)) continue;
            s += wa * trap_weight(d.grid_b, ib) *
                 d.values[static_cast<std::size_t>(ia) * nb + ib];
        }
    }
    return s;
}

void normalize(GridDistribution& d) {
    const double m = trapezoid_mass(d);
    if (!(m > 0.0) || !std::isfinite(m))
        throw std::runtime_error("normalize: non-positive or non-finite mass");
    for (double& v : d.values) v /= m;
}

void normalize(JointDistribution& d) {
    const double m = trapezoid_mass(d);
    if (!(m > 0.0) || !std::isfinite(m))
        throw std::runtime_error("normalize: non-positive or non-finite mass");
    for (double& v : d.values) v /= m;
}

double interpolate(const GridDistribution& d, double p) {
    const Grid1D& g = d.grid;
    if (p < g.lower || p > g.upper) return 0.0;
    const double t = (p - g.lower) / g.h();
    int i0 = std::min(static_cast<int>(t), g.points - 2);
    const double frac = t - i0;
    return d.values[i0] * (1.0 - frac) + d.values[i0 + 1] * frac;
}

GridDistribution marginal_a(const JointDistribution& joint) {
    const int na = joint.grid_a.points, nb = joint.grid_b.points;
    GridDistribution out{joint.grid_a, std::vector<double>(na, 0.0)};
    for (int ia = 0; ia < na; ++ia) {
        double s = 0.0;
        for (int ib = 0; ib < nb; ++ib)
            s += trap_weight(joint.grid_b, ib) *
                 joint.values[static_cast<std::size_t>(ia) * nb + ib];
        out.values[ia] = s;
    }
    normalize(out);
    return out;
}

GridDistribution marginal_b(const JointDistribution& joint) {
    const int na = joint.grid_a.points, nb = joint.grid_b.points;
    GridDistribution out{joint.grid_b, std::vector<double>(nb, 0.0)};
    for (int ib = 0; ib < nb; ++ib) {
        double s = 0.0;
        for (int ia = 0; ia < na; ++ia)
            s += trap_weight(joint.grid_a, ia) *
                 joint.values[static_cast<std::size_t>(ia) * nb + ib];
        out.values[ib] = s;
    }
    normalize(out);
    return out;
}

// --- operations ---------------------------------------------------------

GridDistribution discretize(const gauss::GaussianMoment& g, const Grid1D& grid) {
    gauss::validate(g);
    validate(grid);
    const double sd = std::sqrt(g.variance);
    if (!(grid.lower <= g.mean - 6.0 * sd && grid.upper >= g.mean + 6.0 * sd))
        throw leakage_error("discretize: grid span [" + fmt(grid.lower) + ", " + fmt(grid.upper) +
                            "] does not cover mean +- 6 sd = [" + fmt(g.mean - 6.0 * sd) + ", " +
                            fmt(g.mean + 6.0 * sd) + "]");
    if (!(grid.h() <= sd / 3.0))
        throw resolution_error("discretize: grid spacing " + fmt(grid.h()) +
                               " too coarse for sd " + fmt(sd) + " (need h <= sd/3)");
    GridDistribution out{grid, std::vector<double>(grid.points)};
    for (int i = 0; i < grid.points; ++i) out.values[i] = gauss_pdf(grid.node(i), g.mean, g.variance);
    normalize(out);
    const double leak = leakage(out);
    if (!(leak < kLeakTol))
        throw leakage_error("discretize: leakage guard tripped, outer-5% band holds " + fmt(leak) +
                            " probability mass (limit " + fmt(kLeakTol) + ")");
    return out;
}

std::pair<GridDistribution, double> measurement_update(const GridDistribution& d,
                                                       const gauss::MeasurementModel& model,
                                                       double x) {
    check_sized(d, "measurement_update");
    gauss::validate(model);
    if (!std::isfinite(x)) throw std::invalid_argument("measurement_update: non-finite outcome");
    GridDistribution post{d.grid, std::vector<double>(d.grid.points)};
    for (int i = 0; i < d.grid.points; ++i)
        post.values[i] =
            d.values[i] * gauss_pdf(x, model.coupling * d.grid.node(i), model.apparatus_variance);
    const double px = trapezoid_mass(post);
    if (!(px > 1e-300))
        throw outcome_incompatible_error(
            "measurement_update: outcome x = " + fmt(x) +
            " has numerically zero probability under the current state (P(x) = " + fmt(px) + ")");
    for (double& v : post.values) v /= px;
    const double leak = leakage(post);
    if (!(leak < kLeakTol))
        throw leakage_error("measurement_update: leakage guard tripped, outer-5% band holds " +
                            fmt(leak) + " probability mass (limit " + fmt(kLeakTol) + ")");
    return {std::move(post), px};
}

GridDistribution apply_control(const GridDistribution& d, double shift, double added_variance) {
    check_sized(d, "apply_control");
    if (!std::isfinite(shift) || !std::isfinite(added_variance) || added_variance < 0.0)
        throw std::invalid_argument("apply_control: shift must be finite, added variance >= 0");
    const Grid1D& g = d.grid;
    const double h = g.h();
    const int n = g.points;

    // Stage 1: convolution with a zero-mean Gaussian of the added variance,
    // sampled on the lattice and renormalized so mass is conserved exactly.
    GridDistribution work{g, d.values};
    if (added_variance > 0.0) {
        const double sd = std::sqrt(added_variance);
        const int K = std::min(n - 1, static_cast<int>(std::ceil(8.0 * sd / h)));
        std::vector<double> taps(static_cast<std::size_t>(2 * K + 1));
        double wsum = 0.0;
        for (int j = -K; j <= K; ++j) {
            const double w = std::exp(-0.5 * (j * h) * (j * h) / added_variance);
            taps[static_cast<std::size_t>(j + K)] = w;
            wsum += w;
        }
        for (double& w : taps) w /= wsum;
        std::vector<double> conv(static_cast<std::size_t>(n), 0.0);
        for (int i = 0; i < n; ++i) {
            double s = 0.0;
            const int jlo = std::max(-K, i - (n - 1)), jhi = std::min(K, i);
            for (int j = jlo; j <= jhi; ++j)
                s += taps[static_cast<std::size_t>(j + K)] * work.values[i - j];
            conv[static_cast<std::size_t>(i)] = s;
        }
        work.values = std::move(conv);
    }

    // Stage 2: translation. Lattice-aligned shifts are pure index moves;
    // anything else is linear interpolation of the shifted profile.
    GridDistribution out{g, std::vector<double>(static_cast<std::size_t>(n), 0.0)};
    const double steps = shift / h;
    if (std::abs(steps - std::round(steps)) < 1e-9) {
        const int k = static_cast<int>(std::llround(steps));
        for (int i = 0; i < n; ++i) {
            const int src = i - k;
            if (src >= 0 && src < n) out.values[i] = work.values[src];
        }
    } else {
        for (int i = 0; i < n; ++i) out.values[i] = interpolate(work, g.node(i) - shift);
    }
    finalize(out, "apply_control");
    return out;
}

GridDistribution intervention_probability(const GridDistribution& d,
                                          const gauss::MeasurementModel& model,
                                          const Grid1D& x_grid) {
    check_sized(d, "intervention_probability");
    gauss::validate(model);
    validate(x_grid);
    GridDistribution out{x_grid, std::vector<double>(x_grid.points, 0.0)};
    for (int j = 0; j < x_grid.points; ++j) {
        const double x = x_grid.node(j);
        double s = 0.0;
        for (int i = 0; i < d.grid.points; ++i)
            s += trap_weight(d.grid, i) * d.values[i] *
                 gauss_pdf(x, model.coupling * d.grid.node(i), model.apparatus_variance);
        out.values[j] = s;
    }
    finalize(out, "intervention_probability");
    return out;
}

namespace {

/// Taps of the internal-noise profile sampled on the shared momentum lattice
/// (spacing h), renormalized to unit sum.
struct NoiseTaps {
    int jlo = 0;              // first lattice offset
    std::vector<double> w;    // weight for offsets jlo .. jlo + w.size() - 1
};

NoiseTaps lattice_taps(const GridDistribution& eps, double h, int max_offset) {
    const int jlo = std::max(-max_offset, static_cast<int>(std::ceil(eps.grid.lower / h)));
    const int jhi = std::min(max_offset, static_cast<int>(std::floor(eps.grid.upper / h)));
    if (jhi < jlo) throw resolution_error("collision_map: noise support narrower than one grid step");
    NoiseTaps taps;
    taps.jlo = jlo;
    taps.w.resize(static_cast<std::size_t>(jhi - jlo + 1));
    double wsum = 0.0;
    for (int j = jlo; j <= jhi; ++j) {
        const double w = interpolate(eps, j * h);
        taps.w[static_cast<std::size_t>(j - jlo)] = w;
        wsum += w;
    }
    if (!(wsum > 0.0))
        throw resolution_error("collision_map: noise profile vanishes on the momentum lattice");
    for (double& w : taps.w) w /= wsum;
    return taps;
}

/// Resample a distribution onto another lattice by scattering each node's
/// quadrature mass linearly onto the two bracketing destination nodes:
/// exactly mass-conserving on the shared support, with off-lattice deposits
/// dropped (they surface in the finalize mass guard as genuine leakage).
GridDistribution resample_masses(const GridDistribution& src, const Grid1D& dst) {
    GridDistribution out{dst, std::vector<double>(static_cast<std::size_t>(dst.points), 0.0)};
    const double h = dst.h();
    for (int i = 0; i < src.grid.points; ++i) {
        const double m = trap_weight(src.grid, i) * src.values[i];
        if (m == 0.0) continue;
        const double t = (src.grid.node(i) - dst.lower) / h;
        if (t < 0.0 || t > static_cast<double>(dst.points - 1)) continue;
        int j = static_cast<int>(t);
        if (j > dst.points - 2) j = dst.points - 2;
        const double u = t - j;
        out.values[static_cast<std::size_t>(j)] += (1.0 - u) * m;
        out.values[static_cast<std::size_t>(j) + 1] += u * m;
    }
    for (int j = 0; j < dst.points; ++j)
        out.values[static_cast<std::size_t>(j)] /= trap_weight(dst, j);
    return out;
}

void check_noise_symmetric(const GridDistribution& eps) {
    // L1 distance between the profile and its reflection about 0.
    double s = 0.0;
    for (int i = 0; i < eps.grid.points; ++i)
        s += trap_weight(eps.grid, i) *
             std::abs(eps.values[i] - interpolate(eps, -eps.grid.node(i)));
    if (!(s < 1e-9))
        throw std::invalid_argument(
            "collision_map: internal-noise density must be symmetric about 0 (L1 asymmetry " +
            fmt(s) + ", limit 1e-9)");
}

void check_joint_size(const Grid1D& a, const Grid1D& b) {
    const std::size_t cells = static_cast<std::size_t>(a.points) * static_cast<std::size_t>(b.points);
    if (cells > kMaxJointCells)
        throw std::invalid_argument(
            "collision_map: joint grid of " + std::to_string(a.points) + " x " +
            std::to_string(b.points) + " nodes exceeds the " + std::to_string(kMaxJointCells) +
            "-cell cap (would need about " + fmt(static_cast<double>(cells) * 8.0 / 1.0e6) +
            " MB); coarsen the grids");
}

/// Run fn(row_begin, row_end) over [0, rows) on `workers` threads. The row
/// partition and per-cell summation order are fixed, so results are bitwise
/// identical for any worker count.
template <typename Fn>
void parallel_rows(int rows, int workers, Fn&& fn) {
    if (workers <= 0) workers = std::max(1u, std::thread::hardware_concurrency());
    workers = std::min(workers, rows);
    if (workers <= 1) {
        fn(0, rows);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    const int chunk = (rows + workers - 1) / workers;
    for (int w = 0; w < workers; ++w) {
        const int lo = w * chunk, hi = std::min(rows, lo + chunk);
        if (lo >= hi) break;
        pool.emplace_back([&fn, lo, hi] { fn(lo, hi); });
    }
    for (auto& t : pool) t.join();
}

}  // namespace

JointDistribution collision_map(const GridDistribution& pa, const GridDistribution& pb,
                                const GridDistribution& eps, int workers) {
    check_sized(pa, "collision_map");
    check_sized(pb, "collision_map");
    check_sized(eps, "collision_map");
    check_joint_size(pa.grid, pb.grid);
    check_noise_symmetric(eps);

    const int na = pa.grid.points, nb = pb.grid.points;
    JointDistribution out{pa.grid, pb.grid,
                          std::vector<double>(static_cast<std::size_t>(na) * nb, 0.0)};

    if (pa.grid == pb.grid) {
        // Equal grids: the exchanged-momenta product smeared along the
        // antidiagonal lands exactly on lattice points, so each cell is a
        // short dot product with precomputed taps.
        const int n = na;
        const NoiseTaps taps = lattice_taps(eps, pa.grid.h(), n - 1);
        const auto& av = pa.values;
        const auto& bv = pb.values;
        parallel_rows(n, workers, [&](int lo, int hi) {
            for (int ia = lo; ia < hi; ++ia) {
                double* row = &out.values[static_cast<std::size_t>(ia) * n];
                for (int ib = 0; ib < n; ++ib) {
                    const int jlo = std::max({taps.jlo, -ib, ia - (n - 1)});
                    const int jhi = std::min({taps.jlo + static_cast<int>(taps.w.size()) - 1,
                                              n - 1 - ib, ia});
                    double s = 0.0;
                    for (int j = jlo; j <= jhi; ++j)
                        s += taps.w[static_cast<std::size_t>(j - taps.jlo)] * av[ib + j] *
                             bv[ia - j];
                    row[ib] = s;
                }
            }
        });
    } else {
        // Unequal grids: mass-conserving scatter of the defining integral.
        // Each input product mass pa(ya) pb(yb) eps(e) lands at the outgoing
        // point (yb + e, ya - e) and is split bilinearly between the four
        // bracketing joint cells, so the lattice total equals the input total
        // exactly; deposits falling off the lattice are genuine leakage and
        // surface in the finalize mass guard. Scatter deposits cross rows, so
        // this path runs serially regardless of the requested worker count,
        // which trivially keeps results worker-independent.
        const double ha = pa.grid.h(), hb = pb.grid.h();
        std::vector<double> am(static_cast<std::size_t>(na)), bm(static_cast<std::size_t>(nb)),
            em(static_cast<std::size_t>(eps.grid.points));
        for (int i = 0; i < na; ++i) am[static_cast<std::size_t>(i)] = trap_weight(pa.grid, i) * pa.values[i];
        for (int i = 0; i < nb; ++i) bm[static_cast<std::size_t>(i)] = trap_weight(pb.grid, i) * pb.values[i];
        double esum = 0.0;
        for (int k = 0; k < eps.grid.points; ++k) {
            em[static_cast<std::size_t>(k)] = trap_weight(eps.grid, k) * eps.values[k];
            esum += em[static_cast<std::size_t>(k)];
        }
        if (!(esum > 0.0))
            throw resolution_error("collision_map: noise profile carries no probability mass");
        for (double& w : em) w /= esum;

        for (int k = 0; k < eps.grid.points; ++k) {
            const double we = em[static_cast<std::size_t>(k)];
            if (we == 0.0) continue;
            const double e = eps.grid.node(k);
            for (int jb = 0; jb < nb; ++jb) {
                const double mrow = we * bm[static_cast<std::size_t>(jb)];
                if (mrow == 0.0) continue;
                const double ta = (pb.grid.node(jb) + e - pa.grid.lower) / ha;
                if (ta < 0.0 || ta > static_cast<double>(na - 1)) continue;
                int ia = static_cast<int>(ta);
                if (ia > na - 2) ia = na - 2;
                const double ua = ta - ia;
                double* r0 = &out.values[static_cast<std::size_t>(ia) * nb];
                double* r1 = r0 + nb;
                for (int ja = 0; ja < na; ++ja) {
                    const double m = mrow * am[static_cast<std::size_t>(ja)];
                    if (m == 0.0) continue;
                    const double tb = (pa.grid.node(ja) - e - pb.grid.lower) / hb;
                    if (tb < 0.0 || tb > static_cast<double>(nb - 1)) continue;
                    int ib = static_cast<int>(tb);
                    if (ib > nb - 2) ib = nb - 2;
                    const double ub = tb - ib;
                    r0[ib] += (1.0 - ua) * (1.0 - ub) * m;
                    r0[ib + 1] += (1.0 - ua) * ub * m;
                    r1[ib] += ua * (1.0 - ub) * m;
                    r1[ib + 1] += ua * ub * m;
                }
            }
        }
        // Convert deposited cell masses back to densities.
        for (int ia = 0; ia < na; ++ia) {
            const double wa = trap_weight(pa.grid, ia);
            double* row = &out.values[static_cast<std::size_t>(ia) * nb];
            for (int ib = 0; ib < nb; ++ib) row[ib] /= wa * trap_weight(pb.grid, ib);
        }
    }

    finalize(out, "collision_map");
    return out;
}

JointDistribution collision_map(const GridDistribution& pa, const GridDistribution& pb) {
    check_sized(pa, "collision_map");
    check_sized(pb, "collision_map");
    check_joint_size(pa.grid, pb.grid);
    const int na = pa.grid.points, nb = pb.grid.points;
    JointDistribution out{pa.grid, pb.grid,
                          std::vector<double>(static_cast<std::size_t>(na) * nb)};
    // Noise-free limit: momenta swap exactly, the joint is the crossed
    // product. Unequal grids go through the mass-conserving resampler so the
    // product's lattice mass stays within the conservation guard.
    const GridDistribution& a_on_b = (pa.grid == pb.grid) ? pa : resample_masses(pa, pb.grid);
    const GridDistribution& b_on_a = (pa.grid == pb.grid) ? pb : resample_masses(pb, pa.grid);
    for (int ia = 0; ia < na; ++ia) {
        const double bval = b_on_a.values[static_cast<std::size_t>(ia)];
        for (int ib = 0; ib < nb; ++ib)
            out.values[static_cast<std::size_t>(ia) * nb + ib] =
                a_on_b.values[static_cast<std::size_t>(ib)] * bval;
    }
    finalize(out, "collision_map");
    return out;
}

// --- serialization ------------------------------------------------------

void write_csv(const GridDistribution& d, std::ostream& os) {
    os << "momentum,density\n";
    for (int i = 0; i < d.grid.points; ++i)
        os << fmt(d.grid.node(i)) << ',' << fmt(d.values[i]) << '\n';
}

void write_csv(const JointDistribution& d, std::ostream& os) {
    os << "p_a,p_b,density\n";
    for (int ia = 0; ia < d.grid_a.points; ++ia)
        for (int ib = 0; ib < d.grid_b.points; ++ib)
            os << fmt(d.grid_a.node(ia)) << ',' << fmt(d.grid_b.node(ib)) << ','
               << fmt(d.values[static_cast<std::size_t>(ia) * d.grid_b.points + ib]) << '\n';
}

}  // namespace intervene::grid

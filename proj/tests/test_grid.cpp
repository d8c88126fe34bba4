#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <sstream>
#include <vector>

#include "intervene/gaussian.hpp"
#include "intervene/grid.hpp"

using namespace intervene;
using grid::Grid1D;
using grid::GridDistribution;
using grid::JointDistribution;

namespace {

double normal_pdf(double x, double mean, double var) {
    const double d = x - mean;
    return std::exp(-0.5 * d * d / var) / std::sqrt(2.0 * M_PI * var);
}

/// L1 distance between a sampled density and an analytic density function.
template <typename F>
double l1_against(const GridDistribution& d, F&& pdf) {
    double acc = 0.0;
    for (int i = 0; i < d.grid.points; ++i) {
        const double w = (i == 0 || i == d.grid.points - 1) ? 0.5 : 1.0;
        acc += w * std::abs(d.values[i] - pdf(d.grid.node(i)));
    }
    return acc * d.grid.h();
}

bool all_nonnegative(const std::vector<double>& v) {
    return std::all_of(v.begin(), v.end(), [](double x) { return x >= 0.0; });
}

}  // namespace

TEST_CASE("discretize: moments, mass, guards") {
    const Grid1D g{-8.0, 8.0, 4096};
    const GridDistribution d = grid::discretize(gauss::GaussianMoment{0.7, 1.3}, g);
    CHECK(std::abs(grid::trapezoid_mass(d) - 1.0) < 1e-12);  // normalized on construction
    CHECK(std::abs(grid::mean(d) - 0.7) < 1e-9);
    // The grid clips the density at ~6.4 sd; the lost tail carries ~4e-9 of
    // the second moment, so the variance tolerance sits above that floor.
    CHECK(std::abs(grid::variance(d) - 1.3) < 1e-7);
    CHECK(all_nonnegative(d.values));
    CHECK(grid::leakage(d) < 1e-6);

    // Span guard: +-6 sd must fit.
    CHECK_THROWS_AS(grid::discretize(gauss::GaussianMoment{0.0, 4.0}, Grid1D{-8.0, 8.0, 1024}),
                    grid::leakage_error);
    CHECK_THROWS_AS(grid::discretize(gauss::GaussianMoment{6.0, 1.0}, Grid1D{-8.0, 8.0, 1024}),
                    grid::leakage_error);
    // Resolution guard: h <= sd/3.
    CHECK_THROWS_AS(grid::discretize(gauss::GaussianMoment{0.0, 1e-4}, Grid1D{-8.0, 8.0, 1024}),
                    grid::resolution_error);
    CHECK_THROWS_AS(grid::validate(Grid1D{1.0, -1.0, 64}), std::invalid_argument);
    CHECK_THROWS_AS(grid::validate(Grid1D{-1.0, 1.0, 8}), std::invalid_argument);
}

TEST_CASE("measurement update matches the closed-form posterior") {
    const Grid1D g{-8.0, 8.0, 4096};
    const gauss::GaussianMoment prior{0.2, 1.0};
    const gauss::MeasurementModel model{1.0, 0.5};
    const GridDistribution d = grid::discretize(prior, g);

    for (double x : {-1.0, 0.0, 0.4, 2.0}) {
        const auto [post, px] = grid::measurement_update(d, model, x);
        const gauss::GaussianMoment exact = gauss::conditional_state(prior, model, x);
        CHECK(std::abs(grid::trapezoid_mass(post) - 1.0) < 1e-12);
        CHECK(all_nonnegative(post.values));
        CHECK(l1_against(post, [&](double p) {
                  return normal_pdf(p, exact.mean, exact.variance);
              }) < 1e-5);
        // Outcome density from the closed-form outcome distribution.
        const gauss::GaussianMoment out = gauss::outcome_distribution(prior, model);
        CHECK(std::abs(px - normal_pdf(x, out.mean, out.variance)) < 1e-6);
    }
    // An impossible outcome is signalled, not silently renormalized.
    CHECK_THROWS_AS(grid::measurement_update(d, gauss::MeasurementModel{1.0, 1e-6}, 25.0),
                    grid::outcome_incompatible_error);
}

TEST_CASE("intervention probability density over an outcome grid") {
    const Grid1D g{-8.0, 8.0, 2048};
    const gauss::GaussianMoment prior{0.0, 1.0};
    const gauss::MeasurementModel model{1.0, 0.8};
    const GridDistribution d = grid::discretize(prior, g);
    const Grid1D xg{-10.0, 10.0, 2048};
    const GridDistribution px = grid::intervention_probability(d, model, xg);
    const gauss::GaussianMoment out = gauss::outcome_distribution(prior, model);
    CHECK(std::abs(grid::trapezoid_mass(px) - 1.0) < 1e-12);
    CHECK(l1_against(px, [&](double x) { return normal_pdf(x, out.mean, out.variance); }) < 1e-5);
}

TEST_CASE("control maps on the grid") {
    const Grid1D g{-8.0, 8.0, 4096};
    const gauss::GaussianMoment prior{0.5, 0.5};
    const GridDistribution d = grid::discretize(prior, g);

    // Lattice-aligned shift is exact index arithmetic.
    const double shift_exact = -128 * g.h();
    const GridDistribution moved = grid::apply_control(d, shift_exact, 0.0);
    CHECK(std::abs(grid::mean(moved) - (0.5 + shift_exact)) < 1e-9);
    CHECK(std::abs(grid::variance(moved) - 0.5) < 1e-9);

    // Off-lattice shift via interpolation: mean exact to o(h), variance close.
    const GridDistribution moved2 = grid::apply_control(d, -0.5, 0.0);
    CHECK(std::abs(grid::mean(moved2) - 0.0) < 1e-6);
    CHECK(std::abs(grid::variance(moved2) - 0.5) < 1e-5);

    // Noisy control adds variance exactly (trapezoid moments of the sampled kernel).
    const GridDistribution heated = grid::apply_control(d, -0.5, 0.25);
    CHECK(std::abs(grid::mean(heated) - 0.0) < 1e-6);
    CHECK(std::abs(grid::variance(heated) - 0.75) < 1e-4);
    CHECK(all_nonnegative(heated.values));
    CHECK(std::abs(grid::trapezoid_mass(heated) - 1.0) < 1e-12);

    // Shifting mass toward the edge trips the leakage guard.
    CHECK_THROWS_AS(grid::apply_control(d, 7.2, 0.0), grid::leakage_error);
    CHECK_THROWS_AS(grid::apply_control(d, 0.0, -0.1), std::invalid_argument);
}

TEST_CASE("grid refinement: halving h shrinks the analytic L1 error at least 3x") {
    const gauss::GaussianMoment prior{0.0, 1.0};
    // Off-lattice at both resolutions, with matched interpolation phase: the
    // fractional lattice offset is 1/3 at the coarse step and 2/3 at the fine
    // step, so the linear-interpolation weight w(1-w) is identical and the
    // measured ratio reflects the quadrature order, not the phase prefactor.
    const double shift = (7.0 + 1.0 / 3.0) * (16.0 / 1024.0);
    double err[2];
    int k = 0;
    for (int points : {1025, 2049}) {
        const Grid1D g{-8.0, 8.0, points};
        const GridDistribution d = grid::discretize(prior, g);
        const GridDistribution moved = grid::apply_control(d, shift, 0.0);
        err[k++] =
            l1_against(moved, [&](double p) { return normal_pdf(p, prior.mean + shift, 1.0); });
    }
    CHECK(err[0] / err[1] >= 3.0);
    CHECK(err[1] < 1e-5);
}

TEST_CASE("collision map: swap and variance addition on equal grids") {
    const Grid1D g{-12.0, 12.0, 768};
    const GridDistribution pa = grid::discretize(gauss::GaussianMoment{0.5, 1.0}, g);
    const GridDistribution pb = grid::discretize(gauss::GaussianMoment{-0.5, 1.5}, g);

    for (double v : {0.1, 1.0}) {
        // Noise lattice aligned with the collision lattice: exact sampling.
        const int half = static_cast<int>(std::ceil(6.0 * std::sqrt(v) / g.h()));
        const Grid1D eg{-half * g.h(), half * g.h(), 2 * half + 1};
        const GridDistribution eps = grid::discretize(gauss::GaussianMoment{0.0, v}, eg);
        const JointDistribution joint = grid::collision_map(pa, pb, eps);

        CHECK(std::abs(grid::trapezoid_mass(joint) - 1.0) < 1e-12);
        CHECK(all_nonnegative(joint.values));
        CHECK(grid::leakage(joint) < 1e-6);

        const GridDistribution ma = grid::marginal_a(joint);
        const GridDistribution mb = grid::marginal_b(joint);
        CHECK(std::abs(grid::mean(ma) - (-0.5)) < 1e-4 * 0.5);
        CHECK(std::abs(grid::mean(mb) - 0.5) < 1e-4 * 0.5);
        CHECK(std::abs(grid::variance(ma) - (1.5 + v)) < 1e-4 * (1.5 + v));
        CHECK(std::abs(grid::variance(mb) - (1.0 + v)) < 1e-4 * (1.0 + v));
    }
}

TEST_CASE("collision map: delta-noise overload is the exact swapped product") {
    const Grid1D g{-10.0, 10.0, 512};
    const GridDistribution pa = grid::discretize(gauss::GaussianMoment{0.4, 0.8}, g);
    const GridDistribution pb = grid::discretize(gauss::GaussianMoment{-0.3, 1.2}, g);
    const JointDistribution joint = grid::collision_map(pa, pb);

    JointDistribution crossed{g, g, std::vector<double>(512 * 512)};
    for (int ia = 0; ia < 512; ++ia)
        for (int ib = 0; ib < 512; ++ib)
            crossed.values[static_cast<std::size_t>(ia) * 512 + ib] =
                pa.values[ib] * pb.values[ia];
    grid::normalize(crossed);

    CHECK(grid::l1_distance(joint, crossed) < 1e-3);   // the pinned bound
    CHECK(grid::l1_distance(joint, crossed) < 1e-12);  // actually exact
    const GridDistribution ma = grid::marginal_a(joint);
    CHECK(std::abs(grid::mean(ma) - (-0.3)) < 1e-9);
    CHECK(std::abs(grid::variance(ma) - 1.2) < 1e-8);
}

TEST_CASE("collision map: worker-count independence is bitwise") {
    const Grid1D g{-10.0, 10.0, 384};
    const GridDistribution pa = grid::discretize(gauss::GaussianMoment{0.2, 1.0}, g);
    const GridDistribution pb = grid::discretize(gauss::GaussianMoment{-0.2, 1.0}, g);
    const int half = static_cast<int>(std::ceil(6.0 * std::sqrt(0.5) / g.h()));
    const Grid1D eg{-half * g.h(), half * g.h(), 2 * half + 1};
    const GridDistribution eps = grid::discretize(gauss::GaussianMoment{0.0, 0.5}, eg);

    const JointDistribution j1 = grid::collision_map(pa, pb, eps, 1);
    const JointDistribution j2 = grid::collision_map(pa, pb, eps, 3);
    const JointDistribution j3 = grid::collision_map(pa, pb, eps, 8);
    CHECK(j1.values == j2.values);
    CHECK(j1.values == j3.values);
}

TEST_CASE("collision map: unequal grids use the direct quadrature and obey the laws") {
    const Grid1D ga{-9.0, 9.0, 288};
    const Grid1D gb{-10.0, 10.0, 320};
    const GridDistribution pa = grid::discretize(gauss::GaussianMoment{0.3, 1.0}, ga);
    const GridDistribution pb = grid::discretize(gauss::GaussianMoment{-0.4, 1.3}, gb);
    const Grid1D eg{-4.2, 4.2, 129};
    const GridDistribution eps = grid::discretize(gauss::GaussianMoment{0.0, 0.4}, eg);
    const JointDistribution joint = grid::collision_map(pa, pb, eps);

    CHECK(std::abs(grid::trapezoid_mass(joint) - 1.0) < 1e-12);
    CHECK(all_nonnegative(joint.values));
    const GridDistribution ma = grid::marginal_a(joint);
    const GridDistribution mb = grid::marginal_b(joint);
    // Coarser grids and interpolation: looser (but still tight) tolerances.
    CHECK(std::abs(grid::mean(ma) - (-0.4)) < 2e-3);
    CHECK(std::abs(grid::mean(mb) - 0.3) < 2e-3);
    CHECK(std::abs(grid::variance(ma) - (1.3 + 0.4)) < 5e-3);
    CHECK(std::abs(grid::variance(mb) - (1.0 + 0.4)) < 5e-3);
}

TEST_CASE("collision map guards: asymmetric noise and memory cap") {
    const Grid1D g{-10.0, 10.0, 256};
    const GridDistribution pa = grid::discretize(gauss::GaussianMoment{0.0, 1.0}, g);
    const GridDistribution pb = grid::discretize(gauss::GaussianMoment{0.0, 1.0}, g);

    // Asymmetric eps rejected (collision noise must be even in its argument).
    GridDistribution eps = grid::discretize(gauss::GaussianMoment{0.0, 0.5}, Grid1D{-5.0, 5.0, 129});
    std::vector<double> skewed = eps.values;
    for (int i = 0; i < 129; ++i)
        skewed[i] *= (1.0 + 0.2 * std::tanh(eps.grid.node(i)));
    GridDistribution eps_bad{eps.grid, skewed};
    grid::normalize(eps_bad);
    CHECK_THROWS_AS(grid::collision_map(pa, pb, eps_bad), std::invalid_argument);

    // Cell cap: 1024^2 is the documented ceiling.
    const Grid1D big{-10.0, 10.0, 1500};
    const GridDistribution qa = grid::discretize(gauss::GaussianMoment{0.0, 1.0}, big);
    const GridDistribution qb = grid::discretize(gauss::GaussianMoment{0.0, 1.0}, big);
    CHECK_THROWS_AS(grid::collision_map(qa, qb), std::invalid_argument);

    // Leakage guard on the output: wide noise pushes mass into the outer band.
    const Grid1D narrow{-4.0, 4.0, 256};
    const GridDistribution na = grid::discretize(gauss::GaussianMoment{0.0, 0.4}, narrow);
    const GridDistribution nb = grid::discretize(gauss::GaussianMoment{0.0, 0.4}, narrow);
    const GridDistribution wide_eps =
        grid::discretize(gauss::GaussianMoment{0.0, 1.0}, Grid1D{-7.0, 7.0, 513});
    CHECK_THROWS_AS(grid::collision_map(na, nb, wide_eps), grid::leakage_error);
}

TEST_CASE("csv serialization shape") {
    const Grid1D g{-2.0, 2.0, 16};
    GridDistribution d{g, std::vector<double>(16, 0.0)};
    d.values[8] = 1.0;
    grid::normalize(d);
    std::ostringstream os;
    grid::write_csv(d, os);
    const std::string text = os.str();
    CHECK(text.rfind("momentum,density\n", 0) == 0);
    CHECK(std::count(text.begin(), text.end(), '\n') == 17);  // header + 16 rows

    JointDistribution j{g, g, std::vector<double>(256, 1.0)};
    grid::normalize(j);
    std::ostringstream os2;
    grid::write_csv(j, os2);
    const std::string text2 = os2.str();
    CHECK(text2.rfind("p_a,p_b,density\n", 0) == 0);
    CHECK(std::count(text2.begin(), text2.end(), '\n') == 257);
}

#include <doctest.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numbers>
#include <random>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "nc/core.hpp"
#include "nc/numerics.hpp"
#include "nc/parallel.hpp"

using namespace nc;

namespace {

// Taylor series with argument halving; independent of std::exp.
double series_exp(double x)
{
    int halvings = 0;
    while (std::abs(x) > 0.5) {
        x *= 0.5;
        ++halvings;
    }
    long double term = 1.0L, sum = 1.0L;
    for (int k = 1; k < 30; ++k) {
        term *= x / k;
        sum += term;
    }
    for (int i = 0; i < halvings; ++i) sum *= sum;
    return static_cast<double>(sum);
}

const double kG = 4.0 * std::numbers::pi * std::numbers::pi;

}  // namespace

TEST_CASE("time grid points are reproducible and indexable")
{
    const TimeGrid g(0.5, 0.25, 8);
    CHECK(g.size() == 9);
    CHECK(g.at(4) == 1.5);
    CHECK(g.t_end() == 2.5);
    CHECK(g.index_of(1.5) == 4);
    CHECK(g.index_of(1.5 + 1e-9) == 4);
    CHECK_THROWS_AS(g.index_of(3.0), std::out_of_range);
    CHECK_THROWS_AS(g.index_of(0.0), std::out_of_range);
    CHECK_THROWS(TimeGrid(0.0, 0.0, 4));
    CHECK_THROWS(TimeGrid(0.0, 0.1, 0));
}

TEST_CASE("moduli state validates its shape")
{
    CHECK_THROWS_AS(ModuliState({0.0, 1.0}, {0.0}, {0.0, 0.0}), std::invalid_argument);
    CHECK_THROWS_AS(ModuliState({}, {}, {}), std::invalid_argument);
    CHECK_THROWS_AS(ModuliState({NAN}, {0.0}, {0.0}), std::domain_error);
    CHECK_THROWS_AS(Radii({1.0, 0.0}), std::domain_error);
    CHECK_THROWS_AS(Radii({-2.0}), std::domain_error);
}

TEST_CASE("radii from moduli")
{
    const Radii unit = radii_from_moduli({0.0, 0.0, 0.0});
    for (double a : unit.a) CHECK(a == 1.0);
    CHECK(radii_from_moduli({std::log(2.0)}).a[0] == doctest::Approx(2.0).epsilon(1e-15));

    const Radii r = radii_from_moduli({0.3, -0.7});
    CHECK(r.a[0] == doctest::Approx(series_exp(0.3)).epsilon(1e-14));
    CHECK(r.a[1] == doctest::Approx(series_exp(-0.7)).epsilon(1e-14));

    CHECK_THROWS_AS(radii_from_moduli({INFINITY}), std::domain_error);
    CHECK_THROWS_AS(radii_from_moduli({NAN, 0.0}), std::domain_error);
    CHECK_THROWS_AS(radii_from_moduli({800.0}), std::range_error);
}

TEST_CASE("exp/log round trip over |psi| <= 20")
{
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(-20.0, 20.0);
    for (int trial = 0; trial < 200; ++trial) {
        Vec psi(4);
        for (double& p : psi) p = u(rng);
        const Vec back = moduli_from_radii(radii_from_moduli(psi));
        for (std::size_t i = 0; i < psi.size(); ++i) CHECK(std::abs(back[i] - psi[i]) < 1e-12);
    }
}

TEST_CASE("spatial volume")
{
    CHECK(spatial_volume({0.0, 0.0}) == 1.0);
    CHECK(spatial_volume({std::log(2.0), std::log(3.0)}) == doctest::Approx(6.0).epsilon(1e-14));
    const double e = series_exp(1.0);
    CHECK(spatial_volume({1.0, 1.0, 1.0}) == doctest::Approx(e * e * e).epsilon(1e-14));
    CHECK_THROWS_AS(spatial_volume({400.0, 400.0}), std::range_error);

    const Vec a = {0.2, -1.1, 3.0}, b = {-0.5, 0.7, 1.25};
    Vec ab(3);
    for (int i = 0; i < 3; ++i) ab[i] = a[i] + b[i];
    CHECK(spatial_volume(ab) == doctest::Approx(spatial_volume(a) * spatial_volume(b)).epsilon(1e-10));
}

TEST_CASE("metric norms")
{
    const MetricNorms one = metric_norms({0.0});
    CHECK(one.norm21 == doctest::Approx(kG));
    CHECK(one.frobenius == doctest::Approx(kG));

    CHECK(metric_norms({0.0, 0.0}).frobenius == doctest::Approx(std::sqrt(2.0) * kG));
    CHECK(metric_norms({std::log(2.0), 0.0}).frobenius == doctest::Approx(kG * std::sqrt(17.0)));

    const Vec psi = {0.1, -0.4, 0.9};
    const MetricNorms d = metric_norms(psi, Norm21Reading::diagonal_sum);
    const MetricNorms c = metric_norms(psi, Norm21Reading::repeated_column);
    CHECK(d.frobenius <= d.norm21);
    CHECK(c.norm21 == doctest::Approx(3.0 * c.frobenius));
    CHECK(d.frobenius == c.frobenius);
}

TEST_CASE("kinematic observables")
{
    const GeometryObservables s = observables(ModuliState::static_state({0.2, 0.3}));
    CHECK(s.kretschmann == 0.0);
    CHECK(s.expansion == 0.0);
    CHECK(s.shear_sq == 0.0);

    // Kasner state at t = 1 with sum p = sum p^2 = 1.
    const Vec p = {-1.0 / 3.0, 2.0 / 3.0, 2.0 / 3.0};
    Vec dd(3);
    for (int i = 0; i < 3; ++i) dd[i] = -p[i];
    const GeometryObservables k = observables(ModuliState({0.0, 0.0, 0.0}, p, dd));
    CHECK(k.expansion == doctest::Approx(1.0));
    // K = 4(-1) + 4(1) + 2 (sum p_i^2)^2 = 2.
    CHECK(k.kretschmann == doctest::Approx(2.0));

    const GeometryObservables iso = observables(ModuliState({0.0, 0.0, 0.0, 0.0}, Vec(4, 0.7), Vec(4, 0.0)));
    CHECK(iso.shear_sq == 0.0);

    const KinematicScalars ks = kinematic_scalars(ModuliState({0.0, 0.0}, {1.0, 3.0}, {0.5, 0.5}));
    CHECK(ks.shear_sq == doctest::Approx(8.0));
    CHECK(ks.expansion_trace == doctest::Approx(4.0));
    CHECK(ks.kretschmann_linear_cross == doctest::Approx(4.0 * 1.0 + 4.0 * 10.0 + 2.0 * 16.0));
}

TEST_CASE("observables are permutation invariant")
{
    const ModuliState a({0.1, 0.5, -0.2}, {0.3, -1.2, 0.8}, {0.05, 0.4, -0.9});
    const ModuliState b({-0.2, 0.1, 0.5}, {0.8, 0.3, -1.2}, {-0.9, 0.05, 0.4});
    const GeometryObservables x = observables(a), y = observables(b);
    CHECK(x.kretschmann == doctest::Approx(y.kretschmann));
    CHECK(x.expansion == doctest::Approx(y.expansion));
    CHECK(x.shear_sq == doctest::Approx(y.shear_sq));
    CHECK(x.volume == doctest::Approx(y.volume));
    CHECK(x.norm21 == doctest::Approx(y.norm21));
}

TEST_CASE("operator coefficient presets")
{
    const auto e = OperatorCoefficients::einstein();
    CHECK(e.c1 == 1.0);
    CHECK(e.c2 == 0.5);
    CHECK(e.c3 == 0.5);
    const auto g = OperatorCoefficients::general(0.3);
    CHECK(g.c2 == 0.3);
    CHECK(g.c3 == 0.0);
    const Vec x = {1.0, 2.0, -0.5};
    CHECK(e.cross_sum(x) == doctest::Approx(2.5 * 2.5));
    CHECK(OperatorCoefficients::einstein_diagonal().cross_sum(x) == doctest::Approx(5.25));
    CHECK(e.isotropic_weight(3) == doctest::Approx(6.0));
    CHECK(OperatorCoefficients::einstein_diagonal().isotropic_weight(3) == doctest::Approx(3.0));
    CHECK(cross_sum_from_string("diagonal") == CrossSum::diagonal);
    CHECK_THROWS(cross_sum_from_string("both"));
}

TEST_CASE("pairwise summation and statistics")
{
    Vec x(100001, 0.1);
    long double ref = 0.0L;
    for (double v : x) ref += v;
    CHECK(std::abs(pairwise_sum(x) - static_cast<double>(ref)) < 1e-9);

    const MeanSE m = mean_se(Vec{1.0, 2.0, 3.0, 4.0});
    CHECK(m.mean == 2.5);
    CHECK(m.sd == doctest::Approx(std::sqrt(5.0 / 3.0)));
    CHECK(m.se == doctest::Approx(std::sqrt(5.0 / 3.0) / 2.0));

    const Vec t = {0.0, 1.0, 2.0, 3.0}, y = {1.0, 3.0, 5.0, 7.0};
    const LinearFit f = least_squares(t, y);
    CHECK(f.slope == doctest::Approx(2.0));
    CHECK(f.intercept == doctest::Approx(1.0));

    const Vec ls = log_space(1e-3, 1e3, 64);
    CHECK(ls.size() == 64);
    CHECK(ls.front() == doctest::Approx(1e-3));
    CHECK(ls.back() == doctest::Approx(1e3));
}

TEST_CASE("adaptive Simpson matches Gauss-Kronrod")
{
    using boost::math::quadrature::gauss_kronrod;
    auto f = [](double x) { return std::exp(-x * x) * std::cos(3.0 * x); };
    const double ref = gauss_kronrod<double, 31>::integrate(f, 0.0, 4.0, 15, 1e-14);
    CHECK(std::abs(adaptive_simpson(f, 0.0, 4.0) - ref) < 1e-11);
    CHECK(trapezoid(Vec{0.0, 1.0, 2.0}, 0.5) == doctest::Approx(1.0));
}

TEST_CASE("parallel_for visits each index once and propagates errors")
{
    for (unsigned threads : {1u, 3u, 8u}) {
        set_thread_count(threads);
        std::vector<std::atomic<int>> hits(1000);
        parallel_for(hits.size(), [&](std::size_t i) { hits[i]++; });
        CHECK(std::all_of(hits.begin(), hits.end(), [](const auto& h) { return h.load() == 1; }));
        CHECK_THROWS_AS(parallel_for(50, [](std::size_t i) {
                            if (i == 17) throw std::runtime_error("boom");
                        }),
                        std::runtime_error);
    }
    set_thread_count(0);
}

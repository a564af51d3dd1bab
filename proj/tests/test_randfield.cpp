#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <limits>
#include <numbers>
#include <sstream>

#include <boost/math/quadrature/exp_sinh.hpp>

#include "nc/numerics.hpp"
#include "nc/parallel.hpp"
#include "nc/randfield.hpp"

using namespace nc;

namespace {

double half_line_integral(const CovarianceKernel& k)
{
    boost::math::quadrature::exp_sinh<double> integrator;
    return integrator.integrate([&](double x) { return kernel_eval(k, x); }, 0.0,
                                std::numeric_limits<double>::infinity());
}

bool same_paths(const Ensemble& a, const Ensemble& b)
{
    if (a.size() != b.size()) return false;
    for (std::size_t r = 0; r < a.size(); ++r)
        if (a.paths[r].values != b.paths[r].values) return false;
    return true;
}

}  // namespace

TEST_CASE("kernel constants against quadrature")
{
    const auto ou = CovarianceKernel::ou(1.7, 0.6);
    const auto se = CovarianceKernel::squared_exp(0.8, 1.3);
    CHECK(ou.J0() == doctest::Approx(1.7 / 0.6));
    CHECK(se.J0() == doctest::Approx(0.8 / (1.3 * 1.3)));
    CHECK(ou.line_integral() == doctest::Approx(2.0 * half_line_integral(ou)).epsilon(1e-10));
    CHECK(se.line_integral() == doctest::Approx(2.0 * half_line_integral(se)).epsilon(1e-10));
    CHECK(kernel_eval(ou, -0.3) == kernel_eval(ou, 0.3));

    // -J''(0) by a central difference.
    const double h = 1e-4;
    const double d2 = (kernel_eval(se, h) - 2.0 * kernel_eval(se, 0.0) + kernel_eval(se, -h)) / (h * h);
    CHECK(se.derivative_variance() == doctest::Approx(-d2).epsilon(1e-6));
    CHECK_THROWS_AS(ou.derivative_variance(), unsupported_kernel);

    const auto w = CovarianceKernel::white_limit(0.4);
    CHECK_FALSE(w.regulated());
    CHECK_THROWS_AS(w.J0(), unsupported_kernel);
    CHECK_THROWS_AS(kernel_eval(w, 0.1), unsupported_kernel);
    const auto sim = simulation_kernel(w, 0.01);
    CHECK(sim.kind == KernelKind::OU);
    CHECK(sim.varsigma == doctest::Approx(1e-4));
    CHECK(sim.line_integral() == doctest::Approx(w.line_integral()));
    CHECK(w.line_integral() == doctest::Approx(0.4));

    CHECK_THROWS_AS(CovarianceKernel::ou(0.0, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(CovarianceKernel::squared_exp(1.0, -1.0), std::invalid_argument);
    CHECK_THROWS(kernel_kind_from_string("matern"));
    CHECK(kernel_kind_from_string("se") == KernelKind::SquaredExp);
}

TEST_CASE("OU ensemble reproduces its covariance")
{
    const auto k = CovarianceKernel::ou(1.0, 0.5);
    const FieldSpec spec{k, TimeGrid(0.0, 0.1, 20), NoiseMode::iid, 2, 11};
    const Ensemble e = generate_ensemble(spec, 4000);
    for (std::size_t lag : {0u, 1u, 3u, 7u, 15u}) {
        const CovarianceEstimate c = covariance_at(e, 4, 4 + lag);
        CHECK(std::abs(c.estimate - kernel_eval(k, 0.1 * lag)) < 4.0 * c.standard_error + 1e-12);
        const CovarianceEstimate s = estimate_covariance(e, lag);
        CHECK(std::abs(s.estimate - kernel_eval(k, 0.1 * lag)) < 4.0 * s.standard_error + 1e-12);
    }
    // Distinct components are uncorrelated.
    Vec prod(e.size());
    for (std::size_t r = 0; r < e.size(); ++r) prod[r] = e.paths[r].component(0)[5] * e.paths[r].component(1)[5];
    const MeanSE m = mean_se(prod);
    CHECK(std::abs(m.mean) < 4.0 * m.se);
    CHECK_THROWS_AS(estimate_covariance(e, 21), std::out_of_range);
}

TEST_CASE("squared-exponential ensemble reproduces its covariance")
{
    const auto k = CovarianceKernel::squared_exp(1.0, 1.0);
    const FieldSpec spec{k, TimeGrid(0.0, 0.1, 30), NoiseMode::shared, 3, 5};
    const Ensemble e = generate_ensemble(spec, 4000);
    for (const NoisePath& p : e.paths) CHECK(&p.component(0) == &p.component(2));
    for (std::size_t lag : {0u, 2u, 5u, 10u, 20u}) {
        const CovarianceEstimate c = covariance_at(e, 5, 5 + lag);
        CHECK(std::abs(c.estimate - kernel_eval(k, 0.1 * lag)) < 4.0 * c.standard_error + 1e-12);
    }
    CHECK(GaussianSampler(k, spec.grid).jitter() <= 1e-4 * k.J0() * (1.0 + 1e-9));

    // Finite-difference derivative field variance.
    const FieldSpec fine{k, TimeGrid(0.0, 0.01, 4), NoiseMode::iid, 1, 9};
    const Ensemble f = generate_ensemble(fine, 4000);
    Vec d2(f.size());
    for (std::size_t r = 0; r < f.size(); ++r) {
        const double d = path_derivative(f.paths[r])[0][2];
        d2[r] = d * d;
    }
    const MeanSE m = mean_se(d2);
    CHECK(std::abs(m.mean - k.derivative_variance()) < 4.0 * m.se + 0.01 * k.derivative_variance());
}

TEST_CASE("Cholesky path for OU agrees with the AR(1) recursion in law")
{
    const auto k = CovarianceKernel::ou(0.5, 0.3);
    const FieldSpec spec{k, TimeGrid(0.0, 0.05, 10), NoiseMode::iid, 1, 3};
    const Ensemble e = generate_ensemble(spec, 3000, true);
    const CovarianceEstimate c = covariance_at(e, 2, 8);
    CHECK(std::abs(c.estimate - kernel_eval(k, 0.3)) < 4.0 * c.standard_error);
}

TEST_CASE("positive semidefinite checks")
{
    CHECK(check_psd(CovarianceKernel::ou(1.0, 1.0), TimeGrid(0.0, 0.1, 50)).ok);
    CHECK(check_psd(CovarianceKernel::squared_exp(1.0, 0.2), TimeGrid(0.0, 0.1, 30)).ok);
    Eigen::MatrixXd bad(2, 2);
    bad << 1.0, 2.0, 2.0, 1.0;
    const PsdCheck c = check_psd_matrix(bad, 1.0);
    CHECK_FALSE(c.ok);
    CHECK(c.min_eigenvalue == doctest::Approx(-1.0));
    CHECK_THROWS_AS(GaussianSampler(CovarianceKernel::white_limit(1.0), TimeGrid(0.0, 0.1, 4)), unsupported_kernel);
    CHECK_THROWS_AS(GaussianSampler(CovarianceKernel::squared_exp(1.0, 1.0), TimeGrid(0.0, 0.1, 20), 10),
                    std::length_error);
}

TEST_CASE("streams are deterministic and thread-count independent")
{
    CHECK(splitmix64(0) != splitmix64(1));
    CHECK(stream_hash(1, 2) != stream_hash(2, 1));
    auto a = make_stream(42, 3, 1), b = make_stream(42, 3, 1);
    CHECK(a() == b());

    const FieldSpec spec{CovarianceKernel::squared_exp(1.0, 0.5), TimeGrid(0.0, 0.05, 40), NoiseMode::iid, 2, 77};
    set_thread_count(1);
    const Ensemble one = generate_ensemble(spec, 64);
    set_thread_count(4);
    const Ensemble four = generate_ensemble(spec, 64);
    set_thread_count(0);
    CHECK(same_paths(one, four));

    FieldSpec other = spec;
    other.seed = 78;
    CHECK_FALSE(same_paths(one, generate_ensemble(other, 64)));
    CHECK(FieldGenerator(spec).path(10).values == one.paths[10].values);
}

TEST_CASE("integrals of a path")
{
    // Trapezoid rule is exact for linear series.
    Vec lin(11);
    for (std::size_t k = 0; k < lin.size(); ++k) lin[k] = 2.0 + 3.0 * 0.1 * k;
    const Vec I = cumulative_integral(lin, 0.1);
    CHECK(I[0] == 0.0);
    CHECK(I[10] == doctest::Approx(2.0 + 1.5));

    const FieldSpec spec{CovarianceKernel::ou(1.0, 1.0), TimeGrid(0.0, 0.1, 10), NoiseMode::iid, 2, 1};
    const NoisePath p = FieldGenerator(spec).path(0);
    const Vec at = path_integral(p, 1.0);
    CHECK(at.size() == 2);
    CHECK(at[1] == doctest::Approx(cumulative_integral(p.component(1), 0.1)[10]));
    CHECK_THROWS_AS(path_derivative(p), unsupported_kernel);
}

TEST_CASE("ensemble serialization")
{
    const FieldSpec spec{CovarianceKernel::ou(1.0, 0.4), TimeGrid(0.0, 0.25, 3), NoiseMode::iid, 2, 13};
    const Ensemble e = generate_ensemble(spec, 5);

    std::ostringstream os;
    write_ensemble_csv(e, os);
    const std::string csv = os.str();
    CHECK(csv.rfind("t,component,path_id,value\r\n", 0) == 0);
    std::size_t lines = 0;
    for (char ch : csv) lines += ch == '\n';
    CHECK(lines == 1 + 5 * 2 * 4);

    const auto file = std::filesystem::temp_directory_path() / "nc_test_ensemble.bin";
    write_ensemble_cache(e, file.string());
    const Ensemble back = read_ensemble_cache(file.string());
    CHECK(same_paths(e, back));
    CHECK(back.seed == e.seed);
    CHECK(back.grid.dt == e.grid.dt);
    CHECK(back.kernel.varsigma == e.kernel.varsigma);
    std::filesystem::remove(file);
    CHECK_THROWS_AS(read_ensemble_cache(file.string()), std::runtime_error);
}

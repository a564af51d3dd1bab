#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "nc/numerics.hpp"
#include "nc/parallel.hpp"
#include "nc/stochavg.hpp"

namespace nc {

Vec brownian_path(const TimeGrid& grid, std::uint64_t seed, std::uint64_t path_id)
{
    auto rng = make_stream(seed, path_id, 0);
    std::normal_distribution<double> normal(0.0, 1.0);
    const double sd = std::sqrt(grid.dt);
    Vec b(grid.size(), 0.0);
    for (std::size_t k = 1; k < b.size(); ++k) b[k] = b[k - 1] + sd * normal(rng);
    return b;
}

Vec gbm_exact(double u0, double alpha, double zeta, const Vec& brownian, const TimeGrid& grid)
{
    if (!(u0 > 0.0)) throw std::domain_error("gbm_exact: u0 must be positive");
    if (brownian.size() != grid.size()) throw std::invalid_argument("gbm_exact: path length differs from grid");
    const double drift = -alpha - 0.5 * zeta * zeta;
    Vec u(grid.size());
    for (std::size_t k = 0; k < u.size(); ++k) {
        const double t = grid.at(k) - grid.t_start;
        u[k] = u0 * std::exp(drift * t + zeta * (brownian[k] - brownian[0]));
    }
    return u;
}

Vec gbm_euler_maruyama(double u0, double alpha, double zeta, const Vec& brownian, const TimeGrid& grid)
{
    if (!(u0 > 0.0)) throw std::domain_error("gbm_euler_maruyama: u0 must be positive");
    Vec u(grid.size());
    u[0] = u0;
    for (std::size_t k = 1; k < u.size(); ++k) {
        const double db = brownian[k] - brownian[k - 1];
        u[k] = u[k - 1] * (1.0 - alpha * grid.dt + zeta * db);
    }
    return u;
}

Vec gbm_milstein(double u0, double alpha, double zeta, const Vec& brownian, const TimeGrid& grid)
{
    if (!(u0 > 0.0)) throw std::domain_error("gbm_milstein: u0 must be positive");
    Vec u(grid.size());
    u[0] = u0;
    for (std::size_t k = 1; k < u.size(); ++k) {
        const double db = brownian[k] - brownian[k - 1];
        u[k] = u[k - 1] * (1.0 - alpha * grid.dt + zeta * db + 0.5 * zeta * zeta * (db * db - grid.dt));
    }
    return u;
}

double gbm_lce_decaying(double alpha, double zeta) { return -alpha - 0.5 * zeta * zeta; }

double gbm_lce_unstable(double alpha, double zeta) { return alpha - 0.5 * zeta * zeta; }

LceEstimate lce_empirical(const std::vector<Vec>& paths, const TimeGrid& grid)
{
    if (paths.empty()) throw std::invalid_argument("lce_empirical: no paths");
    const double t = grid.t_end() - grid.t_start;
    Vec rates(paths.size());
    for (std::size_t r = 0; r < paths.size(); ++r) {
        const Vec& u = paths[r];
        if (u.size() != grid.size()) throw std::invalid_argument("lce_empirical: path length differs from grid");
        if (!(u.front() > 0.0) || !(u.back() > 0.0)) throw std::domain_error("lce_empirical: nonpositive path value");
        rates[r] = std::log(u.back() / u.front()) / t;
    }
    const MeanSE m = mean_se(rates);
    return {m.mean, m.se};
}

ConvergenceStudy gbm_strong_convergence(double alpha, double zeta, double T, const std::vector<double>& dts,
                                        std::size_t N, std::uint64_t seed, GbmScheme scheme)
{
    if (dts.size() < 2) throw std::invalid_argument("gbm_strong_convergence: need two or more step sizes");
    double dt_min = dts.front();
    for (double d : dts) dt_min = std::min(dt_min, d);
    const auto fine_steps = static_cast<std::size_t>(std::llround(T / dt_min));
    const TimeGrid fine(0.0, T / static_cast<double>(fine_steps), fine_steps);

    std::vector<std::size_t> strides;
    for (double d : dts) {
        const double ratio = d / fine.dt;
        const auto s = static_cast<std::size_t>(std::llround(ratio));
        if (s == 0 || std::abs(ratio - static_cast<double>(s)) > 1e-6 || fine_steps % s != 0)
            throw std::invalid_argument("gbm_strong_convergence: step sizes must divide the finest grid");
        strides.push_back(s);
    }

    std::vector<Vec> errors(N, Vec(dts.size()));
    parallel_for(N, [&](std::size_t r) {
        const Vec b = brownian_path(fine, seed, r);
        for (std::size_t j = 0; j < strides.size(); ++j) {
            const std::size_t s = strides[j];
            const TimeGrid g(0.0, fine.dt * static_cast<double>(s), fine_steps / s);
            Vec bc(g.size());
            for (std::size_t k = 0; k < bc.size(); ++k) bc[k] = b[k * s];
            const Vec exact = gbm_exact(1.0, alpha, zeta, bc, g);
            const Vec approx = scheme == GbmScheme::milstein ? gbm_milstein(1.0, alpha, zeta, bc, g)
                                                             : gbm_euler_maruyama(1.0, alpha, zeta, bc, g);
            double sup = 0.0;
            for (std::size_t k = 0; k < exact.size(); ++k) sup = std::max(sup, std::abs(exact[k] - approx[k]));
            errors[r][j] = sup;
        }
    });

    ConvergenceStudy out;
    Vec lx, ly;
    for (std::size_t j = 0; j < dts.size(); ++j) {
        Vec col(N);
        for (std::size_t r = 0; r < N; ++r) col[r] = errors[r][j];
        const double e = mean_se(col).mean;
        out.dts.push_back(fine.dt * static_cast<double>(strides[j]));
        out.mean_sup_error.push_back(e);
        lx.push_back(std::log(out.dts.back()));
        ly.push_back(std::log(e));
    }
    out.order = least_squares(lx, ly).slope;
    return out;
}

MomentBoundReport moment_bound_check(const Vec& psi, double zeta, int ell, double K, double T, std::size_t N,
                                     double dt, std::uint64_t seed)
{
    if (ell < 1) throw std::domain_error("moment_bound_check: ell must be >= 1");
    if (!(T > 0.0) || !(dt > 0.0)) throw std::invalid_argument("moment_bound_check: T and dt must be positive");
    Vec sq(psi.size());
    for (std::size_t i = 0; i < psi.size(); ++i) sq[i] = psi[i] * psi[i];
    const double norm = std::sqrt(pairwise_sum(sq));
    const auto steps = static_cast<std::size_t>(std::llround(T / dt));
    const TimeGrid grid(0.0, T / static_cast<double>(steps), steps);
    const double l = static_cast<double>(ell);

    Vec sup_vals(N), fixed_vals(N);
    parallel_for(N, [&](std::size_t r) {
        const Vec w = brownian_path(grid, seed, r);
        double sup = 0.0;
        for (std::size_t k = 0; k < w.size(); ++k) {
            const double v = std::pow(norm * std::exp(zeta * w[k] - 0.5 * zeta * zeta * grid.at(k)), l);
            sup = std::max(sup, v);
        }
        sup_vals[r] = sup;
        fixed_vals[r] = std::pow(norm * std::exp(zeta * w.back() - 0.5 * zeta * zeta * T), l);
    });
    const MeanSE s = mean_se(sup_vals);
    const MeanSE f = mean_se(fixed_vals);

    MomentBoundReport rep;
    rep.ell = ell;
    rep.mc_sup_moment = s.mean;
    rep.mc_sup_se = s.se;
    rep.mc_fixed_moment = f.mean;
    rep.mc_fixed_se = f.se;
    rep.bound = std::pow(norm, l) * std::exp(0.5 * K * l * (l - 1.0) * T);
    const double rel_s = s.mean > 0.0 ? s.se / s.mean : 0.0;
    const double rel_f = f.mean > 0.0 ? f.se / f.mean : 0.0;
    rep.holds = s.mean <= rep.bound * (1.0 + 5.0 * rel_s);
    rep.holds_fixed_time = f.mean <= rep.bound * (1.0 + 5.0 * rel_f);
    return rep;
}

}  // namespace nc

#include "nc/stochavg.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "nc/numerics.hpp"
#include "nc/parallel.hpp"

namespace nc {

BaseTrajectory BaseTrajectory::static_at(Vec psiE)
{
    BaseTrajectory b;
    b.kind = BaseKind::static_base;
    b.psi0 = std::move(psiE);
    return b;
}

BaseTrajectory BaseTrajectory::kasner(Vec psi0, KasnerExponents p)
{
    if (psi0.size() != p.p.size()) throw std::invalid_argument("BaseTrajectory: dimension mismatch");
    BaseTrajectory b;
    b.kind = BaseKind::kasner;
    b.psi0 = std::move(psi0);
    b.p = std::move(p);
    return b;
}

BaseTrajectory BaseTrajectory::lambda_exponential(Vec psi0, double lambda_bar, int sign,
                                                  const OperatorCoefficients& coeffs)
{
    BaseTrajectory b;
    b.kind = BaseKind::lambda_exp;
    b.psi0 = std::move(psi0);
    b.lambda_bar = lambda_bar;
    b.sign = sign;
    b.coeffs = coeffs;
    return b;
}

ModuliState BaseTrajectory::at(double t) const
{
    switch (kind) {
    case BaseKind::static_base: return ModuliState::static_state(psi0);
    case BaseKind::kasner: return kasner_solution(psi0, p, t);
    case BaseKind::lambda_exp: return lambda_solution(psi0, LambdaTerm{lambda_bar, {}}, n(), sign, t, coeffs);
    }
    throw std::logic_error("BaseTrajectory: unknown kind");
}

const char* to_string(BaseKind k)
{
    switch (k) {
    case BaseKind::static_base: return "static";
    case BaseKind::kasner: return "kasner";
    case BaseKind::lambda_exp: return "lambda";
    }
    return "?";
}

const char* to_string(ResidualForm f) { return f == ResidualForm::pathwise ? "pathwise" : "weak"; }

namespace {

double local_derivative(const Vec& u, std::size_t k, double dt)
{
    const std::size_t e = u.size() - 1;
    if (u.size() < 3) throw std::invalid_argument("pathwise derivative needs at least 3 grid points");
    if (k == 0) return (-3.0 * u[0] + 4.0 * u[1] - u[2]) / (2.0 * dt);
    if (k == e) return (3.0 * u[e] - 4.0 * u[e - 1] + u[e - 2]) / (2.0 * dt);
    return (u[k + 1] - u[k - 1]) / (2.0 * dt);
}

double z_score(double mean, double analytic, double se)
{
    if (se > 0.0) return (mean - analytic) / se;
    return mean == analytic ? 0.0 : std::numeric_limits<double>::infinity();
}

double mode_cross_weight(std::size_t n, NoiseMode mode, const OperatorCoefficients& c)
{
    const double dn = static_cast<double>(n);
    if (c.cross == CrossSum::diagonal || mode == NoiseMode::iid) return dn;
    return dn * dn;
}

void require_ensemble(std::size_t N)
{
    if (N < kMinEnsemble) throw std::invalid_argument("ensemble too small: need N >= 100");
}

Vec integrals_upto(const NoisePath& path, std::size_t k)
{
    Vec out(path.n_components);
    for (std::size_t i = 0; i < path.n_components; ++i) {
        const Vec& u = path.component(i);
        out[i] = trapezoid(std::span<const double>(u.data(), k + 1), path.grid.dt);
    }
    return out;
}

ShiftEstimate shift_from(const Vec& samples, std::map<std::string, double> candidates)
{
    const MeanSE m = mean_se(samples);
    ShiftEstimate s;
    s.mean = m.mean;
    s.se = m.se;
    for (const auto& [name, value] : candidates)
        s.supported[name] = std::abs(m.mean - value) <= 3.0 * m.se + 1e-12 * (1.0 + std::abs(value));
    s.candidates = std::move(candidates);
    return s;
}

}  // namespace

ModuliState perturbed_state(const BaseTrajectory& base, double zeta, const NoisePath& path, const Vec& integrals,
                            std::size_t k, ResidualForm form)
{
    const std::size_t n = base.n();
    if (path.n_components != n) throw std::invalid_argument("perturbed_state: noise dimension mismatch");
    if (form == ResidualForm::pathwise && path.kernel.kind != KernelKind::SquaredExp)
        throw unsupported_kernel("pathwise residual needs a differentiable (squared-exponential) field");
    const double t = path.grid.at(k);
    const ModuliState b = base.at(t);
    Vec psi(n), d(n), dd(n);
    for (std::size_t i = 0; i < n; ++i) {
        const Vec& u = path.component(i);
        psi[i] = b.psi[i] + zeta * integrals[i];
        d[i] = b.dpsi[i] + zeta * u[k];
        dd[i] = b.ddpsi[i];
        if (form == ResidualForm::pathwise) dd[i] += zeta * local_derivative(u, k, path.grid.dt);
    }
    return ModuliState(std::move(psi), std::move(d), std::move(dd));
}

double induced_lambda_analytic(const CovarianceKernel& kernel, double zeta, std::size_t n, NoiseMode mode,
                               const OperatorCoefficients& coeffs)
{
    if (!kernel.regulated())
        throw unsupported_kernel("induced lambda diverges for white noise (equal-time delta singularity)");
    const double dn = static_cast<double>(n);
    return zeta * zeta * kernel.J0() * (coeffs.c2 * dn + coeffs.c3 * mode_cross_weight(n, mode, coeffs));
}

std::map<std::string, double> induced_lambda_candidates(const CovarianceKernel& kernel, double zeta, std::size_t n)
{
    const double dn = static_cast<double>(n);
    const double j = zeta * zeta * kernel.J0();
    return {{"iid_n", j * dn}, {"shared_half_n_plus_n2", 0.5 * j * (dn + dn * dn)}};
}

TimeGrid averaging_grid(double t_eval, const CovarianceKernel& kernel, ResidualForm form)
{
    const double s = kernel.regulated() ? kernel.varsigma : 1.0;
    if (form == ResidualForm::pathwise) return TimeGrid(t_eval - 0.02 * s, 0.01 * s, 4);
    return TimeGrid(t_eval, 1e-3 * s, 1);
}

AveragingReport mc_averaged_residual(const PerturbedTrajectory& traj, const OperatorCoefficients& coeffs,
                                     double t_eval, ResidualForm form)
{
    require_ensemble(traj.N);
    const std::size_t n = traj.base.n();
    if (traj.field.n_components != n) throw std::invalid_argument("mc_averaged_residual: noise dimension mismatch");
    const std::size_t k = traj.field.grid.index_of(t_eval);
    const double t = traj.field.grid.at(k);
    const double base_res = h_residual(traj.base.at(t), coeffs);
    const double zeta = traj.zeta;

    FieldGenerator gen(traj.field);
    struct Sample {
        double residual = 0.0;
        double linear = 0.0;
    };
    const auto samples = map_paths<Sample>(gen, traj.N, [&](std::size_t, const NoisePath& path) {
        const Vec ints = integrals_upto(path, k);
        const ModuliState s = perturbed_state(traj.base, zeta, path, ints, k, form);
        Vec x(n), x2(n);
        for (std::size_t i = 0; i < n; ++i) {
            x[i] = zeta * path.component(i)[k];
            x2[i] = x[i] * x[i];
        }
        const double quad = coeffs.c2 * pairwise_sum(x2) + coeffs.c3 * coeffs.cross_sum(x);
        const double res = h_residual(s, coeffs);
        return Sample{res, res - base_res - quad};
    });
    Vec res(traj.N), lin(traj.N);
    for (std::size_t r = 0; r < traj.N; ++r) {
        res[r] = samples[r].residual;
        lin[r] = samples[r].linear;
    }
    const MeanSE m = mean_se(res);
    const MeanSE l = mean_se(lin);

    AveragingReport rep;
    rep.analytic = base_res + induced_lambda_analytic(traj.field.kernel, zeta, n, traj.field.mode, coeffs);
    rep.mc_mean = m.mean;
    rep.mc_se = m.se;
    rep.z_score = z_score(m.mean, rep.analytic, m.se);
    rep.N = traj.N;
    rep.mode = traj.field.mode;
    rep.kernel = traj.field.kernel;
    rep.zeta = zeta;
    rep.n = n;
    rep.seed = traj.field.seed;
    rep.form = form;
    rep.t_eval = t;
    rep.base_residual = base_res;
    rep.linear_mean = l.mean;
    rep.linear_se = l.se;
    for (const auto& [name, value] : induced_lambda_candidates(traj.field.kernel, zeta, n))
        rep.candidates[name] = base_res + value;
    return rep;
}

AveragingReport averaged_with_preexisting_lambda(double lambda_bar, const CovarianceKernel& kernel, double zeta,
                                                 std::size_t n, NoiseMode mode, std::size_t N, std::uint64_t seed,
                                                 const TimeGrid& grid, double t_eval, ResidualForm form,
                                                 const OperatorCoefficients& coeffs)
{
    PerturbedTrajectory traj;
    traj.base = BaseTrajectory::lambda_exponential(Vec(n, 0.0), lambda_bar, 1, coeffs);
    traj.zeta = zeta;
    traj.field = FieldSpec{kernel, grid, mode, n, seed};
    traj.N = N;
    return mc_averaged_residual(traj, coeffs, t_eval, form);
}

ObservablesReport averaged_observables(const PerturbedTrajectory& traj, double t_eval, ResidualForm form)
{
    require_ensemble(traj.N);
    const std::size_t n = traj.base.n();
    const std::size_t k = traj.field.grid.index_of(t_eval);
    const double t = traj.field.grid.at(k);
    const KinematicScalars base = kinematic_scalars(traj.base.at(t));

    FieldGenerator gen(traj.field);
    const auto shifts = map_paths<KinematicScalars>(gen, traj.N, [&](std::size_t, const NoisePath& path) {
        const KinematicScalars s =
            kinematic_scalars(perturbed_state(traj.base, traj.zeta, path, integrals_upto(path, k), k, form));
        return KinematicScalars{s.kretschmann - base.kretschmann,
                                s.kretschmann_linear_cross - base.kretschmann_linear_cross,
                                s.expansion - base.expansion, s.expansion_trace - base.expansion_trace,
                                s.shear_sq - base.shear_sq};
    });
    auto column = [&](double KinematicScalars::*m) {
        Vec v(shifts.size());
        for (std::size_t r = 0; r < shifts.size(); ++r) v[r] = shifts[r].*m;
        return v;
    };

    const double dn = static_cast<double>(n);
    const double zj = traj.zeta * traj.zeta * traj.field.kernel.J0();
    const bool iid = traj.field.mode == NoiseMode::iid;

    ObservablesReport rep;
    rep.mode = traj.field.mode;
    rep.N = traj.N;
    rep.t_eval = t;
    rep.kretschmann = shift_from(column(&KinematicScalars::kretschmann), {{"statement", 6.0 * dn * zj}});
    rep.kretschmann_linear_cross =
        shift_from(column(&KinematicScalars::kretschmann_linear_cross),
                   {{"statement", 6.0 * dn * zj}, {"mode_exact", 4.0 * dn * zj + 2.0 * (iid ? dn : dn * dn) * zj}});
    rep.expansion = shift_from(column(&KinematicScalars::expansion), {{"statement", 0.0}, {"mode_exact", dn * zj}});
    rep.expansion_trace = shift_from(column(&KinematicScalars::expansion_trace), {{"statement", 0.0}});
    rep.shear = shift_from(column(&KinematicScalars::shear_sq),
                           {{"statement", 4.0 * dn * zj},
                            {"proof", 0.0},
                            {"mode_exact", iid ? 2.0 * zj * (dn * dn - dn) : 0.0}});
    return rep;
}

DivergenceTable white_noise_divergence_scan(const std::vector<double>& varsigmas, double C, double zeta,
                                            std::size_t n, std::size_t N, std::uint64_t seed)
{
    DivergenceTable tab;
    Vec lx, ly, my;
    for (double s : varsigmas) {
        const CovarianceKernel k = CovarianceKernel::ou(C, s);
        DivergenceRow row;
        row.varsigma = s;
        row.lambda = induced_lambda_analytic(k, zeta, n, NoiseMode::iid);
        if (N > 0) {
            PerturbedTrajectory traj;
            traj.base = BaseTrajectory::static_at(Vec(n, 0.0));
            traj.zeta = zeta;
            traj.field = FieldSpec{k, TimeGrid(0.0, 1e-3 * s, 1), NoiseMode::iid, n, seed};
            traj.N = N;
            const auto rep = mc_averaged_residual(traj, OperatorCoefficients::einstein(), 0.0, ResidualForm::weak);
            row.mc_mean = rep.mc_mean;
            row.mc_se = rep.mc_se;
        }
        tab.rows.push_back(row);
        if (row.lambda > 0.0) {
            lx.push_back(std::log(s));
            ly.push_back(std::log(row.lambda));
            if (N > 0 && row.mc_mean > 0.0) my.push_back(std::log(row.mc_mean));
        }
    }
    if (lx.size() >= 2) tab.fitted_exponent = least_squares(lx, ly).slope;
    if (N > 0 && my.size() == lx.size() && lx.size() >= 2) tab.mc_fitted_exponent = least_squares(lx, my).slope;
    return tab;
}

}  // namespace nc

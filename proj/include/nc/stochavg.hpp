#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "nc/core.hpp"
#include "nc/dynamics.hpp"
#include "nc/randfield.hpp"

namespace nc {

enum class BaseKind { static_base, kasner, lambda_exp };

// Closed-form unperturbed trajectory.
struct BaseTrajectory {
    BaseKind kind = BaseKind::static_base;
    Vec psi0;
    KasnerExponents p;         // kasner
    double lambda_bar = 0.0;   // lambda_exp
    int sign = 1;              // lambda_exp
    OperatorCoefficients coeffs = OperatorCoefficients::einstein();

    static BaseTrajectory static_at(Vec psiE);
    static BaseTrajectory kasner(Vec psi0, KasnerExponents p);
    static BaseTrajectory lambda_exponential(Vec psi0, double lambda_bar, int sign,
                                             const OperatorCoefficients& coeffs);

    std::size_t n() const { return psi0.size(); }
    ModuliState at(double t) const;
};

const char* to_string(BaseKind k);

// Derivative handling for the averaged residual: pathwise finite differences of the noise
// (needs a differentiable field) or the weak form, which drops the zero-mean derivative term.
enum class ResidualForm { pathwise, weak };
const char* to_string(ResidualForm f);

struct PerturbedTrajectory {
    BaseTrajectory base;
    double zeta = 0.0;
    FieldSpec field;
    std::size_t N = 0;
};

// psi_hat = base + zeta * integral of U from the grid start, evaluated at grid index k.
ModuliState perturbed_state(const BaseTrajectory& base, double zeta, const NoisePath& path,
                            const Vec& integrals, std::size_t k, ResidualForm form);

struct AveragingReport {
    double analytic = 0.0;
    double mc_mean = 0.0;
    double mc_se = 0.0;
    double z_score = 0.0;
    std::size_t N = 0;
    NoiseMode mode = NoiseMode::iid;
    CovarianceKernel kernel;
    double zeta = 0.0;
    std::size_t n = 0;
    std::uint64_t seed = 0;
    ResidualForm form = ResidualForm::weak;
    double t_eval = 0.0;
    double base_residual = 0.0;
    double linear_mean = 0.0;  // ensemble mean of the terms linear in the noise
    double linear_se = 0.0;
    std::map<std::string, double> candidates;  // alternative closed forms kept for comparison
};

// E{c2 sum (zeta U_i)^2 + c3 cross(zeta U)}: the induced constant.
double induced_lambda_analytic(const CovarianceKernel& kernel, double zeta, std::size_t n, NoiseMode mode,
                               const OperatorCoefficients& coeffs = OperatorCoefficients::einstein());

// Both printed normalizations: zeta^2 n J(0) and zeta^2 (n + n^2) J(0) / 2.
std::map<std::string, double> induced_lambda_candidates(const CovarianceKernel& kernel, double zeta, std::size_t n);

inline constexpr std::size_t kMinEnsemble = 100;

// Short noise grid around t_eval: five points 0.01 varsigma apart for pathwise derivatives,
// two points 0.001 varsigma apart starting at t_eval for the weak form.
TimeGrid averaging_grid(double t_eval, const CovarianceKernel& kernel, ResidualForm form);

AveragingReport mc_averaged_residual(const PerturbedTrajectory& traj, const OperatorCoefficients& coeffs,
                                     double t_eval, ResidualForm form);

AveragingReport averaged_with_preexisting_lambda(double lambda_bar, const CovarianceKernel& kernel, double zeta,
                                                 std::size_t n, NoiseMode mode, std::size_t N, std::uint64_t seed,
                                                 const TimeGrid& grid, double t_eval, ResidualForm form,
                                                 const OperatorCoefficients& coeffs =
                                                     OperatorCoefficients::einstein());

struct ShiftEstimate {
    double mean = 0.0;
    double se = 0.0;
    std::map<std::string, double> candidates;
    std::map<std::string, bool> supported;  // candidate within 3 SE of the MC shift
};

struct ObservablesReport {
    ShiftEstimate kretschmann;
    ShiftEstimate kretschmann_linear_cross;
    ShiftEstimate expansion;
    ShiftEstimate expansion_trace;
    ShiftEstimate shear;
    NoiseMode mode = NoiseMode::iid;
    std::size_t N = 0;
    double t_eval = 0.0;
};

ObservablesReport averaged_observables(const PerturbedTrajectory& traj, double t_eval, ResidualForm form);

struct DivergenceRow {
    double varsigma = 0.0;
    double lambda = 0.0;
    double mc_mean = 0.0;
    double mc_se = 0.0;
};

struct DivergenceTable {
    std::vector<DivergenceRow> rows;
    double fitted_exponent = 0.0;
    double mc_fitted_exponent = 0.0;
};

// Induced constant for OU kernels of shrinking correlation time. When N > 0 each row also
// carries a weak-form Monte-Carlo estimate.
DivergenceTable white_noise_divergence_scan(const std::vector<double>& varsigmas, double C, double zeta,
                                            std::size_t n, std::size_t N = 0, std::uint64_t seed = 0);

// Geometric Brownian motion du = -alpha u dt + zeta u dB (Ito), and its schemes on a shared path.
Vec brownian_path(const TimeGrid& grid, std::uint64_t seed, std::uint64_t path_id);
Vec gbm_exact(double u0, double alpha, double zeta, const Vec& brownian, const TimeGrid& grid);
Vec gbm_euler_maruyama(double u0, double alpha, double zeta, const Vec& brownian, const TimeGrid& grid);
Vec gbm_milstein(double u0, double alpha, double zeta, const Vec& brownian, const TimeGrid& grid);
double gbm_lce_decaying(double alpha, double zeta);
double gbm_lce_unstable(double alpha, double zeta);

struct LceEstimate {
    double mean = 0.0;
    double se = 0.0;
};

// Per-path (1/t) log(u(t)/u(0)) at the end of the window [t_start, t_end] of each path.
LceEstimate lce_empirical(const std::vector<Vec>& paths, const TimeGrid& grid);

enum class GbmScheme { euler_maruyama, milstein };

struct ConvergenceStudy {
    std::vector<double> dts;
    std::vector<double> mean_sup_error;
    double order = 0.0;
};

ConvergenceStudy gbm_strong_convergence(double alpha, double zeta, double T, const std::vector<double>& dts,
                                        std::size_t N, std::uint64_t seed, GbmScheme scheme);

struct MomentBoundReport {
    double mc_sup_moment = 0.0;
    double mc_sup_se = 0.0;
    double mc_fixed_moment = 0.0;  // E{||psi_hat(T)||^ell}
    double mc_fixed_se = 0.0;
    double bound = 0.0;
    bool holds = false;
    bool holds_fixed_time = false;
    int ell = 1;
};

// psi_hat = psi + zeta int psi_hat dW with a shared Brownian driver, solved exactly.
MomentBoundReport moment_bound_check(const Vec& psi, double zeta, int ell, double K, double T, std::size_t N,
                                     double dt, std::uint64_t seed);

}  // namespace nc

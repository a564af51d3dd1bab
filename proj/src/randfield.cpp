#include "nc/randfield.hpp"

#include <cmath>
#include <numbers>

#include "nc/numerics.hpp"

namespace nc {

const char* to_string(KernelKind k)
{
    switch (k) {
    case KernelKind::OU: return "ou";
    case KernelKind::SquaredExp: return "squared_exp";
    case KernelKind::WhiteLimit: return "white_limit";
    }
    return "?";
}

const char* to_string(NoiseMode m) { return m == NoiseMode::shared ? "shared" : "iid"; }

KernelKind kernel_kind_from_string(const std::string& s)
{
    if (s == "ou") return KernelKind::OU;
    if (s == "squared_exp" || s == "se" || s == "gaussian") return KernelKind::SquaredExp;
    if (s == "white_limit" || s == "white") return KernelKind::WhiteLimit;
    throw std::invalid_argument("unknown kernel kind: " + s);
}

NoiseMode noise_mode_from_string(const std::string& s)
{
    if (s == "shared") return NoiseMode::shared;
    if (s == "iid") return NoiseMode::iid;
    throw std::invalid_argument("unknown noise mode: " + s);
}

CovarianceKernel CovarianceKernel::ou(double C, double varsigma)
{
    if (!(C > 0.0) || !(varsigma > 0.0)) throw std::invalid_argument("OU kernel: C and varsigma must be positive");
    return {KernelKind::OU, C, varsigma, 0.0};
}

CovarianceKernel CovarianceKernel::squared_exp(double C, double varsigma)
{
    if (!(C > 0.0) || !(varsigma > 0.0))
        throw std::invalid_argument("squared-exponential kernel: C and varsigma must be positive");
    return {KernelKind::SquaredExp, C, varsigma, 0.0};
}

CovarianceKernel CovarianceKernel::white_limit(double alpha)
{
    if (!(alpha > 0.0)) throw std::invalid_argument("white limit: alpha must be positive");
    return {KernelKind::WhiteLimit, 0.0, 0.0, alpha};
}

double CovarianceKernel::J0() const
{
    switch (kind) {
    case KernelKind::OU: return C / varsigma;
    case KernelKind::SquaredExp: return C / (varsigma * varsigma);
    case KernelKind::WhiteLimit: break;
    }
    throw unsupported_kernel("white-noise covariance diverges at equal times");
}

double CovarianceKernel::derivative_variance() const
{
    if (kind != KernelKind::SquaredExp)
        throw unsupported_kernel("derivative field exists only for the squared-exponential kernel");
    return 2.0 * C / std::pow(varsigma, 4);
}

double CovarianceKernel::line_integral() const
{
    switch (kind) {
    case KernelKind::OU: return 2.0 * C;
    case KernelKind::SquaredExp: return C * std::sqrt(std::numbers::pi) / varsigma;
    case KernelKind::WhiteLimit: return alpha;
    }
    return 0.0;
}

double kernel_eval(const CovarianceKernel& k, double delta)
{
    switch (k.kind) {
    case KernelKind::OU: return (k.C / k.varsigma) * std::exp(-std::abs(delta) / k.varsigma);
    case KernelKind::SquaredExp:
        return (k.C / (k.varsigma * k.varsigma)) * std::exp(-(delta * delta) / (k.varsigma * k.varsigma));
    case KernelKind::WhiteLimit: break;
    }
    throw unsupported_kernel("white-noise kernel cannot be evaluated pointwise");
}

CovarianceKernel simulation_kernel(const CovarianceKernel& k, double dt)
{
    if (k.kind != KernelKind::WhiteLimit) return k;
    return CovarianceKernel::ou(0.5 * k.alpha, dt / 100.0);
}

std::uint64_t splitmix64(std::uint64_t x)
{
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

std::uint64_t stream_hash(std::uint64_t r, std::uint64_t i)
{
    return splitmix64(splitmix64(r) ^ splitmix64(i + 0x632BE59BD9B4E019ull));
}

std::mt19937_64 make_stream(std::uint64_t seed, std::uint64_t r, std::uint64_t i)
{
    return std::mt19937_64(seed ^ stream_hash(r, i));
}

namespace {

Vec ou_series(const TimeGrid& grid, const CovarianceKernel& k, std::mt19937_64& rng)
{
    std::normal_distribution<double> normal(0.0, 1.0);
    const double sigma = std::sqrt(k.C / k.varsigma);
    const double rho = std::exp(-grid.dt / k.varsigma);
    const double innov = sigma * std::sqrt(-std::expm1(-2.0 * grid.dt / k.varsigma));
    Vec u(grid.size());
    u[0] = sigma * normal(rng);
    for (std::size_t s = 1; s < u.size(); ++s) u[s] = rho * u[s - 1] + innov * normal(rng);
    return u;
}

}  // namespace

NoisePath sample_ou(const TimeGrid& grid, const CovarianceKernel& kernel, std::uint64_t seed, NoiseMode mode,
                    std::size_t n_components, std::uint64_t path_id)
{
    if (kernel.kind == KernelKind::SquaredExp) throw std::invalid_argument("sample_ou: kernel must be OU");
    if (n_components == 0) throw std::invalid_argument("sample_ou: need at least one component");
    const CovarianceKernel k = simulation_kernel(kernel, grid.dt);
    NoisePath p{grid, kernel, mode, n_components, {}};
    const std::size_t streams = mode == NoiseMode::shared ? 1 : n_components;
    for (std::size_t i = 0; i < streams; ++i) {
        auto rng = make_stream(seed, path_id, i);
        p.values.push_back(ou_series(grid, k, rng));
    }
    return p;
}

Eigen::MatrixXd gram_matrix(const CovarianceKernel& kernel, const TimeGrid& grid)
{
    const auto m = static_cast<Eigen::Index>(grid.size());
    Eigen::MatrixXd g(m, m);
    for (Eigen::Index a = 0; a < m; ++a)
        for (Eigen::Index b = 0; b <= a; ++b) {
            const double v = kernel_eval(kernel, static_cast<double>(a - b) * grid.dt);
            g(a, b) = v;
            g(b, a) = v;
        }
    return g;
}

GaussianSampler::GaussianSampler(const CovarianceKernel& kernel, const TimeGrid& grid, std::size_t cap)
    : kernel_(kernel), grid_(grid)
{
    if (!kernel.regulated()) throw unsupported_kernel("Cholesky sampling needs a regulated kernel");
    if (grid.size() > cap) throw std::length_error("GaussianSampler: grid exceeds the Cholesky cap");
    Eigen::MatrixXd g = gram_matrix(kernel, grid);
    g = 0.5 * (g + g.transpose());
    const double j0 = kernel.J0();
    for (double eps = 1e-10 * j0; eps <= 1e-4 * j0 * (1.0 + 1e-12); eps *= 10.0) {
        Eigen::LLT<Eigen::MatrixXd> llt(g + eps * Eigen::MatrixXd::Identity(g.rows(), g.cols()));
        if (llt.info() == Eigen::Success) {
            lower_ = llt.matrixL();
            jitter_ = eps;
            return;
        }
    }
    throw kernel_not_psd("GaussianSampler: factorization failed at maximum jitter");
}

Vec GaussianSampler::draw(std::mt19937_64& rng) const
{
    std::normal_distribution<double> normal(0.0, 1.0);
    Eigen::VectorXd z(lower_.rows());
    for (Eigen::Index s = 0; s < z.size(); ++s) z[s] = normal(rng);
    Eigen::VectorXd u = lower_.triangularView<Eigen::Lower>() * z;
    return Vec(u.data(), u.data() + u.size());
}

NoisePath GaussianSampler::sample(std::uint64_t seed, NoiseMode mode, std::size_t n_components,
                                  std::uint64_t path_id) const
{
    if (n_components == 0) throw std::invalid_argument("GaussianSampler: need at least one component");
    NoisePath p{grid_, kernel_, mode, n_components, {}};
    const std::size_t streams = mode == NoiseMode::shared ? 1 : n_components;
    for (std::size_t i = 0; i < streams; ++i) {
        auto rng = make_stream(seed, path_id, i);
        p.values.push_back(draw(rng));
    }
    return p;
}

NoisePath sample_gaussian_kernel(const TimeGrid& grid, const CovarianceKernel& kernel, std::uint64_t seed,
                                 NoiseMode mode, std::size_t n_components, std::uint64_t path_id)
{
    if (kernel.kind != KernelKind::SquaredExp)
        throw std::invalid_argument("sample_gaussian_kernel: kernel must be squared-exponential");
    return GaussianSampler(kernel, grid).sample(seed, mode, n_components, path_id);
}

PsdCheck check_psd_matrix(const Eigen::MatrixXd& gram, double j0)
{
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (gram + gram.transpose()), Eigen::EigenvaluesOnly);
    PsdCheck r;
    r.min_eigenvalue = es.eigenvalues().minCoeff();
    r.ok = r.min_eigenvalue >= -1e-8 * std::abs(j0);
    return r;
}

PsdCheck check_psd(const CovarianceKernel& kernel, const TimeGrid& grid)
{
    return check_psd_matrix(gram_matrix(kernel, grid), kernel.J0());
}

FieldGenerator::FieldGenerator(FieldSpec spec, bool force_cholesky) : spec_(std::move(spec))
{
    if (spec_.n_components == 0) throw std::invalid_argument("FieldGenerator: need at least one component");
    if (spec_.kernel.kind == KernelKind::SquaredExp || (force_cholesky && spec_.kernel.regulated()))
        sampler_ = std::make_unique<GaussianSampler>(spec_.kernel, spec_.grid);
}

NoisePath FieldGenerator::path(std::size_t r) const
{
    if (sampler_) return sampler_->sample(spec_.seed, spec_.mode, spec_.n_components, r);
    return sample_ou(spec_.grid, spec_.kernel, spec_.seed, spec_.mode, spec_.n_components, r);
}

Ensemble generate_ensemble(const FieldSpec& spec, std::size_t N, bool force_cholesky)
{
    if (N < 2) throw std::invalid_argument("generate_ensemble: N must be >= 2");
    FieldGenerator gen(spec, force_cholesky);
    Ensemble e;
    e.paths = map_paths<NoisePath>(gen, N, [](std::size_t, const NoisePath& p) { return p; });
    e.seed = spec.seed;
    e.kernel = spec.kernel;
    e.grid = spec.grid;
    e.mode = spec.mode;
    e.n_components = spec.n_components;
    return e;
}

CovarianceEstimate estimate_covariance(const Ensemble& ens, std::size_t lag)
{
    if (ens.paths.empty()) throw std::invalid_argument("estimate_covariance: empty ensemble");
    const std::size_t len = ens.grid.size();
    if (lag >= len) throw std::out_of_range("estimate_covariance: lag beyond grid");
    Vec per_path(ens.size());
    for (std::size_t r = 0; r < ens.size(); ++r) {
        const NoisePath& p = ens.paths[r];
        Vec prods;
        prods.reserve(p.values.size() * (len - lag));
        for (const Vec& u : p.values)
            for (std::size_t k = 0; k + lag < len; ++k) prods.push_back(u[k] * u[k + lag]);
        per_path[r] = pairwise_sum(prods) / static_cast<double>(prods.size());
    }
    const MeanSE m = mean_se(per_path);
    return {m.mean, m.se};
}

CovarianceEstimate covariance_at(const Ensemble& ens, std::size_t k, std::size_t l)
{
    if (k >= ens.grid.size() || l >= ens.grid.size()) throw std::out_of_range("covariance_at: index beyond grid");
    Vec prods(ens.size());
    for (std::size_t r = 0; r < ens.size(); ++r) {
        const Vec& u = ens.paths[r].component(0);
        prods[r] = u[k] * u[l];
    }
    const MeanSE m = mean_se(prods);
    return {m.mean, m.se};
}

Vec cumulative_integral(const Vec& series, double dt)
{
    Vec out(series.size(), 0.0);
    for (std::size_t k = 1; k < series.size(); ++k) out[k] = out[k - 1] + 0.5 * dt * (series[k - 1] + series[k]);
    return out;
}

Vec path_integral(const NoisePath& path, double upto)
{
    const std::size_t k = path.grid.index_of(upto);
    Vec out(path.n_components);
    for (std::size_t i = 0; i < path.n_components; ++i) {
        const Vec& u = path.component(i);
        out[i] = trapezoid(std::span<const double>(u.data(), k + 1), path.grid.dt);
    }
    return out;
}

std::vector<Vec> path_derivative(const NoisePath& path)
{
    if (path.kernel.kind != KernelKind::SquaredExp)
        throw unsupported_kernel("path_derivative: OU and white-noise paths are not mean-square differentiable");
    const double dt = path.grid.dt;
    std::vector<Vec> out;
    for (const Vec& u : path.values) {
        Vec d(u.size(), 0.0);
        if (u.size() >= 3) {
            d.front() = (-3.0 * u[0] + 4.0 * u[1] - u[2]) / (2.0 * dt);
            for (std::size_t k = 1; k + 1 < u.size(); ++k) d[k] = (u[k + 1] - u[k - 1]) / (2.0 * dt);
            const std::size_t e = u.size() - 1;
            d.back() = (3.0 * u[e] - 4.0 * u[e - 1] + u[e - 2]) / (2.0 * dt);
        } else if (u.size() == 2) {
            d[0] = d[1] = (u[1] - u[0]) / dt;
        }
        out.push_back(std::move(d));
    }
    return out;
}

}  // namespace nc

#include <array>
#include <charconv>
#include <cstring>
#include <fstream>
#include <ostream>

#include "nc/randfield.hpp"

namespace nc {

namespace {

constexpr char kMagic[8] = {'N', 'C', 'E', 'N', 'S', '0', '0', '1'};

template <class T>
void put(std::ostream& os, T v)
{
    os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
T get(std::istream& is)
{
    T v{};
    is.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (!is) throw std::runtime_error("ensemble cache: truncated file");
    return v;
}

}  // namespace

std::string format_double(double v)
{
    std::array<char, 64> buf{};
    auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    return std::string(buf.data(), res.ptr);
}

void write_ensemble_csv(const Ensemble& e, std::ostream& os)
{
    os << "t,component,path_id,value\r\n";
    for (std::size_t r = 0; r < e.size(); ++r) {
        const NoisePath& p = e.paths[r];
        for (std::size_t i = 0; i < p.n_components; ++i) {
            const Vec& u = p.component(i);
            for (std::size_t k = 0; k < u.size(); ++k)
                os << format_double(p.grid.at(k)) << ',' << i << ',' << r << ',' << format_double(u[k]) << "\r\n";
        }
    }
}

void write_ensemble_cache(const Ensemble& e, const std::string& file)
{
    std::ofstream os(file, std::ios::binary);
    if (!os) throw std::runtime_error("ensemble cache: cannot open " + file);
    os.write(kMagic, sizeof kMagic);
    put<std::uint64_t>(os, e.seed);
    put<std::uint32_t>(os, static_cast<std::uint32_t>(e.kernel.kind));
    put<double>(os, e.kernel.C);
    put<double>(os, e.kernel.varsigma);
    put<double>(os, e.kernel.alpha);
    put<double>(os, e.grid.t_start);
    put<double>(os, e.grid.dt);
    put<std::uint64_t>(os, e.grid.n_steps);
    put<std::uint32_t>(os, static_cast<std::uint32_t>(e.mode));
    put<std::uint64_t>(os, e.n_components);
    put<std::uint64_t>(os, e.size());
    for (const NoisePath& p : e.paths)
        for (const Vec& u : p.values) os.write(reinterpret_cast<const char*>(u.data()), static_cast<std::streamsize>(u.size() * sizeof(double)));
    if (!os) throw std::runtime_error("ensemble cache: write failed for " + file);
}

Ensemble read_ensemble_cache(const std::string& file)
{
    std::ifstream is(file, std::ios::binary);
    if (!is) throw std::runtime_error("ensemble cache: cannot open " + file);
    char magic[sizeof kMagic];
    is.read(magic, sizeof magic);
    if (!is || std::memcmp(magic, kMagic, sizeof kMagic) != 0)
        throw std::runtime_error("ensemble cache: bad header in " + file);
    Ensemble e;
    e.seed = get<std::uint64_t>(is);
    e.kernel.kind = static_cast<KernelKind>(get<std::uint32_t>(is));
    e.kernel.C = get<double>(is);
    e.kernel.varsigma = get<double>(is);
    e.kernel.alpha = get<double>(is);
    const double t0 = get<double>(is);
    const double dt = get<double>(is);
    const auto steps = get<std::uint64_t>(is);
    e.grid = TimeGrid(t0, dt, steps);
    e.mode = static_cast<NoiseMode>(get<std::uint32_t>(is));
    e.n_components = get<std::uint64_t>(is);
    const auto N = get<std::uint64_t>(is);
    const std::size_t streams = e.mode == NoiseMode::shared ? 1 : e.n_components;
    e.paths.reserve(N);
    for (std::uint64_t r = 0; r < N; ++r) {
        NoisePath p{e.grid, e.kernel, e.mode, e.n_components, {}};
        for (std::size_t i = 0; i < streams; ++i) {
            Vec u(e.grid.size());
            is.read(reinterpret_cast<char*>(u.data()), static_cast<std::streamsize>(u.size() * sizeof(double)));
            if (!is) throw std::runtime_error("ensemble cache: truncated data in " + file);
            p.values.push_back(std::move(u));
        }
        e.paths.push_back(std::move(p));
    }
    return e;
}

}  // namespace nc

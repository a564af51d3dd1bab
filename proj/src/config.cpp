#include "nc/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace nc {

namespace {

std::string trim(std::string_view s)
{
    auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

const KeySpec& spec_for(const std::string& key)
{
    for (const KeySpec& k : config_schema())
        if (k.key == key) return k;
    throw config_error(key, "unknown key");
}

bool parse_real(std::string_view s, double& out)
{
    if (s.empty()) return false;
    if (s.front() == '+') s.remove_prefix(1);
    const auto r = std::from_chars(s.data(), s.data() + s.size(), out);
    return r.ec == std::errc() && r.ptr == s.data() + s.size() && std::isfinite(out);
}

bool parse_integer(std::string_view s, long long& out)
{
    if (s.empty()) return false;
    if (s.front() == '+') s.remove_prefix(1);
    const auto r = std::from_chars(s.data(), s.data() + s.size(), out);
    return r.ec == std::errc() && r.ptr == s.data() + s.size();
}

bool parse_u64(std::string_view s, std::uint64_t& out)
{
    if (s.empty() || s.front() == '-') return false;
    const auto r = std::from_chars(s.data(), s.data() + s.size(), out);
    return r.ec == std::errc() && r.ptr == s.data() + s.size();
}

bool parse_bool(const std::string& s, bool& out)
{
    if (s == "true" || s == "1" || s == "yes") return out = true, true;
    if (s == "false" || s == "0" || s == "no") return out = false, true;
    return false;
}

Vec parse_list(const std::string& key, const std::string& s)
{
    Vec out;
    if (trim(s).empty()) return out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        double v = 0.0;
        if (!parse_real(trim(item), v)) throw config_error(key, "invalid number in list: '" + item + "'");
        out.push_back(v);
    }
    return out;
}

void check_value(const KeySpec& spec, const std::string& value)
{
    const std::string& key = spec.key;
    switch (spec.type) {
    case ValueType::real: {
        double v;
        if (!parse_real(value, v)) throw config_error(key, "expected a real number, got '" + value + "'");
        break;
    }
    case ValueType::positive_real: {
        double v;
        if (!parse_real(value, v) || !(v > 0.0))
            throw config_error(key, "expected a positive real number, got '" + value + "'");
        break;
    }
    case ValueType::integer: {
        long long v;
        if (!parse_integer(value, v)) throw config_error(key, "expected an integer, got '" + value + "'");
        break;
    }
    case ValueType::u64: {
        std::uint64_t v;
        if (!parse_u64(value, v)) throw config_error(key, "expected an unsigned 64-bit integer, got '" + value + "'");
        break;
    }
    case ValueType::boolean: {
        bool v;
        if (!parse_bool(value, v)) throw config_error(key, "expected true or false, got '" + value + "'");
        break;
    }
    case ValueType::choice:
        if (std::find(spec.choices.begin(), spec.choices.end(), value) == spec.choices.end())
            throw config_error(key, "unsupported value '" + value + "'");
        break;
    case ValueType::real_list: parse_list(key, value); break;
    case ValueType::text:
        if (value.find('\n') != std::string::npos) throw config_error(key, "value spans lines");
        break;
    }
}

}  // namespace

const std::vector<std::string>& experiment_names()
{
    static const std::vector<std::string> names = {"kasner", "pulse", "constant",  "mc-avg", "estimate",
                                                   "bounds", "bianchi", "gbm", "stable-class", "suite"};
    return names;
}

const std::vector<KeySpec>& config_schema()
{
    using T = ValueType;
    static const std::vector<KeySpec> schema = {
        {"experiment", T::choice, "", experiment_names(), "experiment to run"},
        {"seed", T::u64, "", {}, "64-bit master seed"},
        {"n", T::integer, "3", {}, "torus dimension"},
        {"zeta", T::real, "0.5", {}, "noise strength"},
        {"aE", T::positive_real, "1", {}, "static radius"},
        {"kernel.kind", T::choice, "ou", {"ou", "squared_exp", "se", "gaussian", "white"}, "covariance kernel"},
        {"kernel.C", T::positive_real, "1", {}, "kernel amplitude"},
        {"kernel.varsigma", T::positive_real, "1", {}, "correlation time"},
        {"kernel.alpha", T::positive_real, "1", {}, "white-noise strength"},
        {"grid.t_start", T::real, "0", {}, "first grid time"},
        {"grid.dt", T::positive_real, "0.01", {}, "grid spacing"},
        {"grid.t_end", T::real, "10", {}, "last grid time"},
        {"t_eval", T::real, "", {}, "evaluation time (default: grid midpoint)"},
        {"ensemble.N", T::integer, "2000", {}, "ensemble size"},
        {"mode", T::choice, "iid", {"iid", "shared"}, "component correlation"},
        {"residual.form", T::choice, "auto", {"auto", "weak", "pathwise"}, "derivative handling"},
        {"operator.cross", T::choice, "full", {"full", "diagonal"}, "cross-sum convention"},
        {"base", T::choice, "static", {"static", "kasner", "lambda"}, "unperturbed trajectory"},
        {"kasner.p", T::real_list, "", {}, "Kasner exponents (default: from kasner.u)"},
        {"kasner.u", T::real, "1", {}, "Kasner-Lifshitz parameter"},
        {"lambda.bar", T::real, "0", {}, "pre-existing constant"},
        {"lambda.sign", T::integer, "1", {}, "branch of the exponential solution"},
        {"pulse.A", T::real, "0.5", {}, "pulse amplitude"},
        {"pulse.theta", T::positive_real, "0.1", {}, "pulse width"},
        {"constant.A", T::real, "0.5", {}, "constant perturbation amplitude"},
        {"estimate.normalization", T::choice, "gaussian", {"gaussian", "ordered_half", "printed"},
         "cumulant normalization"},
        {"gbm.alpha", T::real, "0.5", {}, "GBM damping"},
        {"output.csv", T::text, "", {}, "CSV file name (default: <experiment>.csv)"},
        {"output.json", T::text, "", {}, "JSON file name (default: <experiment>.json)"},
        {"fixture.corrupt_lambda", T::boolean, "false", {}, "negative control: corrupt the induced-constant formula"},
    };
    return schema;
}

Config Config::parse(std::string_view text)
{
    Config c;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const std::size_t nl = text.find('\n', pos);
        const std::string_view raw = text.substr(pos, nl == std::string_view::npos ? text.size() - pos : nl - pos);
        pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
        ++line_no;
        const std::string line = trim(raw);
        if (line.empty() || line.front() == '#') continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw config_error("", "line " + std::to_string(line_no) + ": expected 'key = value'");
        const std::string key = trim(std::string_view(line).substr(0, eq));
        const std::string value = trim(std::string_view(line).substr(eq + 1));
        if (c.has(key)) throw config_error(key, "duplicate key");
        c.set(key, value);
    }
    return c;
}

Config Config::load(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw config_error("", "cannot open config file '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse(ss.str());
}

std::string Config::serialize() const
{
    std::string out;
    for (const auto& [k, v] : values_) out += k + " = " + v + "\n";
    return out;
}

void Config::set(const std::string& key, const std::string& value)
{
    const KeySpec& spec = spec_for(key);
    check_value(spec, value);
    values_[key] = value;
}

void Config::apply_override(const std::string& assignment)
{
    const auto eq = assignment.find('=');
    if (eq == std::string::npos) throw config_error("", "override must be key=value: '" + assignment + "'");
    set(trim(std::string_view(assignment).substr(0, eq)), trim(std::string_view(assignment).substr(eq + 1)));
}

std::string Config::get(const std::string& key) const
{
    const KeySpec& spec = spec_for(key);
    auto it = values_.find(key);
    if (it != values_.end()) return it->second;
    if (spec.fallback.empty() && spec.type != ValueType::real_list && spec.type != ValueType::text)
        throw config_error(key, "required key missing");
    return spec.fallback;
}

double Config::real(const std::string& key) const
{
    double v = 0.0;
    if (!parse_real(get(key), v)) throw config_error(key, "not a real number");
    return v;
}

long long Config::integer(const std::string& key) const
{
    long long v = 0;
    if (!parse_integer(get(key), v)) throw config_error(key, "not an integer");
    return v;
}

std::uint64_t Config::u64(const std::string& key) const
{
    std::uint64_t v = 0;
    if (!parse_u64(get(key), v)) throw config_error(key, "not an unsigned integer");
    return v;
}

bool Config::boolean(const std::string& key) const
{
    bool v = false;
    if (!parse_bool(get(key), v)) throw config_error(key, "not a boolean");
    return v;
}

Vec Config::real_list(const std::string& key) const { return parse_list(key, get(key)); }

void Config::validate() const
{
    if (!has("experiment")) throw config_error("experiment", "required key missing");
    if (!has("seed")) throw config_error("seed", "required key missing");
    if (integer("n") < 1) throw config_error("n", "must be >= 1");
    if (integer("ensemble.N") < 2) throw config_error("ensemble.N", "must be >= 2");
    if (real("zeta") < 0.0) throw config_error("zeta", "must be >= 0");
    if (!(real("grid.t_end") > real("grid.t_start"))) throw config_error("grid.t_end", "must exceed grid.t_start");
    const long long sign = integer("lambda.sign");
    if (sign != 1 && sign != -1) throw config_error("lambda.sign", "must be 1 or -1");
    const Vec p = real_list("kasner.p");
    if (!p.empty() && static_cast<long long>(p.size()) != integer("n"))
        throw config_error("kasner.p", "length must equal n");
    if (has("t_eval")) {
        const double t = real("t_eval");
        if (t < real("grid.t_start") || t > real("grid.t_end")) throw config_error("t_eval", "outside the grid");
    }
}

std::uint64_t fnv1a(std::string_view s)
{
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

std::string Config::hash() const
{
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a(serialize())));
    return buf;
}

}  // namespace nc

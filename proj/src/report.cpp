#include "nc/report.hpp"

#include <stdexcept>

namespace nc {

CsvTable::CsvTable(std::vector<std::string> header) : header_(std::move(header))
{
    if (header_.empty()) throw std::invalid_argument("CsvTable: header must not be empty");
}

void CsvTable::add_row(std::vector<std::string> fields)
{
    if (fields.size() != header_.size()) throw std::invalid_argument("CsvTable: row width differs from header");
    rows_.push_back(std::move(fields));
}

void CsvTable::add(double t, const std::string& quantity, double value)
{
    add_row({format_double(t), quantity, format_double(value)});
}

std::string csv_escape(const std::string& field)
{
    if (field.find_first_of(",\"\r\n") == std::string::npos) return field;
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

std::string CsvTable::str() const
{
    std::string out;
    auto line = [&out](const std::vector<std::string>& f) {
        for (std::size_t i = 0; i < f.size(); ++i) {
            if (i) out += ',';
            out += csv_escape(f[i]);
        }
        out += "\r\n";
    };
    line(header_);
    for (const auto& r : rows_) line(r);
    return out;
}

json to_json(const Check& c)
{
    return {{"name", c.name}, {"pass", c.pass}, {"value", c.value}, {"target", c.target}, {"detail", c.detail}};
}

json to_json(const CovarianceKernel& k)
{
    json j = {{"kind", to_string(k.kind)}, {"C", k.C}, {"varsigma", k.varsigma}};
    if (k.kind == KernelKind::WhiteLimit) j["alpha"] = k.alpha;
    return j;
}

json to_json(const AveragingReport& r)
{
    return {{"analytic", r.analytic},
            {"mc_mean", r.mc_mean},
            {"mc_se", r.mc_se},
            {"z_score", r.z_score},
            {"N", r.N},
            {"mode", to_string(r.mode)},
            {"kernel", to_json(r.kernel)},
            {"zeta", r.zeta},
            {"n", r.n},
            {"seed", r.seed},
            {"form", to_string(r.form)},
            {"t_eval", r.t_eval},
            {"base_residual", r.base_residual},
            {"linear_mean", r.linear_mean},
            {"linear_se", r.linear_se},
            {"candidates", r.candidates}};
}

json to_json(const BoundReport& r)
{
    return {{"name", r.name},
            {"bound_value", r.bound_value},
            {"empirical_value", r.empirical_value},
            {"tolerance", r.tolerance},
            {"holds", r.holds},
            {"params", r.params}};
}

json to_json(const KlReport& r)
{
    json lead = json::array();
    for (std::size_t i = 0; i < r.eigenvalues.size() && i < 16; ++i) lead.push_back(r.eigenvalues[i]);
    return {{"bound", to_json(r.bound)},
            {"leading_eigenvalues", lead},
            {"n_eigenvalues", r.eigenvalues.size()},
            {"trace", r.trace},
            {"trace_expected", r.trace_expected},
            {"trace_rel_error", r.trace_rel_error},
            {"C1", r.C1},
            {"C2", r.C2},
            {"cumulant", r.cumulant}};
}

json to_json(const ShiftEstimate& s)
{
    return {{"mean", s.mean}, {"se", s.se}, {"candidates", s.candidates}, {"supported", s.supported}};
}

json to_json(const ObservablesReport& r)
{
    return {{"kretschmann", to_json(r.kretschmann)},
            {"kretschmann_linear_cross", to_json(r.kretschmann_linear_cross)},
            {"expansion", to_json(r.expansion)},
            {"expansion_trace", to_json(r.expansion_trace)},
            {"shear", to_json(r.shear)},
            {"mode", to_string(r.mode)},
            {"N", r.N},
            {"t_eval", r.t_eval}};
}

json to_json(const DivergenceTable& t)
{
    json rows = json::array();
    for (const auto& r : t.rows)
        rows.push_back({{"varsigma", r.varsigma}, {"lambda", r.lambda}, {"mc_mean", r.mc_mean}, {"mc_se", r.mc_se}});
    return {{"rows", rows}, {"fitted_exponent", t.fitted_exponent}, {"mc_fitted_exponent", t.mc_fitted_exponent}};
}

json to_json(const RelaxationReport& r)
{
    return {{"threshold_time", r.threshold_time},
            {"max_dK_after", r.max_dK_after},
            {"max_dchi_after", r.max_dchi_after},
            {"max_dshear_after", r.max_dshear_after},
            {"crossing_K", r.crossing_K},
            {"crossing_chi", r.crossing_chi},
            {"crossing_shear", r.crossing_shear},
            {"tolerance", r.tolerance},
            {"relaxed", r.relaxed}};
}

json to_json(const MomentBoundReport& r)
{
    return {{"ell", r.ell},
            {"mc_sup_moment", r.mc_sup_moment},
            {"mc_sup_se", r.mc_sup_se},
            {"mc_fixed_moment", r.mc_fixed_moment},
            {"mc_fixed_se", r.mc_fixed_se},
            {"bound", r.bound},
            {"holds", r.holds},
            {"holds_fixed_time", r.holds_fixed_time}};
}

json to_json(const ConvergenceStudy& s)
{
    return {{"dts", s.dts}, {"mean_sup_error", s.mean_sup_error}, {"order", s.order}};
}

json to_json(const GrowthLaw& law, const std::vector<double>& times)
{
    json vals = json::array();
    for (double t : times) vals.push_back({{"t", t}, {"value", law(t)}});
    return {{"prefactor", law.prefactor},
            {"rate", law.rate},
            {"transient", law.transient_form},
            {"normalization", to_string(law.normalization)},
            {"samples", vals}};
}

}  // namespace nc

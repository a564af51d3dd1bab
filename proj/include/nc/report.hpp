#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "nc/estimate.hpp"
#include "nc/pulse.hpp"
#include "nc/stochavg.hpp"

namespace nc {

using json = nlohmann::json;

// RFC 4180 table: CRLF line ends, header row, fields quoted only when needed.
class CsvTable {
public:
    explicit CsvTable(std::vector<std::string> header = {"t", "quantity", "value"});

    void add_row(std::vector<std::string> fields);
    // Convenience for the default (t, quantity, value) layout.
    void add(double t, const std::string& quantity, double value);

    std::size_t rows() const { return rows_.size(); }
    std::string str() const;

private:
    std::vector<std::string> header_;
    std::vector<std::vector<std::string>> rows_;
};

std::string csv_escape(const std::string& field);

struct Check {
    std::string name;
    bool pass = false;
    double value = 0.0;
    double target = 0.0;
    std::string detail;
};

json to_json(const Check& c);
json to_json(const AveragingReport& r);
json to_json(const BoundReport& r);
json to_json(const KlReport& r);
json to_json(const ShiftEstimate& s);
json to_json(const ObservablesReport& r);
json to_json(const DivergenceTable& t);
json to_json(const RelaxationReport& r);
json to_json(const MomentBoundReport& r);
json to_json(const ConvergenceStudy& s);
json to_json(const CovarianceKernel& k);
// Parameters plus the law sampled at the given times.
json to_json(const GrowthLaw& law, const std::vector<double>& times);

}  // namespace nc

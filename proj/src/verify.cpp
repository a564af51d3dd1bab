#include "nc/verify.hpp"

#include <ostream>

namespace nc {

VerifyOutcome verify(const Config& cfg, std::ostream& report)
{
    VerifyOutcome out;
    out.result = run_experiment(cfg);
    for (const Check& c : out.result.checks) {
        report << (c.pass ? "PASS " : "FAIL ") << c.name << "  value=" << format_double(c.value)
               << " target=" << format_double(c.target) << "  (" << c.detail << ")\n";
        (c.pass ? out.passed : out.failed)++;
    }
    report << out.passed << " passed, " << out.failed << " failed\n";
    if (out.failed > 0) {
        report << "failures:";
        for (const Check& c : out.result.checks)
            if (!c.pass) report << ' ' << c.name;
        report << '\n';
    }
    out.result.summary["verdict"] = {{"passed", out.passed}, {"failed", out.failed}};
    out.exit_code = out.failed == 0 ? 0 : 1;
    return out;
}

std::string error_json(const std::string& type, const std::string& message, const std::string& key)
{
    json j = {{"error", {{"type", type}, {"message", message}}}};
    if (!key.empty()) j["error"]["key"] = key;
    return j.dump();
}

}  // namespace nc

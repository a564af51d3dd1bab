#pragma once

#include <iosfwd>
#include <string>

#include "nc/experiments.hpp"

namespace nc {

struct VerifyOutcome {
    int exit_code = 0;
    std::size_t passed = 0;
    std::size_t failed = 0;
    RunResult result;
};

// Runs the experiment's checks, prints one line per check and a closing tally.
VerifyOutcome verify(const Config& cfg, std::ostream& report);

// Machine-readable error object for standard error.
std::string error_json(const std::string& type, const std::string& message, const std::string& key = "");

}  // namespace nc

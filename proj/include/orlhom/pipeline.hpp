#pragma once

#include <string>

namespace orlhom {

// Executes one batch command over the configured sigma grid / t ladder /
// seed list, writing a CSV results table to out_path and a JSON manifest to
// out_path + ".manifest.json".
//
// Commands: gamma, zeta, phi, verify, oracle, luxemburg.
// Exit status: 0 all solves converged and all property suites passed;
//              1 property violation or non-converged solve;
//              2 invalid configuration (diagnostic on stderr).
int run_pipeline(const std::string& command, const std::string& config_path,
                 const std::string& out_path, int jobs_override = 0);

}  // namespace orlhom

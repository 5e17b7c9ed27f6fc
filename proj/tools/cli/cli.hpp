#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace matchnet::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 1;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitNumeric = 3;

/// Full command line without the program name, e.g. {"eval", "--config", "x.json"}.
/// Primary output goes to `out` unless --out names a file; diagnostics go to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace matchnet::cli

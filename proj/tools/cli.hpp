#pragma once

#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

namespace redlab::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitIntractable = 3;
inline constexpr int kExitInvariant = 4;

/// Parses "262144", "256kB", "2MB" (kB and MB are 1024 multiples).
std::int64_t parse_size(const std::string& text);

/// Comma-separated list of doubles.
std::vector<double> parse_doubles(const std::string& text);

/// Entry point shared by the executable and the tests. Human output goes to
/// `out`, diagnostics to `err`; the return value is the process exit code.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace redlab::cli

#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace metarec::cli {

inline constexpr int exit_ok = 0;
inline constexpr int exit_data_error = 1;
inline constexpr int exit_usage_error = 2;

/// Runs one `metarec` invocation; `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace metarec::cli

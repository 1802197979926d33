#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace phimdp {

/// Entry point behind the phimdp executable. args excludes the program name.
/// Returns 0 on success, 2 for usage and input-format errors, 1 for other failures.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Writes to a temporary file next to path, then renames it into place.
void write_file_atomic(const std::string& path, const std::string& content);

/// "3", "1,2,7" or ranges such as "1-10" (combinable: "1-3,8").
std::vector<std::uint64_t> parse_seed_list(std::string_view text);

/// "out/trace.csv", 7 -> "out/trace.seed7.csv".
std::string with_seed_suffix(const std::string& path, std::uint64_t seed);

/// Reads flat key=value lines; '#' starts a comment.
std::vector<std::pair<std::string, std::string>> read_config_file(const std::string& path);

/// Sets the spdlog level from PHIMDP_LOG (error, warn, info, debug). Logs go to stderr.
void configure_logging();

}  // namespace phimdp

#pragma once

#include <ostream>

#include <nlohmann/json.hpp>

namespace divkit::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

/// Parses argv, runs one subcommand and writes its output. Returns the process exit code.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

/// Cheap oracle checks shipped with the binary. Each entry has name, value, expected, tolerance, pass.
nlohmann::json run_selftest();

/// Flattens a JSON document into "path value" lines with round-trip number formatting.
std::string render_table(const nlohmann::json& doc);

}  // namespace divkit::cli

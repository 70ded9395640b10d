#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "filippov/dynamics.hpp"

namespace filippov::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitComputation = 1;
inline constexpr int kExitConfig = 2;

/// Parses argv, runs the subcommand and writes its artifacts under --out.
/// Diagnostics go to `err`, one line per error.
int run(int argc, const char* const* argv, std::ostream& err);
int run(const std::vector<std::string>& args, std::ostream& err);

/// Shortest decimal that reads back to the same double.
std::string format_number(double v);

std::string sha256_hex(std::string_view bytes);

/// CSV with columns t, <coordinates>, event. Events at a sample time are
/// joined with '|'.
void write_trajectory_csv(std::ostream& out, const std::vector<std::string>& coordinates,
                          const Trajectory& traj);

}  // namespace filippov::cli

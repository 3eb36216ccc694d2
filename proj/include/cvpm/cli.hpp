#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace cvpm::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInternal = 1;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitSolver = 3;

/// Entry point of the `cvpm` tool. args excludes the program name.
int main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Trajectory CSV header, without the manifest line.
std::string trajectory_csv_header();

}  // namespace cvpm::cli

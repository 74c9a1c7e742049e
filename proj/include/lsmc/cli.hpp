#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace lsmc {

enum ExitCode : int {
    kExitOk = 0,
    kExitConfig = 2, // also bad command lines
    kExitNumerical = 3,
    kExitBasketMismatch = 4,
};

// Environment variable naming the default output directory of `run`.
inline constexpr const char* kOutputDirEnv = "LSMC_OUTPUT_DIR";

// Entry point of the command-line tool; returns the process exit code.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

// Writes to a sibling temporary file, then renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, const std::string& contents);

struct PlotSeries {
    std::string label;
    std::vector<double> x;
    std::vector<double> y;
};

// Reads a report CSV (exact header required). The x axis is K when K varies
// across rows and N otherwise. Throws ConfigError on malformed input.
PlotSeries read_report_csv(const std::filesystem::path& path, std::string& axis);

// Log-log SVG with one polyline per series and a slope -4 guide line.
std::string render_svg(const std::vector<PlotSeries>& series, const std::string& axis);

} // namespace lsmc

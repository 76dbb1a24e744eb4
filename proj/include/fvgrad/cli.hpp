#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace fvgrad {

inline constexpr const char* tool_version = "0.1.0";

/// Parsed command line of the `fv` tool.
struct RunConfig
{
    std::string command;             // mesh-gen, mesh-check, solve, convergence, alpha-sweep, properties
    std::string case_name = "case1";
    std::string mesh = "rect";       // rect | delaunay
    int n = 10;
    std::vector<int> levels{10, 20, 40, 80};
    std::optional<double> alpha;
    std::vector<double> alpha_grid;
    double alpha_ceiling = 4.0;
    std::string variant = "center";
    std::string alpha_rule = "diamond_mean";
    double tol = 1e-10;
    int max_iter = 10000;
    std::uint64_t seed = 0;
    double jitter = 0;
    int samples = 200;
    std::string input;
    std::string output;
    std::string format = "csv";
    std::string dump_matrix;
    bool allow_invalid = false;
};

/// Entry point behind `fv`. Exit codes: 0 success, 1 computational failure,
/// 2 usage error. `args` excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace fvgrad

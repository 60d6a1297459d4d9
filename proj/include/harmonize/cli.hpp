#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "harmonize/simulate.hpp"

namespace harmonize {

struct RunConfig {
    std::string command;  // check | nt | bounds | simulate | covtest
    std::string equation = "heat";
    double beta = 2.0;
    double c_beta = 1.0;
    int d = 1;
    std::string nu = "riesz:0";
    std::string mu;  // empty: Lebesgue on R^d
    std::vector<double> t = {1.0};
    std::vector<double> psi = {1.0};
    std::string form = "hyperbolic-cond2";
    double lambda = 64.0;
    std::size_t n = 512;
    std::uint64_t seed = 0;
    std::size_t replicates = 1000;
    std::string noise = "fbm";
    double H = 0.5;
    std::vector<double> Hj;
    std::vector<FieldPoint> points;
    std::string grid_out;
    std::string output;
    std::string format;  // empty: per-command default
    bool strict = false;
};

// Numbers: "v", "v1,v2,...", or "lo:hi:count" (log-spaced, lo > 0).
std::vector<double> parse_grid(const std::string& text);
// Points: "t[:x1[:x2...]]" separated by ';'.
std::vector<FieldPoint> parse_points(const std::string& text);

// Parses argv-style arguments (without the program name). A --config JSON
// file contributes defaults that explicit flags override.
RunConfig parse_args(const std::vector<std::string>& args);

// Exit code 0 on success, 1 for decision No under --strict, 2 on errors.
int execute(const RunConfig& cfg, std::ostream& out, std::ostream& err);

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace harmonize

#pragma once

#include "wzw/pde.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace wzw {

// Experiment description parsed from an INI-style file with sections
// [experiment], [solver], [output]. Unknown sections or keys are rejected
// with the offending line number so typos cannot silently fall back to
// defaults.
struct RunConfig {
    // [experiment]
    std::string kind = "validate"; // validate | converge | fokker-planck | simulate
    int dim = 1;
    std::string drift = "zero"; // zero | tanh | tanh_coupled | linear
    std::string sigma = "const"; // const | linear
    std::vector<double> sigma_value{1.0};
    double sigma_slope = 0.0;
    std::vector<double> beta{0.8};
    std::vector<double> coupling; // row-major dim*dim, tanh_coupled only
    std::vector<double> init{1.0};
    double horizon = 1.0;
    std::vector<int> partitions{4, 8, 16, 32};
    uint64_t paths = 4000;
    uint64_t fine_steps = 4096;
    std::vector<double> probe_times{0.60009765625, 1.0};
    double p_norm = 2.0;
    uint64_t seed = 12345;
    std::string ref_scheme = "euler"; // euler | exact-gbm

    // [solver]
    SolverConfig solver;

    // [output]
    std::string out_dir = "out";
    bool svg = false;

    // not in the file; set by the command line
    int threads = 1;
};

RunConfig parse_config(std::istream& in);
RunConfig load_config(const std::string& path);

// Consistency checks that need the whole config (sizes against dim, scheme
// against drift family, probe times inside the horizon). Throws config_error.
void validate_config(const RunConfig& cfg);

} // namespace wzw

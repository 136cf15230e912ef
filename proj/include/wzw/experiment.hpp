#pragma once

#include "wzw/config.hpp"
#include "wzw/fokker_planck.hpp"
#include "wzw/process.hpp"

#include <string>
#include <vector>

namespace wzw {

// Coefficient set described by a run config. Refuses oracle-only families.
CoefficientSet coefficients_from(const RunConfig& cfg);

// Coupled convergence study: one global fine path per path index drives the
// approximant at every partition size and the reference, so the reported L1
// gaps are scheme error, not sampling noise. ref_self is the reference's own
// full-grid vs half-grid gap, the study's resolution floor.
struct ConvergeRow {
    int cells = 0;
    double t = 0.0;
    stats::MeanSE l1;
    stats::MeanSE ref_self;
};

struct SlopeFit {
    double t = 0.0;
    double slope = 0.0; // of log(l1) vs log(mesh); positive when refining helps
    double se = 0.0;
    int points = 0;
};

struct ConvergeReport {
    std::vector<ConvergeRow> rows; // probe-major, partition sizes ascending
    std::vector<SlopeFit> slopes;  // one per probe time
};

ConvergeReport run_converge(const RunConfig& cfg);

struct FpStudyReport {
    // full-ensemble pass at the configured solver orders: the z-scores
    std::vector<FpReport> reports;
    // small accurate pass: the pathwise residuals at half/one/double rule
    std::vector<FpReport> residual_probe;
    size_t residual_paths = 0;
};

FpStudyReport run_fokker_planck(const RunConfig& cfg);

// One validation check in "value <= limit" form.
struct CheckRow {
    std::string name;
    double value = 0.0;
    double limit = 0.0;
    bool pass = false;
    std::string note;
    double seconds = 0.0;
};

struct ValidationReport {
    std::vector<CheckRow> checks;
    bool all_pass = false;
};

// Fixed suite of identity, oracle and bound checks; the config supplies
// sample counts, seed and solver settings, not the checked families.
ValidationReport run_validate(const RunConfig& cfg);

// Writes one driving path, its approximant and reference trajectories, and
// the increment table under cfg.out_dir.
void run_simulate(const RunConfig& cfg);

// Dispatch on cfg.kind, write CSV/JSON (and optional SVG) outputs, print a
// short summary. Returns the process exit code (0 ok, 1 failed checks).
int run_experiment(const RunConfig& cfg);

} // namespace wzw

/**
 * @file experiments.hpp
 * @brief Named experiments over a RunConfig: each writes plot-ready CSV plus
 *        a JSON summary into the config's output directory, embeds the
 *        config hash and code version in every file, and resumes from NIRC1
 *        checkpoints when interrupted.
 */

#ifndef NIRSIM_EXPERIMENTS_HPP
#define NIRSIM_EXPERIMENTS_HPP

#include <string>
#include <vector>

#include "nirsim/config.hpp"
#include "nirsim/diagnostics.hpp"

namespace nirsim {

inline const std::vector<std::string>& experiment_names() {
    static const std::vector<std::string> names{
        "kernels", "ir-scan", "sample", "divergence",
        "convergence", "localization", "decay", "spectral"};
    return names;
}

struct CheckResult {
    std::string name;
    bool pass = false;
    std::string detail;
};

struct ExperimentResult {
    std::string experiment;
    std::vector<std::string> files;     ///< outputs written
    std::vector<CheckResult> checks;    ///< hard assertions (--assert)
    bool complete = true;               ///< false when stopped at a checkpoint
};

/// Runs one experiment; max_new_sweeps >= 0 caps the MCMC work done in this
/// invocation (the run checkpoints and can be resumed by calling again).
ExperimentResult run_experiment(const RunConfig& cfg, const std::string& name,
                                long max_new_sweeps = -1);

/// Builds the heavy shared state (ground state + kernel table) for a config.
SimContext make_context(const RunConfig& cfg, double T_max);

// ---- check helpers shared by --assert and the acceptance suite ----

/// strictly decreasing beyond n_sigma at every consecutive pair, and
/// last/first below `factor`.
CheckResult check_decreasing_curve(const std::string& name,
                                   const std::vector<CurvePoint>& curve,
                                   double n_sigma, double factor);

/// all values within n_sigma of each other pairwise (flat curve).
CheckResult check_flat_curve(const std::string& name,
                             const std::vector<LowerBoundPoint>& curve,
                             double n_sigma);

/// per-bin ratios of two windows agree within n_sigma (bins with min_hits).
CheckResult check_band_stability(const std::string& name,
                                 const LocalizationReport& a,
                                 const LocalizationReport& b, double n_sigma,
                                 long min_hits = 100);

}  // namespace nirsim

#endif

/**
 * @file config.hpp
 * @brief Run configuration: a flat key = value text format that round-trips
 *        losslessly and hashes stably across platforms.
 *
 * Recognized keys (defaults in parentheses):
 *   d (3), e (0.3), sigma (1), pot_C (1), alpha (2)
 *   T (8), dt (0.05)
 *   zeta (0.5), Tstar (e^2), kstar (0.5/sigma unless given)
 *   steps (2000), burnin (400), chains (2), thin (1), seed (12345)
 *   T_list (4,8,16,32), n_bins (12), cap_multiplier (10)
 *   gamma_list (0.5,1), lags (1,2,4,8)
 *   out (out)
 *   acc_decay_factor (0.5), acc_nsigma (4)
 * Lines starting with # are comments. Parsing reports every violation, not
 * just the first.
 */

#ifndef NIRSIM_CONFIG_HPP
#define NIRSIM_CONFIG_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "nirsim/mcmc.hpp"
#include "nirsim/params.hpp"

namespace nirsim {

struct RunConfig {
    ModelParams params;
    IRTestFunction test;
    double T = 8.0;
    double dt = 0.05;
    McmcSettings mcmc;
    std::vector<double> T_list{4.0, 8.0, 16.0, 32.0};
    int n_bins = 12;
    double cap_multiplier = 10.0;
    std::vector<double> gamma_list{0.5, 1.0};
    std::vector<double> lags{1.0, 2.0, 4.0, 8.0};
    std::string out_dir = "out";
    double acc_decay_factor = 0.5;
    double acc_nsigma = 4.0;

    bool operator==(const RunConfig& other) const;
};

RunConfig default_config();

/// Parses the documented key=value format; throws ConfigError whose message
/// lists every offending key.
RunConfig parse_config(const std::string& text);
RunConfig load_config_file(const std::string& path);

/// Canonical text form: parse(serialize(c)) == c and the hash is stable.
std::string serialize_config(const RunConfig& c);
std::uint64_t config_hash(const RunConfig& c);

}  // namespace nirsim

#endif

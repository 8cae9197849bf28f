/**
 * @file diagnostics.hpp
 * @brief The model's limit statements as finite-size numerical experiments:
 *        the vanishing test-functional curve and the cross-action overlap
 *        bound in d=3, the T-uniform Jensen lower bound in d>=4, the
 *        localization band of the position density, correlation decay, and
 *        the spectral tail exponents of the field autocorrelation.
 */

#ifndef NIRSIM_DIAGNOSTICS_HPP
#define NIRSIM_DIAGNOSTICS_HPP

#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "nirsim/field.hpp"
#include "nirsim/mcmc.hpp"
#include "nirsim/schrodinger.hpp"

namespace nirsim {

struct CurvePoint {
    double abscissa = 0.0;
    Estimate value;
    std::uint64_t config_hash = 0;
};

struct TailFit {
    double exponent = 0.0;
    double exponent_stderr = 0.0;
    double r2 = 0.0;
    double window_lo = 0.0, window_hi = 0.0;
};

/// Shared immutable state of a simulation campaign.
struct SimContext {
    ModelParams params;
    IRTestFunction test;
    double dt = 0.05;
    McmcSettings mcmc;
    std::shared_ptr<RadialGroundState> gs;
    std::shared_ptr<KernelTable> table;
    std::uint64_t config_hash = 0;
    int n_bins = 12;       ///< radial quantile bins for density ratios

    PathConfig path_cfg(double T) const {
        PathConfig c;
        c.T = T;
        c.dt = dt;
        c.d = params.d;
        return c;
    }

    /// Solves the ground state and tabulates W for windows up to T_max.
    static SimContext make(const ModelParams& params, const IRTestFunction& test,
                           double dt, const McmcSettings& mcmc, double T_max,
                           std::uint64_t config_hash = 0);
};

/// Everything one finite-T Gibbs run produces; the heavy experiments read
/// different slices of the same run.
struct GibbsPointResult {
    double T = 0.0;
    PathConfig cfg;
    std::shared_ptr<PairKernelView> view;
    std::map<std::string, Estimate> estimates;
    /// per-observable per-chain accumulators (jackknife input)
    std::map<std::string, std::vector<Accumulator>> acc;
    std::vector<double> bin_edges;   ///< radial bin edges for q0
    std::vector<double> bin_nu0;     ///< nu0 mass of each bin
    std::vector<ChainState> chains;
    double s_norm2 = 0.0;
    std::vector<double> cap_multipliers;
};

/// One MCMC run of N_T at window T. Observables always include
///   F_cap<m>   capped conditional test functional (d=3 only)
///   exp_cross  exp of the past-future cross action
///   q0_sq      |q_0|^2
///   bin<k>     indicator of |q_0| in radial quantile bin k
///   Jquad      int |g_hat0|^2 |k| dk (every j_every-th sample; d>=4 runs)
GibbsPointResult run_gibbs_point(const SimContext& ctx, double T,
                                 const std::string& checkpoint_path = "");

/// Capped-functional divergence curve E_{N_T}[min(E_{P^Q_T}F, cap)] over T.
std::vector<CurvePoint> ir_divergence_curve(const SimContext& ctx,
                                            const std::vector<double>& T_list,
                                            double cap_multiplier = 10.0);

/// E_{N_T}[exp(cross action)] over T; dominates the squared vacuum overlap.
std::vector<CurvePoint> overlap_upper_bound_curve(
    const SimContext& ctx, const std::vector<double>& T_list);

/// Jensen lower bound for d >= 4 runs, with jackknife errors:
///   sum_b nu0(b) exp(-E[J|bin b]/8) sqrt(ratio_b).
struct LowerBoundPoint {
    double T = 0.0;
    double value = 0.0;
    double stderr_ = 0.0;
    double analytic_floor = 0.0;  ///< exp(-(1/32) int |rho|^2/|k|^3) / sqrt(c_emp)
};
LowerBoundPoint convergent_lower_bound_point(const SimContext& ctx,
                                             const GibbsPointResult& run);
std::vector<LowerBoundPoint> convergent_lower_bound(
    const SimContext& ctx, const std::vector<double>& T_list);

/// Radial density-ratio histogram d nu_T / d nu0 with per-bin errors.
struct LocalizationReport {
    double T = 0.0;
    std::vector<double> edges;      ///< n_bins+1
    std::vector<double> nu0_mass;   ///< exact nu0 probability per bin
    std::vector<Estimate> ratio;    ///< per-bin empirical / nu0
    std::vector<long> hits;
    double c_lo = 0.0, c_hi = 0.0;  ///< min/max ratio over bins with >=100 hits
    long skipped_bins = 0;
};
LocalizationReport localization_ratio(const SimContext& ctx,
                                      const GibbsPointResult& run,
                                      long min_hits = 100,
                                      long min_samples = 10000);

/// Time-lagged covariance of bounded observables under N_T with an envelope
/// fit C/(lag^gamma + 1).
struct DecayReport {
    std::vector<double> lags;
    std::vector<Estimate> cov;
    double gamma = 0.0, gamma_stderr = 0.0, C = 0.0;
    double fit_r2 = 0.0;
    bool fit_done = false;
};
DecayReport correlation_decay_fit(const SimContext& ctx, double T,
                                  const std::function<double(double)>& F1,
                                  const std::function<double(double)>& F2,
                                  const std::vector<double>& lags);

/// Explicit field autocorrelation G_h(t) = int e^{-|k|t}/|k| |h_hat|^2 dk and
/// its log-log tail fit (exponent d-1 when h_hat(0) != 0).
TailFit spectral_tail_fit(const std::function<double(double)>& h_hat,
                          const std::vector<double>& t_list,
                          const ModelParams& p);
double spectral_G(const std::function<double(double)>& h_hat, double t,
                  const ModelParams& p);

/// Double convolution L1*L1*L2 with L1 = 1/(|t|^{d-1}+1), L2 = 1/(|t|^g+1):
/// evaluates it on t_list, fits the tail, and reports the exponent
/// comparison 2d+g-4 > d-1.
struct ConvolutionReport {
    TailFit fit;
    std::vector<double> t, h;
    double claimed_exponent = 0.0;  ///< 2d + gamma - 4
    bool dominance = false;         ///< 2d + gamma - 4 > d - 1
};
ConvolutionReport convolution_tail_exponent(int d, double gamma,
                                            const std::vector<double>& t_list);

/// Path regularity: Hoelder-1/8 modulus ratios per window delta and the
/// log-envelope fit of sup|q_t|; diagnostic quantities only.
struct RegularityReport {
    std::vector<double> deltas;
    std::vector<double> modulus_mean, modulus_p99;
    double C1 = 0.0, C2 = 0.0;       ///< fit of p99 sup vs (ln(T+1))^{1/(a+1)}
    double envelope_rms_residual = 0.0;
    long n_paths = 0;
};
RegularityReport path_regularity_stats(const std::vector<DiscretizedPath>& paths,
                                       const PathConfig& cfg, double pot_alpha);

/// Least-squares power-law fit on a log-log grid; refuses windows under one
/// decade.
TailFit fit_loglog_tail(const std::vector<double>& t, const std::vector<double>& y);

}  // namespace nirsim

#endif

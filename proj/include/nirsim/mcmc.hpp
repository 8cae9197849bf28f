/**
 * @file mcmc.hpp
 * @brief Metropolis-Hastings sampler of the finite-volume Gibbs measure on
 *        discretized paths. Move mix: single-bead Gaussian steps, Brownian-
 *        bridge block regeneration, endpoint refresh. Chains are fully
 *        independent workers; every estimate is a pure function of
 *        (config, seed).
 */

#ifndef NIRSIM_MCMC_HPP
#define NIRSIM_MCMC_HPP

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "nirsim/actions.hpp"
#include "nirsim/estimate.hpp"
#include "nirsim/path.hpp"
#include "nirsim/rng.hpp"

namespace nirsim {

struct McmcSettings {
    long sweeps = 2000;   ///< post-burn-in sweeps
    long burnin = 400;
    int chains = 2;
    long thin = 1;        ///< observable cadence in sweeps
    std::uint64_t seed = 12345;
    long resync_interval = 64;
    long batches = 100;   ///< target batch count for error bars
    double p_bead = 0.65, p_block = 0.25, p_end = 0.10;
    double acc_lo = 0.30, acc_hi = 0.60;   ///< tuning window
    long max_new_sweeps = -1;  ///< per-invocation cap (checkpoint support); -1 = run to target

    long samples_per_chain() const { return sweeps / (thin < 1 ? 1 : thin); }
    long batch_len() const {
        long s = samples_per_chain();
        long b = s / (batches < 2 ? 2 : batches);
        return b < 1 ? 1 : b;
    }
};

struct MoveStats {
    long proposed = 0, accepted = 0;
    double rate() const { return proposed ? double(accepted) / proposed : 0.0; }
};

enum MoveKind { kBead = 0, kBlock = 1, kEndpoint = 2 };

struct ChainState {
    int chain_id = 0;
    DiscretizedPath path;
    CounterRng rng;
    long sweep = 0;  ///< completed sweeps (burn-in included)
    double cached_action = 0.0, cached_cross = 0.0, cached_ref = 0.0;
    double bead_step = 0.25;
    int block_len = 16;
    bool tuned = false;
    MoveStats stats[3];
    long resync_count = 0;
    double worst_resync_rel = 0.0;
};

/// Immutable evaluation context shared by all chains of a run.
class ChainDriver {
  public:
    ChainDriver(const ModelParams& params, const PathConfig& cfg,
                const RadialGroundState* gs, const PairKernelView* w);

    const PathConfig& cfg() const { return cfg_; }
    const ModelParams& params() const { return params_; }
    const RadialGroundState& gs() const { return *gs_; }
    bool interacting() const { return w_ && !w_->empty() && params_.e != 0.0; }

    /// Fresh chain: nu0 endpoint plus an Euler-Maruyama pass of the
    /// reference SDE, then exact cache evaluation.
    ChainState init_chain(std::uint64_t seed, std::uint64_t chain_id) const;

    /// One elementary Metropolis update of the given kind.
    void move(ChainState& st, MoveKind kind) const;

    /// One sweep = n_beads elementary moves from the mixed menu, plus
    /// periodic cache resync and (during burn-in) proposal tuning.
    void sweep(ChainState& st, const McmcSettings& s) const;

    /// Recomputes the caches from scratch and checks coherence (1e-8 rel).
    void resync(ChainState& st) const;

    /// Full log target (reference + Gaussian increments - interaction), for
    /// enumeration oracles and reversibility tests.
    double total_log_density(const DiscretizedPath& p) const;

  private:
    double try_log_ref_delta_single(const ChainState& st, int m,
                                    const double* xn) const;

    ModelParams params_;
    PathConfig cfg_;
    const RadialGroundState* gs_;
    const PairKernelView* w_;
};

struct Observable {
    std::string name;
    /// evaluated on the chain state (path plus cached actions)
    std::function<double(const ChainState&)> f;
};

using SampleHook =
    std::function<void(int chain, long sample_index, const ChainState&)>;

struct ChainRunResult {
    std::vector<ChainState> chains;
    /// per observable: one accumulator per chain, in chain order
    std::map<std::string, std::vector<Accumulator>> acc;
    std::map<std::string, Estimate> estimates;
    bool complete = true;
    long total_samples = 0;

    Estimate combined(const std::string& name) const;
};

/// Runs all chains (threaded over NIRSIM_THREADS workers, default hardware
/// parallelism); results are independent of the worker count. If
/// checkpoint_path is nonempty the run resumes from / persists to it, and
/// refuses to resume when the stored config hash differs.
ChainRunResult run_chains(const ChainDriver& driver, const McmcSettings& s,
                          const std::vector<Observable>& observables,
                          const SampleHook& hook = nullptr,
                          const std::string& checkpoint_path = "",
                          std::uint64_t config_hash = 0);

int thread_budget();  ///< NIRSIM_THREADS or hardware concurrency

}  // namespace nirsim

#endif

/**
 * @file actions.hpp
 * @brief Reference weight of the discretized ground-state process and the
 *        double-time interaction action, with incremental updates for MCMC.
 *
 * The discrete target density relative to the product of Gaussian increments
 * is  psi0(x_0) psi0(x_N) exp(-sum_i w_i (V(x_i)-E_p) dt) exp(-S_int),
 * S_int the trapezoid double sum of W(|x_i-x_j|, |t_i-t_j|).
 */

#ifndef NIRSIM_ACTIONS_HPP
#define NIRSIM_ACTIONS_HPP

#include <vector>

#include "nirsim/kernels.hpp"
#include "nirsim/path.hpp"
#include "nirsim/schrodinger.hpp"

namespace nirsim {

/// W(r, lag*dt) evaluator: the 2d kernel table resliced into per-lag cubic
/// rows in the radial coordinate, which is what the O(n^2) double sums hit.
class PairKernelView {
  public:
    PairKernelView() = default;
    PairKernelView(const KernelTable* tab, double dt, int n_lags,
                   double r_cache_max = -1.0, int nr_cache = 256);

    double operator()(int lag, double r) const;
    double dt() const { return dt_; }
    bool empty() const { return tab_ == nullptr; }
    double w00() const { return w00_; }

  private:
    const KernelTable* tab_ = nullptr;
    double dt_ = 0.0;
    int n_lags_ = 0, nr_ = 0;
    double r0_ = 1.0, du_ = 1.0, r_cache_max_ = 0.0;
    double w00_ = 0.0;
    std::vector<double> rows_;  // n_lags * nr
};

/// ln psi0(x_0) + ln psi0(x_N) - sum_i w_i (V(|x_i|) - E_p) dt.
/// Throws std::domain_error when a bead leaves the solver domain.
double reference_log_weight(const DiscretizedPath& path,
                            const RadialGroundState& gs, const PathConfig& cfg);

/// Trapezoid double sum of W over all bead pairs (the full action).
double interaction_action(const DiscretizedPath& path, const PairKernelView& w,
                          const PathConfig& cfg);

/// Same sum restricted to pairs with opposite time signs, both orderings
/// counted (the interaction between the path's past and future halves).
double cross_action(const DiscretizedPath& path, const PairKernelView& w,
                    const PathConfig& cfg);

/// sum_{ij} w_i w_j W(|x_i-x_j|, |t_i|+|t_j|) dt^2; -1/2 of it equals the
/// quadratic functional int |g_hat^0_T(k;Q)|^2 |k| dk of the conditional mean.
double folded_time_kernel_sum(const DiscretizedPath& path,
                              const PairKernelView& w, const PathConfig& cfg);

struct ActionDelta {
    double dfull = 0.0;
    double dcross = 0.0;
};

/// Change of (full, cross) action when bead m moves to xnew.
ActionDelta action_delta_single(const DiscretizedPath& path,
                                const PairKernelView& w, const PathConfig& cfg,
                                int m, const double* xnew);

/// Change when beads a+1..b-1 are replaced by xnew (bead-major, (b-a-1)*d).
ActionDelta action_delta_block(const DiscretizedPath& path,
                               const PairKernelView& w, const PathConfig& cfg,
                               int a, int b, const std::vector<double>& xnew);

}  // namespace nirsim

#endif

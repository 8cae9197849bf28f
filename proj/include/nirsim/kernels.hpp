/**
 * @file kernels.hpp
 * @brief Analytic kernels of the model: charge form factor, effective pair
 *        potential W in momentum and position form, stationary field
 *        covariance, infrared criterion integrals and the singular test
 *        profile s_hat.
 *
 * Conventions. rho_hat(k) = int rho(x) e^{-ik.x} dx with a Gaussian charge,
 * so rho_hat(0) = e. The pair potential is
 *
 *   W(q,t) = -(1/8) int_{R^d} |rho_hat(k)|^2 / |k| cos(k.q) e^{-|k||t|} dk
 *
 * which after the angular average reduces to a 1d integral with the kernel
 * A_d(x) = Gamma(d/2) (2/x)^{d/2-1} J_{d/2-1}(x).
 */

#ifndef NIRSIM_KERNELS_HPP
#define NIRSIM_KERNELS_HPP

#include <atomic>
#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "nirsim/params.hpp"

namespace nirsim {

/// Angular average of cos(k.q) over directions: A_d(|k||q|).
/// A_3(x) = sin(x)/x, A_4(x) = 2 J_1(x)/x, A_5(x) = 3(sin x - x cos x)/x^3.
double angular_average(int d, double x);

/// W(r,t) by radially reduced momentum-space quadrature, any supported d.
/// Integration panels are split at the zeros of A_d(kr).
double pair_kernel_momentum(double r, double t, const ModelParams& p);

/// W(r,t) from the position-space double integral (d = 3 only); reduces to a
/// 1d radial integral after the angular step. Cross-checks the momentum form.
double pair_kernel_position(double r, double t, const ModelParams& p);

/// Stationary covariance (1/4) int h1_hat h2_hat / |k| e^{-|k||dt|} dk for
/// radial form factors given as functions of |k|.
double field_covariance(const std::function<double(double)>& h1_hat,
                        const std::function<double(double)>& h2_hat, double dt,
                        const ModelParams& p, double k_max = 40.0);

/// Infrared criterion integral I(eps) = int_{eps<=|k|<=1} |rho_hat|^2/|k|^3 dk
/// for each cutoff in eps_list (all in (0,1]).
std::vector<std::pair<double, double>> ir_criterion_scan(
    const std::vector<double>& eps_list, const ModelParams& p);

/// Checks that rho_hat stays numerically positive on the support of s_hat.
void validate_test_function(const IRTestFunction& test, const ModelParams& p);

/// s_hat(k) = (1/rho_hat(k)) int_{Tstar}^inf e^{-kt} / (ln t (lnln t)^zeta) dt
/// for 0 < k < kstar, and 0 for k >= kstar.
double s_hat(double k_mag, const IRTestFunction& test, const ModelParams& p);

/// ||s||^2 = int |s_hat|^2 / |k| dk (finite for zeta in (0,1)). If tail_bound
/// is given it receives a bound on the truncated far-infrared remainder.
double s_norm2(const IRTestFunction& test, const ModelParams& p,
               double* tail_bound = nullptr);

/// Precomputed W on a log-spaced grid (linear near zero) with cubic
/// interpolation; immutable after construction and safe to share.
class KernelTable {
  public:
    KernelTable() = default;

    /// Interpolated W(|r|,|t|); falls back to direct quadrature outside the
    /// covered rectangle (counted in fallback_count).
    double operator()(double r, double t) const;

    /// Interpolation only; r,t must lie inside the table.
    double interpolate(double r, double t) const;

    bool covers(double r, double t) const {
        return std::abs(r) <= r_max_ && std::abs(t) <= t_max_;
    }

    double r_max() const { return r_max_; }
    double t_max() const { return t_max_; }
    int nr() const { return nr_; }
    int nt() const { return nt_; }
    double measured_error() const { return measured_error_; }
    const ModelParams& params() const { return params_; }
    long fallback_count() const { return fallbacks_->load(); }

    void save(const std::string& path) const;
    static KernelTable load(const std::string& path);

    friend KernelTable build_kernel_table(const ModelParams& p, double r_max,
                                          double t_max, int nr, int nt,
                                          double tol_table);

  private:
    double knot_r(int i) const;
    double knot_t(int j) const;

    ModelParams params_;
    double r0_ = 0.5, t0_ = 0.5;        // linear patch scales
    double r_max_ = 0, t_max_ = 0;
    int nr_ = 0, nt_ = 0;
    double du_ = 0, dv_ = 0;            // spacing in u = ln(1+r/r0)
    std::vector<double> w_;             // nr*nt, row-major in r
    double measured_error_ = 0;
    std::shared_ptr<std::atomic<long>> fallbacks_ =
        std::make_shared<std::atomic<long>>(0);
};

/// Tabulates W on [0,r_max] x [0,t_max] and verifies the interpolation error
/// at off-grid probe points against direct quadrature. Refuses (with the
/// measured error) if the resolution cannot meet tol_table.
KernelTable build_kernel_table(const ModelParams& p, double r_max, double t_max,
                               int nr = 200, int nt = 220,
                               double tol_table = 1e-6);

}  // namespace nirsim

#endif

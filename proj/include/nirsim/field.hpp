/**
 * @file field.hpp
 * @brief Conditional Gaussian field statistics given a particle path: the
 *        conditional mean g_hat^t_T(k;Q), the linear tilt m_hat = 4|k| g_hat,
 *        exponential test functionals, field sampling at test functions, and
 *        the log density against the free field law.
 *
 * The time integral over the path is discretized with exact exponential cell
 * weights: each bead carries int_{cell} e^{-|k||t-tau|} dtau over its
 * trapezoid cell. This keeps |g_hat| <= |rho_hat|/(2|k|^2) exact at every k
 * (a plain trapezoid sum overshoots the envelope once k dt is of order one).
 */

#ifndef NIRSIM_FIELD_HPP
#define NIRSIM_FIELD_HPP

#include <complex>
#include <functional>
#include <memory>
#include <vector>

#include "nirsim/actions.hpp"
#include "nirsim/kernels.hpp"
#include "nirsim/path.hpp"
#include "nirsim/rng.hpp"

namespace nirsim {

/// int over [a,b] of e^{-k|t-tau|} dtau, closed form.
double exp_cell_weight(double k, double t, double a, double b);

/// Conditional mean of the field mode at wavevector k (d components), time t.
std::complex<double> g_hat(const double* k, double t, const DiscretizedPath& path,
                           const PathConfig& cfg, const ModelParams& p);

/// g_hat at t = 0.
std::complex<double> g_hat0(const double* k, const DiscretizedPath& path,
                            const PathConfig& cfg, const ModelParams& p);

/// m_hat(k;Q) = 4|k| g_hat0(k;Q).
std::complex<double> m_hat(const double* k, const DiscretizedPath& path,
                           const PathConfig& cfg, const ModelParams& p);

/// The uniform envelope |rho_hat(k)|/(2|k|^2) of |g_hat|.
double g_envelope(double k_mag, const ModelParams& p);

/// Conditional mean of xi_t(h) for a radial form factor h_hat, i.e.
/// int h_hat(|k|) g_hat^t_T(k;Q) dk (real by radial symmetry).
double conditional_mean_radial(const std::function<double(double)>& h_hat,
                               double t, const DiscretizedPath& path,
                               const PathConfig& cfg, const ModelParams& p,
                               double k_max = 40.0);

/// Evaluator of E_{P_T^Q}[F] = exp( int s_hat g_hat0 dk + ||s||^2/8 ) for the
/// exponential functional F = exp(xi(s)). The k integral is reduced to its
/// real radial closed form and cached on a (radius, |tau|) spline so that the
/// per-path cost is O(n_beads).
class ConditionalFunctional {
  public:
    /// p.e == 0 is allowed: the probe profile s_hat is then normalized with a
    /// unit charge and the path coupling term vanishes identically.
    ConditionalFunctional(const IRTestFunction& test, const ModelParams& p,
                          const PathConfig& cfg, double r_max);

    /// log E_{P^Q_T}[F] = coupling_integral(path) + ||s||^2/8.
    double log_value(const DiscretizedPath& path) const;
    double value(const DiscretizedPath& path) const;
    double capped_value(const DiscretizedPath& path, double cap) const;

    /// int s_hat g_hat0 dk for this path (<= 0 for nonnegative charges).
    double coupling_integral(const DiscretizedPath& path) const;

    double s_norm2() const { return sn2_; }
    /// Default cap multiplier m gives cap = m * exp(||s||^2/8).
    double cap_from_multiplier(double m) const { return m * std::exp(sn2_ / 8.0); }

    /// Direct slow evaluation of the inner (r,c) kernel (test oracle hook).
    double phi_direct(double r, double c) const;

  private:
    IRTestFunction test_;
    ModelParams params_;
    PathConfig cfg_;
    double sn2_ = 0.0;
    double coupling_ratio_ = 1.0;  ///< chain charge over probe charge
    // Phi(r,c) = int_Tstar^inf f(t) K(r, c+t) dt on a uniform 2d grid in
    // (u = ln(1+r/r0), c).
    int nr_ = 0, nc_ = 0;
    double r0_ = 0.5, du_ = 0.0, dc_ = 0.0, r_max_ = 0.0, c_max_ = 0.0;
    std::vector<double> phi_;
    double phi_interp(double r, double c) const;
};

/// Joint field evaluation spec: radial test functions at given times plus
/// the k-space mode grid used for sampling and densities.
struct FieldSampleSpec {
    std::vector<std::function<double(double)>> h_hats;
    std::vector<double> times;
    double k_max = 40.0;
    int n_k = 48, n_mu = 12, n_phi = 24;  ///< mode grid (d=3)
};

/// Covariance matrix of (xi_{t_j}(h_j)) under the free field law.
std::vector<double> field_covariance_matrix(const FieldSampleSpec& spec,
                                            const ModelParams& p);

/// Mean vector given a path (zero vector if path == nullptr).
std::vector<double> field_mean_vector(const FieldSampleSpec& spec,
                                      const DiscretizedPath* path,
                                      const PathConfig& cfg, const ModelParams& p);

/// Joint Gaussian draws: n_draws rows of J columns. Cholesky with 1e-12 PSD
/// jitter; throws with an eigenvalue report if assembly fails outright.
std::vector<double> sample_field_at_times(const FieldSampleSpec& spec,
                                          const DiscretizedPath* path,
                                          const PathConfig& cfg,
                                          const ModelParams& p, int n_draws,
                                          CounterRng& rng);

/// Dense symmetric eigenvalues (Jacobi); small matrices only.
std::vector<double> sym_eigenvalues(std::vector<double> a, int n);

/// k-space mode grid for d=3: radial Gauss-Legendre nodes times a product
/// angular rule; weight[m] approximates the full dk measure.
struct ModeGrid {
    std::vector<double> kvec;   ///< 3*M
    std::vector<double> kmag;   ///< M
    std::vector<double> weight; ///< M
    int size() const { return static_cast<int>(kmag.size()); }
    static ModeGrid build(double k_max, int n_k, int n_mu, int n_phi);
};

/// A free-field sample in mode coordinates: iid standard normal pairs.
struct FieldModeSample {
    std::vector<double> a, b;
    static FieldModeSample draw(const ModeGrid& g, CounterRng& rng);
};

/// Precomputed tilt coefficients of one path on a mode grid: evaluates the
/// linear functional xi(m_T), its free-law variance, and the log density
/// ln d p^Q_T / d gamma = xi(m_T) - Var(xi(m_T))/2 per field sample in O(M).
class FreeDensity {
  public:
    FreeDensity(const ModeGrid& g, const DiscretizedPath& path,
                const PathConfig& cfg, const ModelParams& p);
    double linear_term(const FieldModeSample& xi) const;
    double linear_variance() const { return var_; }
    double log_density(const FieldModeSample& xi) const {
        return zero_coupling_ ? 0.0 : linear_term(xi) - 0.5 * var_;
    }

  private:
    std::vector<double> ca_, cb_;  ///< per-mode coefficients of (a_m, b_m)
    double var_ = 0.0;
    bool zero_coupling_ = false;
};

/// xi(m_T) evaluated on the mode grid for the given sample.
double mode_linear_term(const FieldModeSample& xi, const ModeGrid& g,
                        const DiscretizedPath& path, const PathConfig& cfg,
                        const ModelParams& p);

/// Var of xi(m_T) under the free law, computed on the same grid.
double mode_linear_variance(const ModeGrid& g, const DiscretizedPath& path,
                            const PathConfig& cfg, const ModelParams& p);

/// One-shot wrapper over FreeDensity (precompute it when sampling in bulk).
double density_log_vs_free(const FieldModeSample& xi, const ModeGrid& g,
                           const DiscretizedPath& path, const PathConfig& cfg,
                           const ModelParams& p);

/// Analytic route to the quadratic term: int |g_hat0|^2 |k| dk equals
/// -(1/2) sum_ij w_i w_j W(|x_i-x_j|, |t_i|+|t_j|) dt^2.
double g0_sq_k_integral(const DiscretizedPath& path, const PairKernelView& w,
                        const PathConfig& cfg);

}  // namespace nirsim

#endif

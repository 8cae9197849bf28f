/**
 * @file schrodinger.hpp
 * @brief Radial ground state of H_p = -(1/2) Laplacian + V on R^d: the
 *        substitution u = r^{(d-1)/2} psi removes the first-derivative term,
 *        leaving a 1d Dirichlet problem solved by finite differences with
 *        Sturm bisection and inverse iteration.
 */

#ifndef NIRSIM_SCHRODINGER_HPP
#define NIRSIM_SCHRODINGER_HPP

#include <string>
#include <vector>

#include "nirsim/params.hpp"
#include "nirsim/rng.hpp"

namespace nirsim {

struct SolverError : std::runtime_error {
    explicit SolverError(const std::string& msg) : std::runtime_error(msg) {}
};

struct GridSpec {
    int n = 8000;          ///< number of interior nodes
    double r_max = 0.0;    ///< 0 = choose from V(r_max) >= E_guess + 40
    double E_guess = 5.0;  ///< used only for the automatic r_max
};

/// Tabulated ground state. ln(psi0) is splined (clamped cubic) so the drift
/// grad ln psi0 stays accurate deep into the tail; the usable radial domain
/// ends where psi0 has dropped ~e^-30 below its peak.
class RadialGroundState {
  public:
    int d = 3;
    PotentialSpec pot;
    double E_p = 0.0;
    double r_max = 0.0;    ///< solver box (Dirichlet wall)
    double r_domain = 0.0; ///< usable domain for drift / weights
    double residual = 0.0; ///< discrete eigenresidual, grid norm
    double h = 0.0;        ///< grid step

    double psi(double r) const { return std::exp(ln_psi(r)); }
    double ln_psi(double r) const;
    /// d/dr ln psi0
    double dln_psi(double r) const;

    /// drift(q) = (d/dr ln psi0)(|q|) q/|q|; zero at the origin.
    void drift(const double* q, double* out) const;

    /// i.i.d. draw from nu0 = psi0^2 dq by inverse-CDF radius + uniform direction.
    void sample_nu0(double* out, CounterRng& rng) const;

    /// P(|q| <= r) under nu0 (for KS tests and binning).
    double radial_cdf(double r) const;
    /// Inverse of radial_cdf.
    double radial_quantile(double p) const;

    void save(const std::string& path) const;
    static RadialGroundState load(const std::string& path);

    // Grid data (kept public: tests probe it, IO serializes it).
    std::vector<double> r_grid;   ///< nodes 0..n (r=0 included)
    std::vector<double> psi_grid; ///< normalized psi0 at nodes
    std::vector<double> lnpsi;    ///< ln psi0 at nodes
    std::vector<double> lnpsi_d2; ///< spline second derivatives
    std::vector<double> cdf;      ///< radial CDF at nodes
    int n_domain = 0;             ///< grid index of r_domain

  private:
    void build_spline_and_cdf();
    friend RadialGroundState solve_ground_state(const PotentialSpec&, int,
                                                const GridSpec&);
};

/// Lowest eigenpair of the radial problem. Throws SolverError if the
/// eigenvector has nodes or the iteration fails to converge.
RadialGroundState solve_ground_state(const PotentialSpec& pot, int d,
                                     const GridSpec& grid = {});

}  // namespace nirsim

#endif

#include "nirsim/schrodinger.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "nirsim/io.hpp"

namespace nirsim {

namespace {

// Number of eigenvalues of the symmetric tridiagonal (diag, off) below x,
// by the Sturm / LDL^T sign count.
int sturm_count(const std::vector<double>& diag, double off, double x) {
    int count = 0;
    double d = 1.0;
    const double b2 = off * off;
    for (size_t i = 0; i < diag.size(); ++i) {
        d = (diag[i] - x) - (i ? b2 / d : 0.0);
        if (d == 0.0) d = -1e-300;
        if (d < 0.0) ++count;
    }
    return count;
}

// Solve (A - shift I) y = rhs for tridiagonal A with constant off-diagonal,
// Thomas algorithm. Overwrites rhs with y.
void tridiag_solve(const std::vector<double>& diag, double off, double shift,
                   std::vector<double>& rhs) {
    const size_t n = diag.size();
    std::vector<double> c(n);
    double piv = diag[0] - shift;
    c[0] = off / piv;
    rhs[0] /= piv;
    for (size_t i = 1; i < n; ++i) {
        piv = (diag[i] - shift) - off * c[i - 1];
        c[i] = off / piv;
        rhs[i] = (rhs[i] - off * rhs[i - 1]) / piv;
    }
    for (size_t i = n - 1; i-- > 0;) rhs[i] -= c[i] * rhs[i + 1];
}

}  // namespace

RadialGroundState solve_ground_state(const PotentialSpec& pot, int d,
                                     const GridSpec& grid) {
    if (d < 2 || d > 6) throw ConfigError("solve_ground_state: d out of range");
    double r_max = grid.r_max;
    if (r_max <= 0.0) {
        // Deep Dirichlet wall: V(r_max) >= E_guess + 40.
        r_max = std::pow((grid.E_guess + 40.0) / pot.C, 1.0 / (2.0 * pot.alpha));
        r_max = std::max(r_max, 4.0);
    }
    const int n = grid.n;
    const double h = r_max / (n + 1);
    const double cent = 0.125 * (d - 1.0) * (d - 3.0);

    std::vector<double> diag(n);
    for (int i = 0; i < n; ++i) {
        double r = (i + 1) * h;
        diag[i] = 1.0 / (h * h) + pot(r) + 2.0 * cent / (r * r);
    }
    const double off = -0.5 / (h * h);

    // Bracket the lowest eigenvalue, then bisect on the Sturm count.
    // (Rayleigh quotients of basis vectors give lambda_1 <= min diag.)
    double lo = *std::min_element(diag.begin(), diag.end()) - 2.0 * std::abs(off);
    double hi = *std::min_element(diag.begin(), diag.end()) + 1e-9;
    for (int it = 0; it < 200 && sturm_count(diag, off, hi) < 1; ++it)
        hi += std::max(1.0, std::abs(hi));
    if (sturm_count(diag, off, hi) < 1)
        throw SolverError("ground state bracket failed");
    for (int it = 0; it < 240; ++it) {
        double mid = 0.5 * (lo + hi);
        if (sturm_count(diag, off, mid) >= 1)
            hi = mid;
        else
            lo = mid;
        if (hi - lo < 1e-14 * std::max(1.0, std::abs(hi))) break;
    }
    double E = 0.5 * (lo + hi);

    // Inverse iteration from a positive start vector.
    std::vector<double> u(n);
    for (int i = 0; i < n; ++i) {
        double r = (i + 1) * h;
        u[i] = std::exp(-0.1 * r * r) * r;
    }
    const double shift = E - 1e-9 * std::max(1.0, std::abs(E));
    for (int it = 0; it < 4; ++it) {
        tridiag_solve(diag, off, shift, u);
        double nrm = 0.0;
        for (double x : u) nrm += x * x;
        nrm = 1.0 / std::sqrt(nrm);
        for (double& x : u) x *= nrm;
    }
    if (u[n / 8] < 0)
        for (double& x : u) x = -x;
    // Nodeless check on the bulk (the far tail underflows toward zero).
    for (int i = 0; i < n; ++i)
        if (u[i] < 0.0 && std::abs(u[i]) > 1e-13)
            throw SolverError("eigenvector has nodes: wrong spectral branch");

    // Residual of the discrete eigenproblem, grid norm.
    double res2 = 0.0, nrm2 = 0.0;
    for (int i = 0; i < n; ++i) {
        double Au = diag[i] * u[i];
        if (i > 0) Au += off * u[i - 1];
        if (i + 1 < n) Au += off * u[i + 1];
        double r = Au - E * u[i];
        res2 += r * r;
        nrm2 += u[i] * u[i];
    }
    double residual = std::sqrt(res2 / nrm2);
    if (residual > 1e-6)
        throw SolverError("inverse iteration did not converge: residual " +
                          io::fmt_full(residual));

    RadialGroundState gs;
    gs.d = d;
    gs.pot = pot;
    gs.E_p = E;
    gs.r_max = r_max;
    gs.residual = residual;
    gs.h = h;
    gs.r_grid.resize(n + 1);
    gs.psi_grid.resize(n + 1);
    const double halfdm1 = 0.5 * (d - 1);
    for (int i = 1; i <= n; ++i) {
        gs.r_grid[i] = i * h;
        gs.psi_grid[i] = u[i - 1] / std::pow(i * h, halfdm1);
    }
    gs.r_grid[0] = 0.0;
    // psi is even in r: fit a + b r^2 through the first two interior nodes.
    {
        double r1 = gs.r_grid[1], r2 = gs.r_grid[2];
        double p1 = gs.psi_grid[1], p2 = gs.psi_grid[2];
        gs.psi_grid[0] = (p1 * r2 * r2 - p2 * r1 * r1) / (r2 * r2 - r1 * r1);
    }
    // Normalize: S_{d-1} int psi^2 r^{d-1} dr = 1 (Simpson on the grid).
    {
        std::vector<double> f(n + 1);
        for (int i = 0; i <= n; ++i)
            f[i] = gs.psi_grid[i] * gs.psi_grid[i] *
                   std::pow(gs.r_grid[i], d - 1.0);
        double integral = 0.0;
        int m = n;  // nodes 0..n
        for (int i = 0; i + 2 <= m; i += 2)
            integral += h / 3.0 * (f[i] + 4.0 * f[i + 1] + f[i + 2]);
        if (m % 2 == 1) integral += 0.5 * h * (f[m - 1] + f[m]);
        double z = 1.0 / std::sqrt(sphere_area(d) * integral);
        for (double& x : gs.psi_grid) x *= z;
    }
    gs.build_spline_and_cdf();
    return gs;
}

void RadialGroundState::build_spline_and_cdf() {
    const int n = static_cast<int>(r_grid.size()) - 1;
    // Usable domain: stop where ln psi has dropped 30 below the peak.
    double peak = -1e300;
    for (int i = 0; i <= n; ++i) peak = std::max(peak, std::log(psi_grid[i]));
    n_domain = n;
    for (int i = 0; i <= n; ++i) {
        if (std::log(psi_grid[i]) < peak - 30.0) {
            n_domain = i;
            break;
        }
    }
    n_domain = std::max(n_domain, 16);
    r_domain = r_grid[n_domain];

    lnpsi.assign(n_domain + 1, 0.0);
    for (int i = 0; i <= n_domain; ++i) lnpsi[i] = std::log(psi_grid[i]);

    // Clamped cubic spline for ln psi on [0, r_domain]: slope 0 at r = 0
    // (radial symmetry), one-sided difference at the right end.
    const int m = n_domain;
    lnpsi_d2.assign(m + 1, 0.0);
    std::vector<double> rhs(m + 1), dl(m + 1), dd(m + 1), du(m + 1);
    const double fp0 = 0.0;  // radial symmetry
    const double fpn =
        (1.5 * lnpsi[m] - 2.0 * lnpsi[m - 1] + 0.5 * lnpsi[m - 2]) / h;
    dd[0] = 2.0 * h;
    du[0] = h;
    rhs[0] = 6.0 * ((lnpsi[1] - lnpsi[0]) / h - fp0);
    for (int i = 1; i < m; ++i) {
        dl[i] = h;
        dd[i] = 4.0 * h;
        du[i] = h;
        rhs[i] = 6.0 * ((lnpsi[i + 1] - 2.0 * lnpsi[i] + lnpsi[i - 1]) / h);
    }
    dl[m] = h;
    dd[m] = 2.0 * h;
    rhs[m] = 6.0 * (fpn - (lnpsi[m] - lnpsi[m - 1]) / h);
    // Thomas on the spline system.
    for (int i = 1; i <= m; ++i) {
        double w = dl[i] / dd[i - 1];
        dd[i] -= w * du[i - 1];
        rhs[i] -= w * rhs[i - 1];
    }
    lnpsi_d2[m] = rhs[m] / dd[m];
    for (int i = m - 1; i >= 0; --i)
        lnpsi_d2[i] = (rhs[i] - du[i] * lnpsi_d2[i + 1]) / dd[i];

    // Radial CDF of nu0 on the full solver grid (trapezoid is fine at this
    // resolution; the density vanishes to 1e-26 beyond r_domain).
    const int nn = n;
    cdf.assign(nn + 1, 0.0);
    double acc = 0.0;
    double prev = 0.0;
    for (int i = 1; i <= nn; ++i) {
        double fi = psi_grid[i] * psi_grid[i] * std::pow(r_grid[i], d - 1.0);
        acc += 0.5 * h * (prev + fi);
        prev = fi;
        cdf[i] = acc;
    }
    double z = 1.0 / cdf[nn];
    for (double& c : cdf) c *= z;
}

double RadialGroundState::ln_psi(double r) const {
    r = std::abs(r);
    if (r > r_domain)
        throw std::domain_error("ln_psi: radius " + io::fmt_full(r) +
                                " outside the usable domain " +
                                io::fmt_full(r_domain));
    int i = std::min(n_domain - 1, static_cast<int>(r / h));
    double a = (r_grid[i + 1] - r) / h, b = (r - r_grid[i]) / h;
    return a * lnpsi[i] + b * lnpsi[i + 1] +
           ((a * a * a - a) * lnpsi_d2[i] + (b * b * b - b) * lnpsi_d2[i + 1]) *
               h * h / 6.0;
}

double RadialGroundState::dln_psi(double r) const {
    r = std::abs(r);
    if (r > r_domain)
        throw std::domain_error("dln_psi: radius outside the usable domain");
    int i = std::min(n_domain - 1, static_cast<int>(r / h));
    double a = (r_grid[i + 1] - r) / h, b = (r - r_grid[i]) / h;
    return (lnpsi[i + 1] - lnpsi[i]) / h +
           (-(3.0 * a * a - 1.0) * lnpsi_d2[i] +
            (3.0 * b * b - 1.0) * lnpsi_d2[i + 1]) *
               h / 6.0;
}

void RadialGroundState::drift(const double* q, double* out) const {
    double r2 = 0.0;
    for (int i = 0; i < d; ++i) r2 += q[i] * q[i];
    double r = std::sqrt(r2);
    if (r < 1e-300) {
        for (int i = 0; i < d; ++i) out[i] = 0.0;
        return;
    }
    double g = dln_psi(r) / r;
    for (int i = 0; i < d; ++i) out[i] = g * q[i];
}

double RadialGroundState::radial_cdf(double r) const {
    r = std::abs(r);
    const int nn = static_cast<int>(cdf.size()) - 1;
    if (r >= r_grid[nn]) return 1.0;
    int i = std::min(nn - 1, static_cast<int>(r / h));
    double frac = (r - r_grid[i]) / h;
    return cdf[i] + frac * (cdf[i + 1] - cdf[i]);
}

double RadialGroundState::radial_quantile(double p) const {
    const int nn = static_cast<int>(cdf.size()) - 1;
    p = std::min(std::max(p, 0.0), 1.0);
    int lo = 0, hi = nn;
    while (hi - lo > 1) {
        int mid = (lo + hi) / 2;
        (cdf[mid] <= p ? lo : hi) = mid;
    }
    double dc = cdf[hi] - cdf[lo];
    double frac = dc > 0 ? (p - cdf[lo]) / dc : 0.0;
    return r_grid[lo] + frac * h;
}

void RadialGroundState::sample_nu0(double* out, CounterRng& rng) const {
    double r = radial_quantile(rng.uniform());
    rng.unit_vector(out, d);
    for (int i = 0; i < d; ++i) out[i] *= r;
}

void RadialGroundState::save(const std::string& path) const {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("cannot open " + path + " for writing");
    io::write_magic(os, "NIRG1");
    io::write_u32(os, 1);
    io::write_i32(os, d);
    io::write_f64(os, pot.C);
    io::write_f64(os, pot.alpha);
    io::write_f64(os, E_p);
    io::write_f64(os, r_max);
    io::write_f64(os, residual);
    io::write_f64(os, h);
    io::write_u64(os, r_grid.size());
    io::write_f64v(os, r_grid);
    io::write_f64v(os, psi_grid);
}

RadialGroundState RadialGroundState::load(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open " + path);
    io::expect_magic(is, "NIRG1", path);
    if (io::read_u32(is) != 1) throw IoError("unsupported NIRG version");
    RadialGroundState gs;
    gs.d = io::read_i32(is);
    gs.pot.C = io::read_f64(is);
    gs.pot.alpha = io::read_f64(is);
    gs.E_p = io::read_f64(is);
    gs.r_max = io::read_f64(is);
    gs.residual = io::read_f64(is);
    gs.h = io::read_f64(is);
    size_t n = io::read_u64(is);
    gs.r_grid = io::read_f64v(is, n);
    gs.psi_grid = io::read_f64v(is, n);
    gs.build_spline_and_cdf();
    return gs;
}

}  // namespace nirsim

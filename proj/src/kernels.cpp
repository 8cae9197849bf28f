#include "nirsim/kernels.hpp"

#include <algorithm>
#include <cmath>

#include "nirsim/quadrature.hpp"

namespace nirsim {

namespace {
constexpr double kPi = 3.14159265358979323846;
}

double angular_average(int d, double x) {
    x = std::abs(x);
    if (x < 0.05) {
        // series in x^2; the d=5 closed form cancels catastrophically here
        double x2 = x * x;
        return 1.0 - x2 / (2.0 * d) + x2 * x2 / (8.0 * d * (d + 2.0)) -
               x2 * x2 * x2 / (48.0 * d * (d + 2.0) * (d + 4.0));
    }
    switch (d) {
        case 3: return std::sin(x) / x;
        case 4: return 2.0 * std::cyl_bessel_j(1.0, x) / x;
        case 5: return 3.0 * (std::sin(x) - x * std::cos(x)) / (x * x * x);
        default: throw ConfigError("angular_average: unsupported dimension");
    }
}

namespace {

// Panel breakpoints in k for an integrand oscillating like A_d(k r):
// geometric base panels plus splits near the zeros of A_d.
std::vector<double> osc_breaks(int d, double r, double k_max) {
    std::vector<double> br{0.0};
    for (double f : {1. / 64, 1. / 32, 1. / 16, 1. / 8, 1. / 4, 3. / 8, 1. / 2,
                     5. / 8, 3. / 4, 7. / 8, 1.0})
        br.push_back(f * k_max);
    if (r > 0) {
        double off = (d == 3) ? 0.0 : (d == 4 ? 0.25 : 0.5);
        for (int n = 1; n * kPi / r < k_max * (1 + 1e-12); ++n) {
            double z = (n + off) * kPi / r;
            if (z < k_max) br.push_back(z);
            if (n > 4000) break;
        }
    }
    std::sort(br.begin(), br.end());
    br.erase(std::unique(br.begin(), br.end(),
                         [](double a, double b) { return b - a < 1e-12; }),
             br.end());
    return br;
}

}  // namespace

double pair_kernel_momentum(double r, double t, const ModelParams& p) {
    r = std::abs(r);
    t = std::abs(t);
    if (p.e == 0.0) return 0.0;
    // Truncation at k_max: the Gaussian tail of |rho_hat|^2 is below
    // e^2 exp(-169) there, far under any tolerance in use.
    const double k_max = 13.0 / p.sigma;
    const double pref = -sphere_area(p.d) / 8.0 * p.e * p.e;
    auto f = [&](double k) {
        return std::pow(k, p.d - 2) * std::exp(-p.sigma * p.sigma * k * k) *
               angular_average(p.d, k * r) * std::exp(-k * t);
    };
    return pref * quad::gl_break(f, osc_breaks(p.d, r, k_max), 16);
}

double pair_kernel_position(double r, double t, const ModelParams& p) {
    if (p.d != 3)
        throw ConfigError("pair_kernel_position is defined for d=3 only");
    if (p.e == 0.0) return 0.0;
    r = std::abs(r);
    t = std::abs(t);
    const double s2 = p.sigma * p.sigma;
    // rho * rho~ : the difference x-y of two charge draws is Gaussian with
    // variance 2 sigma^2 per coordinate and total mass e^2.
    const double pref = p.e * p.e * std::pow(4.0 * kPi * s2, -1.5);
    const double z_max = 16.0 * p.sigma;
    if (r < 1e-9 * p.sigma) {
        auto f = [&](double z) {
            return 4.0 * kPi * z * z * pref * std::exp(-z * z / (4.0 * s2)) /
                   (z * z + t * t);
        };
        return -(kPi / 2.0) * quad::gl_panels(f, 0.0, z_max, 24, 16);
    }
    auto f = [&](double z) {
        double num = (r + z) * (r + z) + t * t;
        double den = (r - z) * (r - z) + t * t;
        return z * pref * std::exp(-z * z / (4.0 * s2)) * std::log(num / den);
    };
    // The integrand has a logarithmic feature at z = r when t is small;
    // approach it geometrically from both sides on top of a uniform base.
    std::vector<double> br{0.0};
    if (r < z_max) {
        for (int j = 2; j <= 44; ++j) {
            double w = r * std::pow(0.5, j);
            if (r - w > 0) br.push_back(r - w);
            if (r + w < z_max) br.push_back(r + w);
        }
        br.push_back(r * 0.75);
        if (r * 1.25 < z_max) br.push_back(r * 1.25);
    }
    for (int j = 1; j <= 32; ++j) br.push_back(j * z_max / 32.0);
    std::sort(br.begin(), br.end());
    br.erase(std::unique(br.begin(), br.end(),
                         [](double a, double b) { return b - a < 1e-15; }),
             br.end());
    return -(kPi / 2.0) * (kPi / r) * quad::gl_break(f, br, 16);
}

double field_covariance(const std::function<double(double)>& h1_hat,
                        const std::function<double(double)>& h2_hat, double dt,
                        const ModelParams& p, double k_max) {
    dt = std::abs(dt);
    auto f = [&](double k) {
        return std::pow(k, p.d - 2) * h1_hat(k) * h2_hat(k) * std::exp(-k * dt);
    };
    return 0.25 * sphere_area(p.d) * quad::adaptive(f, 0.0, k_max, 1e-13, 1e-11);
}

std::vector<std::pair<double, double>> ir_criterion_scan(
    const std::vector<double>& eps_list, const ModelParams& p) {
    std::vector<std::pair<double, double>> out;
    out.reserve(eps_list.size());
    const double s2 = p.sigma * p.sigma;
    for (double eps : eps_list) {
        if (!(eps > 0.0 && eps <= 1.0))
            throw ConfigError("ir_criterion_scan: cutoffs must lie in (0,1]");
        // substitute v = ln k: I = S e^2 int e^{(d-3)v} exp(-s^2 e^{2v}) dv
        auto f = [&](double v) {
            return std::exp((p.d - 3) * v - s2 * std::exp(2.0 * v));
        };
        double lo = std::log(eps);
        int np = std::max(4, static_cast<int>(-lo) + 2);
        double val = (eps >= 1.0) ? 0.0
                                  : quad::gl_panels(f, lo, 0.0, np, 16);
        out.emplace_back(eps, sphere_area(p.d) * p.e * p.e * val);
    }
    return out;
}

void validate_test_function(const IRTestFunction& test, const ModelParams& p) {
    test.validate();
    if (!(p.e > 0.0))
        throw ConfigError("test profile needs a positive charge normalization");
    if (0.5 * p.sigma * p.sigma * test.kstar * test.kstar > 60.0)
        throw ConfigError(
            "kstar too large: rho_hat vanishes numerically inside the support");
}

namespace {

// Core of s_hat: Q(v) = k * int_{Tstar}^inf e^{-kt} f(t) dt at k = e^{-v},
// with f(t) = 1/(ln t (lnln t)^zeta). Evaluated through u = k t so that it
// stays well conditioned down to k values far below double range (the
// variable v, not k, is the argument). Multiplying by 1/rho_hat(k) gives
// k * s_hat(k).
double s_profile_L(double L, double zeta) {  // f(e^L) with L = ln t
    return 1.0 / (L * std::pow(std::log(L), zeta));
}

double s_hat_kQ(double v, const IRTestFunction& test, double zeta) {
    const double lnTstar = std::log(test.Tstar);
    const double x_start = lnTstar - v;  // ln(k Tstar), the true lower limit
    double s1 = 0.0;
    double lo_u = 0.5;
    if (x_start < std::log(0.5)) {
        // u < 1/2 handled in x = ln u (the integrand carries a factor e^x);
        // contributions below x = -45 are beyond double precision relative.
        double x_lo = std::max(x_start, -45.0);
        double x_hi = std::log(0.5);
        auto gx = [&](double x) {
            return std::exp(x - std::exp(x)) * s_profile_L(x + v, zeta);
        };
        std::vector<double> xbr;
        int nxp = std::max(2, static_cast<int>((x_hi - x_lo) / 2.5) + 1);
        for (int i = 0; i <= nxp; ++i)
            xbr.push_back(x_lo + (x_hi - x_lo) * i / nxp);
        s1 = quad::gl_break(gx, xbr, 16);
    } else {
        lo_u = std::exp(x_start);
        if (lo_u >= 60.0) return 0.0;
    }
    auto gu = [&](double u) {
        return std::exp(-u) * s_profile_L(std::log(u) + v, zeta);
    };
    std::vector<double> ubr{lo_u};
    for (double b : {2.0, 6.0, 20.0, 60.0})
        if (b > lo_u) ubr.push_back(b);
    double s2 = ubr.size() > 1 ? quad::gl_break(gu, ubr, 16) : 0.0;
    return s1 + s2;
}

}  // namespace

double s_hat(double k_mag, const IRTestFunction& test, const ModelParams& p) {
    validate_test_function(test, p);
    if (k_mag >= test.kstar) return 0.0;
    if (!(k_mag > 0.0))
        throw std::domain_error("s_hat: k must be positive (diverges at k=0)");
    double v = -std::log(k_mag);
    return s_hat_kQ(v, test, test.zeta) / (k_mag * rho_hat(k_mag, p));
}

double s_norm2(const IRTestFunction& test, const ModelParams& p,
               double* tail_bound) {
    validate_test_function(test, p);
    const double v0 = -std::log(test.kstar);
    const double v_cut = 1e6;
    // T(v) = k s_hat(k) at k = e^{-v}; ||s||^2 = 4 pi ... in general d it is
    // the d=3 norm int |s|^2/|k| dk, which is where the profile lives.
    auto Tv = [&](double v) {
        double k = (v < 700.0) ? std::exp(-v) : 0.0;
        double rh = p.e * std::exp(-0.5 * p.sigma * p.sigma * k * k);
        return s_hat_kQ(v, test, test.zeta) / rh;
    };
    auto T2 = [&](double v) {
        double t = Tv(v);
        return t * t;
    };
    std::vector<double> br;
    for (double v = v0; v < v0 + 10.0; v += 0.5) br.push_back(v);
    double v = v0 + 10.0;
    while (v < v_cut) {
        br.push_back(v);
        v *= 1.35;
    }
    br.push_back(v_cut);
    double val = 4.0 * kPi * quad::gl_break(T2, br, 16);
    if (tail_bound) {
        // T(v) <= (1/rho_hat(0)) [ f(Tstar) e^{-v/2} + 2/(v (ln(v/2))^zeta) ]
        double fT = s_profile_L(std::log(test.Tstar), test.zeta);
        auto bound2 = [&](double u) {
            double b = (fT * std::exp(-std::min(u, 700.0) / 2.0) +
                        2.0 / (u * std::pow(std::log(u / 2.0), test.zeta))) /
                       p.e;
            return b * b;
        };
        std::vector<double> tb{v_cut};
        double vv = v_cut;
        for (int i = 0; i < 40; ++i) {
            vv *= 2.0;
            tb.push_back(vv);
        }
        *tail_bound = 4.0 * kPi * quad::gl_break(bound2, tb, 8);
    }
    return val;
}

}  // namespace nirsim

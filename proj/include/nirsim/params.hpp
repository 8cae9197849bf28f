/**
 * @file params.hpp
 * @brief Model parameters: dimension, coupling, charge distribution,
 *        confining potential and the infrared probe profile.
 */

#ifndef NIRSIM_PARAMS_HPP
#define NIRSIM_PARAMS_HPP

#include <cmath>
#include <stdexcept>
#include <string>

namespace nirsim {

struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Parameters of the particle-field model. Single source of truth for
/// every kernel: charge form factor, pair potential, covariances.
struct ModelParams {
    int d = 3;              ///< spatial dimension, 3..5
    double e = 0.3;         ///< coupling strength (total charge), >= 0
    double sigma = 1.0;     ///< Gaussian charge width, > 0
    double pot_C = 1.0;     ///< potential scale, V(q) = pot_C |q|^(2 alpha)
    double pot_alpha = 2.0; ///< potential exponent

    void validate() const {
        if (d < 3 || d > 5)
            throw ConfigError("d must be 3, 4 or 5 (got " + std::to_string(d) + ")");
        if (!(e >= 0.0)) throw ConfigError("coupling e must be >= 0");
        if (!(sigma > 0.0)) throw ConfigError("sigma must be > 0");
        if (!(pot_C > 0.0)) throw ConfigError("pot_C must be > 0");
        if (!(pot_alpha > 0.0)) throw ConfigError("pot_alpha must be > 0");
    }
};

/// Gaussian charge density rho(x) = e (2 pi sigma^2)^{-d/2} exp(-|x|^2/(2 sigma^2)).
/// Convention: rho_hat(k) = int rho(x) e^{-i k.x} dx, so rho_hat(0) = e.
struct ChargeDistribution {
    enum class Kind { Gaussian };
    Kind kind = Kind::Gaussian;
    double e = 1.0;
    double sigma = 1.0;

    double form_factor(double k_mag) const {
        return e * std::exp(-0.5 * sigma * sigma * k_mag * k_mag);
    }
};

inline double rho_hat(double k_mag, const ModelParams& p) {
    return p.e * std::exp(-0.5 * p.sigma * p.sigma * k_mag * k_mag);
}

/// Confining potential V(q) = C |q|^(2 alpha); the polynomial class.
struct PotentialSpec {
    double C = 1.0;
    double alpha = 2.0;

    double operator()(double r) const { return C * std::pow(r * r, alpha); }
    /// dV/dr
    double deriv(double r) const {
        return 2.0 * alpha * C * std::pow(r * r, alpha - 1.0) * r;
    }
    static PotentialSpec from(const ModelParams& p) { return {p.pot_C, p.pot_alpha}; }
};

/// Profile of the singular test functional: s_hat(k) is supported on
/// |k| < kstar and built from a 1/(ln t (lnln t)^zeta) time profile cut at Tstar.
struct IRTestFunction {
    double Tstar = 7.38905609893065;  ///< e^2, so ln Tstar = 2 > 1
    double zeta = 0.5;                ///< in (0,1)
    double kstar = 0.5;               ///< momentum support cutoff

    void validate() const {
        if (!(std::log(Tstar) > 1.0))
            throw ConfigError("IRTestFunction: ln(Tstar) must exceed 1");
        if (!(zeta > 0.0 && zeta < 1.0))
            throw ConfigError("IRTestFunction: zeta must lie in (0,1)");
        if (!(kstar > 0.0)) throw ConfigError("IRTestFunction: kstar must be > 0");
    }
};

/// Surface area of the unit sphere S^{d-1} in R^d.
inline double sphere_area(int d) {
    // 2 pi^{d/2} / Gamma(d/2)
    const double pi = 3.14159265358979323846;
    switch (d) {
        case 1: return 2.0;
        case 2: return 2.0 * pi;
        case 3: return 4.0 * pi;
        case 4: return 2.0 * pi * pi;
        case 5: return 8.0 * pi * pi / 3.0;
        default: return 2.0 * std::pow(pi, 0.5 * d) / std::tgamma(0.5 * d);
    }
}

}  // namespace nirsim

#endif

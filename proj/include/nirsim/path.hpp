/**
 * @file path.hpp
 * @brief Uniform bead discretization of particle paths on [-T,T].
 */

#ifndef NIRSIM_PATH_HPP
#define NIRSIM_PATH_HPP

#include <cmath>
#include <vector>

#include "nirsim/params.hpp"

namespace nirsim {

struct PathConfig {
    double T = 8.0;
    double dt = 0.05;
    int d = 3;

    int n_beads() const { return static_cast<int>(std::lround(2.0 * T / dt)) + 1; }
    int mid() const { return (n_beads() - 1) / 2; }  ///< index of t = 0
    double time(int i) const { return -T + i * dt; }
    /// trapezoid weight of bead i on [-T,T]
    double weight(int i) const { return (i == 0 || i == n_beads() - 1) ? 0.5 : 1.0; }

    void validate() const {
        if (!(dt > 0.0)) throw ConfigError("dt must be > 0");
        if (!(T > 0.0)) throw ConfigError("T must be > 0");
        double m = 2.0 * T / dt;
        if (std::abs(m - std::lround(m)) > 1e-9 * std::max(1.0, m))
            throw ConfigError("2T/dt must be an integer");
        if (n_beads() < 3) throw ConfigError("need at least 3 beads");
        if (d < 1 || d > 5) throw ConfigError("path dimension out of range");
    }
};

struct DiscretizedPath {
    int d = 3;
    int n = 0;
    std::vector<double> x;  ///< n*d, bead-major

    DiscretizedPath() = default;
    DiscretizedPath(int d_, int n_) : d(d_), n(n_), x(static_cast<size_t>(d_) * n_, 0.0) {}

    static DiscretizedPath zeros(const PathConfig& cfg) {
        return DiscretizedPath(cfg.d, cfg.n_beads());
    }

    double* bead(int i) { return &x[static_cast<size_t>(i) * d]; }
    const double* bead(int i) const { return &x[static_cast<size_t>(i) * d]; }

    double radius(int i) const {
        const double* b = bead(i);
        double s = 0.0;
        for (int k = 0; k < d; ++k) s += b[k] * b[k];
        return std::sqrt(s);
    }

    double pair_distance(int i, int j) const {
        const double *a = bead(i), *b = bead(j);
        double s = 0.0;
        for (int k = 0; k < d; ++k) {
            double diff = a[k] - b[k];
            s += diff * diff;
        }
        return std::sqrt(s);
    }

    bool finite() const {
        for (double v : x)
            if (!std::isfinite(v)) return false;
        return true;
    }
};

}  // namespace nirsim

#endif

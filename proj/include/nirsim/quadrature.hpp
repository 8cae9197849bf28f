/**
 * @file quadrature.hpp
 * @brief Gauss-Legendre panel quadrature with adaptive refinement and
 *        helpers for oscillatory (Bessel) integrands.
 */

#ifndef NIRSIM_QUADRATURE_HPP
#define NIRSIM_QUADRATURE_HPP

#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace nirsim {

struct QuadratureError : std::runtime_error {
    double residual;
    QuadratureError(const std::string& msg, double res)
        : std::runtime_error(msg + " (residual estimate " + std::to_string(res) + ")"),
          residual(res) {}
};

namespace quad {

/// Nodes and weights of the n-point Gauss-Legendre rule on [-1,1].
/// Computed once per n by Newton iteration on the Legendre recurrence.
const std::vector<double>& gl_nodes(int n);
const std::vector<double>& gl_weights(int n);

/// Fixed n-point Gauss-Legendre on [a,b].
double gl(const std::function<double(double)>& f, double a, double b, int n = 32);

/// Composite rule: npanel equal panels, n points each.
double gl_panels(const std::function<double(double)>& f, double a, double b,
                 int npanel, int n = 16);

/// Composite rule on explicit breakpoints.
double gl_break(const std::function<double(double)>& f,
                const std::vector<double>& breaks, int n = 16);

/// Adaptive panel bisection to absolute/relative tolerance. Throws
/// QuadratureError carrying the residual when the panel budget is exhausted.
double adaptive(const std::function<double(double)>& f, double a, double b,
                double abs_tol = 1e-12, double rel_tol = 1e-10,
                int max_panels = 4000);

/// Panels geometrically spaced between a and b (both > 0).
std::vector<double> log_breaks(double a, double b, int npanel);

}  // namespace quad
}  // namespace nirsim

#endif

#include "nirsim/quadrature.hpp"

#include <cmath>
#include <map>
#include <mutex>

namespace nirsim {
namespace quad {

namespace {

struct Rule {
    std::vector<double> x, w;
};

// Legendre P_n and derivative via the three-term recurrence.
Rule compute_rule(int n) {
    Rule r;
    r.x.resize(n);
    r.w.resize(n);
    const double pi = 3.14159265358979323846;
    for (int i = 0; i < n; ++i) {
        // Chebyshev-like initial guess, then Newton.
        double x = std::cos(pi * (i + 0.75) / (n + 0.5));
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = x;
            for (int j = 2; j <= n; ++j) {
                double p2 = ((2 * j - 1) * x * p1 - (j - 1) * p0) / j;
                p0 = p1;
                p1 = p2;
            }
            double dp = n * (x * p1 - p0) / (x * x - 1.0);
            double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        double p0 = 1.0, p1 = x;
        for (int j = 2; j <= n; ++j) {
            double p2 = ((2 * j - 1) * x * p1 - (j - 1) * p0) / j;
            p0 = p1;
            p1 = p2;
        }
        double dp = n * (x * p1 - p0) / (x * x - 1.0);
        r.x[n - 1 - i] = x;
        r.w[n - 1 - i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    return r;
}

const Rule& rule(int n) {
    static std::map<int, Rule> cache;
    static std::mutex mtx;
    std::lock_guard<std::mutex> lock(mtx);
    auto it = cache.find(n);
    if (it == cache.end()) it = cache.emplace(n, compute_rule(n)).first;
    return it->second;
}

}  // namespace

const std::vector<double>& gl_nodes(int n) { return rule(n).x; }
const std::vector<double>& gl_weights(int n) { return rule(n).w; }

double gl(const std::function<double(double)>& f, double a, double b, int n) {
    const Rule& r = rule(n);
    const double c = 0.5 * (b - a), m = 0.5 * (a + b);
    double s = 0.0;
    for (int i = 0; i < n; ++i) s += r.w[i] * f(m + c * r.x[i]);
    return c * s;
}

double gl_panels(const std::function<double(double)>& f, double a, double b,
                 int npanel, int n) {
    double s = 0.0;
    const double h = (b - a) / npanel;
    for (int p = 0; p < npanel; ++p) s += gl(f, a + p * h, a + (p + 1) * h, n);
    return s;
}

double gl_break(const std::function<double(double)>& f,
                const std::vector<double>& breaks, int n) {
    double s = 0.0;
    for (size_t i = 0; i + 1 < breaks.size(); ++i) s += gl(f, breaks[i], breaks[i + 1], n);
    return s;
}

double adaptive(const std::function<double(double)>& f, double a, double b,
                double abs_tol, double rel_tol, int max_panels) {
    struct Panel {
        double a, b, coarse;
    };
    std::vector<Panel> work{{a, b, gl(f, a, b, 8)}};
    double total = 0.0;
    double residual = 0.0;
    int used = 0;
    // First pass estimate of the scale for the relative test.
    double scale = std::abs(work[0].coarse);
    while (!work.empty()) {
        if (++used > max_panels)
            throw QuadratureError("adaptive quadrature did not converge", residual);
        Panel p = work.back();
        work.pop_back();
        double fine = gl(f, p.a, p.b, 16);
        double err = std::abs(fine - p.coarse);
        if (err < abs_tol || err < rel_tol * std::max(scale, std::abs(total)) ||
            (p.b - p.a) < 1e-14 * (b - a)) {
            total += fine;
            residual += err;
            scale = std::max(scale, std::abs(total));
        } else {
            double m = 0.5 * (p.a + p.b);
            work.push_back({p.a, m, gl(f, p.a, m, 8)});
            work.push_back({m, p.b, gl(f, m, p.b, 8)});
        }
    }
    return total;
}

std::vector<double> log_breaks(double a, double b, int npanel) {
    std::vector<double> br(npanel + 1);
    const double la = std::log(a), lb = std::log(b);
    for (int i = 0; i <= npanel; ++i)
        br[i] = std::exp(la + (lb - la) * i / npanel);
    br[0] = a;
    br[npanel] = b;
    return br;
}

}  // namespace quad
}  // namespace nirsim

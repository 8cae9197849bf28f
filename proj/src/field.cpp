#include "nirsim/field.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "nirsim/io.hpp"
#include "nirsim/quadrature.hpp"

namespace nirsim {

namespace {
constexpr double kPi = 3.14159265358979323846;

inline double cubic4(const double y[4], double s) {
    double c0 = -s * (s - 1.0) * (s - 2.0) / 6.0;
    double c1 = (s + 1.0) * (s - 1.0) * (s - 2.0) / 2.0;
    double c2 = -(s + 1.0) * s * (s - 2.0) / 2.0;
    double c3 = (s + 1.0) * s * (s - 1.0) / 6.0;
    return c0 * y[0] + c1 * y[1] + c2 * y[2] + c3 * y[3];
}

// trapezoid cell of bead i: [t_i - dt/2, t_i + dt/2] clipped to [-T,T]
inline void bead_cell(const PathConfig& cfg, int i, double& a, double& b) {
    double t = cfg.time(i);
    a = std::max(-cfg.T, t - 0.5 * cfg.dt);
    b = std::min(cfg.T, t + 0.5 * cfg.dt);
}
}  // namespace

double exp_cell_weight(double k, double t, double a, double b) {
    if (k <= 0.0) return b - a;
    if (b <= t) return (std::exp(-k * (t - b)) - std::exp(-k * (t - a))) / k;
    if (a >= t) return (std::exp(-k * (a - t)) - std::exp(-k * (b - t))) / k;
    return (2.0 - std::exp(-k * (t - a)) - std::exp(-k * (b - t))) / k;
}

std::complex<double> g_hat(const double* k, double t, const DiscretizedPath& path,
                           const PathConfig& cfg, const ModelParams& p) {
    double k2 = 0.0;
    for (int c = 0; c < path.d; ++c) k2 += k[c] * k[c];
    double kmag = std::sqrt(k2);
    if (!(kmag > 0.0))
        throw std::domain_error("g_hat: k = 0 is singular");
    std::complex<double> acc(0.0, 0.0);
    for (int i = 0; i < path.n; ++i) {
        double a, b;
        bead_cell(cfg, i, a, b);
        double w = exp_cell_weight(kmag, t, a, b);
        double phase = 0.0;
        const double* q = path.bead(i);
        for (int c = 0; c < path.d; ++c) phase += k[c] * q[c];
        acc += w * std::complex<double>(std::cos(phase), -std::sin(phase));
    }
    return -rho_hat(kmag, p) / (4.0 * kmag) * acc;
}

std::complex<double> g_hat0(const double* k, const DiscretizedPath& path,
                            const PathConfig& cfg, const ModelParams& p) {
    return g_hat(k, 0.0, path, cfg, p);
}

std::complex<double> m_hat(const double* k, const DiscretizedPath& path,
                           const PathConfig& cfg, const ModelParams& p) {
    double k2 = 0.0;
    for (int c = 0; c < path.d; ++c) k2 += k[c] * k[c];
    return 4.0 * std::sqrt(k2) * g_hat0(k, path, cfg, p);
}

double g_envelope(double k_mag, const ModelParams& p) {
    return rho_hat(k_mag, p) / (2.0 * k_mag * k_mag);
}

double conditional_mean_radial(const std::function<double(double)>& h_hat,
                               double t, const DiscretizedPath& path,
                               const PathConfig& cfg, const ModelParams& p,
                               double k_max) {
    auto f = [&](double k) {
        double s = 0.0;
        for (int i = 0; i < path.n; ++i) {
            double a, b;
            bead_cell(cfg, i, a, b);
            s += angular_average(p.d, k * path.radius(i)) *
                 exp_cell_weight(k, t, a, b);
        }
        return std::pow(k, p.d - 2) * h_hat(k) * rho_hat(k, p) * s;
    };
    return -0.25 * sphere_area(p.d) * quad::gl_panels(f, 0.0, k_max, 48, 16);
}

// ---------------------------------------------------------------------------
// ConditionalFunctional
// ---------------------------------------------------------------------------

namespace {

// K(r,a) = int_0^{kstar} e^{-k a} sin(k r)/r dk
//        = (1 - e^{-a kstar} (a sin(kstar r)/r + cos(kstar r))) / (a^2 + r^2)
double K_radial(double r, double a, double kstar) {
    double x = a * kstar;
    double br;
    if (r < 1e-8) {
        br = 1.0 - std::exp(-x) * (a * kstar + 1.0);
    } else {
        br = 1.0 - std::exp(-x) * (a * std::sin(kstar * r) / r + std::cos(kstar * r));
    }
    return br / (a * a + r * r);
}

double s_profile(double t, double zeta) {
    double L = std::log(t);
    return 1.0 / (L * std::pow(std::log(L), zeta));
}

}  // namespace

double ConditionalFunctional::phi_direct(double r, double c) const {
    // int_Tstar^inf f(t) K(r, c+t) dt via x = ln t, negligible beyond e^28.
    auto g = [&](double x) {
        double t = std::exp(x);
        return t * s_profile(t, test_.zeta) * K_radial(r, c + t, test_.kstar);
    };
    double lo = std::log(test_.Tstar);
    int np = 22;
    return quad::gl_panels(g, lo, 28.0, np, 16);
}

ConditionalFunctional::ConditionalFunctional(const IRTestFunction& test,
                                             const ModelParams& p,
                                             const PathConfig& cfg, double r_max)
    : test_(test), params_(p), cfg_(cfg) {
    if (p.d != 3)
        throw ConfigError("the singular test functional is built in d=3");
    ModelParams probe = p;
    if (probe.e == 0.0) probe.e = 1.0;
    coupling_ratio_ = p.e / probe.e;
    params_ = probe;
    validate_test_function(test, probe);
    sn2_ = nirsim::s_norm2(test, probe);
    r_max_ = std::max(r_max, 1.0);
    c_max_ = cfg.T + cfg.dt;
    nr_ = 72;
    nc_ = std::max(48, static_cast<int>(c_max_ / 0.25) + 8);
    du_ = std::log1p(r_max_ / r0_) / (nr_ - 1);
    dc_ = c_max_ / (nc_ - 1);
    phi_.resize(static_cast<size_t>(nr_) * nc_);
    for (int i = 0; i < nr_; ++i) {
        double r = r0_ * std::expm1(i * du_);
        for (int j = 0; j < nc_; ++j)
            phi_[static_cast<size_t>(i) * nc_ + j] = phi_direct(r, j * dc_);
    }
}

double ConditionalFunctional::phi_interp(double r, double c) const {
    r = std::min(std::abs(r), r_max_);
    c = std::min(std::abs(c), c_max_);
    double u = std::log1p(r / r0_) / du_;
    double v = c / dc_;
    int i = std::max(1, std::min(nr_ - 3, static_cast<int>(u)));
    int j = std::max(1, std::min(nc_ - 3, static_cast<int>(v)));
    double col[4];
    for (int a = 0; a < 4; ++a)
        col[a] = cubic4(&phi_[static_cast<size_t>(i - 1 + a) * nc_ + (j - 1)],
                        v - j);
    return cubic4(col, u - i);
}

double ConditionalFunctional::coupling_integral(const DiscretizedPath& path) const {
    // -pi sum_j int_{cell_j} Phi(r_j, |tau|) dtau, two-point Gauss per cell
    // (the |tau| kink splits the middle cell).
    const double g = 0.5773502691896258;  // 1/sqrt(3)
    double s = 0.0;
    for (int i = 0; i < path.n; ++i) {
        double a, b;
        bead_cell(cfg_, i, a, b);
        double r = path.radius(i);
        auto seg = [&](double lo, double hi) {
            double m = 0.5 * (lo + hi), h = 0.5 * (hi - lo);
            return h * (phi_interp(r, std::abs(m - h * g)) +
                        phi_interp(r, std::abs(m + h * g)));
        };
        if (a < 0.0 && b > 0.0)
            s += seg(a, 0.0) + seg(0.0, b);
        else
            s += seg(a, b);
    }
    return -kPi * coupling_ratio_ * s;
}

double ConditionalFunctional::log_value(const DiscretizedPath& path) const {
    return coupling_integral(path) + sn2_ / 8.0;
}

double ConditionalFunctional::value(const DiscretizedPath& path) const {
    return std::exp(log_value(path));
}

double ConditionalFunctional::capped_value(const DiscretizedPath& path,
                                           double cap) const {
    return std::min(value(path), cap);
}

// ---------------------------------------------------------------------------
// Field sampling
// ---------------------------------------------------------------------------

std::vector<double> field_covariance_matrix(const FieldSampleSpec& spec,
                                            const ModelParams& p) {
    const int J = static_cast<int>(spec.h_hats.size());
    if (J == 0 || spec.times.size() != spec.h_hats.size())
        throw ConfigError("field spec: need matching h_hats and times");
    std::vector<double> C(static_cast<size_t>(J) * J);
    for (int i = 0; i < J; ++i)
        for (int j = i; j < J; ++j) {
            double v = field_covariance(spec.h_hats[i], spec.h_hats[j],
                                        spec.times[i] - spec.times[j], p,
                                        spec.k_max);
            C[i * J + j] = C[j * J + i] = v;
        }
    return C;
}

std::vector<double> field_mean_vector(const FieldSampleSpec& spec,
                                      const DiscretizedPath* path,
                                      const PathConfig& cfg,
                                      const ModelParams& p) {
    const int J = static_cast<int>(spec.h_hats.size());
    std::vector<double> mu(J, 0.0);
    if (!path) return mu;
    for (int j = 0; j < J; ++j)
        mu[j] = conditional_mean_radial(spec.h_hats[j], spec.times[j], *path, cfg,
                                        p, spec.k_max);
    return mu;
}

std::vector<double> sym_eigenvalues(std::vector<double> a, int n) {
    // cyclic Jacobi; fine for the small Gram matrices used here
    std::vector<double> d(n);
    for (int sweep = 0; sweep < 60; ++sweep) {
        double off = 0.0;
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j) off += a[i * n + j] * a[i * n + j];
        if (off < 1e-26) break;
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j) {
                double apq = a[i * n + j];
                if (std::abs(apq) < 1e-300) continue;
                double app = a[i * n + i], aqq = a[j * n + j];
                double theta = 0.5 * (aqq - app) / apq;
                double t = (theta >= 0 ? 1.0 : -1.0) /
                           (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                double c = 1.0 / std::sqrt(t * t + 1.0), s = t * c;
                for (int k = 0; k < n; ++k) {
                    double aik = a[i * n + k], ajk = a[j * n + k];
                    a[i * n + k] = c * aik - s * ajk;
                    a[j * n + k] = s * aik + c * ajk;
                }
                for (int k = 0; k < n; ++k) {
                    double aki = a[k * n + i], akj = a[k * n + j];
                    a[k * n + i] = c * aki - s * akj;
                    a[k * n + j] = s * aki + c * akj;
                }
            }
    }
    for (int i = 0; i < n; ++i) d[i] = a[i * n + i];
    std::sort(d.begin(), d.end());
    return d;
}

namespace {

// lower Cholesky with additive jitter; throws with eigenvalue report
std::vector<double> cholesky_jitter(std::vector<double> C, int n) {
    double scale = 0.0;
    for (int i = 0; i < n; ++i) scale = std::max(scale, std::abs(C[i * n + i]));
    double jitter = 1e-12 * std::max(scale, 1.0);
    for (int i = 0; i < n; ++i) C[i * n + i] += jitter;
    std::vector<double> L(static_cast<size_t>(n) * n, 0.0);
    std::vector<double> work = C;
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j <= i; ++j) {
            double s = C[i * n + j];
            for (int k = 0; k < j; ++k) s -= L[i * n + k] * L[j * n + k];
            if (i == j) {
                if (s <= 0.0) {
                    auto ev = sym_eigenvalues(work, n);
                    std::string msg = "field covariance not PSD; eigenvalues:";
                    for (double e : ev) msg += " " + io::fmt_full(e);
                    throw std::runtime_error(msg);
                }
                L[i * n + i] = std::sqrt(s);
            } else {
                L[i * n + j] = s / L[j * n + j];
            }
        }
    }
    return L;
}

}  // namespace

std::vector<double> sample_field_at_times(const FieldSampleSpec& spec,
                                          const DiscretizedPath* path,
                                          const PathConfig& cfg,
                                          const ModelParams& p, int n_draws,
                                          CounterRng& rng) {
    const int J = static_cast<int>(spec.h_hats.size());
    std::vector<double> C = field_covariance_matrix(spec, p);
    std::vector<double> mu = field_mean_vector(spec, path, cfg, p);
    std::vector<double> L = cholesky_jitter(C, J);
    std::vector<double> out(static_cast<size_t>(n_draws) * J);
    std::vector<double> z(J);
    for (int s = 0; s < n_draws; ++s) {
        for (int j = 0; j < J; ++j) z[j] = rng.normal();
        for (int i = 0; i < J; ++i) {
            double v = mu[i];
            for (int k = 0; k <= i; ++k) v += L[i * J + k] * z[k];
            out[static_cast<size_t>(s) * J + i] = v;
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Mode grid / density against the free law
// ---------------------------------------------------------------------------

ModeGrid ModeGrid::build(double k_max, int n_k, int n_mu, int n_phi) {
    ModeGrid g;
    const auto& xk = quad::gl_nodes(n_k);
    const auto& wk = quad::gl_weights(n_k);
    const auto& xm = quad::gl_nodes(n_mu);
    const auto& wm = quad::gl_weights(n_mu);
    for (int i = 0; i < n_k; ++i) {
        double k = 0.5 * k_max * (xk[i] + 1.0);
        double wkr = 0.5 * k_max * wk[i] * k * k;
        for (int j = 0; j < n_mu; ++j) {
            double mu = xm[j];
            double smu = std::sqrt(std::max(0.0, 1.0 - mu * mu));
            for (int l = 0; l < n_phi; ++l) {
                double phi = 2.0 * kPi * (l + 0.5) / n_phi;
                g.kvec.push_back(k * smu * std::cos(phi));
                g.kvec.push_back(k * smu * std::sin(phi));
                g.kvec.push_back(k * mu);
                g.kmag.push_back(k);
                g.weight.push_back(wkr * wm[j] * 2.0 * kPi / n_phi);
            }
        }
    }
    return g;
}

FieldModeSample FieldModeSample::draw(const ModeGrid& g, CounterRng& rng) {
    FieldModeSample s;
    const int M = g.size();
    s.a.resize(M);
    s.b.resize(M);
    for (int m = 0; m < M; ++m) s.a[m] = rng.normal();
    for (int m = 0; m < M; ++m) s.b[m] = rng.normal();
    return s;
}

namespace {

// m_hat at every grid mode for the given path.
void m_hat_on_grid(const ModeGrid& g, const DiscretizedPath& path,
                   const PathConfig& cfg, const ModelParams& p,
                   std::vector<std::complex<double>>& out) {
    const int M = g.size();
    out.assign(M, {0.0, 0.0});
    for (int m = 0; m < M; ++m) {
        const double* k = &g.kvec[3 * m];
        double kmag = g.kmag[m];
        std::complex<double> acc(0.0, 0.0);
        for (int i = 0; i < path.n; ++i) {
            double a, b;
            bead_cell(cfg, i, a, b);
            double w = exp_cell_weight(kmag, 0.0, a, b);
            const double* q = path.bead(i);
            double phase = k[0] * q[0] + k[1] * q[1] + k[2] * q[2];
            acc += w * std::complex<double>(std::cos(phase), -std::sin(phase));
        }
        out[m] = -rho_hat(kmag, p) * acc;
    }
}

}  // namespace

FreeDensity::FreeDensity(const ModeGrid& g, const DiscretizedPath& path,
                         const PathConfig& cfg, const ModelParams& p) {
    zero_coupling_ = (p.e == 0.0);
    std::vector<std::complex<double>> mh;
    m_hat_on_grid(g, path, cfg, p, mh);
    const int M = g.size();
    ca_.resize(M);
    cb_.resize(M);
    for (int m = 0; m < M; ++m) {
        double amp = std::sqrt(g.weight[m] / (4.0 * g.kmag[m]));
        ca_[m] = amp * mh[m].real();
        cb_[m] = -amp * mh[m].imag();
        var_ += g.weight[m] / (4.0 * g.kmag[m]) * std::norm(mh[m]);
    }
}

double FreeDensity::linear_term(const FieldModeSample& xi) const {
    if (xi.a.size() != ca_.size())
        throw ConfigError("mode grid mismatch between sample and grid");
    double s = 0.0;
    for (size_t m = 0; m < ca_.size(); ++m)
        s += ca_[m] * xi.a[m] + cb_[m] * xi.b[m];
    return s;
}

double mode_linear_term(const FieldModeSample& xi, const ModeGrid& g,
                        const DiscretizedPath& path, const PathConfig& cfg,
                        const ModelParams& p) {
    return FreeDensity(g, path, cfg, p).linear_term(xi);
}

double mode_linear_variance(const ModeGrid& g, const DiscretizedPath& path,
                            const PathConfig& cfg, const ModelParams& p) {
    return FreeDensity(g, path, cfg, p).linear_variance();
}

double density_log_vs_free(const FieldModeSample& xi, const ModeGrid& g,
                           const DiscretizedPath& path, const PathConfig& cfg,
                           const ModelParams& p) {
    return FreeDensity(g, path, cfg, p).log_density(xi);
}

double g0_sq_k_integral(const DiscretizedPath& path, const PairKernelView& w,
                        const PathConfig& cfg) {
    return -0.5 * folded_time_kernel_sum(path, w, cfg);
}

}  // namespace nirsim

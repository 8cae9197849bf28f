#include "nirsim/actions.hpp"

#include <cmath>

namespace nirsim {

namespace {

inline double cubic4(const double y[4], double s) {
    double c0 = -s * (s - 1.0) * (s - 2.0) / 6.0;
    double c1 = (s + 1.0) * (s - 1.0) * (s - 2.0) / 2.0;
    double c2 = -(s + 1.0) * s * (s - 2.0) / 2.0;
    double c3 = (s + 1.0) * s * (s - 1.0) / 6.0;
    return c0 * y[0] + c1 * y[1] + c2 * y[2] + c3 * y[3];
}

// cross-pair weight: quadrature weight of (i,j) in  2 * int_{-T}^0 int_0^T.
// Zero unless the pair straddles the midpoint.
inline double cross_weight(int i, int j, int mid, int last) {
    int lo = i < j ? i : j, hi = i < j ? j : i;
    if (lo > mid || hi < mid) return 0.0;
    double wl = (lo == 0 || lo == mid) ? 0.5 : 1.0;
    double wr = (hi == mid || hi == last) ? 0.5 : 1.0;
    return 2.0 * wl * wr;
}

}  // namespace

PairKernelView::PairKernelView(const KernelTable* tab, double dt, int n_lags,
                               double r_cache_max, int nr_cache)
    : tab_(tab), dt_(dt), n_lags_(n_lags), nr_(nr_cache) {
    if (!tab_) return;
    r_cache_max_ = (r_cache_max > 0) ? std::min(r_cache_max, tab->r_max())
                                     : tab->r_max();
    r0_ = 0.5;
    du_ = std::log1p(r_cache_max_ / r0_) / (nr_ - 1);
    rows_.resize(static_cast<size_t>(n_lags_) * nr_);
    for (int m = 0; m < n_lags_; ++m) {
        double t = m * dt_;
        for (int i = 0; i < nr_; ++i) {
            double r = r0_ * std::expm1(i * du_);
            rows_[static_cast<size_t>(m) * nr_ + i] = (*tab_)(r, t);
        }
    }
    w00_ = (*tab_)(0.0, 0.0);
}

double PairKernelView::operator()(int lag, double r) const {
    if (!tab_) return 0.0;
    r = std::abs(r);
    if (lag >= n_lags_ || r > r_cache_max_) return (*tab_)(r, lag * dt_);
    double u = std::log1p(r / r0_) / du_;
    int i = std::max(1, std::min(nr_ - 3, static_cast<int>(u)));
    return cubic4(&rows_[static_cast<size_t>(lag) * nr_ + (i - 1)], u - i);
}

double reference_log_weight(const DiscretizedPath& path,
                            const RadialGroundState& gs, const PathConfig& cfg) {
    const int n = path.n;
    double lw = gs.ln_psi(path.radius(0)) + gs.ln_psi(path.radius(n - 1));
    double vsum = 0.0;
    for (int i = 0; i < n; ++i) {
        double r = path.radius(i);
        if (r > gs.r_domain)
            throw std::domain_error("reference_log_weight: bead " +
                                    std::to_string(i) + " outside the domain");
        vsum += cfg.weight(i) * (gs.pot(r) - gs.E_p);
    }
    return lw - vsum * cfg.dt;
}

double interaction_action(const DiscretizedPath& path, const PairKernelView& w,
                          const PathConfig& cfg) {
    if (w.empty()) return 0.0;
    const int n = path.n;
    const double dt2 = cfg.dt * cfg.dt;
    double diag = 0.0;
    for (int i = 0; i < n; ++i) diag += cfg.weight(i) * cfg.weight(i);
    double s = diag * w.w00();
    for (int i = 0; i < n; ++i) {
        double wi = cfg.weight(i);
        for (int j = i + 1; j < n; ++j)
            s += 2.0 * wi * cfg.weight(j) * w(j - i, path.pair_distance(i, j));
    }
    return s * dt2;
}

double cross_action(const DiscretizedPath& path, const PairKernelView& w,
                    const PathConfig& cfg) {
    if (w.empty()) return 0.0;
    const int n = path.n, mid = cfg.mid();
    const double dt2 = cfg.dt * cfg.dt;
    double s = 0.5 * w.w00();  // (mid,mid) corner: 2 * (1/2)(1/2) W(0,0)
    for (int i = 0; i <= mid; ++i) {
        for (int j = std::max(mid, i + 1); j < n; ++j) {
            double cw = cross_weight(i, j, mid, n - 1);
            if (cw != 0.0) s += cw * w(j - i, path.pair_distance(i, j));
        }
    }
    return s * dt2;
}

double folded_time_kernel_sum(const DiscretizedPath& path,
                              const PairKernelView& w, const PathConfig& cfg) {
    if (w.empty()) return 0.0;
    const int n = path.n, mid = cfg.mid();
    const double dt2 = cfg.dt * cfg.dt;
    double s = 0.0;
    for (int i = 0; i < n; ++i) {
        double wi = cfg.weight(i);
        int li = std::abs(i - mid);
        s += wi * wi * w(2 * li, 0.0);
        for (int j = i + 1; j < n; ++j)
            s += 2.0 * wi * cfg.weight(j) *
                 w(li + std::abs(j - mid), path.pair_distance(i, j));
    }
    return s * dt2;
}

ActionDelta action_delta_single(const DiscretizedPath& path,
                                const PairKernelView& w, const PathConfig& cfg,
                                int m, const double* xnew) {
    ActionDelta d;
    if (w.empty()) return d;
    const int n = path.n, mid = cfg.mid(), dd = path.d;
    const double wm = cfg.weight(m);
    const double* xm = path.bead(m);
    for (int j = 0; j < n; ++j) {
        if (j == m) continue;
        const double* xj = path.bead(j);
        double rn = 0.0, ro = 0.0;
        for (int k = 0; k < dd; ++k) {
            double a = xnew[k] - xj[k], b = xm[k] - xj[k];
            rn += a * a;
            ro += b * b;
        }
        int lag = std::abs(j - m);
        double dw = w(lag, std::sqrt(rn)) - w(lag, std::sqrt(ro));
        d.dfull += 2.0 * wm * cfg.weight(j) * dw;
        double cw = cross_weight(m, j, mid, n - 1);
        if (cw != 0.0) d.dcross += cw * dw;
    }
    double dt2 = cfg.dt * cfg.dt;
    d.dfull *= dt2;
    d.dcross *= dt2;
    return d;
}

ActionDelta action_delta_block(const DiscretizedPath& path,
                               const PairKernelView& w, const PathConfig& cfg,
                               int a, int b, const std::vector<double>& xnew) {
    ActionDelta d;
    if (w.empty()) return d;
    const int n = path.n, mid = cfg.mid(), dd = path.d;
    auto xnew_at = [&](int m) { return &xnew[static_cast<size_t>(m - a - 1) * dd]; };
    // moved-vs-fixed pairs
    for (int m = a + 1; m < b; ++m) {
        const double* xm_new = xnew_at(m);
        const double* xm_old = path.bead(m);
        const double wm = cfg.weight(m);
        for (int j = 0; j < n; ++j) {
            if (j > a && j < b) continue;
            const double* xj = path.bead(j);
            double rn = 0.0, ro = 0.0;
            for (int k = 0; k < dd; ++k) {
                double p = xm_new[k] - xj[k], q = xm_old[k] - xj[k];
                rn += p * p;
                ro += q * q;
            }
            int lag = std::abs(j - m);
            double dw = w(lag, std::sqrt(rn)) - w(lag, std::sqrt(ro));
            d.dfull += 2.0 * wm * cfg.weight(j) * dw;
            double cw = cross_weight(m, j, mid, n - 1);
            if (cw != 0.0) d.dcross += cw * dw;
        }
    }
    // moved-vs-moved pairs
    for (int m = a + 1; m < b; ++m) {
        for (int j = m + 1; j < b; ++j) {
            const double *pm = xnew_at(m), *pj = xnew_at(j);
            const double *qm = path.bead(m), *qj = path.bead(j);
            double rn = 0.0, ro = 0.0;
            for (int k = 0; k < dd; ++k) {
                double p = pm[k] - pj[k], q = qm[k] - qj[k];
                rn += p * p;
                ro += q * q;
            }
            int lag = j - m;
            double dw = w(lag, std::sqrt(rn)) - w(lag, std::sqrt(ro));
            d.dfull += 2.0 * cfg.weight(m) * cfg.weight(j) * dw;
            double cw = cross_weight(m, j, mid, n - 1);
            if (cw != 0.0) d.dcross += cw * dw;
        }
    }
    double dt2 = cfg.dt * cfg.dt;
    d.dfull *= dt2;
    d.dcross *= dt2;
    return d;
}

}  // namespace nirsim

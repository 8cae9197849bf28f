#include <cmath>
#include <fstream>

#include "nirsim/io.hpp"
#include "nirsim/kernels.hpp"

namespace nirsim {

namespace {

// Cubic Lagrange interpolation through 4 equispaced samples, evaluated at
// fractional offset s in [-1,2] relative to the second sample.
inline double cubic4(const double y[4], double s) {
    double c0 = -s * (s - 1.0) * (s - 2.0) / 6.0;
    double c1 = (s + 1.0) * (s - 1.0) * (s - 2.0) / 2.0;
    double c2 = -(s + 1.0) * s * (s - 2.0) / 2.0;
    double c3 = (s + 1.0) * s * (s - 1.0) / 6.0;
    return c0 * y[0] + c1 * y[1] + c2 * y[2] + c3 * y[3];
}

}  // namespace

double KernelTable::knot_r(int i) const { return r0_ * std::expm1(i * du_); }
double KernelTable::knot_t(int j) const { return t0_ * std::expm1(j * dv_); }

double KernelTable::interpolate(double r, double t) const {
    r = std::abs(r);
    t = std::abs(t);
    double u = std::log1p(r / r0_) / du_;
    double v = std::log1p(t / t0_) / dv_;
    int i = std::max(1, std::min(nr_ - 3, static_cast<int>(u)));
    int j = std::max(1, std::min(nt_ - 3, static_cast<int>(v)));
    double su = u - i, sv = v - j;
    double col[4];
    for (int a = 0; a < 4; ++a) {
        const double* row = &w_[(i - 1 + a) * nt_ + (j - 1)];
        col[a] = cubic4(row, sv);
    }
    return cubic4(col, su);
}

double KernelTable::operator()(double r, double t) const {
    if (!covers(r, t)) {
        fallbacks_->fetch_add(1, std::memory_order_relaxed);
        return pair_kernel_momentum(r, t, params_);
    }
    return interpolate(r, t);
}

KernelTable build_kernel_table(const ModelParams& p, double r_max, double t_max,
                               int nr, int nt, double tol_table) {
    if (!(r_max > 0) || !(t_max > 0))
        throw ConfigError("build_kernel_table: r_max and t_max must be > 0");
    if (nr < 8 || nt < 8) throw ConfigError("build_kernel_table: grid too small");
    KernelTable tab;
    tab.params_ = p;
    tab.r0_ = 0.5 * p.sigma;
    tab.t0_ = 0.5;
    tab.r_max_ = r_max;
    tab.t_max_ = t_max;
    tab.nr_ = nr;
    tab.nt_ = nt;
    tab.du_ = std::log1p(r_max / tab.r0_) / (nr - 1);
    tab.dv_ = std::log1p(t_max / tab.t0_) / (nt - 1);
    tab.w_.resize(static_cast<size_t>(nr) * nt);
    for (int i = 0; i < nr; ++i) {
        double r = (i == nr - 1) ? r_max : tab.knot_r(i);
        for (int j = 0; j < nt; ++j) {
            double t = (j == nt - 1) ? t_max : tab.knot_t(j);
            tab.w_[static_cast<size_t>(i) * nt + j] = pair_kernel_momentum(r, t, p);
        }
    }
    // Verify at cell midpoints on a deterministic subsample. Near zeros of W
    // the error is measured absolutely against 1e-12.
    double worst = 0.0;
    for (int i = 1; i < nr - 2; i += 7) {
        for (int j = 1; j < nt - 2; j += 7) {
            double r = tab.r0_ * std::expm1((i + 0.5) * tab.du_);
            double t = tab.t0_ * std::expm1((j + 0.5) * tab.dv_);
            double direct = pair_kernel_momentum(r, t, p);
            double err = std::abs(tab.interpolate(r, t) - direct);
            double rel = (std::abs(direct) > 1e-12 / tol_table)
                             ? err / std::abs(direct)
                             : err * tol_table / 1e-12;
            worst = std::max(worst, rel);
        }
    }
    if (p.e != 0.0 && worst > tol_table)
        throw ConfigError("kernel table resolution too coarse: measured relative "
                          "interpolation error " + io::fmt_full(worst) +
                          " exceeds tolerance " + io::fmt_full(tol_table));
    tab.measured_error_ = worst;
    return tab;
}

void KernelTable::save(const std::string& path) const {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("cannot open " + path + " for writing");
    io::write_magic(os, "NIRK1");
    io::write_u32(os, 1);
    io::write_i32(os, params_.d);
    io::write_f64(os, params_.e);
    io::write_f64(os, params_.sigma);
    io::write_f64(os, params_.pot_C);
    io::write_f64(os, params_.pot_alpha);
    io::write_f64(os, r0_);
    io::write_f64(os, t0_);
    io::write_f64(os, r_max_);
    io::write_f64(os, t_max_);
    io::write_i32(os, nr_);
    io::write_i32(os, nt_);
    io::write_f64(os, measured_error_);
    io::write_f64v(os, w_);
}

KernelTable KernelTable::load(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open " + path);
    io::expect_magic(is, "NIRK1", path);
    std::uint32_t ver = io::read_u32(is);
    if (ver != 1) throw IoError("unsupported NIRK version in " + path);
    KernelTable tab;
    tab.params_.d = io::read_i32(is);
    tab.params_.e = io::read_f64(is);
    tab.params_.sigma = io::read_f64(is);
    tab.params_.pot_C = io::read_f64(is);
    tab.params_.pot_alpha = io::read_f64(is);
    tab.r0_ = io::read_f64(is);
    tab.t0_ = io::read_f64(is);
    tab.r_max_ = io::read_f64(is);
    tab.t_max_ = io::read_f64(is);
    tab.nr_ = io::read_i32(is);
    tab.nt_ = io::read_i32(is);
    tab.measured_error_ = io::read_f64(is);
    tab.du_ = std::log1p(tab.r_max_ / tab.r0_) / (tab.nr_ - 1);
    tab.dv_ = std::log1p(tab.t_max_ / tab.t0_) / (tab.nt_ - 1);
    tab.w_ = io::read_f64v(is, static_cast<size_t>(tab.nr_) * tab.nt_);
    return tab;
}

}  // namespace nirsim

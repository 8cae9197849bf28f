#include "nirsim/estimate.hpp"

#include <istream>
#include <ostream>
#include <stdexcept>

#include "nirsim/io.hpp"

namespace nirsim {

namespace {

// stderr and ESS from a set of batch means around a given grand mean.
void batch_stats(const std::vector<double>& bm, double grand_mean, double var_x,
                 long n, long batch_len, Estimate& est) {
    const size_t nb = bm.size();
    if (nb < 2 || var_x <= 0.0 || n < 2) {
        est.stderr_ = 0.0;
        est.ess = static_cast<double>(n);
        return;
    }
    double vb = 0.0;
    for (double b : bm) vb += (b - grand_mean) * (b - grand_mean);
    vb /= (nb - 1.0);
    est.stderr_ = std::sqrt(vb / nb);
    // integrated autocorrelation time ~ batch_len * var(batch)/var(x)
    double tau = batch_len * vb / var_x;
    if (tau < 1.0) tau = 1.0;
    est.ess = std::min(static_cast<double>(n), n / tau);
}

}  // namespace

Estimate Accumulator::estimate() const {
    Estimate est;
    est.n = n_;
    est.mean = mean();
    batch_stats(batch_means_, est.mean, variance(), n_, batch_len_, est);
    return est;
}

Estimate combine(const std::vector<const Accumulator*>& acc) {
    Estimate est;
    if (acc.empty()) return est;
    double sum = 0.0, sum2 = 0.0;
    long n = 0;
    std::vector<double> bm;
    long batch_len = acc.front()->batch_len();
    for (const Accumulator* a : acc) {
        n += a->n_;
        sum += a->sum_;
        sum2 += a->sum2_;
        bm.insert(bm.end(), a->batch_means_.begin(), a->batch_means_.end());
    }
    est.n = n;
    est.mean = n ? sum / n : 0.0;
    double var_x = 0.0;
    if (n >= 2) {
        double v = sum2 / n - est.mean * est.mean;
        var_x = v > 0.0 ? v * n / (n - 1.0) : 0.0;
    }
    batch_stats(bm, est.mean, var_x, n, batch_len, est);
    return est;
}

void Accumulator::save(std::ostream& os) const {
    io::write_u64(os, static_cast<std::uint64_t>(batch_len_));
    io::write_u64(os, static_cast<std::uint64_t>(n_));
    io::write_f64(os, sum_);
    io::write_f64(os, sum2_);
    io::write_f64(os, part_sum_);
    io::write_u64(os, static_cast<std::uint64_t>(part_n_));
    io::write_u64(os, batch_means_.size());
    io::write_f64v(os, batch_means_);
}

Accumulator Accumulator::load(std::istream& is) {
    Accumulator a(static_cast<long>(io::read_u64(is)));
    a.n_ = static_cast<long>(io::read_u64(is));
    a.sum_ = io::read_f64(is);
    a.sum2_ = io::read_f64(is);
    a.part_sum_ = io::read_f64(is);
    a.part_n_ = static_cast<long>(io::read_u64(is));
    size_t nb = io::read_u64(is);
    a.batch_means_ = io::read_f64v(is, nb);
    return a;
}

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2)
        throw std::invalid_argument("fit_line: need >= 2 points");
    const size_t n = x.size();
    double mx = 0.0, my = 0.0;
    for (size_t i = 0; i < n; ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (size_t i = 0; i < n; ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
        syy += (y[i] - my) * (y[i] - my);
    }
    if (sxx <= 0.0) throw std::invalid_argument("fit_line: degenerate abscissae");
    LineFit f;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    double sse = 0.0;
    for (size_t i = 0; i < n; ++i) {
        double r = y[i] - (f.intercept + f.slope * x[i]);
        sse += r * r;
    }
    f.r2 = (syy > 0.0) ? 1.0 - sse / syy : 1.0;
    f.slope_stderr = (n > 2) ? std::sqrt(sse / (n - 2.0) / sxx) : 0.0;
    return f;
}

}  // namespace nirsim

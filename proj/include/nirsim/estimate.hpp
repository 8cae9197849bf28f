/**
 * @file estimate.hpp
 * @brief Monte Carlo estimates: streaming accumulator with batch-means
 *        standard error and an autocorrelation-corrected effective sample
 *        size. Accumulators are checkpointable and merge deterministically.
 */

#ifndef NIRSIM_ESTIMATE_HPP
#define NIRSIM_ESTIMATE_HPP

#include <cmath>
#include <cstdint>
#include <iosfwd>
#include <vector>

namespace nirsim {

struct Estimate {
    double mean = 0.0;
    double stderr_ = 0.0;  ///< batch-means standard error of the mean
    double ess = 0.0;      ///< effective sample size, <= n
    long n = 0;

    bool consistent_within(const Estimate& other, double n_sigma) const {
        double se = std::sqrt(stderr_ * stderr_ + other.stderr_ * other.stderr_);
        return std::abs(mean - other.mean) <= n_sigma * se;
    }
};

class Accumulator {
  public:
    explicit Accumulator(long batch_len = 32) : batch_len_(batch_len < 1 ? 1 : batch_len) {}

    void add(double x) {
        ++n_;
        sum_ += x;
        sum2_ += x * x;
        part_sum_ += x;
        if (++part_n_ == batch_len_) {
            batch_means_.push_back(part_sum_ / batch_len_);
            part_sum_ = 0.0;
            part_n_ = 0;
        }
    }

    long n() const { return n_; }
    double mean() const { return n_ ? sum_ / n_ : 0.0; }
    double variance() const {
        if (n_ < 2) return 0.0;
        double m = mean();
        double v = sum2_ / n_ - m * m;
        return v > 0.0 ? v * n_ / (n_ - 1.0) : 0.0;
    }
    long batch_len() const { return batch_len_; }
    const std::vector<double>& batch_means() const { return batch_means_; }

    Estimate estimate() const;

    void save(std::ostream& os) const;
    static Accumulator load(std::istream& is);

  private:
    long batch_len_;
    long n_ = 0;
    double sum_ = 0.0, sum2_ = 0.0;
    double part_sum_ = 0.0;
    long part_n_ = 0;
    std::vector<double> batch_means_;

    friend Estimate combine(const std::vector<const Accumulator*>& acc);
};

/// Pools chains: mean over all samples, stderr from the pooled batch means
/// around the pooled mean (cross-chain spread is included on purpose).
Estimate combine(const std::vector<const Accumulator*>& acc);

/// Jackknife standard error of a functional of batch aggregates: given per-
/// batch vectors y_b and a functional theta(sum over retained batches),
/// returns theta(all) and the leave-one-out stderr.
struct JackknifeResult {
    double value = 0.0;
    double stderr_ = 0.0;
};

/// Ordinary least squares of y against x with intercept.
struct LineFit {
    double slope = 0.0, intercept = 0.0;
    double slope_stderr = 0.0;
    double r2 = 0.0;
};
LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace nirsim

#endif

/**
 * @file rng.hpp
 * @brief Counter-based random stream. Output i of stream (seed, chain) is a
 *        pure function of (seed, chain, i), so streams can be split across
 *        workers, checkpointed by storing the counter, and replayed exactly
 *        on any platform.
 */

#ifndef NIRSIM_RNG_HPP
#define NIRSIM_RNG_HPP

#include <cmath>
#include <cstdint>

namespace nirsim {

namespace detail {
// splitmix64 finalizer (Steele, Lea, Flood 2014).
inline std::uint64_t mix64(std::uint64_t z) {
    z += 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}
}  // namespace detail

class CounterRng {
  public:
    CounterRng() : key_(0), ctr_(0) {}
    CounterRng(std::uint64_t seed, std::uint64_t stream_id)
        : key_(detail::mix64(detail::mix64(seed) ^
                             (0x6A09E667F3BCC909ULL + detail::mix64(~stream_id)))),
          ctr_(0) {}

    std::uint64_t next_u64() { return detail::mix64(key_ + ctr_++ * 0x9E3779B97F4A7C15ULL); }

    /// Uniform on the open interval (0,1); never returns 0 or 1.
    double uniform() {
        return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
    }

    double uniform(double a, double b) { return a + (b - a) * uniform(); }

    /// Uniform integer in [0, n).
    std::uint64_t uniform_index(std::uint64_t n) {
        // 64-bit multiply-shift; modulo bias is < 2^-64 * n, irrelevant here.
        return static_cast<std::uint64_t>(
            (static_cast<unsigned __int128>(next_u64()) * n) >> 64);
    }

    /// Standard normal via Box-Muller; the second deviate is cached.
    double normal() {
        if (has_cached_) {
            has_cached_ = false;
            return cached_;
        }
        double u1 = uniform();
        double u2 = uniform();
        double r = std::sqrt(-2.0 * std::log(u1));
        double a = 6.283185307179586476925286766559 * u2;
        cached_ = r * std::sin(a);
        has_cached_ = true;
        return r * std::cos(a);
    }

    void fill_normal(double* out, int n) {
        for (int i = 0; i < n; ++i) out[i] = normal();
    }

    /// Uniform direction on S^{d-1}.
    void unit_vector(double* out, int d) {
        double nrm = 0.0;
        do {
            nrm = 0.0;
            for (int i = 0; i < d; ++i) {
                out[i] = normal();
                nrm += out[i] * out[i];
            }
        } while (nrm < 1e-30);
        nrm = 1.0 / std::sqrt(nrm);
        for (int i = 0; i < d; ++i) out[i] *= nrm;
    }

    // Checkpointable state.
    std::uint64_t key() const { return key_; }
    std::uint64_t counter() const { return ctr_; }
    bool has_cached() const { return has_cached_; }
    double cached() const { return cached_; }
    void restore(std::uint64_t key, std::uint64_t ctr, bool has_cached, double cached) {
        key_ = key;
        ctr_ = ctr;
        has_cached_ = has_cached;
        cached_ = cached;
    }

  private:
    std::uint64_t key_;
    std::uint64_t ctr_;
    bool has_cached_ = false;
    double cached_ = 0.0;
};

}  // namespace nirsim

#endif

#include "nirsim/mcmc.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <stdexcept>
#include <thread>

#include "nirsim/io.hpp"

namespace nirsim {

ChainDriver::ChainDriver(const ModelParams& params, const PathConfig& cfg,
                         const RadialGroundState* gs, const PairKernelView* w)
    : params_(params), cfg_(cfg), gs_(gs), w_(w) {
    cfg_.validate();
    params_.validate();
    if (!gs_) throw ConfigError("ChainDriver needs a ground state");
}

ChainState ChainDriver::init_chain(std::uint64_t seed, std::uint64_t chain_id) const {
    ChainState st;
    st.rng = CounterRng(seed, chain_id);
    st.path = DiscretizedPath(cfg_.d, cfg_.n_beads());
    const int n = cfg_.n_beads(), d = cfg_.d;
    const double rlim = 0.95 * gs_->r_domain;
    std::vector<double> v(d), dr(d);
    gs_->sample_nu0(v.data(), st.rng);
    const double sdt = std::sqrt(cfg_.dt);
    for (int i = 0; i < n; ++i) {
        double* b = st.path.bead(i);
        for (int k = 0; k < d; ++k) b[k] = v[k];
        // Euler-Maruyama step of dq = grad ln psi0 dt + dB
        gs_->drift(v.data(), dr.data());
        double r2 = 0.0;
        for (int k = 0; k < d; ++k) {
            v[k] += dr[k] * cfg_.dt + sdt * st.rng.normal();
            r2 += v[k] * v[k];
        }
        double r = std::sqrt(r2);
        if (r > rlim)
            for (int k = 0; k < d; ++k) v[k] *= rlim / r;
    }
    st.block_len = std::max(2, std::min(n / 4, 16));
    st.cached_ref = reference_log_weight(st.path, *gs_, cfg_);
    if (interacting()) {
        st.cached_action = interaction_action(st.path, *w_, cfg_);
        st.cached_cross = cross_action(st.path, *w_, cfg_);
    }
    return st;
}

double ChainDriver::total_log_density(const DiscretizedPath& p) const {
    double lp = reference_log_weight(p, *gs_, cfg_);
    const int n = p.n, d = p.d;
    for (int i = 0; i + 1 < n; ++i) {
        const double *a = p.bead(i), *b = p.bead(i + 1);
        double s = 0.0;
        for (int k = 0; k < d; ++k) s += (b[k] - a[k]) * (b[k] - a[k]);
        lp -= 0.5 * s / cfg_.dt;
    }
    if (interacting()) lp -= interaction_action(p, *w_, cfg_);
    return lp;
}

namespace {
inline double sq_dist(const double* a, const double* b, int d) {
    double s = 0.0;
    for (int k = 0; k < d; ++k) s += (a[k] - b[k]) * (a[k] - b[k]);
    return s;
}
}  // namespace

void ChainDriver::move(ChainState& st, MoveKind kind) const {
    const int n = cfg_.n_beads(), d = cfg_.d;
    const double dt = cfg_.dt;
    DiscretizedPath& p = st.path;
    st.stats[kind].proposed++;

    if (kind == kBead) {
        int m = static_cast<int>(st.rng.uniform_index(n));
        double xn[8];
        const double* xm = p.bead(m);
        double r2 = 0.0;
        for (int k = 0; k < d; ++k) {
            xn[k] = xm[k] + st.bead_step * st.rng.normal();
            r2 += xn[k] * xn[k];
        }
        if (std::sqrt(r2) > gs_->r_domain) return;  // domain error -> reject
        double dlog = 0.0;
        // Gaussian increment terms
        if (m > 0) dlog -= (sq_dist(xn, p.bead(m - 1), d) -
                            sq_dist(xm, p.bead(m - 1), d)) / (2.0 * dt);
        if (m + 1 < n) dlog -= (sq_dist(xn, p.bead(m + 1), d) -
                                sq_dist(xm, p.bead(m + 1), d)) / (2.0 * dt);
        double rn = std::sqrt(r2), ro = p.radius(m);
        double dref = -cfg_.weight(m) * (gs_->pot(rn) - gs_->pot(ro)) * dt;
        if (m == 0 || m == n - 1) dref += gs_->ln_psi(rn) - gs_->ln_psi(ro);
        dlog += dref;
        ActionDelta da;
        if (interacting()) {
            da = action_delta_single(p, *w_, cfg_, m, xn);
            dlog -= da.dfull;
        }
        if (dlog >= 0.0 || st.rng.uniform() < std::exp(dlog)) {
            st.stats[kind].accepted++;
            double* t = p.bead(m);
            for (int k = 0; k < d; ++k) t[k] = xn[k];
            st.cached_ref += dref;
            st.cached_action += da.dfull;
            st.cached_cross += da.dcross;
        }
        return;
    }

    if (kind == kBlock) {
        int L = std::min(st.block_len, n - 1);
        if (L < 2) return;
        int a = static_cast<int>(st.rng.uniform_index(n - L));
        int b = a + L;
        std::vector<double> xn(static_cast<size_t>(L - 1) * d);
        // sequential Brownian bridge between beads a and b
        const double* prev = p.bead(a);
        const double* xb = p.bead(b);
        bool in_domain = true;
        for (int j = a + 1; j < b; ++j) {
            double* out = &xn[static_cast<size_t>(j - a - 1) * d];
            int steps_left = b - j + 1;
            double var = dt * (steps_left - 1.0) / steps_left;
            double sd = std::sqrt(var);
            double r2 = 0.0;
            for (int k = 0; k < d; ++k) {
                double mean = prev[k] + (xb[k] - prev[k]) / steps_left;
                out[k] = mean + sd * st.rng.normal();
                r2 += out[k] * out[k];
            }
            if (std::sqrt(r2) > gs_->r_domain) in_domain = false;
            prev = out;
        }
        if (!in_domain) return;
        double dref = 0.0;
        for (int j = a + 1; j < b; ++j) {
            double rn = 0.0;
            const double* q = &xn[static_cast<size_t>(j - a - 1) * d];
            for (int k = 0; k < d; ++k) rn += q[k] * q[k];
            dref -= (gs_->pot(std::sqrt(rn)) - gs_->pot(p.radius(j))) * dt;
        }
        double dlog = dref;
        ActionDelta da;
        if (interacting()) {
            da = action_delta_block(p, *w_, cfg_, a, b, xn);
            dlog -= da.dfull;
        }
        if (dlog >= 0.0 || st.rng.uniform() < std::exp(dlog)) {
            st.stats[kind].accepted++;
            for (int j = a + 1; j < b; ++j) {
                double* t = p.bead(j);
                const double* q = &xn[static_cast<size_t>(j - a - 1) * d];
                for (int k = 0; k < d; ++k) t[k] = q[k];
            }
            st.cached_ref += dref;
            st.cached_action += da.dfull;
            st.cached_cross += da.dcross;
        }
        return;
    }

    // endpoint refresh: propose from the adjacent Gaussian increment
    bool left = st.rng.uniform() < 0.5;
    int m = left ? 0 : n - 1;
    int nb = left ? 1 : n - 2;
    double xn[8];
    const double* xnb = p.bead(nb);
    const double sdt = std::sqrt(dt);
    double r2 = 0.0;
    for (int k = 0; k < d; ++k) {
        xn[k] = xnb[k] + sdt * st.rng.normal();
        r2 += xn[k] * xn[k];
    }
    double rn = std::sqrt(r2);
    if (rn > gs_->r_domain) return;
    double ro = p.radius(m);
    double dref = gs_->ln_psi(rn) - gs_->ln_psi(ro) -
                  0.5 * (gs_->pot(rn) - gs_->pot(ro)) * dt;
    double dlog = dref;
    ActionDelta da;
    if (interacting()) {
        da = action_delta_single(p, *w_, cfg_, m, xn);
        dlog -= da.dfull;
    }
    if (dlog >= 0.0 || st.rng.uniform() < std::exp(dlog)) {
        st.stats[kEndpoint].accepted++;
        double* t = p.bead(m);
        for (int k = 0; k < d; ++k) t[k] = xn[k];
        st.cached_ref += dref;
        st.cached_action += da.dfull;
        st.cached_cross += da.dcross;
    }
}

void ChainDriver::resync(ChainState& st) const {
    double ref = reference_log_weight(st.path, *gs_, cfg_);
    double act = 0.0, crs = 0.0;
    if (interacting()) {
        act = interaction_action(st.path, *w_, cfg_);
        crs = cross_action(st.path, *w_, cfg_);
    }
    auto rel = [](double cached, double fresh) {
        return std::abs(cached - fresh) / std::max(1.0, std::abs(fresh));
    };
    double worst = std::max({rel(st.cached_ref, ref), rel(st.cached_action, act),
                             rel(st.cached_cross, crs)});
    st.worst_resync_rel = std::max(st.worst_resync_rel, worst);
    st.resync_count++;
    if (worst > 1e-8)
        throw std::logic_error("cache coherence violated: relative drift " +
                               io::fmt_full(worst));
    st.cached_ref = ref;
    st.cached_action = act;
    st.cached_cross = crs;
}

void ChainDriver::sweep(ChainState& st, const McmcSettings& s) const {
    // Unit accounting: a block of length L costs L move units, so the work
    // per sweep stays O(n_beads^2) whatever the tuner does to L.
    const int n = cfg_.n_beads();
    long units = 0;
    while (units < n) {
        double u = st.rng.uniform();
        MoveKind kind = (u < s.p_bead)             ? kBead
                        : (u < s.p_bead + s.p_block) ? kBlock
                                                     : kEndpoint;
        move(st, kind);
        units += (kind == kBlock) ? st.block_len : 1;
    }
    st.sweep++;
    if (!st.tuned && st.sweep <= s.burnin) {
        if (st.sweep % 40 == 0) {
            double rb = st.stats[kBead].rate();
            if (rb < s.acc_lo) st.bead_step /= 1.35;
            else if (rb > s.acc_hi) st.bead_step *= 1.35;
            double rk = st.stats[kBlock].rate();
            if (rk < s.acc_lo) st.block_len = std::max(2, st.block_len / 2);
            else if (rk > s.acc_hi) st.block_len = std::min(n - 1, st.block_len * 2);
            for (auto& m : st.stats) m = MoveStats{};
        }
        if (st.sweep == s.burnin) {
            st.tuned = true;  // freeze proposals; detailed balance holds from here on
            for (auto& m : st.stats) m = MoveStats{};
        }
    }
    if (st.sweep % s.resync_interval == 0) resync(st);
}

int thread_budget() {
    if (const char* env = std::getenv("NIRSIM_THREADS")) {
        int v = std::atoi(env);
        if (v > 0) return v;
    }
    unsigned hc = std::thread::hardware_concurrency();
    return hc ? static_cast<int>(hc) : 1;
}

namespace {

struct ChainBundle {
    ChainState st;
    std::vector<Accumulator> acc;  // one per observable
};

void save_checkpoint(const std::string& path, std::uint64_t config_hash,
                     const std::vector<ChainBundle>& bundles) {
    std::string tmp = path + ".tmp";
    {
        std::ofstream os(tmp, std::ios::binary);
        if (!os) throw IoError("cannot open " + tmp + " for writing");
        io::write_magic(os, "NIRC1");
        io::write_u32(os, 1);
        io::write_u64(os, config_hash);
        io::write_u32(os, static_cast<std::uint32_t>(bundles.size()));
        for (const auto& b : bundles) {
            const ChainState& st = b.st;
            io::write_i32(os, st.chain_id);
            io::write_u64(os, static_cast<std::uint64_t>(st.sweep));
            io::write_u64(os, st.rng.key());
            io::write_u64(os, st.rng.counter());
            io::write_u32(os, st.rng.has_cached() ? 1 : 0);
            io::write_f64(os, st.rng.cached());
            io::write_f64(os, st.cached_action);
            io::write_f64(os, st.cached_cross);
            io::write_f64(os, st.cached_ref);
            io::write_f64(os, st.bead_step);
            io::write_i32(os, st.block_len);
            io::write_u32(os, st.tuned ? 1 : 0);
            for (const auto& ms : st.stats) {
                io::write_u64(os, static_cast<std::uint64_t>(ms.proposed));
                io::write_u64(os, static_cast<std::uint64_t>(ms.accepted));
            }
            io::write_u64(os, static_cast<std::uint64_t>(st.resync_count));
            io::write_f64(os, st.worst_resync_rel);
            io::write_i32(os, st.path.d);
            io::write_i32(os, st.path.n);
            io::write_f64v(os, st.path.x);
            io::write_u32(os, static_cast<std::uint32_t>(b.acc.size()));
            for (const auto& a : b.acc) a.save(os);
        }
    }
    std::rename(tmp.c_str(), path.c_str());
}

bool load_checkpoint(const std::string& path, std::uint64_t config_hash,
                     std::vector<ChainBundle>& bundles) {
    std::ifstream is(path, std::ios::binary);
    if (!is) return false;
    io::expect_magic(is, "NIRC1", path);
    if (io::read_u32(is) != 1) throw IoError("unsupported NIRC version");
    std::uint64_t h = io::read_u64(is);
    if (h != config_hash)
        throw ConfigError("checkpoint " + path +
                          " was produced with a different config; refusing to resume");
    std::uint32_t nc = io::read_u32(is);
    if (nc != bundles.size())
        throw ConfigError("checkpoint chain count mismatch");
    for (auto& b : bundles) {
        ChainState& st = b.st;
        st.chain_id = io::read_i32(is);
        st.sweep = static_cast<long>(io::read_u64(is));
        std::uint64_t key = io::read_u64(is), ctr = io::read_u64(is);
        bool hc = io::read_u32(is) != 0;
        double cv = io::read_f64(is);
        st.rng.restore(key, ctr, hc, cv);
        st.cached_action = io::read_f64(is);
        st.cached_cross = io::read_f64(is);
        st.cached_ref = io::read_f64(is);
        st.bead_step = io::read_f64(is);
        st.block_len = io::read_i32(is);
        st.tuned = io::read_u32(is) != 0;
        for (auto& ms : st.stats) {
            ms.proposed = static_cast<long>(io::read_u64(is));
            ms.accepted = static_cast<long>(io::read_u64(is));
        }
        st.resync_count = static_cast<long>(io::read_u64(is));
        st.worst_resync_rel = io::read_f64(is);
        st.path.d = io::read_i32(is);
        st.path.n = io::read_i32(is);
        st.path.x = io::read_f64v(is, static_cast<size_t>(st.path.d) * st.path.n);
        std::uint32_t na = io::read_u32(is);
        b.acc.clear();
        for (std::uint32_t i = 0; i < na; ++i) b.acc.push_back(Accumulator::load(is));
    }
    return true;
}

}  // namespace

Estimate ChainRunResult::combined(const std::string& name) const {
    auto it = acc.find(name);
    if (it == acc.end()) throw std::out_of_range("no observable " + name);
    std::vector<const Accumulator*> ptrs;
    for (const auto& a : it->second) ptrs.push_back(&a);
    return combine(ptrs);
}

ChainRunResult run_chains(const ChainDriver& driver, const McmcSettings& s,
                          const std::vector<Observable>& observables,
                          const SampleHook& hook,
                          const std::string& checkpoint_path,
                          std::uint64_t config_hash) {
    if (s.chains < 1) throw ConfigError("need at least one chain");
    if (s.sweeps < 1 || s.burnin < 0) throw ConfigError("bad sweep counts");

    std::vector<ChainBundle> bundles(s.chains);
    bool resumed = false;
    if (!checkpoint_path.empty())
        resumed = load_checkpoint(checkpoint_path, config_hash, bundles);
    if (!resumed) {
        for (int c = 0; c < s.chains; ++c) {
            bundles[c].st = driver.init_chain(s.seed, static_cast<std::uint64_t>(c));
            bundles[c].st.chain_id = c;
            bundles[c].acc.assign(observables.size(), Accumulator(s.batch_len()));
        }
    }

    const long target = s.burnin + s.sweeps;
    const long thin = s.thin < 1 ? 1 : s.thin;
    std::vector<std::string> errors(s.chains);

    auto run_one = [&](int c) {
        ChainBundle& b = bundles[c];
        try {
            long stop = target;
            if (s.max_new_sweeps >= 0)
                stop = std::min(target, b.st.sweep + s.max_new_sweeps);
            while (b.st.sweep < stop) {
                driver.sweep(b.st, s);
                long t = b.st.sweep;
                if (t > s.burnin && (t - s.burnin) % thin == 0) {
                    if (!b.st.path.finite())
                        throw std::runtime_error(
                            "non-finite path at sweep " + std::to_string(t));
                    long idx = (t - s.burnin) / thin - 1;
                    for (size_t o = 0; o < observables.size(); ++o) {
                        double v = observables[o].f(b.st);
                        if (!std::isfinite(v))
                            throw std::runtime_error("non-finite observable " +
                                                     observables[o].name +
                                                     " at sweep " + std::to_string(t));
                        b.acc[o].add(v);
                    }
                    if (hook) hook(c, idx, b.st);
                }
            }
        } catch (const std::exception& ex) {
            errors[c] = ex.what();
        }
    };

    int nthreads = std::min<int>(thread_budget(), s.chains);
    if (nthreads <= 1) {
        for (int c = 0; c < s.chains; ++c) run_one(c);
    } else {
        std::vector<std::thread> pool;
        for (int t = 0; t < nthreads; ++t)
            pool.emplace_back([&, t]() {
                for (int c = t; c < s.chains; c += nthreads) run_one(c);
            });
        for (auto& th : pool) th.join();
    }
    for (int c = 0; c < s.chains; ++c)
        if (!errors[c].empty())
            throw std::runtime_error("chain " + std::to_string(c) + ": " + errors[c]);

    ChainRunResult out;
    out.complete = true;
    for (auto& b : bundles) out.complete = out.complete && (b.st.sweep >= target);
    if (!checkpoint_path.empty() && !out.complete)
        save_checkpoint(checkpoint_path, config_hash, bundles);

    for (size_t o = 0; o < observables.size(); ++o) {
        std::vector<Accumulator> per_chain;
        std::vector<const Accumulator*> ptrs;
        for (auto& b : bundles) per_chain.push_back(b.acc[o]);
        out.acc[observables[o].name] = std::move(per_chain);
        for (const auto& a : out.acc[observables[o].name]) ptrs.push_back(&a);
        if (out.complete) out.estimates[observables[o].name] = combine(ptrs);
    }
    for (auto& b : bundles) {
        out.total_samples += b.acc.empty() ? 0 : b.acc[0].n();
        out.chains.push_back(std::move(b.st));
    }
    return out;
}

}  // namespace nirsim

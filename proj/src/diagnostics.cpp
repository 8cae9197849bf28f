#include "nirsim/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "nirsim/io.hpp"
#include "nirsim/quadrature.hpp"

namespace nirsim {

namespace {
constexpr double kPi = 3.14159265358979323846;
}

SimContext SimContext::make(const ModelParams& params, const IRTestFunction& test,
                            double dt, const McmcSettings& mcmc, double T_max,
                            std::uint64_t config_hash) {
    params.validate();
    SimContext ctx;
    ctx.params = params;
    ctx.test = test;
    ctx.dt = dt;
    ctx.mcmc = mcmc;
    ctx.config_hash = config_hash;
    GridSpec gspec;
    gspec.E_guess = 4.0 + params.pot_C;
    ctx.gs = std::make_shared<RadialGroundState>(
        solve_ground_state(PotentialSpec::from(params), params.d, gspec));
    if (params.e != 0.0) {
        double r_tab = std::min(2.0 * ctx.gs->r_domain + 1.0, 24.0);
        ctx.table = std::make_shared<KernelTable>(
            build_kernel_table(params, r_tab, 2.0 * T_max + 2.0));
    }
    return ctx;
}

// ---------------------------------------------------------------------------
// Gibbs point runs
// ---------------------------------------------------------------------------

GibbsPointResult run_gibbs_point(const SimContext& ctx, double T,
                                 const std::string& checkpoint_path) {
    GibbsPointResult out;
    out.T = T;
    PathConfig cfg = ctx.path_cfg(T);
    cfg.validate();
    out.cfg = cfg;
    const int n = cfg.n_beads();

    auto view = std::make_shared<PairKernelView>();
    if (ctx.params.e != 0.0)
        *view = PairKernelView(ctx.table.get(), cfg.dt, n,
                               std::min(ctx.gs->r_domain * 2.0, ctx.table->r_max()));
    ChainDriver driver(ctx.params, cfg, ctx.gs.get(), view.get());

    // radial quantile bins of nu0 for q0
    out.bin_edges.push_back(0.0);
    for (int b = 1; b < ctx.n_bins; ++b)
        out.bin_edges.push_back(
            ctx.gs->radial_quantile(static_cast<double>(b) / ctx.n_bins));
    out.bin_edges.push_back(ctx.gs->r_domain + 1.0);
    for (int b = 0; b < ctx.n_bins; ++b) {
        double lo = ctx.gs->radial_cdf(out.bin_edges[b]);
        double hi = (b + 1 == ctx.n_bins) ? 1.0
                                          : ctx.gs->radial_cdf(out.bin_edges[b + 1]);
        out.bin_nu0.push_back(hi - lo);
    }

    std::vector<Observable> obs;
    obs.push_back({"q0_sq", [mid = cfg.mid()](const ChainState& st) {
                       double r = st.path.radius(mid);
                       return r * r;
                   }});
    obs.push_back({"exp_cross", [](const ChainState& st) {
                       return std::exp(st.cached_cross);
                   }});
    for (int b = 0; b < ctx.n_bins; ++b) {
        double lo = out.bin_edges[b], hi = out.bin_edges[b + 1];
        obs.push_back({"bin" + std::to_string(b),
                       [lo, hi, mid = cfg.mid()](const ChainState& st) {
                           double r = st.path.radius(mid);
                           return (r >= lo && r < hi) ? 1.0 : 0.0;
                       }});
    }

    std::shared_ptr<ConditionalFunctional> F;
    if (ctx.params.d == 3) {
        F = std::make_shared<ConditionalFunctional>(ctx.test, ctx.params, cfg,
                                                    ctx.gs->r_domain);
        out.s_norm2 = F->s_norm2();
        out.cap_multipliers = {5.0, 10.0, 20.0};
        for (double m : out.cap_multipliers) {
            double cap = F->cap_from_multiplier(m);
            std::string name = "F_cap" + std::to_string(static_cast<int>(m));
            obs.push_back({name, [F, cap](const ChainState& st) {
                               return F->capped_value(st.path, cap);
                           }});
        }
    }

    if (ctx.params.d >= 4) {
        // Quadratic functional and its per-bin products (Jensen bound input).
        // Observables run in declaration order within a chain, so Jquad
        // stores the value in a per-chain slot that the Jbin readers reuse.
        auto vw = view;
        auto jval = std::make_shared<std::vector<double>>(ctx.mcmc.chains, 0.0);
        obs.push_back({"Jquad", [vw, cfg, jval](const ChainState& st) {
                           double j = g0_sq_k_integral(st.path, *vw, cfg);
                           (*jval)[st.chain_id] = j;
                           return j;
                       }});
        for (int b = 0; b < ctx.n_bins; ++b) {
            double lo = out.bin_edges[b], hi = out.bin_edges[b + 1];
            obs.push_back({"Jbin" + std::to_string(b),
                           [lo, hi, jval, mid = cfg.mid()](const ChainState& st) {
                               double r = st.path.radius(mid);
                               return (r >= lo && r < hi) ? (*jval)[st.chain_id]
                                                          : 0.0;
                           }});
        }
    }

    ChainRunResult rr = run_chains(driver, ctx.mcmc, obs, nullptr,
                                   checkpoint_path, ctx.config_hash);
    if (!rr.complete)
        throw std::runtime_error("gibbs run at T=" + io::fmt_full(T) +
                                 " stopped before completion (checkpointed)");
    out.estimates = std::move(rr.estimates);
    out.acc = std::move(rr.acc);
    out.chains = std::move(rr.chains);
    out.view = view;
    return out;
}

std::vector<CurvePoint> ir_divergence_curve(const SimContext& ctx,
                                            const std::vector<double>& T_list,
                                            double cap_multiplier) {
    if (ctx.params.d != 3)
        throw ConfigError("ir_divergence_curve: the test functional lives in d=3");
    for (size_t i = 1; i < T_list.size(); ++i)
        if (T_list[i] <= T_list[i - 1])
            throw ConfigError("T_list must be increasing");
    std::vector<CurvePoint> curve;
    std::string name = "F_cap" + std::to_string(static_cast<int>(cap_multiplier));
    for (double T : T_list) {
        GibbsPointResult run = run_gibbs_point(ctx, T);
        auto it = run.estimates.find(name);
        if (it == run.estimates.end())
            throw ConfigError("cap multiplier " + io::fmt_full(cap_multiplier) +
                              " is not tracked by the run");
        curve.push_back({T, it->second, ctx.config_hash});
    }
    return curve;
}

std::vector<CurvePoint> overlap_upper_bound_curve(
    const SimContext& ctx, const std::vector<double>& T_list) {
    std::vector<CurvePoint> curve;
    for (double T : T_list) {
        GibbsPointResult run = run_gibbs_point(ctx, T);
        curve.push_back({T, run.estimates.at("exp_cross"), ctx.config_hash});
    }
    return curve;
}

// ---------------------------------------------------------------------------
// Jensen lower bound (d >= 4)
// ---------------------------------------------------------------------------

namespace {

// Pools every chain's batch means for one observable into one flat list.
std::vector<double> pooled_batches(const GibbsPointResult& run,
                                   const std::string& name) {
    std::vector<double> bm;
    auto it = run.acc.find(name);
    if (it == run.acc.end()) throw std::out_of_range("no observable " + name);
    for (const auto& a : it->second)
        bm.insert(bm.end(), a.batch_means().begin(), a.batch_means().end());
    return bm;
}

}  // namespace

LowerBoundPoint convergent_lower_bound_point(const SimContext& ctx,
                                             const GibbsPointResult& run) {
    if (ctx.params.d < 4)
        throw ConfigError("convergent_lower_bound requires d >= 4");
    const int nb = ctx.n_bins;
    std::vector<std::vector<double>> cnt(nb), jsum(nb);
    for (int b = 0; b < nb; ++b) {
        cnt[b] = pooled_batches(run, "bin" + std::to_string(b));
        jsum[b] = pooled_batches(run, "Jbin" + std::to_string(b));
    }
    const size_t NB = cnt[0].size();
    if (NB < 8) throw std::runtime_error("too few batches for a jackknife error");

    auto theta = [&](long skip) {
        double v = 0.0;
        for (int b = 0; b < nb; ++b) {
            double c = 0.0, j = 0.0;
            for (size_t k = 0; k < NB; ++k) {
                if (static_cast<long>(k) == skip) continue;
                c += cnt[b][k];
                j += jsum[b][k];
            }
            size_t m = NB - (skip >= 0 ? 1 : 0);
            double freq = c / m;
            if (freq <= 0.0) continue;  // undersampled bin: drop (reported via hits)
            double jbar = j / c;        // E[J | bin]
            double ratio = freq / run.bin_nu0[b];
            v += run.bin_nu0[b] * std::exp(-jbar / 8.0) * std::sqrt(ratio);
        }
        return v;
    };

    LowerBoundPoint pt;
    pt.T = run.T;
    pt.value = theta(-1);
    double mean_loo = 0.0;
    std::vector<double> loo(NB);
    for (size_t k = 0; k < NB; ++k) {
        loo[k] = theta(static_cast<long>(k));
        mean_loo += loo[k];
    }
    mean_loo /= NB;
    double ss = 0.0;
    for (double v : loo) ss += (v - mean_loo) * (v - mean_loo);
    pt.stderr_ = std::sqrt((NB - 1.0) / NB * ss);

    // Analytic floor from the uniform envelope of |g_hat0|^2:
    //   (1/8) int E[|g|^2] |k| dk <= (1/32) int |rho|^2/|k|^3 dk,
    //   E[sqrt(ratio)] >= 1/sqrt(max ratio).
    const ModelParams& p = ctx.params;
    auto f = [&](double k) {
        return std::pow(k, p.d - 4) * std::exp(-p.sigma * p.sigma * k * k);
    };
    double I = sphere_area(p.d) * p.e * p.e *
               quad::gl_panels(f, 0.0, 13.0 / p.sigma, 26, 16);
    double c_emp = 1.0;
    for (int b = 0; b < nb; ++b) {
        double c = 0.0;
        for (double x : cnt[b]) c += x;
        double ratio = (c / NB) / run.bin_nu0[b];
        if (ratio > 0.0) c_emp = std::max(c_emp, ratio);
    }
    pt.analytic_floor = std::exp(-I / 32.0) / std::sqrt(c_emp);
    return pt;
}

std::vector<LowerBoundPoint> convergent_lower_bound(
    const SimContext& ctx, const std::vector<double>& T_list) {
    std::vector<LowerBoundPoint> out;
    for (double T : T_list) {
        GibbsPointResult run = run_gibbs_point(ctx, T);
        out.push_back(convergent_lower_bound_point(ctx, run));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Localization
// ---------------------------------------------------------------------------

LocalizationReport localization_ratio(const SimContext& ctx,
                                      const GibbsPointResult& run,
                                      long min_hits, long min_samples) {
    LocalizationReport rep;
    rep.T = run.T;
    rep.edges = run.bin_edges;
    rep.nu0_mass = run.bin_nu0;
    long total = 0;
    {
        auto it = run.acc.at("bin0");
        for (const auto& a : it) total += a.n();
    }
    if (total < min_samples)
        throw std::runtime_error("localization_ratio: need >= " +
                                 std::to_string(min_samples) +
                                 " samples, have " + std::to_string(total));
    rep.c_lo = 1e300;
    rep.c_hi = 0.0;
    for (int b = 0; b < ctx.n_bins; ++b) {
        std::vector<const Accumulator*> ptrs;
        for (const auto& a : run.acc.at("bin" + std::to_string(b))) ptrs.push_back(&a);
        Estimate freq = combine(ptrs);
        long hits = static_cast<long>(std::lround(freq.mean * freq.n));
        rep.hits.push_back(hits);
        Estimate ratio;
        ratio.n = freq.n;
        ratio.mean = freq.mean / rep.nu0_mass[b];
        ratio.stderr_ = freq.stderr_ / rep.nu0_mass[b];
        ratio.ess = freq.ess;
        rep.ratio.push_back(ratio);
        if (hits >= min_hits) {
            rep.c_lo = std::min(rep.c_lo, ratio.mean);
            rep.c_hi = std::max(rep.c_hi, ratio.mean);
        } else {
            rep.skipped_bins++;
        }
    }
    return rep;
}

// ---------------------------------------------------------------------------
// Correlation decay
// ---------------------------------------------------------------------------

DecayReport correlation_decay_fit(const SimContext& ctx, double T,
                                  const std::function<double(double)>& F1,
                                  const std::function<double(double)>& F2,
                                  const std::vector<double>& lags) {
    PathConfig cfg = ctx.path_cfg(T);
    cfg.validate();
    for (double l : lags)
        if (l < 0 || l > T)
            throw ConfigError("correlation lags must lie in [0, T]");

    auto view = std::make_shared<PairKernelView>();
    if (ctx.params.e != 0.0)
        *view = PairKernelView(ctx.table.get(), cfg.dt, cfg.n_beads(),
                               std::min(ctx.gs->r_domain * 2.0, ctx.table->r_max()));
    ChainDriver driver(ctx.params, cfg, ctx.gs.get(), view.get());

    // centered window: s and s+lag within [-T/2, T/2]
    const int mid = cfg.mid();
    const int half = static_cast<int>(std::lround(0.5 * T / cfg.dt));
    std::vector<Observable> obs;
    obs.push_back({"mF1", [mid, half, F1](const ChainState& st) {
                       double s = 0.0;
                       int c = 0;
                       for (int i = mid - half; i <= mid + half; ++i, ++c)
                           s += F1(st.path.radius(i));
                       return s / c;
                   }});
    obs.push_back({"mF2", [mid, half, F2](const ChainState& st) {
                       double s = 0.0;
                       int c = 0;
                       for (int i = mid - half; i <= mid + half; ++i, ++c)
                           s += F2(st.path.radius(i));
                       return s / c;
                   }});
    std::vector<int> lag_beads;
    for (double l : lags) lag_beads.push_back(static_cast<int>(std::lround(l / cfg.dt)));
    for (size_t li = 0; li < lags.size(); ++li) {
        int lb = lag_beads[li];
        obs.push_back({"prod" + std::to_string(li),
                       [mid, half, F1, F2, lb](const ChainState& st) {
                           double s = 0.0;
                           int c = 0;
                           for (int i = mid - half; i + lb <= mid + half; ++i, ++c)
                               s += F1(st.path.radius(i)) *
                                    F2(st.path.radius(i + lb));
                           return c ? s / c : 0.0;
                       }});
    }

    ChainRunResult rr = run_chains(driver, ctx.mcmc, obs);
    Estimate m1 = rr.combined("mF1"), m2 = rr.combined("mF2");
    if (m1.n < 400 || m1.ess < 64)
        throw std::runtime_error("correlation_decay_fit: effective sample size "
                                 "too small for covariance errors");

    DecayReport rep;
    rep.lags = lags;
    for (size_t li = 0; li < lags.size(); ++li) {
        Estimate pr = rr.combined("prod" + std::to_string(li));
        Estimate cov;
        cov.n = pr.n;
        cov.mean = pr.mean - m1.mean * m2.mean;
        // conservative first-order error propagation
        cov.stderr_ = std::sqrt(pr.stderr_ * pr.stderr_ +
                                std::pow(m1.mean * m2.stderr_, 2) +
                                std::pow(m2.mean * m1.stderr_, 2));
        cov.ess = pr.ess;
        rep.cov.push_back(cov);
    }

    // envelope fit cov ~ C/(lag^gamma + 1) over strictly positive entries
    std::vector<double> xs, ys;
    for (size_t li = 0; li < lags.size(); ++li)
        if (lags[li] > 0 && rep.cov[li].mean > 0) {
            xs.push_back(lags[li]);
            ys.push_back(rep.cov[li].mean);
        }
    if (xs.size() >= 3) {
        double best_g = 0.0, best_sse = 1e300, best_lnC = 0.0;
        for (double g = 0.05; g <= 8.0; g += 0.005) {
            double lnC = 0.0;
            for (size_t i = 0; i < xs.size(); ++i)
                lnC += std::log(ys[i]) + std::log(std::pow(xs[i], g) + 1.0);
            lnC /= xs.size();
            double sse = 0.0;
            for (size_t i = 0; i < xs.size(); ++i) {
                double r = std::log(ys[i]) -
                           (lnC - std::log(std::pow(xs[i], g) + 1.0));
                sse += r * r;
            }
            if (sse < best_sse) {
                best_sse = sse;
                best_g = g;
                best_lnC = lnC;
            }
        }
        rep.gamma = best_g;
        rep.C = std::exp(best_lnC);
        double syy = 0.0, my = 0.0;
        for (double y : ys) my += std::log(y);
        my /= ys.size();
        for (double y : ys) syy += (std::log(y) - my) * (std::log(y) - my);
        rep.fit_r2 = syy > 0 ? 1.0 - best_sse / syy : 1.0;
        // curvature-based error on gamma from the SSE profile
        double h = 0.05;
        auto sse_at = [&](double g) {
            double lnC = 0.0;
            for (size_t i = 0; i < xs.size(); ++i)
                lnC += std::log(ys[i]) + std::log(std::pow(xs[i], g) + 1.0);
            lnC /= xs.size();
            double sse = 0.0;
            for (size_t i = 0; i < xs.size(); ++i) {
                double r = std::log(ys[i]) -
                           (lnC - std::log(std::pow(xs[i], g) + 1.0));
                sse += r * r;
            }
            return sse;
        };
        double d2 = (sse_at(best_g + h) - 2.0 * best_sse + sse_at(best_g - h)) /
                    (h * h);
        double s2 = best_sse / std::max<size_t>(1, xs.size() - 2);
        rep.gamma_stderr = d2 > 0 ? std::sqrt(2.0 * s2 / d2) : 0.0;
        rep.fit_done = true;
    }
    return rep;
}

// ---------------------------------------------------------------------------
// Spectral tails
// ---------------------------------------------------------------------------

double spectral_G(const std::function<double(double)>& h_hat, double t,
                  const ModelParams& p) {
    auto h2 = [&](double k) { return h_hat(k); };
    return 4.0 * field_covariance(h2, h2, t, p);
}

TailFit fit_loglog_tail(const std::vector<double>& t, const std::vector<double>& y) {
    if (t.size() < 3 || t.size() != y.size())
        throw ConfigError("tail fit needs >= 3 matched points");
    if (t.back() < 10.0 * t.front())
        throw ConfigError("tail fit window must span at least one decade");
    std::vector<double> lx, ly;
    for (size_t i = 0; i < t.size(); ++i) {
        if (!(y[i] > 0.0)) throw ConfigError("tail fit needs positive values");
        lx.push_back(std::log(t[i]));
        ly.push_back(std::log(y[i]));
    }
    LineFit f = fit_line(lx, ly);
    TailFit out;
    out.exponent = -f.slope;
    out.exponent_stderr = f.slope_stderr;
    out.r2 = f.r2;
    out.window_lo = t.front();
    out.window_hi = t.back();
    return out;
}

TailFit spectral_tail_fit(const std::function<double(double)>& h_hat,
                          const std::vector<double>& t_list,
                          const ModelParams& p) {
    std::vector<double> ys;
    for (double t : t_list) ys.push_back(spectral_G(h_hat, t, p));
    return fit_loglog_tail(t_list, ys);
}

// ---------------------------------------------------------------------------
// Convolution tail
// ---------------------------------------------------------------------------

namespace {

// L1*L1 on a spline over x = ln(1+t), with direct quadrature at the knots.
class ConvOnce {
  public:
    ConvOnce(int d, double x_max) : d_(d) {
        n_ = 480;
        dx_ = std::log1p(x_max) / (n_ - 1);
        v_.resize(n_);
        for (int i = 0; i < n_; ++i) v_[i] = direct(std::expm1(i * dx_));
    }
    double operator()(double x) const {
        x = std::abs(x);
        double u = std::log1p(x) / dx_;
        int i = std::max(1, std::min(n_ - 3, static_cast<int>(u)));
        double s = u - i;
        const double* y = &v_[i - 1];
        double c0 = -s * (s - 1.0) * (s - 2.0) / 6.0;
        double c1 = (s + 1.0) * (s - 1.0) * (s - 2.0) / 2.0;
        double c2 = -(s + 1.0) * s * (s - 2.0) / 2.0;
        double c3 = (s + 1.0) * s * (s - 1.0) / 6.0;
        return c0 * y[0] + c1 * y[1] + c2 * y[2] + c3 * y[3];
    }
    double direct(double x) const {
        auto L1 = [&](double u) { return 1.0 / (std::pow(std::abs(u), d_ - 1) + 1.0); };
        auto f = [&](double u) { return L1(u) * L1(x - u); };
        // even around x/2; integrate (-inf, x/2] as [x/2 - R, x/2] with R large
        double R = std::max(200.0, 40.0 * x);
        std::vector<double> br{x / 2.0 - R};
        for (double c : {-4.0, -1.0, 0.0, 1.0, 4.0}) {
            if (x / 2.0 + c * std::max(1.0, x / 8.0) < x / 2.0)
                br.push_back(x / 2.0 + c * std::max(1.0, x / 8.0));
        }
        br.push_back(0.0);
        br.push_back(x / 2.0);
        std::sort(br.begin(), br.end());
        br.erase(std::unique(br.begin(), br.end()), br.end());
        double s = 0.0;
        for (size_t i = 0; i + 1 < br.size(); ++i)
            s += quad::adaptive(f, br[i], br[i + 1], 1e-12, 1e-9);
        return 2.0 * s;
    }

  private:
    int d_, n_ = 0;
    double dx_ = 0.0;
    std::vector<double> v_;
};

}  // namespace

ConvolutionReport convolution_tail_exponent(int d, double gamma,
                                            const std::vector<double>& t_list) {
    if (!(gamma > 0.0)) throw ConfigError("gamma must be > 0");
    if (d < 3 || d > 5) throw ConfigError("d must be 3..5");
    ConvolutionReport rep;
    rep.claimed_exponent = 2.0 * d + gamma - 4.0;
    rep.dominance = rep.claimed_exponent > d - 1.0;
    double t_max = *std::max_element(t_list.begin(), t_list.end());
    ConvOnce G(d, 80.0 * t_max);
    auto L2 = [&](double s) { return 1.0 / (std::pow(std::abs(s), gamma) + 1.0); };
    for (double t : t_list) {
        auto f = [&](double s) { return G(t - s) * L2(s); };
        double R = 60.0 * t;
        std::vector<double> br{-R, -t, 0.0, t / 2.0, t, 2.0 * t, R};
        std::sort(br.begin(), br.end());
        double h = 0.0;
        for (size_t i = 0; i + 1 < br.size(); ++i)
            h += quad::adaptive(f, br[i], br[i + 1], 1e-11, 1e-8);
        rep.t.push_back(t);
        rep.h.push_back(h);
    }
    rep.fit = fit_loglog_tail(rep.t, rep.h);
    return rep;
}

// ---------------------------------------------------------------------------
// Path regularity
// ---------------------------------------------------------------------------

RegularityReport path_regularity_stats(const std::vector<DiscretizedPath>& paths,
                                       const PathConfig& cfg, double pot_alpha) {
    RegularityReport rep;
    rep.n_paths = static_cast<long>(paths.size());
    if (paths.size() < 100)
        throw std::runtime_error("path_regularity_stats: need >= 100 paths, got " +
                                 std::to_string(paths.size()));
    const int n = cfg.n_beads();
    std::vector<int> steps;
    for (int s = 1; s < n; s *= 2) {
        steps.push_back(s);
        if (static_cast<int>(steps.size()) >= 6) break;
    }
    for (int s : steps) rep.deltas.push_back(s * cfg.dt);

    std::vector<std::vector<double>> ratios(steps.size());
    std::vector<double> sups;
    for (const auto& p : paths) {
        // sup over all gaps up to delta: prefix maximum across step sizes
        std::vector<double> max_at(steps.back() + 1, 0.0);
        for (int s = 1; s <= steps.back(); ++s)
            for (int i = 0; i + s < n; ++i)
                max_at[s] = std::max(max_at[s], p.pair_distance(i, i + s));
        double run = 0.0;
        size_t si = 0;
        for (int s = 1; s <= steps.back() && si < steps.size(); ++s) {
            run = std::max(run, max_at[s]);
            if (s == steps[si]) {
                ratios[si].push_back(run / std::pow(s * cfg.dt, 0.125));
                ++si;
            }
        }
        double sup = 0.0;
        for (int i = 0; i < n; ++i) sup = std::max(sup, p.radius(i));
        sups.push_back(sup);
    }
    for (auto& v : ratios) {
        std::vector<double> s = v;
        std::sort(s.begin(), s.end());
        double mean = std::accumulate(s.begin(), s.end(), 0.0) / s.size();
        rep.modulus_mean.push_back(mean);
        rep.modulus_p99.push_back(s[static_cast<size_t>(0.99 * (s.size() - 1))]);
    }

    // p99 of sup over growing windows vs C1 (ln(T'+1))^{1/(alpha+1)} + C2
    std::vector<double> xs, ys;
    const int mid = cfg.mid();
    for (double frac : {0.125, 0.25, 0.5, 1.0}) {
        int half = static_cast<int>(std::lround(frac * mid));
        if (half < 2) continue;
        std::vector<double> s;
        for (const auto& p : paths) {
            double sup = 0.0;
            for (int i = mid - half; i <= mid + half; ++i)
                sup = std::max(sup, p.radius(i));
            s.push_back(sup);
        }
        std::sort(s.begin(), s.end());
        ys.push_back(s[static_cast<size_t>(0.99 * (s.size() - 1))]);
        xs.push_back(std::pow(std::log(frac * cfg.T + 1.0), 1.0 / (pot_alpha + 1.0)));
    }
    if (xs.size() >= 2) {
        LineFit f = fit_line(xs, ys);
        rep.C1 = f.slope;
        rep.C2 = f.intercept;
        double sse = 0.0;
        for (size_t i = 0; i < xs.size(); ++i) {
            double r = ys[i] - (f.intercept + f.slope * xs[i]);
            sse += r * r;
        }
        rep.envelope_rms_residual = std::sqrt(sse / xs.size());
    }
    return rep;
}

}  // namespace nirsim

/**
 * @file acceptance.cpp
 * @brief End-to-end acceptance runs. Each numbered criterion prints exactly
 *        one PASS/FAIL line; the exit code is the number of failures.
 *        Invoke with the criterion numbers to run (default: all).
 *
 * Criteria 4, 5 and 7 read different functionals of the same finite-window
 * Gibbs runs; invoking them together shares one set of chains.
 */

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "nirsim/experiments.hpp"
#include "nirsim/field.hpp"
#include "nirsim/io.hpp"

using namespace nirsim;
namespace fs = std::filesystem;

namespace {

constexpr double kPi = 3.14159265358979323846;

struct Line {
    int criterion;
    bool pass;
    std::string text;
};

// ---- pinned acceptance configuration (thresholds live here, not in code
// scattered around): d=3 divergence grid and its mcmc budget ----
struct AccConfig {
    double e = 0.3, sigma = 1.0, pot_C = 1.0, pot_alpha = 2.0;
    double dt = 0.05;
    std::vector<double> T_div{4.0, 8.0, 16.0, 32.0};
    std::vector<long> sweeps_div{20000, 16000, 16000, 5000};
    std::vector<double> T_conv{4.0, 8.0, 16.0};
    std::vector<long> sweeps_conv{1200, 1200, 1000};
    long burnin = 800;
    int chains = 2;
    std::uint64_t seed = 20260811;
    double n_sigma = 4.0;
    double decay_factor = 0.5;
    int n_bins = 12;
};

const AccConfig kAcc;

ModelParams acc_params(int d, double e) {
    ModelParams p;
    p.d = d;
    p.e = e;
    p.sigma = kAcc.sigma;
    p.pot_C = kAcc.pot_C;
    p.pot_alpha = kAcc.pot_alpha;
    return p;
}

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

// shared heavy runs for criteria 4/5/7
struct DivergenceRuns {
    SimContext ctx;
    std::vector<GibbsPointResult> runs;
};

const DivergenceRuns& divergence_runs() {
    static DivergenceRuns* cache = nullptr;
    if (!cache) {
        cache = new DivergenceRuns();
        McmcSettings mc;
        mc.burnin = kAcc.burnin;
        mc.chains = kAcc.chains;
        mc.seed = kAcc.seed;
        cache->ctx = SimContext::make(acc_params(3, kAcc.e), IRTestFunction{},
                                      kAcc.dt, mc, kAcc.T_div.back());
        cache->ctx.n_bins = kAcc.n_bins;
        for (size_t i = 0; i < kAcc.T_div.size(); ++i) {
            SimContext ctx = cache->ctx;
            ctx.mcmc.sweeps = kAcc.sweeps_div[i];
            std::fprintf(stderr, "  [divergence run T=%g, %ld sweeps x %d chains]\n",
                         kAcc.T_div[i], kAcc.sweeps_div[i], kAcc.chains);
            cache->runs.push_back(run_gibbs_point(ctx, kAcc.T_div[i]));
        }
    }
    return *cache;
}

// ---------------------------------------------------------------------------

Line criterion1() {
    ModelParams p = acc_params(3, 1.0);
    double w00 = pair_kernel_momentum(0, 0, p);
    bool pass = std::abs(w00 - (-kPi / 4.0)) < 1e-8;
    double worst = 0.0;
    for (int i = 0; i < 20; ++i) {
        for (int j = 0; j < 20; ++j) {
            double r = 5.0 * i / 19.0, t = 5.0 * j / 19.0;
            double a = pair_kernel_momentum(r, t, p);
            double b = pair_kernel_position(r, t, p);
            worst = std::max(worst, std::abs(a - b) / std::abs(a));
        }
    }
    pass = pass && worst < 1e-6;
    return {1, pass,
            "kernel cross-representation: max rel gap " + fmt(worst) +
                " on the 20x20 grid (tol 1e-6), W(0,0) = " + fmt(w00) +
                " vs -pi/4 (tol 1e-8)"};
}

Line criterion2() {
    ModelParams p3 = acc_params(3, 1.0);
    std::vector<double> eps{1e-2, 1e-3, 1e-4, 1e-5, 1e-6};
    auto scan = ir_criterion_scan(eps, p3);
    std::vector<double> x, y;
    for (auto& [e2, I] : scan) {
        x.push_back(std::log(1.0 / e2));
        y.push_back(I);
    }
    LineFit f = fit_line(x, y);
    double expect = 4.0 * kPi;
    bool pass3 = std::abs(f.slope - expect) / expect < 0.02 && f.r2 > 0.999;

    ModelParams p4 = acc_params(4, 1.0);
    auto s4 = ir_criterion_scan(eps, p4);
    double ref = s4[1].second;
    double last_inc = s4[4].second - s4[3].second;
    bool pass4 = last_inc < 1e-3 * ref;
    return {2, pass3 && pass4,
            "infrared criterion: d=3 slope " + fmt(f.slope) + " vs 4 pi e^2 = " +
                fmt(expect) + " (R2 " + fmt(f.r2) + "); d=4 tail increment/I(1e-3) = " +
                fmt(last_inc / ref) + " < 1e-3"};
}

Line criterion3() {
    // (a) 3-bead 5-state toy vs exact enumeration
    ModelParams p = acc_params(3, 1.0);
    p.pot_C = 0.5;
    p.pot_alpha = 1.0;
    GridSpec g;
    g.n = 8000;
    g.E_guess = 2.0;
    RadialGroundState gs = solve_ground_state(PotentialSpec::from(p), 3, g);
    KernelTable tab = build_kernel_table(p, 6.0, 3.0);
    PathConfig cfg;
    cfg.T = 0.5;
    cfg.dt = 0.5;
    PairKernelView view(&tab, cfg.dt, cfg.n_beads());
    ChainDriver driver(p, cfg, &gs, &view);

    const std::vector<double> levels{-1.2, -0.6, 0.0, 0.6, 1.2};
    std::vector<double> logw(125);
    double lmax = -1e300;
    for (int a = 0; a < 5; ++a)
        for (int b = 0; b < 5; ++b)
            for (int c = 0; c < 5; ++c) {
                DiscretizedPath path(3, 3);
                path.bead(0)[0] = levels[a];
                path.bead(1)[0] = levels[b];
                path.bead(2)[0] = levels[c];
                logw[(a * 5 + b) * 5 + c] = driver.total_log_density(path);
                lmax = std::max(lmax, logw[(a * 5 + b) * 5 + c]);
            }
    double Z = 0.0;
    for (double lw : logw) Z += std::exp(lw - lmax);
    CounterRng rng(kAcc.seed, 3);
    int st[3] = {2, 2, 2};
    double cur = logw[62];
    std::vector<long> occ(125, 0);
    const long steps = 3000000;
    for (long it = 0; it < steps; ++it) {
        int bead = static_cast<int>(rng.uniform_index(3));
        int prop = static_cast<int>(rng.uniform_index(5));
        int old = st[bead];
        st[bead] = prop;
        int idx = (st[0] * 5 + st[1]) * 5 + st[2];
        if (logw[idx] - cur >= 0 || rng.uniform() < std::exp(logw[idx] - cur)) {
            cur = logw[idx];
        } else {
            st[bead] = old;
        }
        occ[(st[0] * 5 + st[1]) * 5 + st[2]]++;
    }
    double tv = 0.0;
    for (int s = 0; s < 125; ++s)
        tv += std::abs(double(occ[s]) / steps - std::exp(logw[s] - lmax) / Z);
    tv *= 0.5;

    // (b) free harmonic chain: moments and the OU lag-1 autocovariance
    ChainDriver free_driver(p, [] {
        PathConfig c;
        c.T = 4.0;
        c.dt = 0.05;
        return c;
    }(), &gs, nullptr);
    McmcSettings mc;
    mc.sweeps = 16000;
    mc.burnin = 800;
    mc.chains = kAcc.chains;
    mc.seed = kAcc.seed + 1;
    PathConfig fcfg = free_driver.cfg();
    const int mid = fcfg.mid(), lag = 20;
    std::vector<Observable> obs{
        {"q0_sq",
         [mid](const ChainState& s) {
             double r = s.path.radius(mid);
             return r * r;
         }},
        {"ou1",
         [mid, lag](const ChainState& s) {
             const double *a = s.path.bead(mid), *b = s.path.bead(mid + lag);
             return a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
         }}};
    ChainRunResult rr = run_chains(free_driver, mc, obs);
    Estimate q0 = rr.combined("q0_sq"), ou = rr.combined("ou1");
    bool pass_mom = std::abs(q0.mean - 1.5) < kAcc.n_sigma * q0.stderr_;
    double ou_exact = 1.5 * std::exp(-1.0);
    bool pass_ou = std::abs(ou.mean - ou_exact) < kAcc.n_sigma * ou.stderr_;

    bool pass = tv < 1e-2 && pass_mom && pass_ou;
    return {3, pass,
            "exact-law oracle: toy total variation " + fmt(tv) +
                " (tol 1e-2); harmonic E|q0|^2 = " + fmt(q0.mean) + " +- " +
                fmt(q0.stderr_) + " vs 1.5; OU lag-1 = " + fmt(ou.mean) +
                " +- " + fmt(ou.stderr_) + " vs " + fmt(ou_exact)};
}

Line criterion4() {
    const DivergenceRuns& dr = divergence_runs();
    std::vector<CurvePoint> curve;
    bool caps_ok = true;
    for (const auto& run : dr.runs) {
        curve.push_back({run.T, run.estimates.at("F_cap10"), 0});
        const Estimate &c5 = run.estimates.at("F_cap5"),
                       &c20 = run.estimates.at("F_cap20");
        double se = std::sqrt(c5.stderr_ * c5.stderr_ + c20.stderr_ * c20.stderr_);
        if (std::abs(c5.mean - c20.mean) >
            std::max(kAcc.n_sigma * se, 1e-12 * std::abs(c5.mean)))
            caps_ok = false;
    }
    CheckResult dec = check_decreasing_curve("div", curve, kAcc.n_sigma,
                                             kAcc.decay_factor);
    double ratio = curve.back().value.mean / curve.front().value.mean;
    std::string txt = "divergence of the capped functional: values";
    for (auto& pt : curve)
        txt += " " + fmt(pt.value.mean) + "+-" + fmt(pt.value.stderr_);
    txt += "; last/first = " + fmt(ratio) + " (< 0.5), 4-sigma decrease " +
           (dec.pass ? "holds" : "FAILS") + ", cap-insensitive " +
           (caps_ok ? "yes" : "no");
    return {4, dec.pass && caps_ok, txt};
}

Line criterion5() {
    const DivergenceRuns& dr = divergence_runs();
    std::vector<CurvePoint> curve;
    bool bounded = true;
    for (const auto& run : dr.runs) {
        curve.push_back({run.T, run.estimates.at("exp_cross"), 0});
        if (curve.back().value.mean > 1.0 + 1e-12) bounded = false;
        if (!(curve.back().value.mean > 0.0)) bounded = false;
    }
    CheckResult dec = check_decreasing_curve("cross", curve, kAcc.n_sigma, 1.0);
    std::string txt = "cross-action overlap bound: values";
    for (auto& pt : curve)
        txt += " " + fmt(pt.value.mean) + "+-" + fmt(pt.value.stderr_);
    txt += std::string("; in (0,1] ") + (bounded ? "yes" : "NO") +
           ", decreasing beyond 4 sigma " + (dec.pass ? "yes" : "NO");
    return {5, dec.pass && bounded, txt};
}

Line criterion6() {
    McmcSettings mc;
    mc.burnin = kAcc.burnin;
    mc.chains = kAcc.chains;
    mc.seed = kAcc.seed + 6;
    mc.thin = 2;
    SimContext ctx = SimContext::make(acc_params(4, kAcc.e), IRTestFunction{},
                                      kAcc.dt, mc, kAcc.T_conv.back());
    ctx.n_bins = kAcc.n_bins;
    std::vector<LowerBoundPoint> curve;
    for (size_t i = 0; i < kAcc.T_conv.size(); ++i) {
        SimContext c2 = ctx;
        c2.mcmc.sweeps = kAcc.sweeps_conv[i];
        std::fprintf(stderr, "  [convergence run T=%g, %ld sweeps x %d chains]\n",
                     kAcc.T_conv[i], kAcc.sweeps_conv[i], kAcc.chains);
        GibbsPointResult run = run_gibbs_point(c2, kAcc.T_conv[i]);
        curve.push_back(convergent_lower_bound_point(c2, run));
    }
    CheckResult flat = check_flat_curve("conv", curve, kAcc.n_sigma);
    bool floor_ok = true;
    double vmax = 0.0, vmin = 1e300;
    for (auto& pt : curve) {
        if (!(pt.value + kAcc.n_sigma * pt.stderr_ >= pt.analytic_floor))
            floor_ok = false;
        vmax = std::max(vmax, pt.value);
        vmin = std::min(vmin, pt.value);
    }
    // stderr-independent uniformity: the finite-window functional converges
    // like 1/T, so the absolute spread must stay small on its own
    double drift = (vmax - vmin) / vmax;
    bool drift_ok = drift <= 0.02;
    std::string txt = "d=4 Jensen lower bound: values";
    for (auto& pt : curve)
        txt += " " + fmt(pt.value) + "+-" + fmt(pt.stderr_);
    txt += "; analytic floor " + fmt(curve.front().analytic_floor) +
           std::string("; positive and T-flat within 4 sigma ") +
           (flat.pass ? "yes" : std::string("NO (") + flat.detail + ")") +
           ", above floor " + (floor_ok ? "yes" : "NO") +
           ", relative T-spread " + fmt(drift) + " (<= 0.02)";
    return {6, flat.pass && floor_ok && drift_ok, txt};
}

Line criterion7() {
    const DivergenceRuns& dr = divergence_runs();
    const GibbsPointResult *r8 = nullptr, *r16 = nullptr;
    for (const auto& run : dr.runs) {
        if (run.T == 8.0) r8 = &run;
        if (run.T == 16.0) r16 = &run;
    }
    if (!r8 || !r16) return {7, false, "localization: T=8/16 runs missing"};
    LocalizationReport l8 = localization_ratio(dr.ctx, *r8);
    LocalizationReport l16 = localization_ratio(dr.ctx, *r16);
    CheckResult stab = check_band_stability("loc", l8, l16, kAcc.n_sigma);
    bool band_ok = l8.c_lo > 0.0 && l8.c_hi < 1e3 && l16.c_lo > 0.0;
    std::string txt = "localization band: T=8 ratios in [" + fmt(l8.c_lo) + "," +
                      fmt(l8.c_hi) + "], T=16 in [" + fmt(l16.c_lo) + "," +
                      fmt(l16.c_hi) + "]; per-bin 4-sigma stability " +
                      (stab.pass ? "holds" : "FAILS: " + stab.detail);
    return {7, stab.pass && band_ok, txt};
}

Line criterion8() {
    auto gauss = [](double k) { return std::exp(-0.5 * k * k); };
    std::vector<double> ts;
    for (int i = 0; i < 20; ++i) ts.push_back(10.0 * std::pow(10.0, i / 19.0));
    bool g_ok = true;
    std::string txt = "spectral tails:";
    for (int d : {3, 4}) {
        TailFit f = spectral_tail_fit(gauss, ts, acc_params(d, 1.0));
        bool ok = std::abs(f.exponent - (d - 1.0)) <= 0.05;
        g_ok = g_ok && ok;
        txt += " G(d=" + std::to_string(d) + ") exp " + fmt(f.exponent) +
               " vs " + fmt(d - 1.0) + (ok ? " ok;" : " FAIL;");
    }
    bool conv_ok = true, dom_ok = true;
    for (double gm : {0.5, 1.0}) {
        ConvolutionReport rep = convolution_tail_exponent(3, gm, ts);
        bool ok = std::abs(rep.fit.exponent - rep.claimed_exponent) <= 0.1;
        conv_ok = conv_ok && ok;
        dom_ok = dom_ok && rep.dominance;
        txt += " conv(gamma=" + fmt(gm) + ") exp " + fmt(rep.fit.exponent) +
               " vs claimed " + fmt(rep.claimed_exponent) +
               (ok ? " ok;" : " FAIL (the plain convolution inherits the"
                              " fattest factor's t^-gamma tail);");
    }
    txt += std::string(" dominance 2d+gamma-4 > d-1 ") + (dom_ok ? "holds" : "FAILS");
    return {8, g_ok && conv_ok && dom_ok, txt};
}

Line criterion9() {
    ModelParams p = acc_params(3, 1.0);
    PathConfig cfg;
    cfg.T = 3.0;
    cfg.dt = kAcc.dt;
    CounterRng rng(kAcc.seed, 9);
    bool bound_ok = true;
    double worst = 0.0;
    for (int i = 0; i < 1000; ++i) {
        DiscretizedPath path = DiscretizedPath::zeros(cfg);
        double amp = 2.5 * rng.uniform();
        int mode = 1 + static_cast<int>(rng.uniform_index(6));
        for (int b = 0; b < path.n; ++b) {
            double t = cfg.time(b);
            path.bead(b)[0] = amp * std::sin(mode * t);
            path.bead(b)[1] = amp * std::cos(0.7 * mode * t);
            path.bead(b)[2] = 0.4 * amp * std::sin(0.3 * mode * t + 0.5);
        }
        double kmag = std::exp(rng.uniform(std::log(1e-3), std::log(15.0)));
        double dir[3];
        rng.unit_vector(dir, 3);
        double kv[3] = {kmag * dir[0], kmag * dir[1], kmag * dir[2]};
        double t = rng.uniform(-cfg.T, cfg.T);
        double ratio = std::abs(g_hat(kv, t, path, cfg, p)) / g_envelope(kmag, p);
        worst = std::max(worst, ratio);
        if (ratio > 1.0 + 1e-12) bound_ok = false;
    }

    // q = 0: |g_{2T} - g_T| under the analytic e^{-kT} envelope at 100 points
    PathConfig c1;
    c1.T = 4.0;
    c1.dt = kAcc.dt;
    PathConfig c2 = c1;
    c2.T = 8.0;
    DiscretizedPath z1 = DiscretizedPath::zeros(c1), z2 = DiscretizedPath::zeros(c2);
    bool conv_ok = true;
    for (int i = 1; i <= 100; ++i) {
        double kmag = 0.03 * i;
        double kv[3] = {kmag, 0, 0};
        double diff = std::abs(g_hat0(kv, z2, c2, p) - g_hat0(kv, z1, c1, p));
        double env = rho_hat(kmag, p) / (2.0 * kmag * kmag) * std::exp(-kmag * c1.T);
        if (diff > env * (1.0 + 1e-10)) conv_ok = false;
    }
    return {9, bound_ok && conv_ok,
            "conditional-mean bounds: 1000 probes of |g|/envelope, worst " +
                fmt(worst) + " (<= 1); window-doubling gap under the e^{-kT} "
                "envelope at 100 k-points " + (conv_ok ? "holds" : "FAILS")};
}

Line criterion10() {
    auto run_to = [&](const std::string& dir, const std::string& exp,
                      RunConfig cfg) {
        cfg.out_dir = dir;
        fs::remove_all(dir);
        run_experiment(cfg, exp);
    };
    auto slurp = [](const std::string& path) {
        std::ifstream is(path, std::ios::binary);
        std::stringstream ss;
        ss << is.rdbuf();
        return ss.str();
    };
    RunConfig cfg;
    cfg.T = 2.0;
    cfg.dt = 0.1;
    cfg.mcmc.sweeps = 600;
    cfg.mcmc.burnin = 150;
    cfg.mcmc.chains = 2;
    cfg.mcmc.seed = kAcc.seed;
    bool pass = true;
    std::string detail = "bitwise-identical reruns:";
    for (auto [exp, file] : std::vector<std::pair<std::string, std::string>>{
             {"ir-scan", "ir_scan.csv"},
             {"kernels", "kernel_probe.csv"},
             {"sample", "sample_estimates.csv"}}) {
        run_to("tmp_acc_det_a", exp, cfg);
        run_to("tmp_acc_det_b", exp, cfg);
        std::string a = slurp("tmp_acc_det_a/" + file);
        std::string b = slurp("tmp_acc_det_b/" + file);
        bool same = !a.empty() && a == b;
        pass = pass && same;
        detail += " " + exp + (same ? " ok" : " DIFFERS");
    }
    fs::remove_all("tmp_acc_det_a");
    fs::remove_all("tmp_acc_det_b");
    return {10, pass, detail};
}

}  // namespace

int main(int argc, char** argv) {
    std::vector<int> which;
    for (int i = 1; i < argc; ++i) which.push_back(std::atoi(argv[i]));
    if (which.empty()) which = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10};

    int failures = 0;
    for (int c : which) {
        Line line{c, false, "unknown criterion"};
        try {
            switch (c) {
                case 1: line = criterion1(); break;
                case 2: line = criterion2(); break;
                case 3: line = criterion3(); break;
                case 4: line = criterion4(); break;
                case 5: line = criterion5(); break;
                case 6: line = criterion6(); break;
                case 7: line = criterion7(); break;
                case 8: line = criterion8(); break;
                case 9: line = criterion9(); break;
                case 10: line = criterion10(); break;
                default: break;
            }
        } catch (const std::exception& ex) {
            line = {c, false, std::string("exception: ") + ex.what()};
        }
        std::printf("[criterion %2d] %s %s\n", line.criterion,
                    line.pass ? "PASS" : "FAIL", line.text.c_str());
        std::fflush(stdout);
        failures += line.pass ? 0 : 1;
    }
    return failures;
}

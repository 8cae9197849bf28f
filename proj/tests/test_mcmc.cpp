#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <map>
#include <memory>
#include <vector>

#include "nirsim/mcmc.hpp"

using namespace nirsim;

namespace {

struct Harmonic {
    ModelParams p;
    RadialGroundState gs;
    Harmonic(double e = 0.0) {
        p.e = e;
        p.sigma = 1.0;
        p.pot_C = 0.5;
        p.pot_alpha = 1.0;
        GridSpec g;
        g.n = 8000;
        g.E_guess = 2.0;
        gs = solve_ground_state(PotentialSpec::from(p), 3, g);
    }
};

}  // namespace

TEST_CASE("3-bead discretized toy matches the enumerated Boltzmann law") {
    // Beads move on a 5-point 1d lattice embedded in R^3; the target is the
    // full discrete Gibbs density (reference + increments + interaction).
    Harmonic hx(1.0);
    KernelTable tab = build_kernel_table(hx.p, 6.0, 3.0);
    PathConfig cfg;
    cfg.T = 0.5;
    cfg.dt = 0.5;
    ChainDriver driver(hx.p, cfg, &hx.gs, nullptr);
    PairKernelView view(&tab, cfg.dt, cfg.n_beads());
    ChainDriver driver_int(hx.p, cfg, &hx.gs, &view);

    const std::vector<double> levels{-1.2, -0.6, 0.0, 0.6, 1.2};
    auto make_path = [&](int a, int b, int c) {
        DiscretizedPath p(3, 3);
        p.bead(0)[0] = levels[a];
        p.bead(1)[0] = levels[b];
        p.bead(2)[0] = levels[c];
        return p;
    };
    auto state_index = [](int a, int b, int c) { return (a * 5 + b) * 5 + c; };

    // exact Boltzmann weights over the 125 states
    std::vector<double> logw(125);
    double logmax = -1e300;
    for (int a = 0; a < 5; ++a)
        for (int b = 0; b < 5; ++b)
            for (int c = 0; c < 5; ++c) {
                double lp = driver_int.total_log_density(make_path(a, b, c));
                logw[state_index(a, b, c)] = lp;
                logmax = std::max(logmax, lp);
            }
    double Z = 0.0;
    for (double lw : logw) Z += std::exp(lw - logmax);
    std::vector<double> exact(125);
    for (int s = 0; s < 125; ++s) exact[s] = std::exp(logw[s] - logmax) / Z;

    // Metropolis chain over the discrete state space with uniform proposals
    CounterRng rng(777, 0);
    int st[3] = {2, 2, 2};
    double cur = logw[state_index(st[0], st[1], st[2])];
    const long steps = 3000000;
    std::vector<long> occ(125, 0);
    std::map<std::pair<int, int>, long> trans;
    int prev = state_index(st[0], st[1], st[2]);
    for (long it = 0; it < steps; ++it) {
        int bead = static_cast<int>(rng.uniform_index(3));
        int prop = static_cast<int>(rng.uniform_index(5));
        int old = st[bead];
        st[bead] = prop;
        double lp = logw[state_index(st[0], st[1], st[2])];
        if (lp - cur >= 0 || rng.uniform() < std::exp(lp - cur)) {
            cur = lp;
        } else {
            st[bead] = old;
        }
        int now = state_index(st[0], st[1], st[2]);
        occ[now]++;
        trans[{prev, now}]++;
        prev = now;
    }

    double tv = 0.0;
    for (int s = 0; s < 125; ++s)
        tv += std::abs(static_cast<double>(occ[s]) / steps - exact[s]);
    tv *= 0.5;
    CHECK(tv < 1e-2);

    // detailed balance entrywise: the flow difference between s->s' and
    // s'->s is mean-zero with variance ~ (X+Y); three standard errors
    int checked = 0;
    for (const auto& [key, X] : trans) {
        auto [s1, s2] = key;
        if (s1 >= s2) continue;
        auto it = trans.find({s2, s1});
        long Y = (it == trans.end()) ? 0 : it->second;
        if (X + Y < 400) continue;
        ++checked;
        CHECK(std::abs(static_cast<double>(X - Y)) <=
              3.0 * std::sqrt(static_cast<double>(X + Y)));
    }
    CHECK(checked > 50);
}

TEST_CASE("free harmonic chain reproduces exact moments and the OU law") {
    Harmonic hx(0.0);
    PathConfig cfg;
    cfg.T = 4.0;
    cfg.dt = 0.05;
    ChainDriver driver(hx.p, cfg, &hx.gs, nullptr);
    McmcSettings s;
    s.sweeps = 16000;
    s.burnin = 800;
    s.chains = 2;
    s.seed = 31;
    const int mid = cfg.mid();
    const int lag = static_cast<int>(std::lround(1.0 / cfg.dt));
    const int half = static_cast<int>(std::lround(0.5 * cfg.T / cfg.dt));
    std::vector<Observable> obs;
    obs.push_back({"q0_sq", [mid](const ChainState& st) {
                       double r = st.path.radius(mid);
                       return r * r;
                   }});
    obs.push_back({"ou_lag1", [mid, lag](const ChainState& st) {
                       const double *a = st.path.bead(mid),
                                    *b = st.path.bead(mid + lag);
                       return a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
                   }});
    obs.push_back({"reflect_plus", [mid, half](const ChainState& st) {
                       double r = st.path.radius(mid + half);
                       return r * r;
                   }});
    obs.push_back({"reflect_minus", [mid, half](const ChainState& st) {
                       double r = st.path.radius(mid - half);
                       return r * r;
                   }});
    obs.push_back({"const_one", [](const ChainState&) { return 1.0; }});

    std::vector<double> q0_radii;
    auto hook = [&](int chain, long, const ChainState& st) {
        if (chain == 0) q0_radii.push_back(st.path.radius(mid));
    };
    ChainRunResult rr = run_chains(driver, s, obs, hook);

    Estimate q0 = rr.combined("q0_sq");
    CHECK(std::abs(q0.mean - 1.5) < 4.0 * q0.stderr_);
    CHECK(q0.ess > 500);

    // stationary OU: E[q_0 . q_t] = (d/2) e^{-|t|} at t = 1
    Estimate ou = rr.combined("ou_lag1");
    CHECK(std::abs(ou.mean - 1.5 * std::exp(-1.0)) < 4.0 * ou.stderr_);

    // time reflection symmetry
    Estimate rp = rr.combined("reflect_plus"), rm = rr.combined("reflect_minus");
    CHECK(rp.consistent_within(rm, 4.0));

    // constant observable: mean 1, zero error
    Estimate one = rr.combined("const_one");
    CHECK(one.mean == 1.0);
    CHECK(one.stderr_ == 0.0);

    // t=0 marginal against the exact radial law (KS over chain 0 samples,
    // bounded by 1.5/sqrt(ESS) with the ESS of the q0 observable)
    std::sort(q0_radii.begin(), q0_radii.end());
    double ks = 0.0;
    const double N = static_cast<double>(q0_radii.size());
    for (size_t i = 0; i < q0_radii.size(); ++i) {
        double F = hx.gs.radial_cdf(q0_radii[i]);
        ks = std::max(ks, std::abs(F - (i + 1.0) / N));
        ks = std::max(ks, std::abs(F - i / N));
    }
    CHECK(ks < 1.5 / std::sqrt(0.5 * q0.ess));  // chain 0 holds half the ESS
}

TEST_CASE("acceptance rates sit inside (0.05, 0.95) after tuning") {
    ModelParams p;  // defaults: d=3, e=0.3, sigma=1, quartic
    RadialGroundState gs = solve_ground_state(PotentialSpec::from(p), 3);
    KernelTable tab = build_kernel_table(p, 8.0, 10.0);
    PathConfig cfg;
    cfg.T = 4.0;
    cfg.dt = 0.05;
    PairKernelView view(&tab, cfg.dt, cfg.n_beads());
    ChainDriver driver(p, cfg, &gs, &view);
    McmcSettings s;
    s.sweeps = 600;
    s.burnin = 600;
    s.chains = 1;
    s.seed = 5;
    ChainRunResult rr = run_chains(driver, s, {});
    for (int m = 0; m < 3; ++m) {
        double r = rr.chains[0].stats[m].rate();
        CHECK(r > 0.05);
        CHECK(r < 0.95);
    }
    CHECK(rr.chains[0].resync_count > 0);
    CHECK(rr.chains[0].worst_resync_rel <= 1e-8);
}

TEST_CASE("determinism: same seed gives bitwise identical estimates") {
    Harmonic hx(0.0);
    PathConfig cfg;
    cfg.T = 2.0;
    cfg.dt = 0.1;
    ChainDriver driver(hx.p, cfg, &hx.gs, nullptr);
    McmcSettings s;
    s.sweeps = 1500;
    s.burnin = 200;
    s.chains = 3;
    s.seed = 99;
    std::vector<Observable> obs{{"q0_sq", [mid = cfg.mid()](const ChainState& st) {
                                     double r = st.path.radius(mid);
                                     return r * r;
                                 }}};
    ChainRunResult a = run_chains(driver, s, obs);
    ChainRunResult b = run_chains(driver, s, obs);
    CHECK(a.estimates["q0_sq"].mean == b.estimates["q0_sq"].mean);
    CHECK(a.estimates["q0_sq"].stderr_ == b.estimates["q0_sq"].stderr_);

    // and independent of the worker count
    setenv("NIRSIM_THREADS", "1", 1);
    ChainRunResult c = run_chains(driver, s, obs);
    setenv("NIRSIM_THREADS", "2", 1);
    ChainRunResult d = run_chains(driver, s, obs);
    unsetenv("NIRSIM_THREADS");
    CHECK(c.estimates["q0_sq"].mean == d.estimates["q0_sq"].mean);
    CHECK(c.estimates["q0_sq"].mean == a.estimates["q0_sq"].mean);
}

TEST_CASE("coupling scaling of the target log density") {
    Harmonic h1(0.3), h2(0.6);
    KernelTable t1 = build_kernel_table(h1.p, 6.0, 3.0);
    KernelTable t2 = build_kernel_table(h2.p, 6.0, 3.0);
    PathConfig cfg;
    cfg.T = 1.0;
    cfg.dt = 0.1;
    PairKernelView v1(&t1, cfg.dt, cfg.n_beads());
    PairKernelView v2(&t2, cfg.dt, cfg.n_beads());
    ChainDriver d0(h1.p, cfg, &h1.gs, nullptr);
    ChainDriver d1(h1.p, cfg, &h1.gs, &v1);
    ChainDriver d2(h2.p, cfg, &h2.gs, &v2);
    CounterRng rng(42, 0);
    for (int rep = 0; rep < 8; ++rep) {
        DiscretizedPath path = DiscretizedPath::zeros(cfg);
        for (int i = 0; i < path.n; ++i)
            for (int k = 0; k < 3; ++k) path.bead(i)[k] = 0.5 * rng.normal();
        double base = d0.total_log_density(path);
        double a = d1.total_log_density(path) - base;  // -S_int at e=0.3
        double b = d2.total_log_density(path) - base;  // -S_int at e=0.6
        CHECK(b == doctest::Approx(4.0 * a).epsilon(1e-10));
    }
}

TEST_CASE("halving dt keeps the t=0 marginal consistent with nu0") {
    Harmonic hx(0.0);
    auto ks_at = [&](double dt, std::uint64_t seed) {
        PathConfig cfg;
        cfg.T = 2.0;
        cfg.dt = dt;
        ChainDriver driver(hx.p, cfg, &hx.gs, nullptr);
        McmcSettings s;
        s.sweeps = 6000;
        s.burnin = 400;
        s.chains = 1;
        s.seed = seed;
        std::vector<double> radii;
        auto hook = [&](int, long, const ChainState& st) {
            radii.push_back(st.path.radius(cfg.mid()));
        };
        std::vector<Observable> obs{{"q0_sq", [&cfg](const ChainState& st) {
                                         double r = st.path.radius(cfg.mid());
                                         return r * r;
                                     }}};
        ChainRunResult rr = run_chains(driver, s, obs, hook);
        std::sort(radii.begin(), radii.end());
        double ks = 0.0;
        double N = static_cast<double>(radii.size());
        for (size_t i = 0; i < radii.size(); ++i) {
            double F = hx.gs.radial_cdf(radii[i]);
            ks = std::max(ks, std::abs(F - (i + 1.0) / N));
            ks = std::max(ks, std::abs(F - i / N));
        }
        return std::pair<double, double>(ks, rr.combined("q0_sq").ess);
    };
    auto [ks1, ess1] = ks_at(0.1, 7);
    auto [ks2, ess2] = ks_at(0.05, 8);
    double noise = 1.5 / std::sqrt(std::min(ess1, ess2));
    CHECK(std::abs(ks2 - ks1) < 2.0 * noise);
}

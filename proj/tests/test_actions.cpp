#include <doctest.h>

#include <cmath>
#include <memory>
#include <vector>

#include "nirsim/actions.hpp"
#include "nirsim/quadrature.hpp"
#include "nirsim/rng.hpp"

using namespace nirsim;

namespace {

ModelParams unit_params() {
    ModelParams p;
    p.e = 1.0;
    p.sigma = 1.0;
    p.pot_C = 0.5;
    p.pot_alpha = 1.0;  // harmonic
    return p;
}

struct Fixture {
    ModelParams p = unit_params();
    RadialGroundState gs;
    std::shared_ptr<KernelTable> tab;
    Fixture() {
        GridSpec g;
        g.n = 8000;
        g.E_guess = 2.0;
        gs = solve_ground_state(PotentialSpec::from(p), 3, g);
        tab = std::make_shared<KernelTable>(build_kernel_table(p, 8.0, 6.0));
    }
};

DiscretizedPath random_path(const PathConfig& cfg, double scale, CounterRng& rng) {
    DiscretizedPath path = DiscretizedPath::zeros(cfg);
    for (int i = 0; i < path.n; ++i)
        for (int k = 0; k < cfg.d; ++k) path.bead(i)[k] = scale * rng.normal();
    return path;
}

}  // namespace

TEST_CASE("reference log weight at the constant zero path") {
    Fixture fx;
    PathConfig cfg;
    cfg.T = 1.0;
    cfg.dt = 0.05;
    DiscretizedPath path = DiscretizedPath::zeros(cfg);
    double lw = reference_log_weight(path, fx.gs, cfg);
    // ln psi(0) twice, V(0) = 0, trapezoid weights sum to 2T/dt
    double expect = 2.0 * fx.gs.ln_psi(0.0) + 2.0 * cfg.T * fx.gs.E_p;
    CHECK(lw == doctest::Approx(expect).epsilon(1e-12));

    // out of domain -> domain error
    path.bead(3)[0] = fx.gs.r_domain + 0.5;
    CHECK_THROWS_AS(reference_log_weight(path, fx.gs, cfg), std::domain_error);
}

TEST_CASE("interaction action: zero coupling, e^2 scaling, quadrature oracle") {
    Fixture fx;
    PathConfig cfg;
    cfg.T = 1.0;
    cfg.dt = 0.05;
    const int n = cfg.n_beads();
    PairKernelView view(fx.tab.get(), cfg.dt, n);

    PairKernelView empty;
    DiscretizedPath zero = DiscretizedPath::zeros(cfg);
    CHECK(interaction_action(zero, empty, cfg) == 0.0);
    CHECK(cross_action(zero, empty, cfg) == 0.0);

    // 2d trapezoid vs direct double quadrature for the frozen path:
    // S = int int W(0,|t-s|) dt ds over [-1,1]^2
    double S_disc = interaction_action(zero, view, cfg);
    auto Wt = [&](double t) { return pair_kernel_momentum(0.0, t, fx.p); };
    auto inner = [&](double t) {
        return quad::adaptive([&](double s) { return Wt(std::abs(t - s)); },
                              -1.0, 1.0, 1e-11, 1e-9);
    };
    double S_exact = quad::adaptive(inner, -1.0, 1.0, 1e-10, 1e-8);
    CHECK(S_disc == doctest::Approx(S_exact).epsilon(1e-3));

    // scaling in the coupling: W ~ e^2 so the action quadruples at 2e
    ModelParams p2 = fx.p;
    p2.e = 2.0;
    KernelTable tab2 = build_kernel_table(p2, 8.0, 6.0);
    PairKernelView view2(&tab2, cfg.dt, n);
    CounterRng rng(11, 2);
    DiscretizedPath path = random_path(cfg, 0.5, rng);
    CHECK(interaction_action(path, view2, cfg) ==
          doctest::Approx(4.0 * interaction_action(path, view, cfg)).epsilon(1e-9));
    CHECK(cross_action(path, view2, cfg) ==
          doctest::Approx(4.0 * cross_action(path, view, cfg)).epsilon(1e-9));
}

TEST_CASE("cross action sign and dominance") {
    Fixture fx;
    PathConfig cfg;
    cfg.T = 2.0;
    cfg.dt = 0.1;
    PairKernelView view(fx.tab.get(), cfg.dt, cfg.n_beads());
    CounterRng rng(5, 9);
    for (int rep = 0; rep < 10; ++rep) {
        DiscretizedPath path = random_path(cfg, 0.6, rng);
        double cross = cross_action(path, view, cfg);
        CHECK(cross <= 1e-12);  // each W value is <= 0 in d=3
        double full = interaction_action(path, view, cfg);
        CHECK(cross >= full - 1e-12);  // the same-sign blocks are also <= 0
    }
}

TEST_CASE("lag view matches the table") {
    Fixture fx;
    PathConfig cfg;
    cfg.T = 2.0;
    cfg.dt = 0.1;
    PairKernelView view(fx.tab.get(), cfg.dt, cfg.n_beads());
    CounterRng rng(17, 3);
    for (int i = 0; i < 200; ++i) {
        int lag = static_cast<int>(rng.uniform_index(cfg.n_beads()));
        double r = 7.9 * rng.uniform();
        double a = view(lag, r);
        double b = (*fx.tab)(r, lag * cfg.dt);
        CHECK(a == doctest::Approx(b).epsilon(2e-6));
    }
}

TEST_CASE("incremental deltas agree with full recomputation") {
    Fixture fx;
    PathConfig cfg;
    cfg.T = 1.5;
    cfg.dt = 0.1;
    PairKernelView view(fx.tab.get(), cfg.dt, cfg.n_beads());
    CounterRng rng(23, 8);
    DiscretizedPath path = random_path(cfg, 0.6, rng);
    double full0 = interaction_action(path, view, cfg);
    double cross0 = cross_action(path, view, cfg);

    SUBCASE("single bead") {
        for (int m : {0, 1, cfg.mid(), cfg.n_beads() - 1}) {
            double xn[3] = {0.3 * rng.normal(), 0.3 * rng.normal(),
                            0.3 * rng.normal()};
            ActionDelta d = action_delta_single(path, view, cfg, m, xn);
            DiscretizedPath moved = path;
            for (int k = 0; k < 3; ++k) moved.bead(m)[k] = xn[k];
            CHECK(full0 + d.dfull ==
                  doctest::Approx(interaction_action(moved, view, cfg)).epsilon(1e-10));
            CHECK(cross0 + d.dcross ==
                  doctest::Approx(cross_action(moved, view, cfg)).epsilon(1e-10));
        }
    }
    SUBCASE("block") {
        int a = 4, b = 14;
        std::vector<double> xn(3 * (b - a - 1));
        for (double& x : xn) x = 0.5 * rng.normal();
        ActionDelta d = action_delta_block(path, view, cfg, a, b, xn);
        DiscretizedPath moved = path;
        for (int j = a + 1; j < b; ++j)
            for (int k = 0; k < 3; ++k)
                moved.bead(j)[k] = xn[3 * (j - a - 1) + k];
        CHECK(full0 + d.dfull ==
              doctest::Approx(interaction_action(moved, view, cfg)).epsilon(1e-10));
        CHECK(cross0 + d.dcross ==
              doctest::Approx(cross_action(moved, view, cfg)).epsilon(1e-10));
    }
}

TEST_CASE("folded kernel sum is nonpositive (it is -2 int |g|^2 |k| dk)") {
    Fixture fx;
    PathConfig cfg;
    cfg.T = 1.5;
    cfg.dt = 0.1;
    PairKernelView view(fx.tab.get(), cfg.dt, cfg.n_beads());
    CounterRng rng(29, 1);
    for (int rep = 0; rep < 5; ++rep) {
        DiscretizedPath path = random_path(cfg, 0.5, rng);
        CHECK(folded_time_kernel_sum(path, view, cfg) <= 0.0);
    }
}

TEST_CASE("path config validation") {
    PathConfig bad;
    bad.T = 1.0;
    bad.dt = 0.3;  // 2T/dt not integer
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    PathConfig ok;
    ok.T = 1.5;
    ok.dt = 0.3;
    ok.validate();
    CHECK(ok.n_beads() == 11);
    CHECK(ok.mid() == 5);
    CHECK(ok.time(5) == doctest::Approx(0.0));
}

#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <vector>

#include "nirsim/schrodinger.hpp"

using namespace nirsim;

namespace {
constexpr double kPi = 3.14159265358979323846;

RadialGroundState harmonic(int d, int n = 12000) {
    PotentialSpec pot{0.5, 1.0};  // V = |q|^2/2
    GridSpec g;
    g.n = n;
    g.E_guess = 2.0;
    return solve_ground_state(pot, d, g);
}
}  // namespace

TEST_CASE("harmonic oscillator ground state is exact") {
    RadialGroundState gs = harmonic(3);
    CHECK(gs.E_p == doctest::Approx(1.5).epsilon(1e-6));
    CHECK(gs.residual < 1e-6);

    // psi0 ~ exp(-r^2/2) up to normalization pi^{-3/4}
    double norm = std::pow(kPi, -0.75);
    for (double r : {0.0, 0.5, 1.0, 2.0, 3.5})
        CHECK(gs.psi(r) == doctest::Approx(norm * std::exp(-0.5 * r * r)).epsilon(1e-5));

    // normalization: S2 int psi^2 r^2 dr = 1
    double acc = 0.0;
    for (size_t i = 1; i < gs.r_grid.size(); ++i) {
        double f1 = gs.psi_grid[i] * gs.psi_grid[i] * gs.r_grid[i] * gs.r_grid[i];
        double f0 = gs.psi_grid[i - 1] * gs.psi_grid[i - 1] * gs.r_grid[i - 1] *
                    gs.r_grid[i - 1];
        acc += 0.5 * gs.h * (f0 + f1);
    }
    CHECK(4 * kPi * acc == doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("quartic ground state matches a 10x finer grid oracle") {
    PotentialSpec pot{1.0, 2.0};  // V = |q|^4
    GridSpec coarse;
    coarse.n = 6000;
    coarse.E_guess = 3.0;
    RadialGroundState a = solve_ground_state(pot, 3, coarse);
    GridSpec fine;
    fine.n = 60000;
    fine.E_guess = 3.0;
    RadialGroundState b = solve_ground_state(pot, 3, fine);
    CHECK(a.E_p == doctest::Approx(b.E_p).epsilon(1e-6));
    CHECK(a.residual < 1e-6);
    CHECK(b.E_p > 0.0);
}

TEST_CASE("positivity and refinement stability") {
    for (auto [C, alpha] : {std::pair{0.5, 1.0}, std::pair{1.0, 2.0}}) {
        PotentialSpec pot{C, alpha};
        GridSpec g1;
        g1.n = 30000;
        GridSpec g2;
        g2.n = 60000;
        RadialGroundState s1 = solve_ground_state(pot, 3, g1);
        RadialGroundState s2 = solve_ground_state(pot, 3, g2);
        CHECK(std::abs(s1.E_p - s2.E_p) / std::abs(s2.E_p) < 1e-7);
        for (size_t i = 0; i + 1 < s1.psi_grid.size(); ++i)
            CHECK(s1.psi_grid[i] > 0.0);
    }
}

TEST_CASE("drift: harmonic exactness, radial direction, oddness, domain") {
    RadialGroundState gs = harmonic(3);
    double q[3] = {0.4, -0.8, 0.3};
    double v[3];
    gs.drift(q, v);
    for (int k = 0; k < 3; ++k) CHECK(v[k] == doctest::Approx(-q[k]).epsilon(1e-6));

    // drift parallel to q
    double dot = 0, nv = 0, nq = 0;
    for (int k = 0; k < 3; ++k) {
        dot += v[k] * q[k];
        nv += v[k] * v[k];
        nq += q[k] * q[k];
    }
    CHECK(std::abs(std::abs(dot) / std::sqrt(nv * nq) - 1.0) < 1e-12);

    // odd symmetry is exact
    double qm[3] = {-q[0], -q[1], -q[2]}, vm[3];
    gs.drift(qm, vm);
    for (int k = 0; k < 3; ++k) CHECK(vm[k] == -v[k]);

    double zero[3] = {0, 0, 0}, vz[3];
    gs.drift(zero, vz);
    for (int k = 0; k < 3; ++k) CHECK(vz[k] == 0.0);

    double far[3] = {gs.r_domain + 1.0, 0, 0};
    CHECK_THROWS_AS(gs.drift(far, vz), std::domain_error);
}

TEST_CASE("drift magnitude vs finite differences of ln psi (quartic)") {
    PotentialSpec pot{1.0, 2.0};
    GridSpec g;
    g.n = 20000;
    RadialGroundState gs = solve_ground_state(pot, 3, g);
    for (double r : {0.2, 0.6, 1.0, 1.4}) {
        double h = 1e-5;
        double fd = (gs.ln_psi(r + h) - gs.ln_psi(r - h)) / (2 * h);
        double q[3] = {r, 0, 0}, v[3];
        gs.drift(q, v);
        CHECK(v[0] == doctest::Approx(fd).epsilon(1e-5));
    }
}

TEST_CASE("nu0 sampling: moments and KS against the radial CDF") {
    RadialGroundState gs = harmonic(3);
    CounterRng rng(2024, 11);
    const int N = 100000;
    std::vector<double> radii(N);
    double mean_sq = 0.0, m1[3] = {0, 0, 0};
    for (int i = 0; i < N; ++i) {
        double q[3];
        gs.sample_nu0(q, rng);
        double r2 = q[0] * q[0] + q[1] * q[1] + q[2] * q[2];
        mean_sq += r2;
        radii[i] = std::sqrt(r2);
        for (int k = 0; k < 3; ++k) m1[k] += q[k];
    }
    mean_sq /= N;
    // E|q|^2 = 3/2 for psi0^2 = Gaussian with coordinate variance 1/2;
    // Var(|q|^2) = 3/2, four standard errors
    double se = std::sqrt(1.5 / N);
    CHECK(std::abs(mean_sq - 1.5) < 4 * se);
    for (int k = 0; k < 3; ++k)
        CHECK(std::abs(m1[k] / N) < 4 * std::sqrt(0.5 / N));

    std::sort(radii.begin(), radii.end());
    double ks = 0.0;
    for (int i = 0; i < N; ++i) {
        double F = gs.radial_cdf(radii[i]);
        ks = std::max(ks, std::abs(F - (i + 1.0) / N));
        ks = std::max(ks, std::abs(F - static_cast<double>(i) / N));
    }
    CHECK(ks < 1.5 / std::sqrt(static_cast<double>(N)));
}

TEST_CASE("ground state save/load round trip") {
    RadialGroundState gs = harmonic(3, 4000);
    std::string path = "gs_roundtrip.nirg";
    gs.save(path);
    RadialGroundState back = RadialGroundState::load(path);
    std::remove(path.c_str());
    CHECK(back.E_p == gs.E_p);
    CHECK(back.r_domain == doctest::Approx(gs.r_domain));
    for (double r : {0.1, 0.9, 2.2})
        CHECK(back.ln_psi(r) == doctest::Approx(gs.ln_psi(r)).epsilon(1e-14));
}

TEST_CASE("d=4 and d=5 ground states solve and normalize") {
    for (int d : {4, 5}) {
        PotentialSpec pot{1.0, 2.0};
        GridSpec g;
        g.n = 8000;
        RadialGroundState gs = solve_ground_state(pot, d, g);
        CHECK(gs.E_p > 0.0);
        CHECK(gs.residual < 1e-6);
        // dimension-correct normalization
        double acc = 0.0;
        for (size_t i = 1; i < gs.r_grid.size(); ++i) {
            auto f = [&](size_t j) {
                return gs.psi_grid[j] * gs.psi_grid[j] *
                       std::pow(gs.r_grid[j], d - 1.0);
            };
            acc += 0.5 * gs.h * (f(i - 1) + f(i));
        }
        CHECK(sphere_area(d) * acc == doctest::Approx(1.0).epsilon(1e-7));
    }
}

#include <doctest.h>

#include "cfio/decompose.hpp"
#include "cfio/errors.hpp"
#include "cfio/rng.hpp"

#include <cmath>
#include <numbers>

using namespace cfio;

TEST_CASE("dyadic partition of unity")
{
    auto cut = make_cutoffs();
    CHECK(std::abs(cut.chi0(1.0) + cut.chi1(1.0) - 1.0) < 1e-15);
    CHECK(cut.chi1(3.0) == 0.0);
    CHECK(cut.chi1(0.4) == 0.0);
    double worst = 0.0;
    for (int i = 0; i <= 20000; ++i) {
        double s = -1e6 + i * 100.0 + 0.37 * (i % 7);
        double sum = cut.chi0(s);
        for (int k = 0; k < 25; ++k)
            sum += cut.chi1(std::ldexp(s, -k));
        worst = std::max(worst, std::abs(sum - 1.0));
    }
    for (int i = 0; i <= 2000; ++i) {
        double s = i * 1e-3 * 5.0;
        double sum = cut.chi0(s);
        for (int k = 0; k < 25; ++k)
            sum += cut.chi1(std::ldexp(s, -k));
        worst = std::max(worst, std::abs(sum - 1.0));
        CHECK(cut.chi1(s) >= 0.0);
        CHECK(cut.chi1(s) == cut.chi1(-s));
        if (cut.chi1(s) > 0.0)
            CHECK(cut.chi1_tilde(s) == doctest::Approx(1.0).epsilon(1e-15));
    }
    CHECK(worst < 1e-12);
    for (double s = 0.9; s <= 1.1; s += 0.01)
        CHECK(std::abs(cut.chi1(s) + cut.chi1(2 * s) + cut.chi1(s / 2) - 1.0) < 1e-12);
    auto sharp = make_cutoffs(4.0);
    CHECK(sharp.psi(1.3) == 1.0);
    CHECK_THROWS_AS(make_cutoffs(0.0), InputError);
}

TEST_CASE("additive and time cutoffs")
{
    for (double s = -10; s <= 10; s += 0.0137) {
        double sum = 0.0;
        for (int k = -12; k <= 12; ++k)
            sum += chi_plus(s - k);
        CHECK(std::abs(sum - 1.0) < 1e-12);
        CHECK(chi_plus(s) == chi_plus(-s));
    }
    CHECK(chi_plus(1.0) == 0.0);
    double kappa = 1.1;
    CHECK(chi_kappa(1.0, kappa) == 1.0);
    CHECK(chi_kappa(1.0 / kappa, kappa) == 1.0);
    CHECK(chi_kappa(0.5 / kappa, kappa) == 0.0);
    CHECK(chi_kappa(2.0 * kappa, kappa) == 0.0);
}

TEST_CASE("zonal nets: neighbour queries are exact")
{
    CounterRng rng(51);
    for (int dim : {2, 3}) {
        ZonalNet net(dim, 0.05);
        for (int s = 0; s < 50; ++s) {
            Vec w = rng.unit_vec(dim);
            double r = 0.12;
            auto near = net.near(w, r);
            long long brute = 0;
            for (long long i = 0; i < net.count(); ++i)
                brute += (net.point(i) - w).norm() <= r;
            CHECK(static_cast<long long>(near.size()) == brute);
        }
    }
}

TEST_CASE("second dyadic decomposition")
{
    auto ds = make_directions(2, 0);
    CHECK(ds.size() > 0);
    CHECK(ds.size() < 100);
    CounterRng rng(52);
    for (int d : {2, 3}) {
        auto set = make_directions(d, 4);
        CHECK(set.covering_radius(2000, 5) < 1.5 * set.delta() + 1e-12);
        for (int s = 0; s < 300; ++s) {
            Vec xi = rng.normal_vec(d) * 3.0;
            auto w = set.weights(xi);
            double sum = 0.0;
            for (auto [i, v] : w) {
                sum += v;
                CHECK((xi.normalized() - set.directions()[i]).norm() < 2 * set.delta());
            }
            CHECK(std::abs(sum - 1.0) < 1e-10);
            // every direction well inside the 2 delta cap carries weight
            int inside = 0;
            for (const Vec& v : set.directions())
                inside += (xi.normalized() - v).norm() < 1.9 * set.delta();
            CHECK(inside <= static_cast<int>(w.size()));
        }
        // separation
        for (size_t i = 0; i < std::min<size_t>(set.size(), 200); ++i)
            for (size_t j = 0; j < i; ++j)
                CHECK((set.directions()[i] - set.directions()[j]).norm() >= set.delta());
    }
}

TEST_CASE("direction counts grow like 2^{m(d-1)/2}")
{
    std::vector<double> ms, ls;
    for (int m = 2; m <= 6; m += 2) {
        ms.push_back(m);
        ls.push_back(std::log2(double(make_directions(3, m).size())));
    }
    double slope = (ls.back() - ls.front()) / (ms.back() - ms.front());
    CHECK(std::abs(slope - 1.0) < 0.3);
}

TEST_CASE("mu sectors")
{
    CounterRng rng(53);
    for (int d2 : {1, 2, 3}) {
        MuSectorDecomposition dec(d2, 16 * 1.21, 1.1);
        for (int s = 0; s < 200; ++s) {
            Vec mu = rng.normal_vec(d2);
            double sum = 0.0;
            for (auto [i, w] : dec.weights(mu)) {
                sum += w;
                Vec v = dec.sector(i);
                CHECK(mu.dot(v) > 0.0);
                Vec perp = mu - mu.dot(v) * v;
                CHECK(perp.norm() / mu.norm() <= dec.c_kappa() / dec.T() + 1e-12);
                CHECK(std::abs(dec.weight(i, mu) - w) < 1e-15);
            }
            CHECK(std::abs(sum - 1.0) < 1e-10);
        }
    }
    for (int d2 : {2, 3}) {
        std::vector<double> ratios;
        for (double T : {16 * 1.21, 32 * 1.21, 64 * 1.21}) {
            MuSectorDecomposition dec(d2, T, 1.1);
            ratios.push_back(double(dec.count()) / std::pow(T, d2 - 1));
        }
        auto [lo, hi] = std::minmax_element(ratios.begin(), ratios.end());
        CHECK(*hi / *lo < 2.0);
    }
}

TEST_CASE("sheared mu support bound")
{
    CounterRng rng(57);
    const double kappa = 1.1;
    for (int d2 : {2, 3}) {
        MuSectorDecomposition dec(d2, 32 * kappa * kappa, kappa);
        const double bound = dec.sheared_mu_bound(kappa);
        CHECK(dec.sheared_support_holds(kappa));
        double worst = 0.0;
        for (int s = 0; s < 400; ++s) {
            // original mu in a sector, |mu| <= kappa |xi| with |xi| = 1; the shift k
            // lands mu~ . v in [-2, 2] as chi_plus requires
            const long long i = static_cast<long long>(rng.uniform(0, double(dec.count()) - 1e-9));
            const Vec v = dec.sector(i);
            Vec mu = v + rng.uniform(0, 1) * (dec.c_kappa() / dec.T()) * rng.normal_vec(d2).normalized();
            if (dec.weight(i, mu) == 0.0)
                continue;
            mu *= rng.uniform(0.2, kappa) / mu.norm();
            const double t = rng.uniform(dec.T() / (2 * kappa), 2 * kappa * dec.T());
            const double k = std::round(t * mu.dot(v) / 2.0);
            const Vec tilde = t * mu - 2.0 * k * v;
            worst = std::max(worst, tilde.norm());
        }
        CHECK(worst > 1.0);
        CHECK(worst <= bound);
    }
    CHECK(MuSectorDecomposition(1, 20, kappa).sheared_mu_bound(kappa) == 2.0);
    CHECK_FALSE(MuSectorDecomposition(2, 20, kappa, 0.5).sheared_support_holds(2.0));
}

TEST_CASE("mu shear")
{
    auto g = heisenberg();
    CounterRng rng(54);
    Covector c{rng.normal_vec(2), rng.normal_vec(1)};
    Vec v = Vec::Ones(1);
    auto s0 = mu_shear(g, 1.0, 0, v, c);
    CHECK((s0.mu - c.mu).norm() == 0.0);
    Covector unit{(Vec(2) << 1, 0).finished(), Vec::Zero(1)};
    CHECK((mu_shear(g, 6.0, 3, v, unit).mu - v).norm() < 1e-15);
    for (int i = 0; i < 20; ++i) {
        Covector r{rng.normal_vec(2), rng.normal_vec(1)};
        double t = rng.uniform(1, 30);
        int k = int(rng.uniform(-5, 5));
        auto back = mu_unshear(g, t, k, v, mu_shear(g, t, k, v, r));
        CHECK((back.mu - r.mu).norm() < 1e-14 * std::max(1.0, r.mu.norm() + r.xi.norm() * std::abs(k)));
    }
    CHECK_THROWS_AS(mu_shear(g, 0.0, 1, v, c), ZeroTime);
    CHECK_THROWS_AS(mu_shear(g, 1.0, 1, v, {Vec::Zero(2), c.mu}), ZeroFrequency);
}

TEST_CASE("sheared symbols")
{
    auto g = heisenberg();
    double kappa = 1.1, t = 20.0;
    MuSectorDecomposition dec(1, t, kappa);
    Symbol q = band_symbol(1.0, 2.0, 0.95, 1.05, 0.03 / 0.95);
    CounterRng rng(55);
    double sup = 0.0;
    for (int k : {1, 2, 9, 10, 11, 30}) {
        Symbol s = sheared_symbol(g, q, k, dec.sector(0), dec, 0);
        for (int i = 0; i < 400; ++i) {
            double xn = rng.uniform(0.9, 2.1), a = rng.uniform(0, 2 * std::numbers::pi);
            Covector c{(Vec(2) << xn * std::cos(a), xn * std::sin(a)).finished(), Vec::Constant(1, rng.uniform(-3, 3) * xn)};
            cplx v = s(t, c);
            if (k <= t / (8 * kappa) || k >= kappa * t)
                CHECK(v == 0.0);
            if (v != 0.0)
                CHECK(c.mu.norm() / c.xi.norm() <= 2.5);
            sup = std::max(sup, std::abs(v) * std::pow(2 * std::numbers::pi, 3));
        }
    }
    CHECK(sup > 0.0);
    CHECK(sup < 2.0);
}

TEST_CASE("initial symbols")
{
    auto g = heisenberg();
    auto q0 = initial_symbol(g, 3, 0);
    Covector c{(Vec(2) << 8, 0).finished(), Vec::Constant(1, 8)};
    CHECK(std::abs(q0(0, c) - 1.0) < 1e-15);
    CHECK(q0(0, {c.xi * 3, c.mu}) == 0.0);
    auto q1 = initial_symbol(g, 3, 1);
    // eta_1 vanishes where eta_0 is locally constant
    CHECK(std::abs(q1(0, c)) < 1e-6);
    Covector edge{(Vec(2) << 8 * 1.6, 0).finished(), Vec::Constant(1, 8)};
    CHECK(std::abs(q1(0, edge)) > 1e-3);
    CHECK_THROWS_AS(initial_symbol(g, 3, 2), InputError);
}

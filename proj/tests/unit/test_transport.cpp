#include <doctest.h>

#include "cfio/errors.hpp"
#include "cfio/fd.hpp"
#include "cfio/rng.hpp"
#include "cfio/transport.hpp"

using namespace cfio;

namespace {

constexpr cplx I1(0.0, 1.0);

const char* metivier[] = {"heisenberg", "nonisotropic", "quaternionic"};

Covector random_cov(CounterRng& rng, const Group2Step& g)
{
    return {rng.normal_vec(g.d1()), rng.normal_vec(g.d2())};
}

double rel(cplx a, cplx b, double floor) { return std::abs(a - b) / std::max(std::abs(b), floor); }

} // namespace

TEST_CASE("F coefficients: closed forms against their definitions")
{
    CounterRng rng(41);
    for (const auto& name : metivier) {
        auto g = builtin_group(name);
        for (int k = 0; k < 4; ++k) {
            Covector c = random_cov(rng, g);
            Point p{rng.normal_vec(g.d1()), rng.normal_vec(g.d2())};
            double t = rng.uniform(-4, 4);
            auto a = f_coeffs(g, t, p, c);
            auto b = f_coeffs_definition(g, t, p, c);
            double n = pack(c).norm();
            CHECK(a.f02 == 1.0);
            CHECK(rel(a.f20, b.f20, 1e-3 * n * n) < 1e-5);
            CHECK(rel(a.f11, b.f11, 1e-3 * n) < 1e-5);
            CHECK(rel(a.f10, b.f10, 1e-3 * n) < 1e-5);
            CHECK(rel(a.f01, b.f01, 1e-3) < 1e-5);
            CHECK(rel(a.f00, b.f00, 1e-3) < 1e-5);
        }
    }
}

TEST_CASE("F01 at t = 0")
{
    auto g = heisenberg();
    Covector c{(Vec(2) << 0.6, 0.8).finished(), Vec::Constant(1, 3.0)};
    auto b = f_coeffs(g, 0.0, g.identity(), c);
    CHECK(std::abs(b.f01 - (-I1 * 1.5)) < 1e-14);
}

TEST_CASE("crucial coefficient identities on the flow")
{
    CounterRng rng(42);
    for (const auto& name : metivier) {
        auto g = builtin_group(name);
        for (int k = 0; k < 5; ++k) {
            Covector c = random_cov(rng, g);
            double t = rng.uniform(-4, 4), xn = c.xi.norm();
            auto pd = phase_data(g, t, c);
            auto b = f_coeffs(pd, pd.xt);
            CHECK(std::abs(b.f20) <= 1e-8 * xn * xn);
            CHECK(std::abs(b.f11 - 2.0 * xn) <= 1e-8 * xn);
            CHECK(std::abs(b.k) <= 1e-6 * xn);
            for (int j = 0; j < g.d1(); ++j) {
                auto f = [&](double s) { return f_coeffs(pd, Vec(pd.xt + s * Vec::Unit(g.d1(), j))).f20; };
                CHECK(std::abs(fd::d1(f, 0.0, 1e-2)) <= 1e-6 * xn * xn);
            }
        }
    }
}

TEST_CASE("K against F10 + R F20 and linearity in the displacement")
{
    CounterRng rng(43);
    for (const auto& name : metivier) {
        auto g = builtin_group(name);
        for (int k = 0; k < 2; ++k) {
            Covector c = random_cov(rng, g);
            Point p{rng.normal_vec(g.d1()), rng.normal_vec(g.d2())};
            double t = rng.uniform(-4, 4);
            auto b = f_coeffs(g, t, p, c);
            Amplitude f20 = [&](const Vec& x, const Covector& cc) { return f_coeffs(phase_data(g, t, cc), x).f20; };
            cplx oracle = b.f10 + apply_r_numeric(g, f20, t, p.x, c);
            CHECK(rel(b.k, oracle, 1e-3 * c.xi.norm()) < 1e-4);
        }
    }
    auto g = heisenberg();
    Covector c{(Vec(2) << 1, 2).finished(), Vec::Constant(1, 1.5)};
    Vec v = (Vec(2) << 0.3, -0.7).finished();
    cplx k1 = k_value(g, 0.0, {1e-2 * v, Vec::Zero(1)}, c);
    cplx k2 = k_value(g, 0.0, {0.5e-2 * v, Vec::Zero(1)}, c);
    CHECK(std::abs(k1 / k2 - 2.0) < 1e-10);
}

TEST_CASE("R oracle on simple amplitudes")
{
    auto g = builtin_group("nonisotropic");
    CounterRng rng(44);
    Covector c = random_cov(rng, g);
    double t = 0.7;
    Amplitude one = [](const Vec&, const Covector&) { return cplx(1.0); };
    CHECK(std::abs(apply_r_numeric(g, one, t, rng.normal_vec(4), c)) < 1e-12);
    // Lambda_10 = F01 + R F11 on the flow
    auto pd = phase_data(g, t, c);
    Amplitude f11 = [&](const Vec& x, const Covector& cc) { return f_coeffs(phase_data(g, t, cc), x).f11; };
    cplx rf11 = apply_r_numeric(g, f11, t, pd.xt, c);
    auto l = lambda_coeffs(pd);
    auto f = f_coeffs(pd, pd.xt);
    CHECK(std::abs(l.l10 - (f.f01 + rf11)) < 1e-7);
    // R F20 = -F10 on the flow
    Amplitude f20 = [&](const Vec& x, const Covector& cc) { return f_coeffs(phase_data(g, t, cc), x).f20; };
    CHECK(std::abs(apply_r_numeric(g, f20, t, pd.xt, c) + f.f10) < 1e-7);
}

TEST_CASE("Lambda coefficients")
{
    CounterRng rng(45);
    for (const auto& name : {"heisenberg", "quaternionic"}) {
        auto g = builtin_group(name);
        for (int k = 0; k < 10; ++k) {
            Covector c = random_cov(rng, g);
            auto pd = phase_data(g, rng.uniform(-8, 8), c);
            auto a = lambda_coeffs(pd);
            auto h = lambda_coeffs_htype(g, pd);
            CHECK(std::abs(a.l00 - h.l00) < 1e-10);
            CHECK((a.l01 - h.l01).norm() < 1e-10);
            CHECK((a.l02 - h.l02).norm() < 1e-10);
            CHECK(std::abs(a.l10 - h.l10) < 1e-10);
            CHECK((a.l11 - h.l11).norm() < 1e-10);
            CHECK(h.l20 == 1.0);
        }
        Covector c = random_cov(rng, g);
        double M = c.mu.norm(), X = c.xi.norm();
        CHECK(std::abs(lambda_coeffs(g, 0.0, c).l10 - I1 * M / (2 * X) * double(g.d1() - 1)) < 1e-14);
    }
}

TEST_CASE("Lambda and mho against the R-composition oracle")
{
    CounterRng rng(46);
    for (const auto& name : metivier) {
        auto g = builtin_group(name);
        Covector c = random_cov(rng, g);
        double t = rng.uniform(-4, 4);
        Symbol q = gaussian_symbol(c, 0.3 * pack(c).norm(), t + 0.2, 2.0);
        cplx lc = apply_lambda(g, q, t, c), lo = lambda_oracle(g, q, t, c);
        CHECK(rel(lc, lo, 1e-3) < 1e-4);
        cplx mc = apply_mho(g, q, t, c), mo = mho_oracle(g, q, t, c);
        CHECK(rel(mc, mo, 1e-3) < 1e-4);
    }
}

TEST_CASE("Lambda on a locally constant symbol")
{
    auto g = heisenberg();
    Covector c{(Vec(2) << 1, 0).finished(), Vec::Constant(1, 1.0)};
    Symbol q = band_symbol(0.5, 2.0, 0.5, 2.0);
    double t = 1.3;
    auto l = lambda_coeffs(g, t, c);
    CHECK(std::abs(apply_lambda(g, q, t, c) - l.l00) < 1e-8);
    CHECK(std::abs(apply_mho(g, q, t, c) - 0.5 * l.l10) < 1e-8);
    bool inside = true;
    CHECK(apply_lambda(g, q, t, {c.xi, Vec::Constant(1, 10.0)}, &inside) == 0.0);
    CHECK_FALSE(inside);
}

TEST_CASE("Lambda_I quadrature")
{
    auto g = builtin_group("quaternionic");
    CounterRng rng(47);
    Covector c{rng.unit_vec(4), rng.unit_vec(3)};
    Symbol q = gaussian_symbol(c, 0.2, 0.0, 3.0);
    CHECK(apply_lambda_i(g, q, 0.0, c) == 0.0);
    auto li = [&](double s) { return apply_lambda_i(g, q, 1.0 + s, c, 24); };
    cplx d = fd::d1(li, 0.0, 1e-3);
    CHECK(std::abs(d - apply_lambda(g, q, 1.0, c) / (2.0 * I1 * c.xi.norm())) < 1e-5);
    for (double t : {2.0, 8.0})
        CHECK(std::abs(apply_lambda_i(g, q, t, c, 32) - apply_lambda_i(g, q, t, c, 64)) < 1e-8);
}

TEST_CASE("amplitude iterates")
{
    auto g = heisenberg();
    CounterRng rng(48);
    Covector c{rng.unit_vec(2), rng.unit_vec(1)};
    Symbol q0 = gaussian_symbol(c, 0.15);
    AmplitudeIterates it(g, q0, 2);
    CHECK(std::abs(it.iterate(1, 0.0, c)) < 1e-14);
    // agrees with direct quadrature of Lambda q0
    double t = 1.5;
    auto v = it.values(t, c);
    CHECK(std::abs(v.iterate[1] - apply_lambda_i(g, q0, t, c, 24)) < 1e-8);
    CHECK(std::abs(v.lambda[0] - apply_lambda(g, q0, t, c)) < 1e-8);
    CHECK(std::abs(v.ringring[0] - (c.xi.norm() * q0(t, c) + I1 * apply_mho(g, q0, t, c))) < 1e-8);
    // (-2i|xi| d_t + Lambda) H = Lambda Lambda_I^N q0
    cplx dh = fd::d1([&](double s) { return it.partial_sum(t + s, c); }, 0.0, 1e-3);
    cplx lam = 0.0;
    for (auto x : v.lambda)
        lam += x;
    cplx lhs = -2.0 * I1 * c.xi.norm() * dh + lam;
    CHECK(std::abs(lhs - v.lambda[2]) < 1e-4 * std::max(1.0, std::abs(v.lambda[2])));
    CHECK_THROWS_AS(AmplitudeIterates(g, q0, 4), InputError);
}

TEST_CASE("iterates of an order-0 symbol decay with the frequency")
{
    auto g = heisenberg();
    Symbol q0 = band_symbol(0.8, 1.6, 0.6, 1.6);
    double prev = 0.0;
    for (double scale : {1.0, 4.0, 16.0}) {
        Symbol qs = band_symbol(0.8 * scale, 1.6 * scale, 0.6, 1.6);
        AmplitudeIterates it(g, qs, 1);
        double sup = 0.0;
        for (double t : {0.5, 2.0, 6.0})
            for (double r : {0.9, 1.2, 1.5}) {
                Covector c{(Vec(2) << r * scale, 0).finished(), Vec::Constant(1, r * scale)};
                sup = std::max(sup, std::abs(it.iterate(1, t, c)) * (1.0 + pack(c).norm()));
            }
        CHECK(sup < 50.0);
        if (prev > 0.0)
            CHECK(sup < 4.0 * prev);
        prev = sup;
    }
    (void)q0;
}

#include <doctest.h>

#include "cfio/errors.hpp"
#include "cfio/flow.hpp"
#include "cfio/rng.hpp"

#include <numbers>

using namespace cfio;

namespace {

double flow_diff(const FlowPoint& a, const FlowPoint& b)
{
    double e = (a.x - b.x).cwiseAbs().maxCoeff();
    e = std::max(e, (a.u - b.u).cwiseAbs().maxCoeff());
    e = std::max(e, (a.xi - b.xi).cwiseAbs().maxCoeff());
    return std::max(e, (a.mu - b.mu).cwiseAbs().maxCoeff());
}

Covector random_cov(CounterRng& rng, const Group2Step& g)
{
    return {rng.normal_vec(g.d1()), rng.normal_vec(g.d2())};
}

} // namespace

TEST_CASE("hamiltonian examples")
{
    auto h = heisenberg();
    Covector c{Vec::Zero(2), Vec::Ones(1)};
    Point p{(Vec(2) << 2, 0).finished(), Vec::Zero(1)};
    CHECK(hamiltonian(h, p, c) == doctest::Approx(1.0));
    Covector c2{(Vec(2) << 3, 4).finished(), Vec::Zero(1)};
    CHECK(hamiltonian(h, p, c2) == doctest::Approx(5.0));
}

TEST_CASE("closed-form flow agrees with RK4")
{
    CounterRng rng(21);
    for (const auto& name : {"heisenberg", "nonisotropic", "quaternionic", "free3"}) {
        auto g = builtin_group(name);
        for (int k = 0; k < 4; ++k) {
            Covector c = random_cov(rng, g);
            double t = rng.uniform(-3, 3);
            auto cf = flow_origin_generic(g, t, c);
            auto ode = flow_ode_oracle(g, t, g.identity(), c, 1e-3);
            CHECK(flow_diff(cf, ode) < 1e-7);
        }
    }
}

TEST_CASE("H-type closed form equals the generic one")
{
    CounterRng rng(22);
    for (const auto& name : {"heisenberg", "quaternionic"}) {
        auto g = builtin_group(name);
        for (int k = 0; k < 20; ++k) {
            Covector c = random_cov(rng, g);
            double t = rng.uniform(-8, 8);
            CHECK(flow_diff(flow_origin_htype(g, t, c), flow_origin_generic(g, t, c)) < 1e-10);
            // u^t parallel to mu
            auto f = flow_origin_htype(g, t, c);
            Vec perp = f.u - f.u.dot(c.mu) / c.mu.squaredNorm() * c.mu;
            CHECK(perp.norm() < 1e-12 * std::max(1.0, f.u.norm()));
        }
    }
}

TEST_CASE("mu . u^t closed form")
{
    CounterRng rng(23);
    for (const auto& name : {"heisenberg", "nonisotropic", "quaternionic", "free3"}) {
        auto g = builtin_group(name);
        for (int k = 0; k < 10; ++k) {
            Covector c = random_cov(rng, g);
            double t = rng.uniform(-8, 8);
            double q = flow_origin_generic(g, t, c).u.dot(c.mu);
            CHECK(std::abs(mu_dot_u(g, t, c) - q) < 1e-9 * std::max(1.0, std::abs(q)));
        }
    }
}

TEST_CASE("flow special values")
{
    auto g = heisenberg();
    Covector c{(Vec(2) << 1, 0).finished(), Vec::Ones(1)};
    auto f0 = flow_origin(g, 0.0, c);
    CHECK(f0.x.norm() == 0.0);
    CHECK(f0.u.norm() == 0.0);
    CHECK((f0.xi - c.xi).norm() == 0.0);
    Covector z{Vec::Zero(2), Vec::Ones(1)};
    CHECK_THROWS_AS(flow_origin(g, 1.0, z), ZeroFrequency);
    Covector flat{(Vec(2) << 0, 2).finished(), Vec::Zero(1)};
    auto fl = flow_origin(g, 3.0, flat);
    CHECK(fl.x(1) == doctest::Approx(3.0));
    CHECK(fl.u.norm() == 0.0);
    // t = pi/2 at |mu|/|xi| = 1: oracle comparison
    auto f = flow_origin(g, std::numbers::pi / 2, c);
    auto o = flow_ode_oracle(g, std::numbers::pi / 2, g.identity(), c);
    CHECK(flow_diff(f, o) < 1e-9);
}

TEST_CASE("energy, homogeneity and RK4 reversibility")
{
    CounterRng rng(24);
    for (const auto& name : {"heisenberg", "nonisotropic", "quaternionic"}) {
        auto g = builtin_group(name);
        for (int k = 0; k < 10; ++k) {
            Covector c = random_cov(rng, g);
            double t = rng.uniform(-8, 8);
            auto f = flow_origin(g, t, c);
            CHECK(std::abs(hamiltonian(g, f.point(), f.covector()) - c.xi.norm()) < 1e-9 * c.xi.norm());
            Covector cr{2.5 * c.xi, 2.5 * c.mu};
            auto fr = flow_origin(g, t, cr);
            CHECK((fr.x - f.x).norm() < 1e-11 * std::max(1.0, f.x.norm()));
            CHECK((fr.xi - 2.5 * f.xi).norm() < 1e-11 * std::max(1.0, fr.xi.norm()));
        }
    }
    auto g = heisenberg();
    Covector c{(Vec(2) << 1, 0).finished(), Vec::Ones(1)};
    auto fw = flow_ode_oracle(g, 1.0, g.identity(), c, 1e-3);
    auto bw = flow_ode_oracle(g, -1.0, fw.point(), fw.covector(), 1e-3);
    CHECK(pack(bw.point()).norm() < 1e-10);
}

TEST_CASE("flow from a base point: covariance and RK4")
{
    CounterRng rng(25);
    for (const auto& name : {"heisenberg", "nonisotropic", "quaternionic"}) {
        auto g = builtin_group(name);
        for (int k = 0; k < 5; ++k) {
            Covector c = random_cov(rng, g);
            Point y{rng.normal_vec(g.d1()), rng.normal_vec(g.d2())};
            double t = rng.uniform(-2, 2);
            auto fb = flow_base(g, t, y, c);
            auto ode = flow_ode_oracle(g, t, y, c, 1e-3);
            CHECK(flow_diff(fb, ode) < 1e-6);
        }
    }
    auto g = heisenberg();
    Covector c{(Vec(2) << 0, 1).finished(), Vec::Ones(1)};
    Point y{(Vec(2) << 1, 0).finished(), Vec::Zero(1)};
    auto f0 = flow_base(g, 0.0, y, c);
    CHECK((pack(f0.point()) - pack(y)).norm() < 1e-15);
    CHECK((f0.xi - c.xi).norm() < 1e-15);
}

TEST_CASE("symplectic identities")
{
    CounterRng rng(26);
    for (const auto& name : {"heisenberg", "nonisotropic", "quaternionic"}) {
        auto g = builtin_group(name);
        for (int k = 0; k < 5; ++k) {
            Covector c = random_cov(rng, g);
            double t = rng.uniform(-4, 4);
            auto jac = flow_jacobian(g, t, c);
            auto f = flow_origin(g, t, c);
            Vec xit = pack(f.covector());
            CHECK((jac.dx.transpose() * xit).norm() < 1e-6 * xit.norm());
            Mat s = jac.dx.transpose() * jac.dxi;
            CHECK((s - s.transpose()).norm() < 1e-6 * std::max(1.0, s.norm()));
        }
    }
}

TEST_CASE("geodesic spheres")
{
    auto g = heisenberg();
    std::vector<Covector> dirs;
    for (double th : {10.0, 100.0, 1000.0})
        dirs.push_back({(Vec(2) << 1, 0).finished(), Vec::Constant(1, 2 * th)});
    dirs.push_back({Vec::Zero(2), Vec::Ones(1)});
    std::vector<int> skipped;
    auto pts = geodesic_sphere_sample(g, 1.0, dirs, &skipped);
    REQUIRE(pts.size() == 3);
    CHECK(skipped == std::vector<int>{3});
    CHECK(pts[0].x.norm() <= 2.0 / 10.0);
    CHECK(pts[1].x.norm() <= 2.0 / 100.0);
    CHECK(pts[2].x.norm() <= 2.0 / 1000.0);
    auto p0 = geodesic_sphere_sample(g, 0.0, {dirs[0]});
    CHECK(pack(p0[0]).norm() == 0.0);
}

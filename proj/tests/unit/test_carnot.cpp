#include <doctest.h>

#include "cfio/carnot.hpp"
#include "cfio/errors.hpp"
#include "cfio/rng.hpp"

using namespace cfio;

namespace {

double rel(double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); }

std::vector<Group2Step> all_groups()
{
    std::vector<Group2Step> gs;
    for (const auto& n : builtin_names())
        gs.push_back(builtin_group(n));
    return gs;
}

} // namespace

TEST_CASE("j_mu satisfies the defining identity and is skew")
{
    CounterRng rng(11);
    for (const auto& g : all_groups()) {
        for (int k = 0; k < 20; ++k) {
            Vec mu = rng.normal_vec(g.d2()), x = rng.normal_vec(g.d1()), y = rng.normal_vec(g.d1());
            Mat J = g.j_mu(mu);
            CHECK((J + J.transpose()).norm() < 1e-14);
            CHECK(rel((J * x).dot(y), mu.dot(g.bracket(x, y))) < 1e-12);
        }
        CHECK(g.j_mu(Vec::Zero(g.d2())).norm() == 0.0);
    }
}

TEST_CASE("heisenberg j_mu sign fixed by the defining identity")
{
    auto g = heisenberg();
    Mat J = g.j_mu(Vec::Ones(1));
    // <J e1, e2> = [e1, e2] = 1
    CHECK(J(1, 0) == doctest::Approx(1.0));
    CHECK(J(0, 1) == doctest::Approx(-1.0));
}

TEST_CASE("quaternionic generators square to -I")
{
    auto g = quaternionic_htype();
    for (int k = 0; k < 3; ++k) {
        Mat J = g.j_mu(Vec::Unit(3, k));
        CHECK((J * J + Mat::Identity(4, 4)).norm() < 1e-14);
    }
    CHECK(g.is_htype());
    CHECK(heisenberg().is_htype());
    CHECK_FALSE(nonisotropic_heisenberg().is_htype());
    CHECK_FALSE(free3().is_htype());
}

TEST_CASE("abs_j_mu: homogeneity, square, H-type identity, eigenvalues")
{
    CounterRng rng(12);
    for (const auto& g : all_groups()) {
        for (int k = 0; k < 10; ++k) {
            Vec mu = rng.normal_vec(g.d2());
            Mat A = g.abs_j_mu(mu), J = g.j_mu(mu);
            CHECK((g.abs_j_mu(2.5 * mu) - 2.5 * A).norm() <= 1e-12 * 2.5 * A.norm());
            CHECK((A * A + J * J).norm() <= 1e-10 * std::max(1.0, (J * J).norm()));
            CHECK((A - A.transpose()).norm() < 1e-13);
            if (g.is_htype())
                CHECK((A - mu.norm() * Mat::Identity(g.d1(), g.d1())).norm() < 1e-12 * mu.norm());
        }
        CHECK(g.abs_j_mu(Vec::Zero(g.d2())).norm() == 0.0);
    }
    auto g = nonisotropic_heisenberg();
    Eigen::SelfAdjointEigenSolver<Mat> es(g.abs_j_mu(Vec::Ones(1)));
    Vec ev = es.eigenvalues();
    CHECK(ev(0) == doctest::Approx(1.0));
    CHECK(ev(1) == doctest::Approx(1.0));
    CHECK(ev(2) == doctest::Approx(2.0));
    CHECK(ev(3) == doctest::Approx(2.0));
}

TEST_CASE("kernel projector matches the SVD null space")
{
    CounterRng rng(13);
    for (const auto& g : all_groups()) {
        for (int k = 0; k < 10; ++k) {
            Vec mu = rng.normal_vec(g.d2());
            Mat P = g.kernel_projector(mu), J = g.j_mu(mu);
            CHECK((P * P - P).norm() < 1e-8);
            CHECK((P - P.transpose()).norm() < 1e-10);
            CHECK((J * P).norm() < 1e-8);
            CHECK(P.trace() == doctest::Approx(g.d1() - g.generic_rank()).epsilon(1e-8));
            CHECK((P - svd_kernel_projector(J, 1e-9)).norm() < 1e-8);
        }
    }
    CHECK_THROWS_AS(free3().kernel_projector(Vec::Zero(3)), RankDrop);
    CHECK(heisenberg().kernel_projector(Vec::Ones(1)).norm() < 1e-12);
}

TEST_CASE("classification of the builtin groups")
{
    auto h = classify(heisenberg(), 200, 1);
    CHECK(h.max_rank == 2);
    CHECK(h.is_metivier);
    CHECK(h.is_htype);
    auto n = classify(nonisotropic_heisenberg(), 200, 1);
    CHECK(n.is_metivier);
    CHECK_FALSE(n.is_htype);
    CHECK(n.min_singular == doctest::Approx(1.0));
    auto q = classify(quaternionic_htype(), 200, 1);
    CHECK(q.is_htype);
    CHECK(q.max_rank == 4);
    auto f = classify(free3(), 200, 1);
    CHECK_FALSE(f.is_metivier);
    CHECK(f.max_rank == 2);
    for (const auto& g : all_groups()) {
        auto c = classify(g, 200, 3);
        if (c.is_htype)
            CHECK(c.is_metivier);
        if (c.is_metivier) {
            CHECK(c.max_rank == g.d1());
            CHECK(2 * g.d2() <= g.dim() - 1);
        }
    }
}

TEST_CASE("group law: identity, inverse, associativity, dilations")
{
    auto h = heisenberg();
    Point a{(Vec(2) << 1, 0).finished(), Vec::Zero(1)};
    Point b{(Vec(2) << 0, 1).finished(), Vec::Zero(1)};
    Point ab = h.multiply(a, b);
    CHECK(ab.x(0) == 1.0);
    CHECK(ab.x(1) == 1.0);
    CHECK(ab.u(0) == doctest::Approx(0.5));
    CounterRng rng(14);
    for (const auto& g : all_groups()) {
        for (int k = 0; k < 20; ++k) {
            Point p{rng.normal_vec(g.d1()), rng.normal_vec(g.d2())};
            Point q{rng.normal_vec(g.d1()), rng.normal_vec(g.d2())};
            Point r{rng.normal_vec(g.d1()), rng.normal_vec(g.d2())};
            Point e = g.multiply(p, g.inverse(p));
            CHECK(pack(e).norm() < 1e-15);
            CHECK((pack(g.multiply(g.identity(), q)) - pack(q)).norm() == 0.0);
            Vec l = pack(g.multiply(g.multiply(p, q), r)), rr = pack(g.multiply(p, g.multiply(q, r)));
            CHECK((l - rr).norm() < 1e-14 * std::max(1.0, l.norm()));
            double s = 1.7;
            Vec dl = pack(g.multiply(g.dilate(s, p), g.dilate(s, q))), dr = pack(g.dilate(s, g.multiply(p, q)));
            CHECK((dl - dr).norm() < 1e-13 * std::max(1.0, dl.norm()));
        }
    }
}

TEST_CASE("cotangent translation")
{
    auto h = heisenberg();
    Point y{(Vec(2) << 1, 0).finished(), Vec::Zero(1)};
    Covector c{Vec::Zero(2), Vec::Ones(1)};
    Covector r = h.cotangent_translate(y, c);
    CHECK(r.xi(0) == doctest::Approx(0.0));
    CHECK(r.xi(1) == doctest::Approx(-0.5));
    Covector back = h.cotangent_translate_inv(y, r);
    CHECK((back.xi - c.xi).norm() < 1e-15);
    Point yu{Vec::Zero(2), Vec::Ones(1)};
    CHECK((h.cotangent_translate(yu, c).xi - c.xi).norm() == 0.0);
}

TEST_CASE("JSON round trip and validation")
{
    for (const auto& g : all_groups()) {
        auto g2 = group_from_json(group_to_json(g));
        CHECK(g2.d1() == g.d1());
        CHECK(g2.d2() == g.d2());
        for (int k = 0; k < g.d2(); ++k)
            CHECK((g2.bracket_tensor()[k] - g.bracket_tensor()[k]).norm() == 0.0);
    }
    std::string bad = R"({"d1":2,"d2":1,"bracket":[[[0,1],[1,0]]]})";
    try {
        group_from_json(bad);
        FAIL("expected InputError");
    } catch (const InputError& e) {
        CHECK(std::string(e.what()).find("[k=0][i=0][j=1]") != std::string::npos);
    }
    CHECK_THROWS_AS(group_from_json(R"({"d1":2,"d2":1,"bracket":[[[0,0],[0,0]]]})"), InputError);
    CHECK_THROWS_AS(group_from_json("not json"), InputError);
    CHECK_THROWS_AS(load_group("no_such_group_or_file"), InputError);
}

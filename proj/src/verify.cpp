#include "cfio/verify.hpp"

#include "cfio/decompose.hpp"
#include "cfio/errors.hpp"
#include "cfio/fd.hpp"
#include "cfio/fio.hpp"
#include "cfio/flow.hpp"
#include "cfio/phase.hpp"
#include "cfio/rng.hpp"
#include "cfio/transport.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <exception>
#include <functional>
#include <thread>

namespace cfio {

namespace {

constexpr double inf = SupportRegion::inf;
const cplx I1(0.0, 1.0);

struct CaseResult {
    double err = 0.0;
    double refine = -1.0;
};

enum class Scope { all, metivier, htype, plane };

// per-case checks draw from their own stream; batch checks run once
struct Entry {
    CheckInfo info;
    Scope scope = Scope::all;
    bool quadrature = false;
    int fixed_cases = 0; // > 0: batch check with this many cases
    std::function<CaseResult(const Group2Step&, CounterRng&, const GroupClassification&)> fn;
};

double relerr(double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); }
double relc(cplx a, cplx b, double floor) { return std::abs(a - b) / std::max(std::abs(b), floor); }

Covector random_cov(CounterRng& rng, const Group2Step& g) { return {rng.normal_vec(g.d1()), rng.normal_vec(g.d2())}; }
Point random_point(CounterRng& rng, const Group2Step& g) { return {rng.normal_vec(g.d1()), rng.normal_vec(g.d2())}; }

double flow_diff(const FlowPoint& a, const FlowPoint& b)
{
    double e = (a.x - b.x).cwiseAbs().maxCoeff();
    e = std::max(e, (a.u - b.u).cwiseAbs().maxCoeff());
    e = std::max(e, (a.xi - b.xi).cwiseAbs().maxCoeff());
    return std::max(e, (a.mu - b.mu).cwiseAbs().maxCoeff());
}

double flow_scale(const FlowPoint& f)
{
    return std::max({1.0, f.x.norm(), f.u.norm(), f.xi.norm(), f.mu.norm()});
}

std::uint64_t key_hash(const std::string& s)
{
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s)
        h = (h ^ c) * 1099511628211ull;
    return h;
}

// test symbol and quadrature for the fio checks: a Gaussian band at |xi| = 2
// on polar groups, a Gaussian ball around c0 otherwise
bool polar_group(const Group2Step& g) { return g.d1() == 2 && g.d2() == 1; }

Covector fio_center(const Group2Step& g)
{
    Vec xi = Vec::Zero(g.d1()), mu = Vec::Zero(g.d2());
    xi(0) = 2.0;
    mu(0) = 1.5;
    return {xi, mu};
}

Symbol fio_symbol(const Group2Step& g)
{
    return polar_group(g) ? gaussian_band_symbol(2.0, 0.15, 1.0, 0.15) : gaussian_ball_symbol(fio_center(g), 0.5);
}

QuadratureSpec fio_spec(const Group2Step& g)
{
    QuadratureSpec s;
    s.nodes_per_dim = polar_group(g) ? 24 : (g.dim() <= 5 ? 8 : 4);
    return s;
}

std::vector<Point> fio_points(const Group2Step& g, double t, std::uint64_t seed)
{
    if (polar_group(g))
        return wavefront_points(g, t, 2.0, 2, seed);
    return {g.identity(), flow_origin(g, t, fio_center(g)).point()};
}

std::vector<Entry> build_registry()
{
    std::vector<Entry> r;
    auto add = [&](std::string key, double tol, std::string desc, Scope scope, auto fn, int fixed = 0,
                   bool quad = false) {
        Entry e;
        e.info = {std::move(key), tol, std::move(desc)};
        e.scope = scope;
        e.fixed_cases = fixed;
        e.quadrature = quad;
        e.fn = fn;
        r.push_back(std::move(e));
    };
    using C = const GroupClassification&;

    // carnot
    add("carnot.j_mu_identity", 1e-12, "<J_mu x, y> = mu . [x, y] and J_mu skew", Scope::all,
        [](const Group2Step& g, CounterRng& rng, C) {
            Vec mu = rng.normal_vec(g.d2()), x = rng.normal_vec(g.d1()), y = rng.normal_vec(g.d1());
            Mat J = g.j_mu(mu);
            return CaseResult{std::max(relerr((J * x).dot(y), mu.dot(g.bracket(x, y))), (J + J.transpose()).norm())};
        });
    add("carnot.abs_j_homogeneity", 1e-12, "|J_{r mu}| = r |J_mu|", Scope::all,
        [](const Group2Step& g, CounterRng& rng, C) {
            Vec mu = rng.normal_vec(g.d2());
            double s = rng.uniform(0.2, 5.0);
            Mat A = g.abs_j_mu(mu);
            return CaseResult{(g.abs_j_mu(s * mu) - s * A).norm() / std::max(1e-300, s * A.norm())};
        });
    add("carnot.abs_j_square", 1e-10, "|J_mu|^2 = -J_mu^2", Scope::all, [](const Group2Step& g, CounterRng& rng, C) {
        Vec mu = rng.normal_vec(g.d2());
        Mat A = g.abs_j_mu(mu), J = g.j_mu(mu);
        return CaseResult{(A * A + J * J).norm() / std::max(1.0, (J * J).norm())};
    });
    add("carnot.kernel_projector", 1e-8, "P^2 = P, J P = 0, tr P = d1 - rank, P = SVD projector", Scope::all,
        [](const Group2Step& g, CounterRng& rng, C) {
            Vec mu = rng.normal_vec(g.d2());
            Mat P = g.kernel_projector(mu), J = g.j_mu(mu);
            double e = std::max((P * P - P).norm(), (J * P).norm());
            e = std::max(e, std::abs(P.trace() - (g.d1() - g.generic_rank())));
            return CaseResult{std::max(e, (P - svd_kernel_projector(J, g.rank_tol())).norm())};
        });
    add("carnot.metivier_dimension", 0.0, "Metivier groups satisfy 2 d2 <= d - 1", Scope::all,
        [](const Group2Step& g, CounterRng&, C cls) {
            return CaseResult{cls.is_metivier ? std::max(0.0, double(2 * g.d2() - (g.dim() - 1))) : 0.0};
        },
        1);
    add("carnot.associativity", 1e-14, "(a b) c = a (b c)", Scope::all, [](const Group2Step& g, CounterRng& rng, C) {
        Point a = random_point(rng, g), b = random_point(rng, g), c = random_point(rng, g);
        Vec l = pack(g.multiply(g.multiply(a, b), c)), rr = pack(g.multiply(a, g.multiply(b, c)));
        return CaseResult{(l - rr).norm() / std::max(1.0, l.norm())};
    });
    add("carnot.dilation", 1e-13, "D_r(a) D_r(b) = D_r(a b)", Scope::all, [](const Group2Step& g, CounterRng& rng, C) {
        Point a = random_point(rng, g), b = random_point(rng, g);
        double s = rng.uniform(0.2, 5.0);
        Vec dl = pack(g.multiply(g.dilate(s, a), g.dilate(s, b))), dr = pack(g.dilate(s, g.multiply(a, b)));
        return CaseResult{(dl - dr).norm() / std::max(1.0, dl.norm())};
    });

    // flow
    add("flow.rk4", 1e-6, "closed-form flow against RK4, t in [-8, 8]", Scope::all,
        [](const Group2Step& g, CounterRng& rng, C) {
            Covector c = random_cov(rng, g);
            double t = rng.uniform(-8.0, 8.0);
            FlowPoint cf = flow_origin(g, t, c);
            return CaseResult{flow_diff(cf, flow_ode_oracle(g, t, g.identity(), c)) / flow_scale(cf)};
        });
    add("flow.energy", 1e-9, "|H(x^t, xi^t) - |xi|| relative to |xi|", Scope::all,
        [](const Group2Step& g, CounterRng& rng, C) {
            Covector c = random_cov(rng, g);
            FlowPoint f = flow_origin(g, rng.uniform(-8.0, 8.0), c);
            return CaseResult{std::abs(hamiltonian(g, f.point(), f.covector()) - c.xi.norm()) / c.xi.norm()};
        });
    add("flow.homogeneity", 1e-11, "x^t 0-homogeneous and xi^t 1-homogeneous in the frequency", Scope::all,
        [](const Group2Step& g, CounterRng& rng, C) {
            Covector c = random_cov(rng, g);
            double t = rng.uniform(-8.0, 8.0), s = rng.uniform(0.2, 5.0);
            FlowPoint f = flow_origin(g, t, c), fr = flow_origin(g, t, {s * c.xi, s * c.mu});
            double e = (fr.x - f.x).norm() / std::max(1.0, f.x.norm());
            e = std::max(e, (fr.u - f.u).norm() / std::max(1.0, f.u.norm()));
            return CaseResult{std::max(e, (fr.xi - s * f.xi).norm() / std::max(1.0, fr.xi.norm()))};
        });
    add("flow.symplectic", 1e-6, "(d x^t)^T xi^t = 0 and (d x^t)^T d xi^t symmetric", Scope::all,
        [](const Group2Step& g, CounterRng& rng, C) {
            Covector c = random_cov(rng, g);
            double t = rng.uniform(-4.0, 4.0);
            FlowJacobian jac = flow_jacobian(g, t, c);
            Vec xit = pack(flow_origin(g, t, c).covector());
            Mat s = jac.dx.transpose() * jac.dxi;
            return CaseResult{std::max((jac.dx.transpose() * xit).norm() / xit.norm(),
                                       (s - s.transpose()).norm() / std::max(1.0, s.norm()))};
        });
    add("flow.mu_dot_u", 1e-9, "mu . u^t closed form against the tau quadrature", Scope::all,
        [](const Group2Step& g, CounterRng& rng, C) {
            Covector c = random_cov(rng, g);
            double t = rng.uniform(-8.0, 8.0);
            double q = flow_origin_generic(g, t, c).u.dot(c.mu);
            return CaseResult{std::abs(mu_dot_u(g, t, c) - q) / std::max(1.0, std::abs(q))};
        });
    add("flow.htype_closed_form", 1e-10, "H-type cos/sin flow equals the generic closed form", Scope::htype,
        [](const Group2Step& g, CounterRng& rng, C) {
            Covector c = random_cov(rng, g);
            double t = rng.uniform(-8.0, 8.0);
            return CaseResult{flow_diff(flow_origin_htype(g, t, c), flow_origin_generic(g, t, c))};
        });
    add("flow.base_covariance", 1e-6, "flow from a base point against RK4 from the translated start", Scope::all,
        [](const Group2Step& g, CounterRng& rng, C) {
            Covector c = random_cov(rng, g);
            Point y = random_point(rng, g);
            double t = rng.uniform(-4.0, 4.0);
            FlowPoint f = flow_base(g, t, y, c);
            return CaseResult{flow_diff(f, flow_ode_oracle(g, t, y, c)) / flow_scale(f)};
        });

    // phase
    add("phase.phi0_fd", 1e-6, "closed-form Phi_0 against finite differences of the flow", Scope::metivier,
        [](const Group2Step& g, CounterRng& rng, C) {
            Covector c = random_cov(rng, g);
            double t = rng.uniform(-4.0, 4.0);
            CMat fd = phi0_fd(g, t, c);
            return CaseResult{(mixed_hessian(g, t, c).phi0 - fd).norm() / std::max(1.0, fd.norm())};
        });
    add("phase.det_closed_form", 1e-9, "det Phi_0 against the closed-form determinant", Scope::metivier,
        [](const Group2Step& g, CounterRng& rng, C) {
            Covector c = random_cov(rng, g);
            HessianEval h = mixed_hessian(g, rng.uniform(-4.0, 4.0), c);
            return CaseResult{std::abs(h.phi0.determinant() - h.det_phi) / std::abs(h.det_phi)};
        });
    add("phase.det_fd", 1e-6, "det of the finite-difference Phi_0 against the closed-form determinant",
        Scope::metivier, [](const Group2Step& g, CounterRng& rng, C) {
            Covector c = random_cov(rng, g);
            double t = rng.uniform(-4.0, 4.0);
            cplx det = mixed_hessian(g, t, c).det_phi;
            return CaseResult{std::abs(phi0_fd(g, t, c).determinant() - det) / std::abs(det)};
        });
    add("phase.htype_det", 1e-10, "H-type det = e^{-i theta d1} (1 + i theta)", Scope::htype,
        [](const Group2Step& g, CounterRng& rng, C) {
            Covector c = random_cov(rng, g);
            double t = rng.uniform(-8.0, 8.0);
            double th = t * c.mu.norm() / (2.0 * c.xi.norm());
            cplx expect = std::exp(-I1 * th * double(g.d1())) * (1.0 + I1 * th);
            // spectral closed form and the determinant of the H-type Phi_0 matrix
            const PhaseData gen = phase_data(g, t, c, false);
            const double e = std::abs(gen.det - expect) / std::abs(expect);
            return CaseResult{std::max(e, std::abs(phase_data(g, t, c).phi0.determinant() - expect) / std::abs(expect))};
        });
    add("phase.underline", 1e-8, "phi, d_xi phi and nabla_x phi - xi^t vanish at x^t", Scope::metivier,
        [](const Group2Step& g, CounterRng& rng, C) {
            Covector c = random_cov(rng, g);
            double t = rng.uniform(-4.0, 4.0);
            FlowPoint f = flow_origin(g, t, c);
            PhaseEval ev = phase_value(g, t, f.point(), c);
            double e = std::max(std::abs(ev.value), ev.grad_xi.norm());
            return CaseResult{std::max(e, (ev.grad_x.head(g.d1()) - f.xi.cast<cplx>()).norm())};
        });
    add("phase.block_structure", 1e-7, "mixed Hessian: lower-left block 0, lower-right block I", Scope::metivier,
        [](const Group2Step& g, CounterRng& rng, C) {
            Covector c = random_cov(rng, g);
            Point p = random_point(rng, g);
            CMat H = mixed_hessian_fd(g, rng.uniform(-3.0, 3.0), p, c);
            const int d1 = g.d1(), d2 = g.d2();
            return CaseResult{std::max(H.bottomLeftCorner(d2, d1).norm(),
                                       (H.bottomRightCorner(d2, d2) - CMat::Identity(d2, d2)).norm())};
        });
    add("phase.euler", 1e-11, "phi(t, x, r c) = r phi(t, x, c)", Scope::metivier,
        [](const Group2Step& g, CounterRng& rng, C) {
            Covector c = random_cov(rng, g);
            Point p = random_point(rng, g);
            double t = rng.uniform(-3.0, 3.0), s = rng.uniform(0.2, 5.0);
            cplx a = phase_at(phase_data(g, t, {s * c.xi, s * c.mu}), p);
            cplx b = s * phase_at(phase_data(g, t, c), p);
            return CaseResult{std::abs(a - b) / std::max(1.0, std::abs(b))};
        });
    add("phase.im_nonnegative", 1e-12, "Im phi >= 0 (violation size)", Scope::metivier,
        [](const Group2Step& g, CounterRng& rng, C) {
            Covector c = random_cov(rng, g);
            Point p = random_point(rng, g);
            cplx v = phase_at(phase_data(g, rng.uniform(-8.0, 8.0), c), p);
            return CaseResult{std::max(0.0, -v.imag()) / std::max(1.0, std::abs(v))};
        });

    // transport
    add("transport.f_definition", 1e-5, "closed-form F_kj against their definitions", Scope::metivier,
        [](const Group2Step& g, CounterRng& rng, C) {
            Covector c = random_cov(rng, g);
            Point p = random_point(rng, g);
            double t = rng.uniform(-4.0, 4.0), n = pack(c).norm();
            CoeffBundle a = f_coeffs(g, t, p, c), b = f_coeffs_definition(g, t, p, c);
            double e = relc(a.f20, b.f20, 1e-3 * n * n);
            e = std::max({e, relc(a.f11, b.f11, 1e-3 * n), relc(a.f10, b.f10, 1e-3 * n)});
            return CaseResult{std::max({e, relc(a.f01, b.f01, 1e-3), relc(a.f00, b.f00, 1e-3)})};
        });
    add("transport.unit_coefficients", 0.0, "F_02 = 1 and Lambda_20 = 1 exactly", Scope::metivier,
        [](const Group2Step& g, CounterRng& rng, C) {
            Covector c = random_cov(rng, g);
            double t = rng.uniform(-4.0, 4.0);
            PhaseData pd = phase_data(g, t, c);
            return CaseResult{std::abs(f_coeffs(pd, rng.normal_vec(g.d1())).f02 - 1.0) +
                              std::abs(lambda_coeffs(pd).l20 - 1.0)};
        });
    auto crucial = [](int which) {
        return [which](const Group2Step& g, CounterRng& rng, C) {
            Covector c = random_cov(rng, g);
            double t = rng.uniform(-4.0, 4.0), xn = c.xi.norm();
            PhaseData pd = phase_data(g, t, c);
            CoeffBundle b = f_coeffs(pd, pd.xt);
            // closed forms vanish identically here; the definitions and numeric R do not
            const Point pt = flow_origin(g, t, c).point();
            if (which == 0)
                return CaseResult{std::max(std::abs(b.f20), std::abs(f_coeffs_definition(g, t, pt, c).f20)) / (xn * xn)};
            if (which == 1)
                return CaseResult{
                    std::max(std::abs(b.f11 - 2.0 * xn), std::abs(f_coeffs_definition(g, t, pt, c).f11 - 2.0 * xn)) /
                    xn};
            if (which == 2) {
                Amplitude f20 = [&](const Vec& x, const Covector& cc) { return f_coeffs(phase_data(g, t, cc), x).f20; };
                return CaseResult{std::max(std::abs(b.k), std::abs(b.f10 + apply_r_numeric(g, f20, t, pt.x, c))) / xn};
            }
            double e = 0.0;
            for (int j = 0; j < g.d1(); ++j) {
                auto f = [&](double s) { return f_coeffs(pd, Vec(pd.xt + s * Vec::Unit(g.d1(), j))).f20; };
                e = std::max(e, std::abs(fd::d1(f, 0.0, 1e-2)) / (xn * xn));
            }
            return CaseResult{e};
        };
    };
    add("transport.crucial_f20", 1e-8, "|F_20| / |xi|^2 at x^t", Scope::metivier, crucial(0));
    add("transport.crucial_f11", 1e-8, "|F_11 - 2|xi|| / |xi| at x^t", Scope::metivier, crucial(1));
    add("transport.crucial_k", 1e-6, "|K| / |xi| at x^t", Scope::metivier, crucial(2));
    add("transport.crucial_dx_f20", 1e-6, "|nabla_x F_20| / |xi|^2 at x^t", Scope::metivier, crucial(3));
    add("transport.k_oracle", 1e-4, "K against F_10 + R F_20 with numeric R", Scope::metivier,
        [](const Group2Step& g, CounterRng& rng, C) {
            Covector c = random_cov(rng, g);
            Point p = random_point(rng, g);
            double t = rng.uniform(-4.0, 4.0);
            CoeffBundle b = f_coeffs(g, t, p, c);
            Amplitude f20 = [&](const Vec& x, const Covector& cc) { return f_coeffs(phase_data(g, t, cc), x).f20; };
            return CaseResult{relc(b.k, b.f10 + apply_r_numeric(g, f20, t, p.x, c), 1e-3 * c.xi.norm())};
        });
    add("transport.lambda_oracle", 1e-4, "closed-form Lambda q against the R-composition oracle", Scope::metivier,
        [](const Group2Step& g, CounterRng& rng, C) {
            Covector c = random_cov(rng, g);
            double t = rng.uniform(-4.0, 4.0);
            Symbol q = gaussian_symbol(c, 0.3 * pack(c).norm(), t + 0.2, 2.0);
            return CaseResult{relc(apply_lambda(g, q, t, c), lambda_oracle(g, q, t, c), 1e-3)};
        });
    add("transport.mho_oracle", 1e-4, "closed-form mho q against the R-composition oracle", Scope::metivier,
        [](const Group2Step& g, CounterRng& rng, C) {
            Covector c = random_cov(rng, g);
            double t = rng.uniform(-4.0, 4.0);
            Symbol q = gaussian_symbol(c, 0.3 * pack(c).norm(), t + 0.2, 2.0);
            return CaseResult{relc(apply_mho(g, q, t, c), mho_oracle(g, q, t, c), 1e-3)};
        });
    add("transport.htype_lambda", 1e-10, "H-type Lambda coefficients equal the general ones", Scope::htype,
        [](const Group2Step& g, CounterRng& rng, C) {
            PhaseData pd = phase_data(g, rng.uniform(-8.0, 8.0), random_cov(rng, g));
            CoeffBundle a = lambda_coeffs(pd), h = lambda_coeffs_htype(g, pd);
            double e = std::max({std::abs(a.l00 - h.l00), std::abs(a.l10 - h.l10), (a.l01 - h.l01).norm()});
            return CaseResult{std::max({e, (a.l11 - h.l11).norm(), (a.l02 - h.l02).norm()})};
        });

    // decompose
    add("decompose.dyadic_partition", 1e-10, "chi0 + sum_k chi1(2^-k s) = 1", Scope::all,
        [](const Group2Step&, CounterRng& rng, C) {
            const DyadicCutoffs cut = make_cutoffs();
            double e = 0.0;
            for (int i = 0; i < 200; ++i) {
                double s = std::exp(rng.uniform(-3.0, 14.0));
                double sum = cut.chi0(s);
                for (int k = 0; k < 25; ++k)
                    sum += cut.chi1(std::ldexp(s, -k));
                e = std::max(e, std::abs(sum - 1.0));
            }
            return CaseResult{e};
        });
    add("decompose.additive_partition", 1e-10, "sum_k chi_plus(s - k) = 1", Scope::all,
        [](const Group2Step&, CounterRng& rng, C) {
            double e = 0.0;
            for (int i = 0; i < 200; ++i) {
                double s = rng.uniform(-10.0, 10.0), sum = 0.0;
                for (int k = -12; k <= 12; ++k)
                    sum += chi_plus(s - k);
                e = std::max(e, std::abs(sum - 1.0));
            }
            return CaseResult{e};
        });
    add("decompose.direction_partition", 1e-10, "direction weights on S^{d1-1}, m = 4, sum to 1", Scope::all,
        [](const Group2Step& g, CounterRng& rng, C) {
            const DirectionSet set = make_directions(g.d1(), 4);
            double e = 0.0;
            for (int i = 0; i < 200; ++i) {
                double sum = 0.0;
                for (auto [j, w] : set.weights(rng.normal_vec(g.d1())))
                    sum += w;
                e = std::max(e, std::abs(sum - 1.0));
            }
            return CaseResult{e};
        },
        1);
    add("decompose.sector_partition", 1e-10, "mu sector weights at T = 16 kappa^2, kappa = 1.1, sum to 1",
        Scope::all,
        [](const Group2Step& g, CounterRng& rng, C) {
            const MuSectorDecomposition dec(g.d2(), 16.0 * 1.21, 1.1);
            double e = 0.0;
            for (int i = 0; i < 200; ++i) {
                double sum = 0.0;
                for (auto [j, w] : dec.weights(rng.normal_vec(g.d2())))
                    sum += w;
                e = std::max(e, std::abs(sum - 1.0));
            }
            return CaseResult{e};
        },
        1);
    add("decompose.direction_slope", 0.3, "|slope of log2 |Z_m|, d = 3, m = 2..5, minus 1|", Scope::all,
        [](const Group2Step&, CounterRng&, C) {
            double sm = 0, sl = 0, smm = 0, sml = 0;
            const int n = 4;
            for (int m = 2; m <= 5; ++m) {
                double l = std::log2(double(make_directions(3, m).size()));
                sm += m;
                sl += l;
                smm += m * m;
                sml += m * l;
            }
            return CaseResult{std::abs((n * sml - sm * sl) / (n * smm - sm * sm) - 1.0)};
        },
        1);

    // fio
    add("fio.t0_real", 1e-12, "|Im I[q](0, 0)| / |I[q](0, 0)| for a real symbol", Scope::metivier,
        [](const Group2Step& g, CounterRng&, C) {
            KernelSample k = eval_kernel(g, fio_symbol(g), 0.0, g.identity(), fio_spec(g));
            return CaseResult{std::abs(k.value.imag()) / std::abs(k.value), k.refine_error / std::abs(k.value)};
        },
        1, true);
    add("fio.abs_bound", 1e-9, "|I[q]| <= (2 pi)^-d int |q d_phi| (excess ratio)", Scope::metivier,
        [](const Group2Step& g, CounterRng&, C) {
            const double t = 0.7;
            const Symbol q = fio_symbol(g);
            const QuadratureSpec spec = fio_spec(g);
            const double bound = kernel_abs_bound(g, q, t, spec);
            CaseResult r{0.0, 0.0};
            for (const KernelSample& k : eval_kernel_batch(g, q, t, fio_points(g, t, 71), spec)) {
                r.err = std::max(r.err, std::abs(k.value) / bound - 1.0);
                r.refine = std::max(r.refine, k.refine_error / bound);
            }
            r.err = std::max(r.err, 0.0);
            return r;
        },
        1, true);
    add("fio.wave_identity", 5e-3, "(d_t^2 + L) I[q] = I[-2i|xi| d_t q + Lambda q] residual", Scope::metivier,
        [](const Group2Step& g, CounterRng&, C) {
            const double t = 0.5;
            CaseResult r{0.0, 0.0};
            for (const WaveCheck& w :
                 wave_identity_batch(g, fio_symbol(g), t, fio_points(g, t, 72), fio_spec(g))) {
                r.err = std::max(r.err, w.residual);
                r.refine = std::max(r.refine, w.refine_error);
            }
            return r;
        },
        2, true);
    add("fio.dec_periodic", 1e-3, "I[q] against the sheared sector sum at t = 20, kappa = 1.1", Scope::plane,
        [](const Group2Step& g, CounterRng&, C) {
            const double t = 20.0;
            QuadratureSpec spec;
            spec.nodes_per_dim = 24;
            const DecCheck d = dec_periodic(g, gaussian_band_symbol(1.6, 0.08, 1.0, 0.018), t,
                                            wavefront_points(g, t, 1.6, 2, 73, 0.95, 1.05, 0.1), 1.1, spec);
            CaseResult r{d.discrepancy, 0.0};
            double lmax = 0.0;
            for (const cplx& l : d.lhs)
                lmax = std::max(lmax, std::abs(l));
            for (double e : d.refine_error)
                r.refine = std::max(r.refine, e / lmax);
            return r;
        },
        2, true);
    return r;
}

const std::vector<Entry>& registry()
{
    static const std::vector<Entry> r = build_registry();
    return r;
}

const Entry& find_entry(const std::string& key)
{
    for (const Entry& e : registry())
        if (e.info.key == key)
            return e;
    throw InputError("unknown check '" + key + "'");
}

GroupClassification classify_for(const Group2Step& g, const VerifyOptions& opt)
{
    return classify(g, 200, opt.seed);
}

// runs fn(i) for i < n on up to jobs threads; results land by index
template <class Fn>
void parallel_for(int n, int jobs, Fn&& fn)
{
    jobs = std::clamp(jobs, 1, std::max(n, 1));
    if (jobs == 1) {
        for (int i = 0; i < n; ++i)
            fn(i);
        return;
    }
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errs(jobs);
    for (int w = 0; w < jobs; ++w)
        pool.emplace_back([&, w] {
            try {
                for (int i = w; i < n; i += jobs)
                    fn(i);
            } catch (...) {
                errs[w] = std::current_exception();
            }
        });
    for (auto& th : pool)
        th.join();
    for (auto& e : errs)
        if (e)
            std::rethrow_exception(e);
}

Check run_entry(const Entry& e, const Group2Step& g, const GroupClassification& cls, const VerifyOptions& opt,
                int cases)
{
    Check c;
    c.key = e.info.key;
    auto it = opt.tol.find(c.key);
    c.tol = it != opt.tol.end() ? it->second : e.info.default_tol;
    c.cases = e.fixed_cases > 0 ? e.fixed_cases : (cases > 0 ? cases : opt.cases);
    const int runs = e.fixed_cases > 0 ? 1 : c.cases;
    std::vector<CaseResult> res(runs);
    const std::uint64_t stream_seed = opt.seed ^ key_hash(c.key);
    parallel_for(runs, opt.jobs, [&](int i) {
        CounterRng rng(stream_seed, static_cast<std::uint64_t>(i));
        try {
            res[i] = e.fn(g, rng, cls);
        } catch (const Error&) {
            // a case the library rejects counts as a failure of the check
            res[i] = CaseResult{inf, -1.0};
        }
    });
    for (const CaseResult& r : res) {
        c.value = std::max(c.value, std::isnan(r.err) ? inf : r.err);
        c.refine_error = std::max(c.refine_error, r.refine);
    }
    c.pass = c.value <= c.tol;
    return c;
}

bool applies(const Entry& e, const Group2Step& g, const GroupClassification& cls)
{
    switch (e.scope) {
    case Scope::all:
        return true;
    case Scope::metivier:
        return cls.is_metivier;
    case Scope::htype:
        return g.is_htype();
    case Scope::plane:
        return cls.is_metivier && polar_group(g);
    }
    return false;
}

VerifyReport run_report(const Group2Step& g, const VerifyOptions& opt, const std::string& prefix)
{
    validate_overrides(opt.tol);
    VerifyReport rep;
    rep.group = g.name();
    rep.seed = opt.seed;
    rep.classification = classify_for(g, opt);
    for (const Entry& e : registry()) {
        if (e.info.key.rfind(prefix, 0) != 0)
            continue;
        if (e.quadrature && !opt.fio)
            continue;
        if (!applies(e, g, rep.classification)) {
            rep.skipped.push_back(e.info.key);
            continue;
        }
        rep.checks.push_back(run_entry(e, g, rep.classification, opt, 0));
    }
    return rep;
}

} // namespace

const std::vector<CheckInfo>& check_catalog()
{
    static const std::vector<CheckInfo> c = [] {
        std::vector<CheckInfo> v;
        for (const Entry& e : registry())
            v.push_back(e.info);
        return v;
    }();
    return c;
}

void validate_overrides(const std::map<std::string, double>& tol)
{
    for (const auto& [k, v] : tol) {
        find_entry(k);
        if (!(v > 0.0))
            throw InputError("tolerance for '" + k + "' must be positive");
    }
}

bool check_applies(const std::string& key, const Group2Step& g, const GroupClassification& cls)
{
    return applies(find_entry(key), g, cls);
}

Check run_check(const std::string& key, const Group2Step& g, const VerifyOptions& opt, int cases)
{
    validate_overrides(opt.tol);
    return run_entry(find_entry(key), g, classify_for(g, opt), opt, cases);
}

bool VerifyReport::pass() const
{
    return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.pass; });
}

VerifyReport verify_group(const Group2Step& g, const VerifyOptions& opt) { return run_report(g, opt, "carnot."); }

VerifyReport verify_all(const Group2Step& g, const VerifyOptions& opt) { return run_report(g, opt, ""); }

std::string report_json(const VerifyReport& r)
{
    using nlohmann::json;
    json checks = json::array();
    for (const Check& c : r.checks) {
        json j = {{"key", c.key}, {"value", c.value}, {"tolerance", c.tol}, {"cases", c.cases}, {"pass", c.pass}};
        if (c.refine_error >= 0.0)
            j["refine_error"] = c.refine_error;
        checks.push_back(j);
    }
    const GroupClassification& cls = r.classification;
    json out = {{"group", r.group},
                {"seed", r.seed},
                {"pass", r.pass()},
                {"classification",
                 {{"max_rank", cls.max_rank},
                  {"is_metivier", cls.is_metivier},
                  {"is_htype", cls.is_htype},
                  {"min_singular", cls.min_singular},
                  {"max_htype_defect", cls.max_htype_defect},
                  {"rank_tolerance", 1e-9},
                  {"samples", 200}}},
                {"checks", checks},
                {"skipped", r.skipped}};
    return out.dump(2) + "\n";
}

} // namespace cfio

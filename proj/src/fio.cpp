#include "cfio/fio.hpp"

#include "cfio/errors.hpp"
#include "cfio/fd.hpp"
#include "cfio/quadrature.hpp"
#include "cfio/rng.hpp"
#include "cfio/transport.hpp"

#include <fmt/core.h>

#include <algorithm>
#include <cmath>
#include <numbers>

namespace cfio {

namespace {

constexpr double pi = std::numbers::pi;
const cplx I1(0.0, 1.0);

double norm_factor(const Group2Step& g) { return std::pow(2.0 * pi, -g.dim()); }

// Calls fn(c, w) for every quadrature node of the domain in a fixed order.
template <class Fn>
void visit_nodes(const IntegrationDomain& dom, int d1, int d2, int n, int n_alpha, Fn&& fn)
{
    if (dom.polar) {
        const GaussRule& gr = gauss_legendre(n);
        const double rc = 0.5 * (dom.rho_min + dom.rho_max), rh = 0.5 * (dom.rho_max - dom.rho_min);
        const double wa = 2.0 * pi / n_alpha;
        Covector c{Vec(2), Vec(1)};
        for (int i = 0; i < n; ++i) {
            const double rho = rc + rh * gr.x[i];
            const double wr = rh * gr.w[i] * rho * rho * wa;
            for (int j = 0; j < n_alpha; ++j) {
                const double al = wa * (j + 0.5);
                c.xi(0) = rho * std::cos(al);
                c.xi(1) = rho * std::sin(al);
                for (const auto& [s0, s1] : dom.ratio) {
                    const double sc = 0.5 * (s0 + s1), sh = 0.5 * (s1 - s0);
                    for (int k = 0; k < n; ++k) {
                        c.mu(0) = rho * (sc + sh * gr.x[k]);
                        fn(c, wr * sh * gr.w[k]);
                    }
                }
            }
        }
        return;
    }
    const int d = d1 + d2;
    const bool gh = dom.hermite();
    const GaussRule& gr = gh ? gauss_hermite(n) : gauss_legendre(n);
    // Hermite weights with exp(x^2) restored, the symbol carries the Gaussian
    std::vector<double> gw = gr.w;
    if (gh)
        for (int i = 0; i < n; ++i)
            gw[i] *= dom.width * std::exp(gr.x[i] * gr.x[i]);
    std::vector<int> idx(d, 0);
    Vec z(d);
    while (true) {
        double w = 1.0;
        for (int a = 0; a < d; ++a) {
            if (gh) {
                z(a) = dom.center(a) + dom.width * gr.x[idx[a]];
                w *= gw[idx[a]];
                continue;
            }
            const double c = 0.5 * (dom.lo(a) + dom.hi(a)), h = 0.5 * (dom.hi(a) - dom.lo(a));
            z(a) = c + h * gr.x[idx[a]];
            w *= h * gr.w[idx[a]];
        }
        fn(unpack_cov(z, d1), w);
        int a = d - 1;
        while (a >= 0 && ++idx[a] == n)
            idx[a--] = 0;
        if (a < 0)
            break;
    }
}

void check_nodes(const IntegrationDomain& dom, int n)
{
    if (n < (dom.hermite() ? 4 : 8))
        throw InputError(dom.hermite() ? "Hermite quadrature needs at least 4 nodes per dimension"
                                       : "quadrature needs at least 8 nodes per dimension");
}

IntegrationDomain region_domain(const Group2Step& g, const QuadratureSpec& spec, const Symbol& q)
{
    return domain_for(g, spec.region.value_or(q.support));
}

} // namespace

double IntegrationDomain::xi_max(int d1) const
{
    if (polar)
        return rho_max;
    if (hermite())
        return center.head(d1).norm() + 6.0 * width;
    double s = 0.0;
    for (int a = 0; a < d1; ++a)
        s += std::pow(std::max(std::abs(lo(a)), std::abs(hi(a))), 2);
    return std::sqrt(s);
}

int IntegrationDomain::refined(int n) const { return hermite() ? n + n / 2 : 2 * n; }

IntegrationDomain domain_for(const Group2Step& g, const SupportRegion& r)
{
    IntegrationDomain dom;
    const int d1 = g.d1(), d2 = g.d2();
    if (d1 == 2 && d2 == 1 && std::isfinite(r.xi_max) && std::isfinite(r.ratio_max)) {
        dom.polar = true;
        dom.rho_min = r.xi_min;
        dom.rho_max = r.xi_max;
        if (r.ratio_min > 0.0)
            dom.ratio = {{-r.ratio_max, -r.ratio_min}, {r.ratio_min, r.ratio_max}};
        else
            dom.ratio = {{-r.ratio_max, r.ratio_max}};
        return dom;
    }
    const int d = d1 + d2;
    dom.lo = Vec(d);
    dom.hi = Vec(d);
    if (r.ball_center.size() == d && r.gauss_width > 0.0) {
        dom.center = r.ball_center;
        dom.width = r.gauss_width;
        return dom;
    }
    if (r.ball_center.size() == d && std::isfinite(r.ball_radius)) {
        dom.lo = r.ball_center.array() - r.ball_radius;
        dom.hi = r.ball_center.array() + r.ball_radius;
        return dom;
    }
    if (!std::isfinite(r.xi_max))
        throw InputError("symbol support is unbounded in xi");
    const double mu_max = std::min(r.mu_max, r.ratio_max * r.xi_max);
    if (!std::isfinite(mu_max))
        throw InputError("symbol support is unbounded in mu");
    dom.lo.head(d1).setConstant(-r.xi_max);
    dom.hi.head(d1).setConstant(r.xi_max);
    dom.lo.tail(d2).setConstant(-mu_max);
    dom.hi.tail(d2).setConstant(mu_max);
    return dom;
}

int angular_nodes_for(const IntegrationDomain& dom, double t, const std::vector<Point>& pts, int n)
{
    double ext = 0.0;
    for (const Point& p : pts)
        ext = std::max(ext, p.x.norm());
    const double band = (dom.polar ? dom.rho_max : 0.0) * (ext + std::abs(t));
    int na = std::max(4 * n, static_cast<int>(std::ceil(1.2 * band)) + 24);
    return (na + 3) / 4 * 4;
}

std::vector<cplx> integrate(const Group2Step& g, const Integrand& f, double t, const IntegrationDomain& dom,
                            const std::vector<Point>& pts, int n, int n_alpha)
{
    check_nodes(dom, n);
    std::vector<cplx> acc(pts.size(), cplx(0.0));
    PhaseData pd;
    visit_nodes(dom, g.d1(), g.d2(), n, n_alpha, [&](const Covector& c, double w) {
        const cplx a = f(t, c, pd);
        if (a == 0.0)
            return;
        const cplx aw = a * w;
        for (size_t j = 0; j < pts.size(); ++j)
            acc[j] += aw * std::exp(I1 * phase_at(pd, pts[j]));
    });
    return acc;
}

double integrate_abs(const Group2Step& g, const Integrand& f, double t, const IntegrationDomain& dom, int n,
                     int n_alpha)
{
    check_nodes(dom, n);
    double acc = 0.0;
    PhaseData pd;
    visit_nodes(dom, g.d1(), g.d2(), n, n_alpha,
                [&](const Covector& c, double w) { acc += std::abs(f(t, c, pd)) * w; });
    return acc;
}

std::vector<KernelSample> integrate_refined(const Group2Step& g, const Integrand& f, double t,
                                            const IntegrationDomain& dom, const std::vector<Point>& pts,
                                            const QuadratureSpec& spec)
{
    const int n = spec.nodes_per_dim;
    const int na = spec.angular_nodes > 0 ? spec.angular_nodes : angular_nodes_for(dom, t, pts, n);
    std::vector<cplx> fine =
        integrate(g, f, t, dom, pts, spec.refine ? dom.refined(n) : n, spec.refine ? 2 * na : na);
    std::vector<cplx> coarse;
    if (spec.refine)
        coarse = integrate(g, f, t, dom, pts, n, na);
    std::vector<KernelSample> out(pts.size());
    for (size_t j = 0; j < pts.size(); ++j) {
        out[j].t = t;
        out[j].point = pts[j];
        out[j].value = fine[j];
        out[j].refine_error = spec.refine ? std::abs(fine[j] - coarse[j]) : 0.0;
        if (out[j].refine_error > spec.tol)
            throw RefineFailure(fmt::format("kernel quadrature did not settle: refine error {:.3e} above {:.3e}",
                                            out[j].refine_error, spec.tol));
    }
    return out;
}

Integrand kernel_integrand(const Group2Step& g, const Symbol& q)
{
    const double nf = norm_factor(g);
    return [g, q, nf](double t, const Covector& c, PhaseData& pd) -> cplx {
        const cplx v = q(t, c);
        if (v == 0.0)
            return 0.0;
        pd = phase_data(g, t, c);
        return nf * v * pd.density;
    };
}

Integrand wave_rhs_integrand(const Group2Step& g, const Symbol& q)
{
    const double nf = norm_factor(g);
    return [g, q, nf](double t, const Covector& c, PhaseData& pd) -> cplx {
        if (!q.support.contains(c))
            return 0.0;
        const SymbolJet j = q.jet(t, c);
        pd = phase_data(g, t, c);
        const CoeffBundle b = g.is_htype() ? lambda_coeffs_htype(g, pd) : lambda_coeffs(pd);
        const cplx amp = -2.0 * I1 * pd.xn * j.qt + assemble_lambda(b, j);
        return nf * amp * pd.density;
    };
}

std::vector<Point> wavefront_points(const Group2Step& g, double t, double s, int count, std::uint64_t seed,
                                    double rlo, double rhi, double jitter)
{
    CounterRng rng(seed);
    std::vector<Point> pts;
    const bool plane = g.d1() == 2;
    for (int i = 0; i < count; ++i) {
        Vec xi(2);
        double r = 0.0;
        if (plane) {
            const double a = rng.uniform(0.0, 2.0 * pi);
            r = rng.uniform(rlo, rhi);
            xi << s * std::cos(a), s * std::sin(a);
        } else {
            xi = s * rng.unit_vec(g.d1());
            r = rng.uniform(rlo, rhi);
        }
        r *= i % 2 ? 1.0 : -1.0;
        const Vec mu = g.d2() == 1 ? Vec::Constant(1, r * s) : Vec(r * s * rng.unit_vec(g.d2()));
        const FlowPoint f = flow_origin(g, t, {xi, mu});
        pts.push_back({f.x * rng.uniform(1.0 - jitter, 1.0 + 0.5 * jitter),
                       f.u * rng.uniform(1.0 - 0.1 * jitter, 1.0 + 0.1 * jitter)});
    }
    return pts;
}

KernelSample eval_kernel(const Group2Step& g, const Symbol& q, double t, const Point& p, const QuadratureSpec& spec)
{
    return eval_kernel_batch(g, q, t, {p}, spec).front();
}

std::vector<KernelSample> eval_kernel_batch(const Group2Step& g, const Symbol& q, double t,
                                            const std::vector<Point>& pts, const QuadratureSpec& spec)
{
    return integrate_refined(g, kernel_integrand(g, q), t, region_domain(g, spec, q), pts, spec);
}

double kernel_abs_bound(const Group2Step& g, const Symbol& q, double t, const QuadratureSpec& spec)
{
    const IntegrationDomain dom = region_domain(g, spec, q);
    const int n = dom.refined(spec.nodes_per_dim);
    const int na = spec.angular_nodes > 0 ? 2 * spec.angular_nodes : 8 * spec.nodes_per_dim;
    return integrate_abs(g, kernel_integrand(g, q), t, dom, n, na);
}

std::vector<WaveCheck> wave_identity_batch(const Group2Step& g, const Symbol& q, double t,
                                           const std::vector<Point>& pts, const QuadratureSpec& spec,
                                           double step_rel)
{
    const IntegrationDomain dom = region_domain(g, spec, q);
    const int d1 = g.d1();
    const double h = step_rel / std::max(dom.xi_max(d1), 1e-300);
    const double offs[4] = {-2.0 * h, -h, h, 2.0 * h};
    const size_t np = pts.size();
    const size_t per = 1 + 4 * static_cast<size_t>(d1);

    // per point: p, then p * (s e_j, 0) for the four offsets and each j
    std::vector<Point> at_t;
    for (const Point& p : pts) {
        at_t.push_back(p);
        for (int j = 0; j < d1; ++j)
            for (double s : offs) {
                Point step = g.identity();
                step.x(j) = s;
                at_t.push_back(g.multiply(p, step));
            }
    }
    const int n = spec.nodes_per_dim;
    const int na =
        spec.angular_nodes > 0 ? spec.angular_nodes : angular_nodes_for(dom, std::abs(t) + 2.0 * h, at_t, n);

    const Integrand kern = kernel_integrand(g, q);
    const Integrand rhs_f = wave_rhs_integrand(g, q);
    auto second = [h](cplx m2, cplx m1, cplx c0, cplx p1, cplx p2) {
        return (-m2 + 16.0 * m1 - 30.0 * c0 + 16.0 * p1 - p2) / (12.0 * h * h);
    };
    auto evaluate = [&](int nn, int nna, std::vector<cplx>& lhs, std::vector<cplx>& rhs) {
        const std::vector<cplx> v0 = integrate(g, kern, t, dom, at_t, nn, nna);
        std::vector<std::vector<cplx>> tt;
        for (double o : offs)
            tt.push_back(integrate(g, kern, t + o, dom, pts, nn, nna));
        lhs.assign(np, 0.0);
        for (size_t i = 0; i < np; ++i) {
            const cplx* v = &v0[i * per];
            lhs[i] = second(tt[0][i], tt[1][i], v[0], tt[2][i], tt[3][i]);
            for (int j = 0; j < d1; ++j) {
                const cplx* s = v + 1 + 4 * j;
                lhs[i] -= second(s[0], s[1], v[0], s[2], s[3]);
            }
        }
        rhs = integrate(g, rhs_f, t, dom, pts, nn, nna);
    };

    std::vector<cplx> lf, rf, lc, rc;
    evaluate(spec.refine ? dom.refined(n) : n, spec.refine ? 2 * na : na, lf, rf);
    if (spec.refine)
        evaluate(n, na, lc, rc);
    std::vector<WaveCheck> out(np);
    for (size_t i = 0; i < np; ++i) {
        WaveCheck& wc = out[i];
        wc.lhs = lf[i];
        wc.rhs = rf[i];
        const double scale = std::abs(wc.lhs) + std::abs(wc.rhs) + 1e-300;
        wc.residual = std::abs(wc.lhs - wc.rhs) / scale;
        if (spec.refine) {
            wc.refine_error = (std::abs(lc[i] - wc.lhs) + std::abs(rc[i] - wc.rhs)) / scale;
            if (wc.refine_error > spec.tol)
                throw RefineFailure("wave identity quadrature did not settle");
        }
    }
    return out;
}

WaveCheck wave_identity(const Group2Step& g, const Symbol& q, double t, const Point& p, const QuadratureSpec& spec,
                        double step_rel)
{
    return wave_identity_batch(g, q, t, {p}, spec, step_rel).front();
}

double wave_identity_residual(const Group2Step& g, const Symbol& q, double t, const Point& p,
                              const QuadratureSpec& spec)
{
    return wave_identity(g, q, t, p, spec).residual;
}

DecCheck dec_periodic(const Group2Step& g, const Symbol& q, double t, const std::vector<Point>& pts, double kappa,
                      const QuadratureSpec& spec)
{
    if (g.d1() != 2 || g.d2() != 1)
        throw InputError("dec_periodic is implemented for d1 = 2, d2 = 1");
    const double T = std::abs(t);
    if (!(kappa > 1.0) || T < 16.0 * kappa * kappa)
        throw InputError("dec_periodic needs kappa > 1 and |t| >= 16 kappa^2");
    const IntegrationDomain dom = region_domain(g, spec, q);
    if (!dom.polar)
        throw InputError("dec_periodic needs a symbol with bounded |xi| and |mu|/|xi|");

    const int n = spec.nodes_per_dim;
    const int na = spec.angular_nodes > 0 ? spec.angular_nodes : angular_nodes_for(dom, t, pts, n);
    QuadratureSpec sp = spec;
    sp.angular_nodes = na;

    DecCheck out;
    const std::vector<KernelSample> lhs = integrate_refined(g, kernel_integrand(g, q), t, dom, pts, sp);
    out.rhs.assign(pts.size(), cplx(0.0));
    std::vector<double> rhs_err(pts.size(), 0.0);

    const MuSectorDecomposition dec(1, T, kappa);
    const double scale = std::pow(T, 0.5 - g.d2());
    const int k_lo = static_cast<int>(std::floor(T / (8.0 * kappa))) + 1;
    const int k_hi = static_cast<int>(std::ceil(kappa * T)) - 1;
    for (long long vi = 0; vi < dec.count(); ++vi) {
        const Vec v = dec.sector(vi);
        for (int k = k_lo; k <= k_hi; ++k) {
            // mu/|xi| = (s + 2 k v)/t in an original ratio interval and |s| < 2
            IntegrationDomain sd = dom;
            sd.ratio.clear();
            for (const auto& [a, b] : dom.ratio) {
                double s0 = t * a - 2.0 * k * v(0), s1 = t * b - 2.0 * k * v(0);
                if (s0 > s1)
                    std::swap(s0, s1);
                s0 = std::max(s0, -2.0);
                s1 = std::min(s1, 2.0);
                if (s1 > s0)
                    sd.ratio.emplace_back(s0, s1);
            }
            if (sd.ratio.empty())
                continue;
            out.k_used.push_back(static_cast<int>(v(0) > 0 ? k : -k));
            const Symbol qk = sheared_symbol(g, q, k, v, dec, vi);
            const Integrand f = [&g, qk, k, v](double tt, const Covector& c, PhaseData& pd) -> cplx {
                const cplx a = qk(tt, c);
                if (a == 0.0)
                    return 0.0;
                pd = phase_data(g, tt, mu_shear(g, tt, k, v, c));
                return a;
            };
            const std::vector<KernelSample> part = integrate_refined(g, f, t, sd, pts, sp);
            for (size_t j = 0; j < pts.size(); ++j) {
                out.rhs[j] += scale * part[j].value;
                rhs_err[j] += scale * part[j].refine_error;
            }
        }
    }
    double lmax = 0.0, dmax = 0.0;
    for (size_t j = 0; j < pts.size(); ++j) {
        out.lhs.push_back(lhs[j].value);
        out.refine_error.push_back(lhs[j].refine_error + rhs_err[j]);
        lmax = std::max(lmax, std::abs(lhs[j].value));
        dmax = std::max(dmax, std::abs(lhs[j].value - out.rhs[j]));
    }
    out.discrepancy = lmax > 0.0 ? dmax / lmax : dmax;
    return out;
}

double dec_periodic_check(const Group2Step& g, const Symbol& q, double t, const Point& p, double kappa,
                          const QuadratureSpec& spec)
{
    return dec_periodic(g, q, t, {p}, kappa, spec).discrepancy;
}

double sheared_phase_gradient_error(const Group2Step& g, double t, int k, const Vec& v, const Point& p,
                                    const Covector& c)
{
    const int d1 = g.d1();
    const Vec z = pack(c);
    const double h = 1e-4 * z.norm();
    auto re_phase = [&](const Vec& w) {
        const Covector s = mu_shear(g, t, k, v, unpack_cov(w, d1));
        Vec r(1);
        r(0) = phase_at(phase_data(g, t, s), p).real();
        return r;
    };
    auto xi_tkv = [&](const Vec& w) {
        const FlowPoint f = flow_origin(g, t, mu_shear(g, t, k, v, unpack_cov(w, d1)));
        return pack(f.covector());
    };
    const Mat lhs = fd::jacobian(re_phase, z, h);
    const Mat jac = fd::jacobian(xi_tkv, z, h);
    const FlowPoint f = flow_origin(g, t, mu_shear(g, t, k, v, c));
    const Vec disp = pack(p) - pack(f.point());
    const Mat rhs = disp.transpose() * jac;
    return (lhs - rhs).cwiseAbs().maxCoeff() / std::max(lhs.norm(), 1e-300);
}

namespace {

// I(r, u) = sum_j w_j e^{i u mu_j} G(r, mu_j) for the rotation-invariant
// Heisenberg kernel at x = (r, 0); G on the r grid by a second-order
// recurrence in r (the phase is quadratic in x).
double l1_norm_heisenberg(const Group2Step& g, const Symbol& q, double t, double R, int nr, int nu, int n_rho,
                          int n_mu, int n_alpha, double rho_lo, double rho_hi, double mu_lo, double mu_hi)
{
    const double nf = norm_factor(g);
    const double dr = R / nr;
    const double umax = 0.25 * R * R, du = 2.0 * umax / nu;
    const GaussRule& gr = gauss_legendre(n_rho);
    const GaussRule& gm = gauss_legendre(n_mu);
    std::vector<double> mus, mws;
    for (double sgn : {-1.0, 1.0})
        for (int k = 0; k < n_mu; ++k) {
            const double c = 0.5 * (mu_lo + mu_hi), h = 0.5 * (mu_hi - mu_lo);
            mus.push_back(sgn * (c + h * gm.x[k]));
            mws.push_back(h * gm.w[k]);
        }
    const int nm = static_cast<int>(mus.size());
    // G(r_i, mu_j), row-major in r
    std::vector<cplx> G(static_cast<size_t>(nr) * nm, cplx(0.0));
    const double wa = 2.0 * pi / n_alpha;
    Covector c{Vec(2), Vec(1)};
    for (int j = 0; j < nm; ++j) {
        for (int i = 0; i < n_rho; ++i) {
            const double rc = 0.5 * (rho_lo + rho_hi), rh = 0.5 * (rho_hi - rho_lo);
            const double rho = rc + rh * gr.x[i];
            const double wr = rh * gr.w[i] * rho * wa;
            for (int a = 0; a < n_alpha; ++a) {
                const double al = wa * (a + 0.5);
                c.xi << rho * std::cos(al), rho * std::sin(al);
                c.mu(0) = mus[j];
                const cplx qv = q(t, c);
                if (qv == 0.0)
                    continue;
                const PhaseData pd = phase_data(g, t, c);
                const cplx amp = nf * qv * pd.density * wr;
                // phi(r) = A + B r + C r^2 at x = (r, 0), u = 0
                const double m = pd.abs_j(0, 0);
                const cplx A(-pd.xt.dot(pd.xit) - pd.mu_ut, 0.25 * m * pd.xt.squaredNorm());
                const cplx B(pd.xit(0), -0.5 * m * pd.xt(0));
                const cplx C(0.0, 0.25 * m);
                const double r0 = 0.5 * dr;
                cplx val = amp * std::exp(I1 * (A + B * r0 + C * r0 * r0));
                cplx ratio = std::exp(I1 * (B * dr + C * (2.0 * r0 * dr + dr * dr)));
                const cplx ratio_step = std::exp(I1 * C * (2.0 * dr * dr));
                cplx* row = &G[static_cast<size_t>(j)];
                for (int ri = 0; ri < nr; ++ri) {
                    row[static_cast<size_t>(ri) * nm] += val;
                    val *= ratio;
                    ratio *= ratio_step;
                }
            }
        }
    }
    double total = 0.0;
    std::vector<cplx> eu(nm);
    for (int ui = 0; ui < nu; ++ui) {
        const double u = -umax + (ui + 0.5) * du;
        for (int j = 0; j < nm; ++j)
            eu[j] = mws[j] * std::exp(I1 * u * mus[j]);
        for (int ri = 0; ri < nr; ++ri) {
            const double r = (ri + 0.5) * dr;
            if (std::pow(r, 4) + 16.0 * u * u > std::pow(R, 4))
                continue;
            cplx v = 0.0;
            const cplx* row = &G[static_cast<size_t>(ri) * nm];
            for (int j = 0; j < nm; ++j)
                v += eu[j] * row[j];
            total += std::abs(v) * 2.0 * pi * r * dr * du;
        }
    }
    return total;
}

} // namespace

L1Study l1_growth_study(const Group2Step& g, const std::vector<int>& m_list, double t, double ball_radius, int grid,
                        const QuadratureSpec& spec, const SymbolFamily& family)
{
    if (g.d1() != 2 || g.d2() != 1 || !g.is_htype())
        throw InputError("l1 study is implemented for the Heisenberg group");
    if (!(ball_radius > 0.0) || grid < 1)
        throw InputError("l1 study needs a positive radius and grid");
    L1Study st;
    const double R = ball_radius;
    for (int m : m_list) {
        if (m < 0 || m > 6)
            throw InputError("l1 study supports 0 <= m <= 6");
        const Symbol q = family ? family(m) : initial_symbol(g, m, 0);
        const double s = std::ldexp(1.0, m);
        const double lo = 0.5 * s, hi = 2.0 * s;
        const double reach = R + std::abs(t);
        const int n0 = spec.nodes_per_dim;
        const int n_rho = n0 + static_cast<int>(std::ceil(0.6 * (hi - lo) * reach));
        const int n_mu = n0 + static_cast<int>(std::ceil(0.6 * (hi - lo) * (0.25 * R * R + reach + t * t)));
        const int n_alpha = std::max(4 * n0, static_cast<int>(std::ceil(1.2 * hi * reach)) + 24);
        const int nr = std::max(8, static_cast<int>(std::ceil(grid * s * R)));
        const int nu = std::max(8, static_cast<int>(std::ceil(grid * s * 0.5 * R * R)));
        L1Row row;
        row.m = m;
        row.norm = l1_norm_heisenberg(g, q, t, R, nr, nu, n_rho, n_mu, n_alpha, lo, hi, lo, hi);
        row.refined_norm = l1_norm_heisenberg(g, q, t, R, 2 * nr, 2 * nu, n_rho, n_mu, n_alpha, lo, hi, lo, hi);
        row.grid_change = std::abs(row.refined_norm - row.norm) / std::max(row.refined_norm, 1e-300);
        st.rows.push_back(row);
    }
    std::vector<std::pair<double, double>> pts;
    for (const L1Row& r : st.rows)
        if (r.refined_norm > 0.0)
            pts.emplace_back(r.m, std::log2(r.refined_norm));
    if (pts.size() >= 2) {
        double mx = 0, my = 0;
        for (auto [x, y] : pts) {
            mx += x;
            my += y;
        }
        mx /= pts.size();
        my /= pts.size();
        double sxy = 0, sxx = 0;
        for (auto [x, y] : pts) {
            sxy += (x - mx) * (y - my);
            sxx += (x - mx) * (x - mx);
        }
        if (sxx > 0.0) {
            st.slope = sxy / sxx;
            st.fitted = true;
        }
    }
    return st;
}

ParametrixStudy parametrix_residual_study(const Group2Step& g, const Symbol& q0, int n_max,
                                          const std::vector<double>& t_grid, const std::vector<Point>& p_grid,
                                          const QuadratureSpec& spec)
{
    if (n_max < 0 || n_max > 3)
        throw InputError("parametrix study supports 0 <= N <= 3");
    const AmplitudeIterates it(g, q0, n_max);
    const IntegrationDomain dom = region_domain(g, spec, q0);
    const double nf = norm_factor(g);
    const bool radial = q0.radial && g.d1() == 2 && g.d2() == 1;
    auto integrand = [&](int kind, int j) -> Integrand {
        return [&it, &g, nf, kind, j, radial](double t, const Covector& c, PhaseData& pd) -> cplx {
            // on d1 = 2, d2 = 1 rotations of xi commute with J, so radial
            // amplitudes have radial iterates
            const IterateValues v =
                radial ? it.values(t, {(Vec(2) << c.xi.norm(), 0.0).finished(), c.mu}) : it.values(t, c);
            const cplx a = kind == 0 ? v.iterate[j] : kind == 1 ? v.ringring[j] : v.lambda[j];
            if (a == 0.0)
                return 0.0;
            pd = phase_data(g, t, c);
            return nf * a * pd.density;
        };
    };
    ParametrixStudy st;
    st.remainder_sup.assign(n_max + 1, 0.0);
    st.leading_sup.assign(n_max + 1, 0.0);
    for (double t : t_grid) {
        // per j: I[L_I^j q0](+-t), I[rL L_I^j q0](+-t), I[L L_I^j q0](t)
        std::vector<std::vector<KernelSample>> itp, itm, rrp, rrm, lam;
        for (int j = 0; j <= n_max; ++j) {
            itp.push_back(integrate_refined(g, integrand(0, j), t, dom, p_grid, spec));
            itm.push_back(integrate_refined(g, integrand(0, j), -t, dom, p_grid, spec));
            rrp.push_back(integrate_refined(g, integrand(1, j), t, dom, p_grid, spec));
            rrm.push_back(integrate_refined(g, integrand(1, j), -t, dom, p_grid, spec));
            lam.push_back(integrate_refined(g, integrand(2, j), t, dom, p_grid, spec));
        }
        for (size_t pi_ = 0; pi_ < p_grid.size(); ++pi_) {
            cplx ps = 0.0, ss = 0.0;
            double err = 0.0;
            for (int n = 0; n <= n_max; ++n) {
                ps += 0.5 * (itp[n][pi_].value + itm[n][pi_].value);
                ss += -(rrp[n][pi_].value - rrm[n][pi_].value) / (2.0 * I1);
                err += 0.5 * (itp[n][pi_].refine_error + itm[n][pi_].refine_error);
                ParametrixRow row;
                row.n = n;
                row.t = t;
                row.point = p_grid[pi_];
                row.partial_sum = ps;
                row.sine_sum = ss;
                row.remainder = lam[n][pi_].value;
                row.refine_error = err + lam[n][pi_].refine_error;
                st.remainder_sup[n] = std::max(st.remainder_sup[n], std::abs(row.remainder));
                st.leading_sup[n] = std::max(st.leading_sup[n], std::abs(ps));
                st.rows.push_back(row);
            }
        }
    }
    return st;
}

} // namespace cfio

#include "cfio/transport.hpp"

#include "cfio/errors.hpp"
#include "cfio/fd.hpp"
#include "cfio/quadrature.hpp"

#include <cmath>

namespace cfio {

namespace {

constexpr cplx I1(0.0, 1.0);

cplx bilinear(const CVec& a, const Vec& r) { return a.transpose() * r.cast<cplx>(); }

} // namespace

CoeffBundle f_coeffs(const PhaseData& pd, const Vec& x)
{
    const double M = pd.mn, X = pd.xn, th = pd.theta, a = pd.a, tr = pd.tr;
    const Vec r = x - pd.xt;
    const cplx D = 1.0 + I1 * th * a;
    const cplx er = bilinear(pd.e, r), jer = bilinear(pd.abs_j_e, r);
    const double m2 = M * M / (X * X);
    CoeffBundle b;
    b.f20 = -0.25 * m2 * er * er;
    b.f11 = 2.0 * X + I1 * (M / X) * er;
    b.f10 = 0.5 * M * th * a * a / D + 0.25 * m2 * ((tr - a / D) * er + 2.0 * jer);
    b.f02 = 1.0;
    b.f01 = -I1 * (M / (2.0 * X)) * (tr - a / D);
    b.f00 = -m2 / 16.0 * (tr * tr - 2.0 * tr * a / D - (a / D) * (a / D));
    const double c2 = 2.0 * pd.b2 - 3.0 * a * a;
    b.k = 0.125 * m2 * er * (tr - (tr - 2.0 * a) / D + I1 * th * c2 / (D * D));
    return b;
}

CoeffBundle f_coeffs(const Group2Step& g, double t, const Point& p, const Covector& c)
{
    return f_coeffs(phase_data(g, t, c), p.x);
}

cplx k_value(const Group2Step& g, double t, const Point& p, const Covector& c)
{
    return f_coeffs(g, t, p, c).k;
}

CoeffBundle f_coeffs_definition(const Group2Step& g, double t, const Point& p, const Covector& c)
{
    const int d1 = g.d1();
    const double X = c.xi.norm(), M = c.mu.norm();
    const double ht = 1e-2 * std::min(1.0, 2.0 * X / std::max(M, 1e-300));
    const double hs = 0.1; // phi is quadratic along horizontal lines
    auto phi_t = [&](double s) { return phase_at(phase_data(g, t + s, c), p); };
    auto den_t = [&](double s) { return phase_data(g, t + s, c).density; };
    const PhaseData pd = phase_data(g, t, c);
    const cplx pt = fd::d1(phi_t, 0.0, ht), ptt = fd::d2(phi_t, 0.0, ht);
    const cplx dn = pd.density, dt = fd::d1(den_t, 0.0, ht), dtt = fd::d2(den_t, 0.0, ht);
    cplx grad2 = 0.0, lap = 0.0;
    for (int j = 0; j < d1; ++j) {
        auto along = [&](double s) {
            Point step{s * Vec::Unit(d1, j), Vec::Zero(g.d2())};
            return phase_at(pd, g.multiply(p, step));
        };
        const cplx xj = fd::d1_plain(along, 0.0, hs);
        grad2 += xj * xj;
        lap -= (along(hs) - 2.0 * along(0.0) + along(-hs)) / (hs * hs);
    }
    CoeffBundle b;
    b.f20 = pt * pt - grad2;
    b.f11 = -2.0 * pt;
    b.f10 = -((ptt + lap) + 2.0 * pt * dt / dn);
    b.f02 = 1.0;
    b.f01 = 2.0 * dt / dn;
    b.f00 = dtt / dn;
    return b;
}

CoeffBundle lambda_coeffs(const PhaseData& pd)
{
    const double M = pd.mn, X = pd.xn, th = pd.theta, a = pd.a, b2 = pd.b2, b3 = pd.b3, tr = pd.tr;
    const cplx D = 1.0 + I1 * th * a, ith = I1 * th;
    const double m2 = M * M / (X * X), c2 = 2.0 * b2 - 3.0 * a * a;
    const int n = static_cast<int>(pd.w.size());
    CoeffBundle b;
    b.l00 = -m2 / 16.0 / (D * D) *
            (tr * tr - 6.0 * a * tr - 12.0 * b2 + 21.0 * a * a - 4.0 * ith * tr * c2 / D -
             2.0 * ith * (4.0 * b3 - 30.0 * b2 * a + 33.0 * a * a * a) / D + 5.0 * ith * ith * c2 * c2 / (D * D) +
             2.0 * c2 / D);
    const CVec jw = (pd.abs_j / M).cast<cplx>() * pd.w;
    b.l01 = -0.25 * m2 / (D * D) * ((tr - 3.0 * a - 2.0 * ith * c2 / D) * pd.w + 2.0 * jw);
    b.l02 = -0.25 * m2 / (D * D) * pd.w * pd.w.transpose();
    b.l10 = I1 * (M / (2.0 * X)) / D * (tr - a - ith * c2 / D);
    b.l11 = I1 * (M / X) / D * pd.w;
    b.l20 = 1.0;
    (void)n;
    return b;
}

CoeffBundle lambda_coeffs_htype(const Group2Step& g, const PhaseData& pd)
{
    const double M = pd.mn, X = pd.xn, d1 = g.d1();
    const cplx D = 1.0 + I1 * pd.theta;
    const double m2 = M * M / (X * X);
    CoeffBundle b;
    b.l00 = -m2 / 16.0 / (D * D) * (d1 * (d1 - 2.0) - 2.0 * (2.0 * d1 - 1.0) / D + 5.0 / (D * D));
    b.l01 = -0.25 * m2 / (D * D) * (d1 + 1.0 - 2.0 / D) * pd.w;
    b.l02 = -0.25 * m2 / (D * D) * pd.w * pd.w.transpose();
    b.l10 = I1 * (M / (2.0 * X)) / D * (d1 - 1.0 / D);
    b.l11 = I1 * (M / X) / D * pd.w;
    b.l20 = 1.0;
    return b;
}

CoeffBundle lambda_coeffs(const Group2Step& g, double t, const Covector& c)
{
    const PhaseData pd = phase_data(g, t, c);
    return g.is_htype() ? lambda_coeffs_htype(g, pd) : lambda_coeffs(pd);
}

cplx apply_r_numeric(const Group2Step& g, const Amplitude& p, double t, const Vec& x, const Covector& c,
                     const ROptions& opt)
{
    const int d1 = g.d1();
    const GaussRule& gl = gauss_legendre(opt.gl_nodes);
    auto field = [&](const Vec& xi) -> CVec {
        const Covector cc{xi, c.mu};
        const PhaseData pd = phase_data(g, t, cc);
        CVec grad = CVec::Zero(d1);
        for (int i = 0; i < opt.gl_nodes; ++i) {
            const double s = 0.5 * (gl.x[i] + 1.0), w = 0.5 * gl.w[i];
            const Vec y = pd.xt + s * (x - pd.xt);
            for (int k = 0; k < d1; ++k) {
                const Vec e = opt.hx * Vec::Unit(d1, k);
                grad(k) += w * (p(y + e, cc) - p(y - e, cc)) / (2.0 * opt.hx);
            }
        }
        return pd.density * pd.phi0.partialPivLu().solve(grad);
    };
    const PhaseData pd0 = phase_data(g, t, c);
    const double h = opt.hxi_rel * c.xi.norm() / std::max(1.0, std::abs(pd0.theta));
    cplx div = 0.0;
    for (int j = 0; j < d1; ++j) {
        auto comp = [&](double s) { return field(c.xi + s * Vec::Unit(d1, j))(j); };
        div += fd::d1(comp, 0.0, h);
    }
    return div / pd0.density;
}

Amplitude r_numeric(const Group2Step& g, Amplitude p, double t, ROptions opt)
{
    return [g, p = std::move(p), t, opt](const Vec& x, const Covector& c) {
        return apply_r_numeric(g, p, t, x, c, opt);
    };
}

namespace {

// d_t^j q at (t, c) by finite differences in t
cplx q_dt(const Symbol& q, int j, double t, const Covector& c)
{
    if (j == 0)
        return q(t, c);
    if (q.t_independent)
        return 0.0;
    auto f = [&](double s) { return q(t + s, c); };
    return j == 1 ? fd::d1(f, 0.0, q.fd_step_t) : fd::d2(f, 0.0, q.fd_step_t);
}

} // namespace

cplx lambda_oracle(const Group2Step& g, const Symbol& q, double t, const Covector& c, const ROptions& opt)
{
    const PhaseData pd = phase_data(g, t, c);
    const CoeffBundle f = f_coeffs(pd, pd.xt);
    cplx sum = f.f00 * q_dt(q, 0, t, c) + f.f01 * q_dt(q, 1, t, c) + f.f02 * q_dt(q, 2, t, c);
    Amplitude first = [&](const Vec& x, const Covector& cc) {
        const CoeffBundle b = f_coeffs(phase_data(g, t, cc), x);
        return b.f10 * q_dt(q, 0, t, cc) + b.f11 * q_dt(q, 1, t, cc);
    };
    Amplitude second = [&](const Vec& x, const Covector& cc) {
        return f_coeffs(phase_data(g, t, cc), x).f20 * q(t, cc);
    };
    sum += apply_r_numeric(g, first, t, pd.xt, c, opt);
    Amplitude r_second = [&](const Vec& x, const Covector& cc) { return apply_r_numeric(g, second, t, x, cc, opt); };
    sum += apply_r_numeric(g, r_second, t, pd.xt, c, opt);
    return sum;
}

cplx mho_oracle(const Group2Step& g, const Symbol& q, double t, const Covector& c, const ROptions& opt)
{
    const PhaseData pd = phase_data(g, t, c);
    const CoeffBundle f = f_coeffs(pd, pd.xt);
    Amplitude a11 = [&](const Vec& x, const Covector& cc) {
        return f_coeffs(phase_data(g, t, cc), x).f11 * q(t, cc);
    };
    return 0.5 * f.f01 * q(t, c) + f.f02 * q_dt(q, 1, t, c) + 0.5 * apply_r_numeric(g, a11, t, pd.xt, c, opt);
}

cplx assemble_lambda(const CoeffBundle& b, const SymbolJet& j)
{
    cplx v = b.l00 * j.q + b.l10 * j.qt + b.l20 * j.qtt;
    v += (j.gq.transpose() * b.l01)(0) + (j.gqt.transpose() * b.l11)(0);
    v += (b.l02.cwiseProduct(j.hq.transpose())).sum();
    return v;
}

cplx assemble_mho(const CoeffBundle& b, const SymbolJet& j)
{
    return 0.5 * b.l10 * j.q + b.l20 * j.qt + 0.5 * (j.gq.transpose() * b.l11)(0);
}

cplx apply_lambda(const Group2Step& g, const Symbol& q, double t, const Covector& c, bool* in_support)
{
    const bool inside = q.support.contains(c);
    if (in_support)
        *in_support = inside;
    if (!inside)
        return 0.0;
    return assemble_lambda(lambda_coeffs(g, t, c), q.jet(t, c));
}

cplx apply_mho(const Group2Step& g, const Symbol& q, double t, const Covector& c, bool* in_support)
{
    const bool inside = q.support.contains(c);
    if (in_support)
        *in_support = inside;
    if (!inside)
        return 0.0;
    return assemble_mho(lambda_coeffs(g, t, c), q.jet(t, c));
}

cplx apply_lambda_i(const Group2Step& g, const Symbol& q, double t, const Covector& c, int nodes)
{
    if (t == 0.0 || !q.support.contains(c))
        return 0.0;
    const cplx integral = gauss_integrate([&](double s) { return apply_lambda(g, q, s, c); }, 0.0, t, nodes);
    return integral / (2.0 * I1 * c.xi.norm());
}

// ---------------------------------------------------------------------------

AmplitudeIterates::AmplitudeIterates(const Group2Step& g, Symbol q0, int n, IterateOptions opt)
    : g_(g), q0_(std::move(q0)), n_(n), opt_(opt)
{
    if (n < 0 || n > opt.max_n)
        throw InputError("iterate order " + std::to_string(n) + " outside [0, " + std::to_string(opt.max_n) + "]");
}

namespace {

using Key = std::vector<int>;

// Everything for one (t, c): Chebyshev grid in time, lattice in xi.
struct IterateContext {
    const Group2Step& g;
    const Symbol& q0;
    const ChebGrid grid;
    Covector c;
    double h;
    std::map<Key, std::vector<CoeffBundle>> coeffs;
    std::map<std::pair<int, Key>, CVec> vals, lams, rings;

    Covector at(const Key& n) const
    {
        Covector cc = c;
        for (size_t i = 0; i < n.size(); ++i)
            cc.xi(i) += h * n[i];
        return cc;
    }

    static Key shift(Key n, int a, int da, int b = -1, int db = 0)
    {
        n[a] += da;
        if (b >= 0)
            n[b] += db;
        return n;
    }

    const std::vector<CoeffBundle>& coeff(const Key& n)
    {
        auto it = coeffs.find(n);
        if (it != coeffs.end())
            return it->second;
        std::vector<CoeffBundle> out;
        const Covector cc = at(n);
        for (int i = 0; i < grid.size(); ++i)
            out.push_back(lambda_coeffs(g, grid.nodes()(i), cc));
        return coeffs.emplace(n, std::move(out)).first->second;
    }

    const CVec& val(int j, const Key& n)
    {
        auto k = std::make_pair(j, n);
        auto it = vals.find(k);
        if (it != vals.end())
            return it->second;
        CVec v(grid.size());
        const Covector cc = at(n);
        if (j == 0) {
            for (int i = 0; i < grid.size(); ++i)
                v(i) = q0(grid.nodes()(i), cc);
        } else {
            v = grid.antideriv().cast<cplx>() * lam(j - 1, n) / (2.0 * I1 * cc.xi.norm());
        }
        return vals.emplace(k, std::move(v)).first->second;
    }

    void build(int j, const Key& n)
    {
        const int d1 = static_cast<int>(n.size()), nt = grid.size();
        const CMat D = grid.diff().cast<cplx>();
        const CVec& v0 = val(j, n);
        const CVec vt = D * v0, vtt = D * vt;
        std::vector<CVec> g(d1), gt(d1);
        std::vector<std::vector<CVec>> H(d1, std::vector<CVec>(d1));
        for (int a = 0; a < d1; ++a) {
            const CVec& p = val(j, shift(n, a, 1));
            const CVec& m = val(j, shift(n, a, -1));
            g[a] = (p - m) / (2.0 * h);
            gt[a] = D * g[a];
            H[a][a] = (p - 2.0 * v0 + m) / (h * h);
            for (int b = 0; b < a; ++b) {
                const CVec& pp = val(j, shift(n, a, 1, b, 1));
                const CVec& pm = val(j, shift(n, a, 1, b, -1));
                const CVec& mp = val(j, shift(n, a, -1, b, 1));
                const CVec& mm = val(j, shift(n, a, -1, b, -1));
                H[a][b] = H[b][a] = (pp - pm - mp + mm) / (4.0 * h * h);
            }
        }
        const auto& cf = coeff(n);
        const double xn = at(n).xi.norm();
        CVec lv(nt), rv(nt);
        for (int i = 0; i < nt; ++i) {
            SymbolJet jt{v0(i), vt(i), vtt(i), CVec(d1), CVec(d1), CMat(d1, d1)};
            for (int a = 0; a < d1; ++a) {
                jt.gq(a) = g[a](i);
                jt.gqt(a) = gt[a](i);
                for (int b = 0; b < d1; ++b)
                    jt.hq(a, b) = H[a][b](i);
            }
            lv(i) = assemble_lambda(cf[i], jt);
            rv(i) = xn * v0(i) + I1 * assemble_mho(cf[i], jt);
        }
        lams.emplace(std::make_pair(j, n), std::move(lv));
        rings.emplace(std::make_pair(j, n), std::move(rv));
    }

    const CVec& lam(int j, const Key& n)
    {
        auto k = std::make_pair(j, n);
        if (!lams.count(k))
            build(j, n);
        return lams.at(k);
    }

    const CVec& ring(int j, const Key& n)
    {
        auto k = std::make_pair(j, n);
        if (!rings.count(k))
            build(j, n);
        return rings.at(k);
    }
};

} // namespace

IterateValues AmplitudeIterates::values(double t, const Covector& c) const
{
    std::vector<double> key{t};
    key.insert(key.end(), c.xi.data(), c.xi.data() + c.xi.size());
    key.insert(key.end(), c.mu.data(), c.mu.data() + c.mu.size());
    {
        std::lock_guard<std::mutex> lock(mu_);
        auto it = memo_.find(key);
        if (it != memo_.end())
            return it->second;
    }
    IterateValues out;
    if (!q0_.support.contains(c)) {
        out.iterate.assign(n_ + 1, 0.0);
        out.lambda.assign(n_ + 1, 0.0);
        out.ringring.assign(n_ + 1, 0.0);
    } else {
        double a = std::min(0.0, t), b = std::max(0.0, t);
        if (b - a < 1e-6)
            b = a + 1e-2;
        // the coefficients are rational in theta with poles at distance ~1 from the real axis
        const double th = std::abs(t) * c.mu.norm() / (2.0 * c.xi.norm());
        const int nt = std::min(96, opt_.t_nodes + static_cast<int>(std::ceil(8.0 * th)));
        IterateContext ctx{g_, q0_, ChebGrid(a, b, nt, 0.0), c, opt_.lattice_rel * c.xi.norm(), {}, {}, {}, {}};
        const Key zero(g_.d1(), 0);
        for (int j = 0; j <= n_; ++j) {
            out.iterate.push_back(ctx.grid.interpolate(ctx.val(j, zero), t));
            out.lambda.push_back(ctx.grid.interpolate(ctx.lam(j, zero), t));
            out.ringring.push_back(ctx.grid.interpolate(ctx.ring(j, zero), t));
        }
    }
    std::lock_guard<std::mutex> lock(mu_);
    if (memo_.size() > 200000)
        memo_.clear();
    memo_.emplace(std::move(key), out);
    return out;
}

cplx AmplitudeIterates::partial_sum(double t, const Covector& c) const
{
    const IterateValues v = values(t, c);
    cplx s = 0.0;
    for (const cplx& x : v.iterate)
        s += x;
    return s;
}

namespace {

Symbol wrap(const AmplitudeIterates* it, const Symbol& q0, std::function<cplx(const IterateValues&)> pick)
{
    Symbol s;
    s.fn = [it, pick](double t, const Covector& c) { return pick(it->values(t, c)); };
    s.support = q0.support;
    s.order_xi = q0.order_xi;
    s.fd_step_xi = q0.fd_step_xi;
    return s;
}

} // namespace

Symbol AmplitudeIterates::symbol(int j) const
{
    Symbol s = wrap(this, q0_, [j](const IterateValues& v) { return v.iterate.at(j); });
    s.order_xi -= j;
    s.t_independent = (j == 0) && q0_.t_independent;
    return s;
}

Symbol AmplitudeIterates::lambda_symbol(int j) const
{
    Symbol s = wrap(this, q0_, [j](const IterateValues& v) { return v.lambda.at(j); });
    s.order_xi -= j;
    return s;
}

Symbol AmplitudeIterates::ringring_symbol(int j) const
{
    Symbol s = wrap(this, q0_, [j](const IterateValues& v) { return v.ringring.at(j); });
    s.order_xi += 1 - j;
    return s;
}

} // namespace cfio

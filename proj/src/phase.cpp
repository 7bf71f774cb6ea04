#include "cfio/phase.hpp"

#include "cfio/errors.hpp"
#include "cfio/fd.hpp"
#include "cfio/linalg.hpp"

#include <cmath>

namespace cfio {

namespace {

constexpr cplx I1(0.0, 1.0);

double sinc(double z) { return std::abs(z) < 1e-6 ? 1.0 - z * z / 6.0 : std::sin(z) / z; }

void fill_htype(const Group2Step& g, PhaseData& pd)
{
    const int d1 = g.d1();
    const Mat J = g.j_mu(pd.mub);
    const double s = std::sin(pd.theta), co = std::cos(pd.theta);
    const Vec rot = co * pd.xib + s * (J * pd.xib);
    pd.xt = pd.t * sinc(pd.theta) * rot;
    pd.xit = co * pd.xn * rot;
    pd.mu_ut = 0.5 * pd.t * pd.xn * (1.0 - sinc(2.0 * pd.theta));
    pd.abs_j = pd.mn * Mat::Identity(d1, d1);
    pd.a = pd.b2 = pd.b3 = 1.0;
    pd.tr = d1;
    pd.w = pd.xi.cast<cplx>() + I1 * (J * pd.xi).cast<cplx>();
    pd.e = std::exp(-2.0 * I1 * pd.theta) * pd.w;
    pd.abs_j_e = pd.e;
    const CMat rotm = (co * Mat::Identity(d1, d1) + s * J).cast<cplx>();
    const CVec xb = pd.xib.cast<cplx>();
    const CVec wb = xb + I1 * (J * pd.xib).cast<cplx>();
    pd.phi0 = std::exp(-I1 * pd.theta) * rotm * (CMat::Identity(d1, d1) + I1 * pd.theta * wb * xb.transpose());
}

void fill_generic(const Group2Step& g, PhaseData& pd)
{
    SkewSpectrum S(g.j_mu(pd.mub));
    const Vec& lam = S.values();
    const int n = S.size();
    const double lmax = lam.cwiseAbs().maxCoeff();
    int rank = 0;
    for (int i = 0; i < n; ++i)
        if (std::abs(lam(i)) > g.rank_tol() * lmax)
            ++rank;
    if (rank < g.generic_rank())
        throw OutsideOmega("mu is outside the maximal-rank set");
    const CMat& U = S.vectors();
    const CVec cb = U.adjoint() * pd.xib.cast<cplx>();
    CVec wx(n), wxi(n), ww(n), we(n), wje(n);
    pd.a = pd.b2 = pd.b3 = pd.tr = 0.0;
    double su = 0.0;
    for (int i = 0; i < n; ++i) {
        const double l = lam(i), al = std::abs(l), p = std::norm(cb(i));
        wx(i) = expm1_over_z(-I1 * (pd.theta * l)) * cb(i);
        wxi(i) = 0.5 * (std::exp(-2.0 * I1 * (pd.theta * l)) + 1.0) * cb(i);
        ww(i) = (al + l) * cb(i);
        we(i) = std::exp(-2.0 * I1 * (pd.theta * al)) * ww(i);
        wje(i) = al * we(i);
        pd.a += al * p;
        pd.b2 += al * al * p;
        pd.b3 += al * al * al * p;
        pd.tr += al;
        su += sinc(2.0 * pd.theta * l) * p;
    }
    pd.xt = pd.t * (U * wx).real();
    pd.xit = pd.xn * (U * wxi).real();
    pd.mu_ut = 0.5 * pd.t * pd.xn * (1.0 - su);
    pd.abs_j = pd.mn * S.abs();
    pd.w = pd.xn * (U * ww);
    pd.e = pd.xn * (U * we);
    pd.abs_j_e = pd.xn * (U * wje);
    const CMat M = S.func([&](double l) { return std::exp(-I1 * pd.theta * (l + std::abs(l))); });
    const CVec xb = pd.xib.cast<cplx>();
    pd.phi0 = M * (CMat::Identity(n, n) + I1 * pd.theta * (pd.w / pd.xn) * xb.transpose());
}

} // namespace

PhaseData phase_data(const Group2Step& g, double t, const Covector& c) { return phase_data(g, t, c, g.is_htype()); }

PhaseData phase_data(const Group2Step& g, double t, const Covector& c, bool htype_path)
{
    PhaseData pd;
    pd.t = t;
    pd.xi = c.xi;
    pd.mu = c.mu;
    pd.xn = c.xi.norm();
    pd.mn = c.mu.norm();
    if (pd.xn == 0.0)
        throw ZeroFrequency("phase needs a nonzero first-layer frequency");
    if (pd.mn == 0.0)
        throw OutsideOmega("mu = 0 is outside Omega");
    pd.xib = c.xi / pd.xn;
    pd.mub = c.mu / pd.mn;
    pd.theta = t * pd.mn / (2.0 * pd.xn);
    if (htype_path)
        fill_htype(g, pd);
    else
        fill_generic(g, pd);
    const cplx D = 1.0 + I1 * pd.theta * pd.a;
    pd.det = std::exp(-I1 * pd.theta * pd.tr) * D;
    pd.density = std::exp(-0.5 * I1 * pd.theta * pd.tr) * std::sqrt(D);
    return pd;
}

cplx phase_at(const PhaseData& pd, const Point& p)
{
    const Vec r = p.x - pd.xt;
    const double re = r.dot(pd.xit) + p.u.dot(pd.mu) - pd.mu_ut;
    const double im = 0.25 * r.dot(pd.abs_j * r);
    return {re, im};
}

PhaseEval phase_value(const Group2Step& g, double t, const Point& p, const Covector& c)
{
    const PhaseData pd = phase_data(g, t, c);
    const int d1 = g.d1(), d2 = g.d2(), d = g.dim();
    const Vec r = p.x - pd.xt;
    PhaseEval ev;
    ev.value = phase_at(pd, p);
    ev.im_part = ev.value.imag();
    ev.grad_x = CVec(d);
    ev.grad_x.head(d1) = pd.xit.cast<cplx>() + 0.5 * I1 * (pd.abs_j * r).cast<cplx>();
    ev.grad_x.tail(d2) = c.mu.cast<cplx>();

    // (x - x^t)^T Phi_underline + (i/4) <(d_mu_j |J_mu|) r, r> e_j
    const FlowPoint f = flow_origin(g, t, c);
    const FlowJacobian jac = flow_jacobian(g, t, c);
    CMat phi = jac.dxi.cast<cplx>();
    phi.topRows(d1) -= 0.5 * I1 * (pd.abs_j * jac.dx.topRows(d1)).cast<cplx>();
    Vec rr(d);
    rr << r, p.u - f.u;
    ev.grad_xi = phi.transpose() * rr.cast<cplx>();
    const double h = 1e-3 * c.mu.norm();
    for (int j = 0; j < d2; ++j) {
        auto dabs = [&](double s) {
            Vec m = c.mu;
            m(j) += s;
            return Mat(g.abs_j_mu(m));
        };
        Mat dA = fd::d1(dabs, 0.0, h);
        ev.grad_xi(d1 + j) += 0.25 * I1 * r.dot(dA * r);
    }
    return ev;
}

HessianEval mixed_hessian(const Group2Step& g, double t, const Covector& c)
{
    const PhaseData pd = phase_data(g, t, c);
    return {pd.phi0, pd.det, pd.density};
}

CMat phi0_fd(const Group2Step& g, double t, const Covector& c, double h_rel)
{
    const int d1 = g.d1();
    const FlowJacobian jac = flow_jacobian(g, t, c, h_rel);
    const Mat A = g.abs_j_mu(c.mu);
    CMat out = jac.dxi.topLeftCorner(d1, d1).cast<cplx>();
    out -= 0.5 * I1 * (A * jac.dx.topLeftCorner(d1, d1)).cast<cplx>();
    return out;
}

CMat mixed_hessian_fd(const Group2Step& g, double t, const Point& p, const Covector& c, double h_rel)
{
    const int d1 = g.d1();
    auto grad_x = [&](const Vec& v) {
        Covector cc = unpack_cov(v, d1);
        const FlowPoint f = flow_origin(g, t, cc);
        const Mat A = g.abs_j_mu(cc.mu);
        CVec out(v.size());
        out.head(d1) = f.xi.cast<cplx>() + 0.5 * I1 * (A * (p.x - f.x)).cast<cplx>();
        out.tail(g.d2()) = cc.mu.cast<cplx>();
        return out;
    };
    Vec v = pack(c);
    return fd::jacobian(grad_x, v, h_rel * v.norm());
}

cplx phase_direct(const Group2Step& g, double t, const Point& p, const Covector& c)
{
    const FlowPoint f = flow_origin_generic(g, t, c);
    const Vec r = p.x - f.x;
    return {r.dot(f.xi) + (p.u - f.u).dot(c.mu), 0.25 * r.dot(g.abs_j_mu(c.mu) * r)};
}

bool stationarity_check(const Group2Step& g, double t, const Point& p, const Covector& c, double tol)
{
    return phase_value(g, t, p, c).grad_xi.norm() <= tol;
}

} // namespace cfio

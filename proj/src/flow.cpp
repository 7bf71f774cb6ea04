#include "cfio/flow.hpp"

#include "cfio/errors.hpp"
#include "cfio/fd.hpp"
#include "cfio/linalg.hpp"
#include "cfio/quadrature.hpp"

#include <cmath>

namespace cfio {

namespace {

constexpr cplx I1(0.0, 1.0);

void check_frequency(const Covector& c)
{
    if (c.xi.norm() == 0.0)
        throw ZeroFrequency("flow needs a nonzero first-layer frequency");
}

bool straight_line(double t, const Covector& c)
{
    return c.mu.norm() * std::abs(t) < 1e-10 * c.xi.norm();
}

FlowPoint straight(double t, const Covector& c)
{
    return {t * c.xi / c.xi.norm(), Vec::Zero(c.mu.size()), c.xi, c.mu};
}

} // namespace

double hamiltonian(const Group2Step& g, const Point& p, const Covector& c)
{
    return (c.xi + 0.5 * g.j_mu(c.mu) * p.x).norm();
}

FlowPoint flow_origin(const Group2Step& g, double t, const Covector& c)
{
    return g.is_htype() ? flow_origin_htype(g, t, c) : flow_origin_generic(g, t, c);
}

FlowPoint flow_origin_generic(const Group2Step& g, double t, const Covector& c)
{
    check_frequency(c);
    if (straight_line(t, c))
        return straight(t, c);
    const double xn = c.xi.norm(), mn = c.mu.norm();
    const double theta = t * mn / (2.0 * xn);
    const Vec xib = c.xi / xn;
    SkewSpectrum S(g.j_mu(c.mu / mn));
    const CVec cb = S.vectors().adjoint() * xib.cast<cplx>();
    const Vec& lam = S.values();
    const int n = S.size();

    auto x_at = [&](double s) { // x^{s t}
        CVec w(n);
        for (int i = 0; i < n; ++i)
            w(i) = expm1_over_z(-I1 * (s * theta * lam(i))) * cb(i);
        return Vec((s * t) * (S.vectors() * w).real());
    };
    auto rot2 = [&](double s) { // exp(2 s theta J) xibar
        CVec w(n);
        for (int i = 0; i < n; ++i)
            w(i) = std::exp(-2.0 * I1 * (s * theta * lam(i))) * cb(i);
        return Vec((S.vectors() * w).real());
    };

    FlowPoint f;
    f.mu = c.mu;
    f.x = x_at(1.0);
    f.xi = 0.5 * xn * (rot2(1.0) + xib);
    double lmax = lam.cwiseAbs().maxCoeff();
    int nodes = std::max(16, 8 * static_cast<int>(std::ceil(std::abs(theta) * std::max(lmax, 1.0))));
    f.u = 0.5 * t * gauss_integrate([&](double s) { return Vec(g.bracket(x_at(s), rot2(s))); }, 0.0, 1.0, nodes);
    return f;
}

FlowPoint flow_origin_htype(const Group2Step& g, double t, const Covector& c)
{
    check_frequency(c);
    if (straight_line(t, c))
        return straight(t, c);
    const double xn = c.xi.norm(), mn = c.mu.norm();
    const double theta = t * mn / (2.0 * xn);
    const Vec xib = c.xi / xn;
    const Vec mub = c.mu / mn;
    const Mat J = g.j_mu(mub);
    const double s = std::sin(theta), co = std::cos(theta);
    const double sinc = std::abs(theta) < 1e-8 ? 1.0 - theta * theta / 6.0 : s / theta;
    const Vec rot = co * xib + s * (J * xib);
    FlowPoint f;
    f.mu = c.mu;
    f.x = t * sinc * rot;
    f.xi = co * xn * rot;
    // t^2/(4 theta) (1 - sin cos / theta), series near theta = 0
    double coef;
    if (std::abs(theta) < 1e-4)
        coef = t * t / 4.0 * (2.0 * theta / 3.0 - 2.0 * theta * theta * theta / 15.0);
    else
        coef = t * t / (4.0 * theta) * (1.0 - sinc * co);
    f.u = coef * mub;
    return f;
}

double mu_dot_u(const Group2Step& g, double t, const Covector& c)
{
    check_frequency(c);
    if (straight_line(t, c))
        return 0.0;
    const double xn = c.xi.norm(), mn = c.mu.norm();
    const double theta = t * mn / (2.0 * xn);
    SkewSpectrum S(g.j_mu(c.mu / mn));
    const CVec cb = S.vectors().adjoint() * (c.xi / xn).cast<cplx>();
    // <sinh(2 theta J)/(2 theta J) xibar, xibar>
    double acc = 0.0;
    for (int i = 0; i < S.size(); ++i) {
        double z = 2.0 * theta * S.values()(i);
        double sc = std::abs(z) < 1e-6 ? 1.0 - z * z / 6.0 : std::sin(z) / z;
        acc += sc * std::norm(cb(i));
    }
    return 0.5 * t * xn * (1.0 - acc);
}

FlowPoint flow_base(const Group2Step& g, double t, const Point& y, const Covector& c)
{
    Covector c0 = g.cotangent_translate_inv(y, c);
    FlowPoint f0 = flow_origin(g, t, c0);
    Point p = g.multiply(y, f0.point());
    Covector ct = g.cotangent_translate(y, f0.covector());
    return {p.x, p.u, ct.xi, ct.mu};
}

FlowPoint flow_ode_oracle(const Group2Step& g, double t, const Point& p0, const Covector& c0, double step)
{
    const int d1 = g.d1();
    const Mat J = g.j_mu(c0.mu);
    if (step <= 0.0)
        step = 1e-4 * std::max(1.0, std::abs(t));
    // state (x, u, xi); mu is constant
    auto rhs = [&](const Vec& s) {
        Vec x = s.head(d1), xi = s.tail(d1);
        Vec zeta = xi + 0.5 * J * x;
        double h = zeta.norm();
        if (h < 1e-8)
            throw NearCharacteristic("Hamiltonian dropped below 1e-8 along the trajectory");
        Vec r(s.size());
        r.head(d1) = zeta / h;
        r.segment(d1, g.d2()) = g.bracket(x, zeta) / (2.0 * h);
        r.tail(d1) = J * zeta / (2.0 * h);
        return r;
    };
    Vec s(2 * d1 + g.d2());
    s << p0.x, p0.u, c0.xi;
    if (t != 0.0) {
        int n = static_cast<int>(std::ceil(std::abs(t) / step));
        double h = t / n;
        for (int k = 0; k < n; ++k) {
            Vec k1 = rhs(s);
            Vec k2 = rhs(s + 0.5 * h * k1);
            Vec k3 = rhs(s + 0.5 * h * k2);
            Vec k4 = rhs(s + h * k3);
            s += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        }
    }
    return {s.head(d1), s.segment(d1, g.d2()), s.tail(d1), c0.mu};
}

std::vector<Point> geodesic_sphere_sample(const Group2Step& g, double t, const std::vector<Covector>& dirs,
                                          std::vector<int>* skipped)
{
    std::vector<Point> out;
    out.reserve(dirs.size());
    for (std::size_t i = 0; i < dirs.size(); ++i) {
        if (dirs[i].xi.norm() == 0.0) {
            if (skipped)
                skipped->push_back(static_cast<int>(i));
            continue;
        }
        out.push_back(flow_origin(g, t, dirs[i]).point());
    }
    return out;
}

FlowJacobian flow_jacobian(const Group2Step& g, double t, const Covector& c, double h_rel)
{
    const int d1 = g.d1();
    Vec v = pack(c);
    // the flow varies on the scale |xi| / (1 + |theta|) in the frequencies
    const double xn = c.xi.norm();
    const double theta = xn > 0.0 ? std::abs(t) * c.mu.norm() / (2.0 * xn) : 0.0;
    const double h = h_rel * (xn > 0.0 ? xn / (1.0 + theta) : v.norm());
    Mat both = fd::jacobian(
        [&](const Vec& w) {
            FlowPoint f = flow_origin(g, t, unpack_cov(w, d1));
            Vec r(2 * w.size());
            r << f.x, f.u, f.xi, f.mu;
            return r;
        },
        v, h);
    const int d = g.dim();
    return {both.topRows(d), both.bottomRows(d)};
}

} // namespace cfio

#include "cfio/symbol.hpp"

#include "cfio/fd.hpp"
#include "cfio/smooth.hpp"

namespace cfio {

bool SupportRegion::contains(const Covector& c) const
{
    const double xn = c.xi.norm(), mn = c.mu.norm();
    if (xn < xi_min || xn > xi_max || mn < mu_min || mn > mu_max)
        return false;
    if (ratio_min > 0.0 || std::isfinite(ratio_max)) {
        if (xn == 0.0)
            return false;
        const double r = mn / xn;
        if (r < ratio_min || r > ratio_max)
            return false;
    }
    if (ball_center.size() > 0 && (pack(c) - ball_center).norm() > ball_radius)
        return false;
    return true;
}

SymbolJet Symbol::jet(double t, const Covector& c) const
{
    if (jet_fn)
        return support.contains(c) ? jet_fn(t, c) : SymbolJet{0.0, 0.0, 0.0, CVec::Zero(c.xi.size()),
                                                             CVec::Zero(c.xi.size()),
                                                             CMat::Zero(c.xi.size(), c.xi.size())};
    const int d1 = static_cast<int>(c.xi.size());
    const double hx = fd_step_xi * std::max(1e-300, pack(c).norm());
    const double ht = fd_step_t;
    auto at = [&](double tt, const Vec& xi) { return (*this)(tt, {xi, c.mu}); };
    auto qt_at = [&](const Vec& xi) -> cplx {
        if (t_independent)
            return 0.0;
        return fd::d1([&](double s) { return at(t + s, xi); }, 0.0, ht);
    };
    auto along = [&](const Vec& e, auto&& f) { return [&, e](double s) { return f(Vec(c.xi + s * e)); }; };

    SymbolJet j;
    j.q = at(t, c.xi);
    j.qt = qt_at(c.xi);
    j.qtt = t_independent ? cplx(0.0) : fd::d2([&](double s) { return at(t + s, c.xi); }, 0.0, ht);
    j.gq = CVec(d1);
    j.gqt = CVec(d1);
    j.hq = CMat(d1, d1);
    auto q_of = [&](const Vec& xi) { return at(t, xi); };
    for (int a = 0; a < d1; ++a) {
        const Vec ea = Vec::Unit(d1, a);
        j.gq(a) = fd::d1(along(ea, q_of), 0.0, hx);
        j.gqt(a) = t_independent ? cplx(0.0) : fd::d1(along(ea, qt_at), 0.0, hx);
        j.hq(a, a) = fd::d2(along(ea, q_of), 0.0, hx);
        for (int b = 0; b < a; ++b) {
            const Vec eb = Vec::Unit(d1, b);
            auto inner = [&](double s) {
                const Vec base = c.xi + s * ea;
                return fd::d1([&](double r) { return at(t, Vec(base + r * eb)); }, 0.0, hx);
            };
            j.hq(a, b) = j.hq(b, a) = fd::d1(inner, 0.0, hx);
        }
    }
    return j;
}

Symbol zero_symbol()
{
    Symbol s;
    s.fn = [](double, const Covector&) { return cplx(0.0); };
    s.t_independent = true;
    return s;
}

Symbol gaussian_symbol(const Covector& c0, double sigma, double t0, double tau)
{
    Symbol s;
    const Vec center = pack(c0);
    const bool tind = !std::isfinite(tau);
    s.fn = [center, sigma, t0, tau, tind](double t, const Covector& c) {
        const double r2 = (pack(c) - center).squaredNorm() / (sigma * sigma);
        double v = std::exp(-r2) * plateau(std::sqrt(r2) / 1.5);
        if (!tind)
            v *= std::exp(-(t - t0) * (t - t0) / (tau * tau));
        return cplx(v);
    };
    s.support.ball_center = center;
    s.support.ball_radius = 3.0 * sigma;
    s.t_independent = tind;
    s.order_t = tind ? 0.0 : -SupportRegion::inf;
    s.fd_step_xi = 1e-2 * sigma / std::max(1e-300, center.norm());
    s.fd_step_t = tind ? 1e-3 : 1e-2 * tau;
    return s;
}

Symbol gaussian_ball_symbol(const Covector& c0, double sigma)
{
    Symbol s;
    const Vec center = pack(c0);
    s.fn = [center, sigma](double, const Covector& c) {
        return cplx(std::exp(-(pack(c) - center).squaredNorm() / (sigma * sigma)));
    };
    s.support.ball_center = center;
    s.support.ball_radius = 6.0 * sigma;
    s.support.gauss_width = sigma;
    s.t_independent = true;
    s.fd_step_xi = 1e-2 * sigma / std::max(1e-300, center.norm());
    return s;
}

Symbol band_symbol(double lo, double hi, double rlo, double rhi, double shoulder)
{
    Symbol s;
    s.fn = [=](double, const Covector& c) {
        const double xn = c.xi.norm();
        if (xn == 0.0)
            return cplx(0.0);
        const double r = c.mu.norm() / xn;
        return cplx(window(xn, lo, hi, shoulder * lo, shoulder * hi) *
                    window(r, rlo, rhi, shoulder * rlo, shoulder * rhi));
    };
    s.support.xi_min = lo * (1.0 - shoulder);
    s.support.xi_max = hi * (1.0 + shoulder);
    s.support.ratio_min = rlo * (1.0 - shoulder);
    s.support.ratio_max = rhi * (1.0 + shoulder);
    s.support.mu_min = s.support.xi_min * s.support.ratio_min;
    s.support.mu_max = s.support.xi_max * s.support.ratio_max;
    s.t_independent = true;
    s.radial = true;
    s.fd_step_xi = 1e-2 * shoulder * std::min(1.0, rlo) / (1.0 + rhi);
    return s;
}

Symbol gaussian_band_symbol(double scale, double w, double r0, double wr)
{
    Symbol s;
    const double sw = w * scale;
    s.fn = [=](double, const Covector& c) {
        const double xn = c.xi.norm();
        if (xn == 0.0)
            return cplx(0.0);
        const double a = (xn - scale) / sw, b = (c.mu.norm() / xn - r0) / wr;
        return cplx(std::exp(-a * a - b * b));
    };
    s.support.xi_min = std::max(0.0, scale - 5.0 * sw);
    s.support.xi_max = scale + 5.0 * sw;
    s.support.ratio_min = std::max(0.0, r0 - 5.0 * wr);
    s.support.ratio_max = r0 + 5.0 * wr;
    s.t_independent = true;
    s.radial = true;
    s.fd_step_xi = 2e-2 * std::min(w, wr) / (1.0 + r0);
    return s;
}

} // namespace cfio

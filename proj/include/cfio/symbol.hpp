#ifndef CFIO_SYMBOL_HPP
#define CFIO_SYMBOL_HPP

#include "cfio/types.hpp"

#include <functional>
#include <limits>

namespace cfio {

// Closed region in frequency space: bounds on |xi|, |mu| and |mu|/|xi|,
// optionally intersected with a ball.
struct SupportRegion {
    static constexpr double inf = std::numeric_limits<double>::infinity();
    double xi_min = 0.0, xi_max = inf;
    double mu_min = 0.0, mu_max = inf;
    double ratio_min = 0.0, ratio_max = inf;
    Vec ball_center; // empty: no ball
    double ball_radius = inf;
    // > 0: the symbol carries the factor exp(-|c - ball_center|^2 / gauss_width^2)
    double gauss_width = 0.0;

    bool contains(const Covector& c) const;
    bool bounded() const { return std::isfinite(xi_max) && std::isfinite(mu_max); }
};

// q, d_t q, d_t^2 q and first-layer xi derivatives, mu held fixed
struct SymbolJet {
    cplx q, qt, qtt;
    CVec gq;  // d_xi q
    CVec gqt; // d_xi d_t q
    CMat hq;  // d_xi nabla_xi q
};

struct Symbol {
    using Fn = std::function<cplx(double, const Covector&)>;
    using JetFn = std::function<SymbolJet(double, const Covector&)>;

    Fn fn;
    JetFn jet_fn; // optional exact jet
    double order_t = 0.0, order_xi = 0.0;
    SupportRegion support;
    bool t_independent = false;
    bool radial = false; // depends on xi only through |xi| (d1 = 2 rotations)
    double fd_step_xi = 1e-3; // relative to |(xi, mu)|
    double fd_step_t = 1e-3;

    cplx operator()(double t, const Covector& c) const { return support.contains(c) ? fn(t, c) : cplx(0.0); }
    SymbolJet jet(double t, const Covector& c) const;
};

Symbol zero_symbol();

// exp(-|c - c0|^2/sigma^2) exp(-(t - t0)^2/tau^2), cut off smoothly to the
// ball of radius 3 sigma around c0; tau = inf gives a t-independent symbol
Symbol gaussian_symbol(const Covector& c0, double sigma, double t0 = 0.0, double tau = SupportRegion::inf);

// exp(-|c - c0|^2/sigma^2), t-independent, truncated at 6 sigma where it is
// below 3e-16; quadratures use a Gauss-Hermite rule for it
Symbol gaussian_ball_symbol(const Covector& c0, double sigma);
// order-0 band symbol: plateau in |xi| on [lo, hi] and in |mu|/|xi| on
// [rlo, rhi], each with smooth shoulders of relative width `shoulder`
Symbol band_symbol(double lo, double hi, double rlo, double rhi, double shoulder = 0.25);

// order-0 Gaussian band: exp(-((|xi| - scale)/(w scale))^2) exp(-((|mu|/|xi| - r0)/wr)^2),
// truncated at five widths where it is below 2e-11
Symbol gaussian_band_symbol(double scale, double w, double r0, double wr);

} // namespace cfio

#endif

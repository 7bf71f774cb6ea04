#ifndef CFIO_FIO_HPP
#define CFIO_FIO_HPP

#include "cfio/decompose.hpp"
#include "cfio/phase.hpp"
#include "cfio/symbol.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <utility>
#include <vector>

namespace cfio {

struct QuadratureSpec {
    int nodes_per_dim = 16;  // radial, ratio and box nodes; at least 8 (4 for Hermite)
    int angular_nodes = 0;   // polar rule; 0 derives the count from the spatial extent
    std::optional<SupportRegion> region; // defaults to the symbol support
    bool refine = true;      // attach |I_n - I_refined(n)|
    double tol = SupportRegion::inf; // RefineFailure above this absolute refine error
};

struct KernelSample {
    double t = 0.0;
    Point point;
    cplx value;
    double refine_error = 0.0;
};

// Frequency domain of a quadrature.  Polar: d1 = 2, d2 = 1, xi in polar
// coordinates and mu = |xi| s with s in signed ratio intervals.  Hermite:
// tensor Gauss-Hermite rule around center with scale width.  Box: tensor
// Gauss-Legendre rule on [lo, hi].
struct IntegrationDomain {
    bool polar = false;
    double rho_min = 0.0, rho_max = 0.0;
    std::vector<std::pair<double, double>> ratio;
    Vec lo, hi;
    Vec center;
    double width = 0.0;

    bool hermite() const { return width > 0.0; }
    double xi_max(int d1) const; // bound on |xi| over the domain
    // node count of the refinement level: 2n, or 3n/2 for Hermite rules
    int refined(int n) const;
};

IntegrationDomain domain_for(const Group2Step& g, const SupportRegion& r);

// Amplitude at the integration node c with the normalization and the
// density included.  It fills pd with the phase data of the covector that
// enters the phase; returning 0 skips the node.
using Integrand = std::function<cplx(double t, const Covector& c, PhaseData& pd)>;

// sum over nodes of w A e^{i phi(t, p)} for every p; n nodes per dimension
// and n_alpha angular nodes (polar)
std::vector<cplx> integrate(const Group2Step& g, const Integrand& f, double t, const IntegrationDomain& dom,
                            const std::vector<Point>& pts, int n, int n_alpha);
// the same with |A| in place of A e^{i phi}
double integrate_abs(const Group2Step& g, const Integrand& f, double t, const IntegrationDomain& dom, int n,
                     int n_alpha);

// angular node count resolving e^{i phi} for spatial points pts at time t
int angular_nodes_for(const IntegrationDomain& dom, double t, const std::vector<Point>& pts, int n);

// n and dom.refined(n) evaluation with refine_error attached
std::vector<KernelSample> integrate_refined(const Group2Step& g, const Integrand& f, double t,
                                            const IntegrationDomain& dom, const std::vector<Point>& pts,
                                            const QuadratureSpec& spec);

// (2 pi)^{-d} q d_phi
Integrand kernel_integrand(const Group2Step& g, const Symbol& q);
// (2 pi)^{-d} (-2i|xi| d_t q + Lambda q) d_phi
Integrand wave_rhs_integrand(const Group2Step& g, const Symbol& q);

// Points near x^t(c) for frequencies with |xi| = s and |mu| = r s, r uniform
// in [rlo, rhi] with alternating sign of mu; x and u are jittered by
// relative amounts jitter and jitter/10.
std::vector<Point> wavefront_points(const Group2Step& g, double t, double s, int count, std::uint64_t seed,
                                    double rlo = 0.6, double rhi = 1.6, double jitter = 0.2);

KernelSample eval_kernel(const Group2Step& g, const Symbol& q, double t, const Point& p,
                         const QuadratureSpec& spec = {});
std::vector<KernelSample> eval_kernel_batch(const Group2Step& g, const Symbol& q, double t,
                                            const std::vector<Point>& pts, const QuadratureSpec& spec = {});
// (2 pi)^{-d} int |q| |d_phi|, the bound that Im phi >= 0 gives for |I[q]|
double kernel_abs_bound(const Group2Step& g, const Symbol& q, double t, const QuadratureSpec& spec = {});

struct WaveCheck {
    cplx lhs, rhs;
    double residual = 0.0;
    double refine_error = 0.0; // quadrature contribution to the residual
};

// (d_t^2 + L) I[q] by five-point differences against I[-2i|xi| d_t q + Lambda q].
// step_rel scales the stencil step 1/max|xi|.
WaveCheck wave_identity(const Group2Step& g, const Symbol& q, double t, const Point& p,
                        const QuadratureSpec& spec = {}, double step_rel = 5e-2);
// several points at one time, sharing the frequency nodes
std::vector<WaveCheck> wave_identity_batch(const Group2Step& g, const Symbol& q, double t,
                                           const std::vector<Point>& pts, const QuadratureSpec& spec = {},
                                           double step_rel = 5e-2);
double wave_identity_residual(const Group2Step& g, const Symbol& q, double t, const Point& p,
                              const QuadratureSpec& spec = {});

struct DecCheck {
    std::vector<cplx> lhs, rhs;
    std::vector<double> refine_error; // |dL| + |dR| per point
    std::vector<int> k_used;          // shifts with a nonempty sheared support
    double discrepancy = 0.0;         // max |L - R| / max |L|
};

// I[q](t, p) against |t|^{1/2 - d2} sum_{k,v} I_{k,v}[q_{k,v,T,kappa}](t, p) with T = |t|.
// Polar groups only (d1 = 2, d2 = 1); q needs finite ratio bounds.
DecCheck dec_periodic(const Group2Step& g, const Symbol& q, double t, const std::vector<Point>& pts, double kappa,
                      const QuadratureSpec& spec = {});
double dec_periodic_check(const Group2Step& g, const Symbol& q, double t, const Point& p, double kappa,
                          const QuadratureSpec& spec = {});

// max over components of |Re d_xi phi_{k,v} - (x - x^{t,k,v})^T d_xi xi^{t,k,v}|,
// both sides by central differences, relative to |d_xi phi_{k,v}|
double sheared_phase_gradient_error(const Group2Step& g, double t, int k, const Vec& v, const Point& p,
                                    const Covector& c);

struct L1Row {
    int m = 0;
    double norm = 0.0;
    double refined_norm = 0.0; // spatial grid doubled
    double grid_change = 0.0;  // relative difference of the two
};

struct L1Study {
    std::vector<L1Row> rows;
    double slope = 0.0; // least-squares slope of log2(norm) against m
    bool fitted = false;
};

// || 1_B I[q_m](t, .) ||_1 over the gauge ball B = {|x|^4 + 16|u|^2 <= R^4}
// with q_m = chi1(|xi|/2^m) chi1(|mu|/2^m).  Heisenberg only: rotation
// invariance reduces the grid to (|x|, u).  grid sets points per unit per 2^m.
// family(m) replaces q_m; its support must lie in |xi|, |mu| in [2^{m-1}, 2^{m+1}]
using SymbolFamily = std::function<Symbol(int m)>;
L1Study l1_growth_study(const Group2Step& g, const std::vector<int>& m_list, double t, double ball_radius,
                        int grid, const QuadratureSpec& spec = {}, const SymbolFamily& family = {});

struct ParametrixRow {
    int n = 0;
    double t = 0.0;
    Point point;
    cplx partial_sum;     // (1/2) sum_{j <= n} (I[L_I^j q0](t) + I[L_I^j q0](-t))
    cplx sine_sum;        // -(1/2i) sum_{j <= n} (I[rL L_I^j q0](t) - I[rL L_I^j q0](-t))
    cplx remainder;       // I[Lambda L_I^n q0](t)
    double refine_error = 0.0;
};

struct ParametrixStudy {
    std::vector<ParametrixRow> rows;
    std::vector<double> remainder_sup; // per n, max over the grid
    std::vector<double> leading_sup;   // per n, max |partial_sum|
};

ParametrixStudy parametrix_residual_study(const Group2Step& g, const Symbol& q0, int n_max,
                                          const std::vector<double>& t_grid, const std::vector<Point>& p_grid,
                                          const QuadratureSpec& spec = {});

} // namespace cfio

#endif

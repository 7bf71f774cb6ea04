#ifndef CFIO_FLOW_HPP
#define CFIO_FLOW_HPP

#include "cfio/carnot.hpp"

#include <vector>

namespace cfio {

// (x^t, u^t, xi^t, mu) of the Hamiltonian flow of H(x, xi) = |xi + J_mu x/2|
struct FlowPoint {
    Vec x, u, xi, mu;

    Point point() const { return {x, u}; }
    Covector covector() const { return {xi, mu}; }
};

double hamiltonian(const Group2Step& g, const Point& p, const Covector& c);

// flow from the origin; uses the H-type closed form when the group is H-type
FlowPoint flow_origin(const Group2Step& g, double t, const Covector& c);
// generic 2-step closed form, u^t by Gauss-Legendre in tau
FlowPoint flow_origin_generic(const Group2Step& g, double t, const Covector& c);
// cos/sin closed form, valid only on H-type groups
FlowPoint flow_origin_htype(const Group2Step& g, double t, const Covector& c);

// mu . u^t without the tau quadrature
double mu_dot_u(const Group2Step& g, double t, const Covector& c);

// flow started at y: y * x^t(l_y^{-1} c), l_y xi^t(l_y^{-1} c)
FlowPoint flow_base(const Group2Step& g, double t, const Point& y, const Covector& c);

// classical RK4 on the Hamilton equations; step <= 0 picks 1e-4 max(1,|t|)
FlowPoint flow_ode_oracle(const Group2Step& g, double t, const Point& p0, const Covector& c0, double step = 0.0);

// (x^t, u^t)(c) for each direction; directions with xi = 0 are skipped and
// their indices appended to `skipped`
std::vector<Point> geodesic_sphere_sample(const Group2Step& g, double t, const std::vector<Covector>& dirs,
                                          std::vector<int>* skipped = nullptr);

// Jacobians of (x^t, u^t) and (xi^t, mu) in the full frequency variable,
// Richardson central differences with step h_rel |c|
struct FlowJacobian {
    Mat dx;  // d x d, rows (x^t, u^t)
    Mat dxi; // d x d, rows (xi^t, mu)
};
FlowJacobian flow_jacobian(const Group2Step& g, double t, const Covector& c, double h_rel = 1e-3);

} // namespace cfio

#endif

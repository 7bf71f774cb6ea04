#ifndef CFIO_PHASE_HPP
#define CFIO_PHASE_HPP

#include "cfio/carnot.hpp"
#include "cfio/flow.hpp"

namespace cfio {

// Everything about the frequency c at time t that the phase, the density
// and the transport coefficients need.  J below is J_mubar.
struct PhaseData {
    double t = 0.0, xn = 0.0, mn = 0.0, theta = 0.0;
    Vec xi, mu, xib, mub;
    Vec xt, xit;        // x^t, xi^t
    double mu_ut = 0.0; // mu . u^t
    Mat abs_j;          // |J_mu|
    double a = 0.0, b2 = 0.0, b3 = 0.0, tr = 0.0; // <|J|^k xibar, xibar>, tr |J|
    CVec w;             // (|J| + iJ) xi
    CVec e;             // exp(-2i theta |J|) (|J| + iJ) xi
    CVec abs_j_e;       // |J| e
    CMat phi0;          // d_xi nabla_x phi, first-layer block
    cplx det, density;
};

// throws ZeroFrequency for xi = 0 and OutsideOmega when mu is off Omega
PhaseData phase_data(const Group2Step& g, double t, const Covector& c);
// htype_path = false forces the spectral evaluation on H-type groups
PhaseData phase_data(const Group2Step& g, double t, const Covector& c, bool htype_path);

// phi(t, p, c) from precomputed data
cplx phase_at(const PhaseData& pd, const Point& p);

struct PhaseEval {
    cplx value;
    CVec grad_xi; // d_xi phi, a row stored as a vector
    CVec grad_x;  // nabla_x phi
    double im_part = 0.0;
};

PhaseEval phase_value(const Group2Step& g, double t, const Point& p, const Covector& c);

struct HessianEval {
    CMat phi0;
    cplx det_phi;
    cplx density;
};

// closed forms for Phi_0, det Phi and the density
HessianEval mixed_hessian(const Group2Step& g, double t, const Covector& c);

// d_xi xi^t - (i/2)|J_mu| d_xi x^t from finite differences of the flow
CMat phi0_fd(const Group2Step& g, double t, const Covector& c, double h_rel = 1e-3);

// full d x d mixed Hessian d_xi nabla_x phi at p by finite differences
CMat mixed_hessian_fd(const Group2Step& g, double t, const Point& p, const Covector& c, double h_rel = 1e-3);

// phi at p by direct evaluation of the defining formula with the generic flow
cplx phase_direct(const Group2Step& g, double t, const Point& p, const Covector& c);

bool stationarity_check(const Group2Step& g, double t, const Point& p, const Covector& c, double tol);

} // namespace cfio

#endif

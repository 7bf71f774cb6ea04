#ifndef CFIO_TRANSPORT_HPP
#define CFIO_TRANSPORT_HPP

#include "cfio/phase.hpp"
#include "cfio/symbol.hpp"

#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <vector>

namespace cfio {

struct CoeffBundle {
    cplx f20, f11, f10, f02{1.0}, f01, f00;
    cplx k;
    cplx l00, l10, l20{1.0};
    CVec l01, l11;
    CMat l02;
};

// F_kj and K in closed form at (t, x) with precomputed phase data
CoeffBundle f_coeffs(const PhaseData& pd, const Vec& x);
CoeffBundle f_coeffs(const Group2Step& g, double t, const Point& p, const Covector& c);
// F_kj from their definitions through finite differences of phi and the
// density along t and the horizontal fields (K is not filled)
CoeffBundle f_coeffs_definition(const Group2Step& g, double t, const Point& p, const Covector& c);
cplx k_value(const Group2Step& g, double t, const Point& p, const Covector& c);

// Lambda_jr in closed form (Lambda part of the bundle)
CoeffBundle lambda_coeffs(const Group2Step& g, double t, const Covector& c);
CoeffBundle lambda_coeffs(const PhaseData& pd);
// the simplified forms valid on H-type groups
CoeffBundle lambda_coeffs_htype(const Group2Step& g, const PhaseData& pd);

// u-independent amplitude p(x, c) at a fixed time
using Amplitude = std::function<cplx(const Vec& x, const Covector& c)>;

struct ROptions {
    int gl_nodes = 3;       // Gauss-Legendre nodes in s for the averaged gradient
    double hx = 0.1;        // central-difference step in x (exact on quadratics)
    double hxi_rel = 3e-3;  // Richardson step for the xi-divergence, relative to |xi|/max(1,|theta|)
};

// R p at (t, x, c) by quadrature and finite differences
cplx apply_r_numeric(const Group2Step& g, const Amplitude& p, double t, const Vec& x, const Covector& c,
                     const ROptions& opt = {});
// R p as an amplitude, for composition
Amplitude r_numeric(const Group2Step& g, Amplitude p, double t, ROptions opt = {});

// sum over k + j <= 2 of R^k(F_kj d_t^j q) at x = x^t, with numeric R
cplx lambda_oracle(const Group2Step& g, const Symbol& q, double t, const Covector& c, const ROptions& opt = {});
// sum over j + k <= 1 of 2^{j-1} R^k(F_k(j+1) d_t^j q) at x = x^t
cplx mho_oracle(const Group2Step& g, const Symbol& q, double t, const Covector& c, const ROptions& opt = {});

cplx assemble_lambda(const CoeffBundle& b, const SymbolJet& j);
cplx assemble_mho(const CoeffBundle& b, const SymbolJet& j);

// Lambda q and mho q from the closed-form coefficients; outside the support
// of q the result is 0 and *in_support is set to false
cplx apply_lambda(const Group2Step& g, const Symbol& q, double t, const Covector& c, bool* in_support = nullptr);
cplx apply_mho(const Group2Step& g, const Symbol& q, double t, const Covector& c, bool* in_support = nullptr);
// (1/(2i|xi|)) int_0^t Lambda q
cplx apply_lambda_i(const Group2Step& g, const Symbol& q, double t, const Covector& c, int nodes = 16);

struct IterateOptions {
    int max_n = 3;          // cost guard
    int t_nodes = 16;       // Chebyshev-Lobatto nodes on [0, t], plus 8 per unit of |theta|
    double lattice_rel = 1e-2; // xi lattice step relative to |xi|
};

// Values at one (t, c) of Lambda_I^j q0, Lambda Lambda_I^j q0 and
// ringring-Lambda Lambda_I^j q0 for j = 0..N.
struct IterateValues {
    std::vector<cplx> iterate, lambda, ringring;
};

// Parametrix amplitudes Lambda_I^j q0, j = 0..N.  Each evaluation builds a
// Chebyshev grid on [0, t] and a lattice of first-layer frequencies around
// xi; results are memoized per (t, c).
class AmplitudeIterates {
public:
    AmplitudeIterates(const Group2Step& g, Symbol q0, int n, IterateOptions opt = {});

    int order() const { return n_; }
    IterateValues values(double t, const Covector& c) const;
    cplx iterate(int j, double t, const Covector& c) const { return values(t, c).iterate.at(j); }
    // sum_{j <= N} Lambda_I^j q0
    cplx partial_sum(double t, const Covector& c) const;
    Symbol symbol(int j) const;
    Symbol lambda_symbol(int j) const;
    Symbol ringring_symbol(int j) const;

private:
    Group2Step g_;
    Symbol q0_;
    int n_;
    IterateOptions opt_;
    mutable std::mutex mu_;
    mutable std::map<std::vector<double>, IterateValues> memo_;
};

} // namespace cfio

#endif

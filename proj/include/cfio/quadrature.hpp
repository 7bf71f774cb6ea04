#ifndef CFIO_QUADRATURE_HPP
#define CFIO_QUADRATURE_HPP

#include "cfio/types.hpp"

#include <type_traits>
#include <vector>

namespace cfio {

struct GaussRule {
    std::vector<double> x; // nodes on [-1, 1]
    std::vector<double> w;
};

// Golub-Welsch; rules are cached and shared
const GaussRule& gauss_legendre(int n);
// nodes and weights for the weight exp(-x^2) on the real line
const GaussRule& gauss_hermite(int n);

template <class F>
auto gauss_integrate(F&& f, double a, double b, int n)
{
    const GaussRule& r = gauss_legendre(n);
    double c = 0.5 * (a + b), h = 0.5 * (b - a);
    using R = std::decay_t<decltype(f(a))>;
    R acc = R(f(c + h * r.x[0]) * (h * r.w[0]));
    for (int i = 1; i < n; ++i)
        acc += R(f(c + h * r.x[i]) * (h * r.w[i]));
    return acc;
}

// Chebyshev-Lobatto grid on [a, b] with spectral differentiation, spectral
// antiderivative vanishing at `origin`, and barycentric interpolation.
class ChebGrid {
public:
    ChebGrid(double a, double b, int n, double origin);

    int size() const { return static_cast<int>(nodes_.size()); }
    const Vec& nodes() const { return nodes_; }
    const Mat& diff() const { return D_; }
    const Mat& antideriv() const { return S_; }

    template <class V>
    typename V::Scalar interpolate(const V& values, double t) const
    {
        using S = typename V::Scalar;
        S num(0), den(0);
        for (int j = 0; j < size(); ++j) {
            double dt = t - nodes_(j);
            if (dt == 0.0)
                return values(j);
            double c = bw_(j) / dt;
            num += c * values(j);
            den += c;
        }
        return num / den;
    }

private:
    Vec nodes_, bw_;
    Mat D_, S_;
};

} // namespace cfio

#endif

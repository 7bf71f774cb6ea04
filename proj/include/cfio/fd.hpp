#ifndef CFIO_FD_HPP
#define CFIO_FD_HPP

#include "cfio/types.hpp"

#include <type_traits>

namespace cfio::fd {

// central differences with one Richardson level, O(h^4)
template <class F>
auto d1(F&& f, double x, double h)
{
    using R = std::decay_t<decltype(f(x))>;
    R a = f(x + h), b = f(x - h), c = f(x + 0.5 * h), e = f(x - 0.5 * h);
    R coarse = (a - b) / (2.0 * h);
    R fine = (c - e) / h;
    return R((4.0 * fine - coarse) / 3.0);
}

template <class F>
auto d2(F&& f, double x, double h)
{
    using R = std::decay_t<decltype(f(x))>;
    R f0 = f(x);
    R a = f(x + h), b = f(x - h), c = f(x + 0.5 * h), e = f(x - 0.5 * h);
    R coarse = (a - 2.0 * f0 + b) / (h * h);
    R fine = (c - 2.0 * f0 + e) / (0.25 * h * h);
    return R((4.0 * fine - coarse) / 3.0);
}

// plain central differences (exact on quadratics)
template <class F>
auto d1_plain(F&& f, double x, double h)
{
    using R = std::decay_t<decltype(f(x))>;
    return R((f(x + h) - f(x - h)) / (2.0 * h));
}

// Jacobian of a vector map v -> f(v), column j = d f / d v_j
template <class F>
auto jacobian(F&& f, const Vec& v, double h)
{
    using R = std::decay_t<decltype(f(v))>;
    using S = typename R::Scalar;
    R f0 = f(v);
    Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic> J(f0.size(), v.size());
    for (int j = 0; j < v.size(); ++j) {
        auto g = [&](double s) {
            Vec w = v;
            w(j) += s;
            return R(f(w));
        };
        J.col(j) = d1(g, 0.0, h);
    }
    return J;
}

} // namespace cfio::fd

#endif

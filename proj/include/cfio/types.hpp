#ifndef CFIO_TYPES_HPP
#define CFIO_TYPES_HPP

#include <Eigen/Dense>
#include <complex>

namespace cfio {

using cplx = std::complex<double>;
using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using CVec = Eigen::VectorXcd;
using CMat = Eigen::MatrixXcd;

// frequency variable (xi, mu), dual to (x, u)
struct Covector {
    Vec xi;
    Vec mu;
};

// exponential coordinates (x, u)
struct Point {
    Vec x;
    Vec u;
};

inline Vec pack(const Covector& c)
{
    Vec v(c.xi.size() + c.mu.size());
    v << c.xi, c.mu;
    return v;
}

inline Covector unpack_cov(const Vec& v, int d1)
{
    return {v.head(d1), v.tail(v.size() - d1)};
}

inline Vec pack(const Point& p)
{
    Vec v(p.x.size() + p.u.size());
    v << p.x, p.u;
    return v;
}

inline Point unpack_point(const Vec& v, int d1)
{
    return {v.head(d1), v.tail(v.size() - d1)};
}

} // namespace cfio

#endif

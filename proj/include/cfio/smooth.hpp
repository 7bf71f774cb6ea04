#ifndef CFIO_SMOOTH_HPP
#define CFIO_SMOOTH_HPP

#include <cmath>

namespace cfio {

// exp(-1/s) for s > 0, else 0
inline double mollifier(double s) { return s > 0.0 ? std::exp(-1.0 / s) : 0.0; }

// smooth monotone step: 0 for s <= 0, 1 for s >= 1
inline double smooth_step(double s)
{
    if (s <= 0.0)
        return 0.0;
    if (s >= 1.0)
        return 1.0;
    double a = mollifier(s), b = mollifier(1.0 - s);
    return a / (a + b);
}

// 1 on [0, 1], 0 on [2, inf)
inline double plateau(double s) { return 1.0 - smooth_step(std::abs(s) - 1.0); }

// 1 on [lo, hi], 0 outside [lo - w_lo, hi + w_hi]
inline double window(double s, double lo, double hi, double w_lo, double w_hi)
{
    return smooth_step((s - lo + w_lo) / w_lo) * smooth_step((hi + w_hi - s) / w_hi);
}

// exp(-1/(1 - s^2)) on |s| < 1
inline double bump(double s)
{
    double q = 1.0 - s * s;
    return q > 0.0 ? std::exp(-1.0 / q) : 0.0;
}

} // namespace cfio

#endif

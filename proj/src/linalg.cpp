#include "cfio/linalg.hpp"

#include <cmath>

namespace cfio {

SkewSpectrum::SkewSpectrum(const Mat& J)
{
    CMat H = cplx(0.0, 1.0) * J.cast<cplx>();
    Eigen::SelfAdjointEigenSolver<CMat> es(H);
    U_ = es.eigenvectors();
    lam_ = es.eigenvalues();
}

Mat SkewSpectrum::abs() const
{
    return func([](double l) { return cplx(std::abs(l), 0.0); }).real();
}

cplx expm1_over_z(cplx z)
{
    if (std::abs(z) < 1e-4)
        return 1.0 + z + 2.0 * z * z / 3.0 + z * z * z / 3.0;
    return (std::exp(2.0 * z) - 1.0) / (2.0 * z);
}

cplx sinhc(cplx z)
{
    if (std::abs(z) < 1e-4)
        return 1.0 + z * z / 6.0 + z * z * z * z / 120.0;
    return std::sinh(z) / z;
}

int numerical_rank(const Mat& A, double rel_tol)
{
    if (A.size() == 0)
        return 0;
    Eigen::JacobiSVD<Mat> svd(A);
    const Vec& s = svd.singularValues();
    if (s.size() == 0 || s(0) == 0.0)
        return 0;
    int r = 0;
    for (int i = 0; i < s.size(); ++i)
        if (s(i) > rel_tol * s(0))
            ++r;
    return r;
}

} // namespace cfio

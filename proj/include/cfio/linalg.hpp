#ifndef CFIO_LINALG_HPP
#define CFIO_LINALG_HPP

#include "cfio/types.hpp"

namespace cfio {

// Unitary diagonalisation of a real skew matrix J through the Hermitian
// matrix iJ = U diag(lam) U^*.  J acts as -i*lam and |J| as |lam| on the
// columns of U, so any function of (J, |J|) is a function of lam.
class SkewSpectrum {
public:
    SkewSpectrum() = default;
    explicit SkewSpectrum(const Mat& J);

    const CMat& vectors() const { return U_; }
    const Vec& values() const { return lam_; }
    int size() const { return static_cast<int>(lam_.size()); }

    template <class F>
    CMat func(F f) const
    {
        CVec g(lam_.size());
        for (int i = 0; i < lam_.size(); ++i)
            g(i) = f(lam_(i));
        return U_ * g.asDiagonal() * U_.adjoint();
    }

    // f(J,|J|) v without forming the matrix
    template <class F>
    CVec apply(F f, const CVec& v) const
    {
        CVec w = U_.adjoint() * v;
        for (int i = 0; i < lam_.size(); ++i)
            w(i) *= f(lam_(i));
        return U_ * w;
    }

    Mat abs() const;

private:
    CMat U_;
    Vec lam_;
};

// (e^{2z}-1)/(2z), with a Taylor branch near 0
cplx expm1_over_z(cplx z);
// sinh(z)/z
cplx sinhc(cplx z);

int numerical_rank(const Mat& A, double rel_tol);

} // namespace cfio

#endif

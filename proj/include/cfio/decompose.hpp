#ifndef CFIO_DECOMPOSE_HPP
#define CFIO_DECOMPOSE_HPP

#include "cfio/carnot.hpp"
#include "cfio/symbol.hpp"

#include <unordered_map>
#include <utility>
#include <vector>

namespace cfio {

// chi0 + sum_{k >= 0} chi1(2^{-k} s) = 1, chi1(s) = psi(|s|) - psi(2|s|)
struct DyadicCutoffs {
    double width = 1.0; // transition width of psi inside [1, 2]

    double psi(double s) const;
    double chi0(double s) const { return psi(2.0 * std::abs(s)); }
    double chi1(double s) const { return psi(std::abs(s)) - psi(2.0 * std::abs(s)); }
    // equal to 1 on supp chi1
    double chi1_tilde(double s) const { return psi(0.5 * std::abs(s)) - psi(4.0 * std::abs(s)); }
};

// sharpness >= 1 narrows the transition of psi to width 1/sharpness
DyadicCutoffs make_cutoffs(double sharpness = 1.0);

// Points on S^{dim-1} on a zonal (latitude band) net with spacing about s.
// Points are produced lazily; count and neighbour queries are analytic.
class ZonalNet {
public:
    ZonalNet(int dim, double spacing);

    long long count() const { return count_; }
    Vec point(long long i) const;
    // indices of net points within chord distance r of the unit vector w
    std::vector<long long> near(const Vec& w, double r) const;
    int dim() const { return dim_; }

private:
    int dim_;
    double s_;
    long long count_ = 0;
    int bands_ = 0;
    std::vector<long long> band_start_; // dim 3
    std::vector<int> band_size_;
};

// all net points (used as dense candidate sets)
std::vector<Vec> zonal_points(int dim, double spacing, long long max_count = 20000000);

// Greedy packing of S^{d-1} with separation delta = c 2^{-m/2} and
// Shepard-normalized bump weights of radius 2 delta.
class DirectionSet {
public:
    DirectionSet() = default;
    DirectionSet(int d, int m, double c, std::vector<Vec> dirs);

    int d() const { return d_; }
    int m() const { return m_; }
    double c() const { return c_; }
    double delta() const { return delta_; }
    const std::vector<Vec>& directions() const { return dirs_; }
    size_t size() const { return dirs_.size(); }

    // nonzero weights chi_{m,nu}(xi) as (index, value); 0-homogeneous
    std::vector<std::pair<int, double>> weights(const Vec& xi) const;
    double weight(int index, const Vec& xi) const;
    // largest distance from a sampled unit vector to the nearest direction
    double covering_radius(int samples, std::uint64_t seed) const;

private:
    std::vector<int> candidates(const Vec& w) const;

    int d_ = 0, m_ = 0;
    double c_ = 0.25, delta_ = 0.0;
    std::vector<Vec> dirs_;
    std::unordered_map<std::string, std::vector<int>> hash_;
};

DirectionSet make_directions(int d, int m, double c = 0.25);

// additive cutoff: even, supported in [-1, 1], sum_k chi_plus(s - k) = 1
double chi_plus(double s);
// 1 on [1/kappa, kappa], supported in [1/(2 kappa), 2 kappa]
double chi_kappa(double s, double kappa);

// Sectors V_{T,kappa} of aperture c_kappa/T in R^{d2} with a 0-homogeneous
// partition of unity supported in {mu . v > 0, |mu_perp|/|mu| <= c_kappa/T}.
class MuSectorDecomposition {
public:
    MuSectorDecomposition(int d2, double T, double kappa, double c_kappa = 0.25);

    int d2() const { return d2_; }
    double T() const { return T_; }
    double kappa() const { return kappa_; }
    double c_kappa() const { return c_; }
    long long count() const;
    Vec sector(long long i) const;
    // nonzero sector weights at mu as (index, value)
    std::vector<std::pair<long long, double>> weights(const Vec& mu) const;
    double weight(long long i, const Vec& mu) const;
    // bound on |mu~|/|xi| over sheared supports when |mu|/|xi| <= ratio_max
    // in the original variables; the support argument needs it <= 5/2
    double sheared_mu_bound(double ratio_max) const;
    bool sheared_support_holds(double ratio_max) const { return sheared_mu_bound(ratio_max) <= 2.5; }

private:
    int d2_;
    double T_, kappa_, c_, radius_;
    ZonalNet net_;
};

Covector mu_shear(const Group2Step& g, double t, int k, const Vec& v, const Covector& c);
Covector mu_unshear(const Group2Step& g, double t, int k, const Vec& v, const Covector& c);

// q_{k,v,T,kappa} in the sheared variables; includes the (2 pi)^{-d} factor
// and the |t|^{-1/2} scaled density
Symbol sheared_symbol(const Group2Step& g, const Symbol& q, int k, const Vec& v, const MuSectorDecomposition& dec,
                      long long sector_index);

// eta_h(2^{-m} xi) for h in {0, 1}
Symbol initial_symbol(const Group2Step& g, int m, int h = 0);

} // namespace cfio

#endif

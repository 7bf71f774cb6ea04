#include "cfio/decompose.hpp"

#include "cfio/errors.hpp"
#include "cfio/fd.hpp"
#include "cfio/phase.hpp"
#include "cfio/rng.hpp"
#include "cfio/smooth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace cfio {

namespace {

constexpr double pi = std::numbers::pi;

double chord_to_angle(double r) { return 2.0 * std::asin(std::min(1.0, 0.5 * r)); }

double wrap_angle(double a)
{
    a = std::fmod(a, 2.0 * pi);
    return a < 0.0 ? a + 2.0 * pi : a;
}

} // namespace

double DyadicCutoffs::psi(double s) const
{
    s = std::abs(s);
    return 1.0 - smooth_step((s - 1.5) / width + 0.5);
}

DyadicCutoffs make_cutoffs(double sharpness)
{
    if (!(sharpness > 0.0))
        throw InputError("cutoff sharpness must be positive");
    return {std::min(1.0, 1.0 / sharpness)};
}

// ---------------------------------------------------------------------------

ZonalNet::ZonalNet(int dim, double spacing) : dim_(dim), s_(spacing)
{
    if (dim == 2) {
        count_ = static_cast<long long>(std::ceil(2.0 * pi / s_));
    } else if (dim == 3) {
        bands_ = static_cast<int>(std::ceil(pi / s_));
        for (int i = 0; i < bands_; ++i) {
            const double th = (i + 0.5) * pi / bands_;
            const int n = std::max(1, static_cast<int>(std::ceil(2.0 * pi * std::sin(th) / s_)));
            band_start_.push_back(count_);
            band_size_.push_back(n);
            count_ += n;
        }
    } else if (dim != 1) {
        throw InputError("zonal nets are available on S^1 and S^2 only");
    } else {
        count_ = 2;
    }
}

Vec ZonalNet::point(long long i) const
{
    if (dim_ == 1)
        return Vec::Constant(1, i == 0 ? 1.0 : -1.0);
    if (dim_ == 2) {
        const double a = (i + 0.5) * 2.0 * pi / count_;
        return (Vec(2) << std::cos(a), std::sin(a)).finished();
    }
    const int b = static_cast<int>(std::upper_bound(band_start_.begin(), band_start_.end(), i) - band_start_.begin()) - 1;
    const double th = (b + 0.5) * pi / bands_;
    const double ph = (i - band_start_[b] + 0.5) * 2.0 * pi / band_size_[b];
    return (Vec(3) << std::sin(th) * std::cos(ph), std::sin(th) * std::sin(ph), std::cos(th)).finished();
}

std::vector<long long> ZonalNet::near(const Vec& w, double r) const
{
    std::vector<long long> out;
    const double a = chord_to_angle(r);
    auto keep = [&](long long i) {
        if ((point(i) - w).norm() <= r)
            out.push_back(i);
    };
    if (dim_ == 1) {
        for (long long i = 0; i < 2; ++i)
            keep(i);
        return out;
    }
    if (dim_ == 2) {
        const double step = 2.0 * pi / count_;
        const double phi = wrap_angle(std::atan2(w(1), w(0)));
        const long long span = static_cast<long long>(std::ceil(a / step)) + 1;
        if (2 * span + 1 >= count_) {
            for (long long i = 0; i < count_; ++i)
                keep(i);
            return out;
        }
        const long long c = static_cast<long long>(std::floor(phi / step));
        for (long long j = c - span; j <= c + span; ++j)
            keep(((j % count_) + count_) % count_);
        return out;
    }
    const double th = std::acos(std::clamp(w(2), -1.0, 1.0));
    const double phi = wrap_angle(std::atan2(w(1), w(0)));
    const double bw = pi / bands_;
    const int b0 = std::max(0, static_cast<int>(std::floor((th - a) / bw - 0.5)) - 1);
    const int b1 = std::min(bands_ - 1, static_cast<int>(std::ceil((th + a) / bw - 0.5)) + 1);
    for (int b = b0; b <= b1; ++b) {
        const int n = band_size_[b];
        const double tb = (b + 0.5) * bw;
        const double step = 2.0 * pi / n;
        const double den = std::sin(th) * std::sin(tb);
        const double C = den > 1e-300 ? (std::cos(a) - std::cos(th) * std::cos(tb)) / den : -2.0;
        if (C > 1.0)
            continue;
        const long long span = C <= -1.0 ? n : static_cast<long long>(std::ceil(std::acos(C) / step)) + 1;
        if (2 * span + 1 >= n) {
            for (int j = 0; j < n; ++j)
                keep(band_start_[b] + j);
            continue;
        }
        const long long c = static_cast<long long>(std::floor(phi / step));
        for (long long j = c - span; j <= c + span; ++j)
            keep(band_start_[b] + ((j % n) + n) % n);
    }
    return out;
}

std::vector<Vec> zonal_points(int dim, double spacing, long long max_count)
{
    std::vector<Vec> out;
    if (dim == 1)
        return {Vec::Constant(1, 1.0), Vec::Constant(1, -1.0)};
    if (dim == 2) {
        ZonalNet net(2, spacing);
        for (long long i = 0; i < net.count(); ++i)
            out.push_back(net.point(i));
        return out;
    }
    const int bands = static_cast<int>(std::ceil(pi / spacing));
    for (int i = 0; i < bands; ++i) {
        const double th = (i + 0.5) * pi / bands;
        const double r = std::sin(th);
        for (const Vec& p : zonal_points(dim - 1, spacing / r, max_count)) {
            Vec v(dim);
            v << std::cos(th), r * p;
            out.push_back(v);
            if (static_cast<long long>(out.size()) > max_count)
                throw InputError("zonal net too large for this dimension and spacing");
        }
    }
    return out;
}

// ---------------------------------------------------------------------------

namespace {

std::string cell_key(const Vec& w, double cell)
{
    std::string k;
    for (int i = 0; i < w.size(); ++i)
        k += std::to_string(static_cast<long long>(std::floor(w(i) / cell))) + ",";
    return k;
}

void neighbour_keys(const Vec& w, double cell, std::vector<std::string>& out)
{
    const int d = static_cast<int>(w.size());
    std::vector<long long> base(d);
    for (int i = 0; i < d; ++i)
        base[i] = static_cast<long long>(std::floor(w(i) / cell));
    long long total = 1;
    for (int i = 0; i < d; ++i)
        total *= 3;
    out.clear();
    for (long long code = 0; code < total; ++code) {
        long long c = code;
        std::string k;
        for (int i = 0; i < d; ++i) {
            k += std::to_string(base[i] + (c % 3) - 1) + ",";
            c /= 3;
        }
        out.push_back(std::move(k));
    }
}

} // namespace

DirectionSet::DirectionSet(int d, int m, double c, std::vector<Vec> dirs)
    : d_(d), m_(m), c_(c), delta_(c * std::pow(2.0, -0.5 * m)), dirs_(std::move(dirs))
{
    for (int i = 0; i < static_cast<int>(dirs_.size()); ++i)
        hash_[cell_key(dirs_[i], 2.0 * delta_)].push_back(i);
}

std::vector<int> DirectionSet::candidates(const Vec& w) const
{
    std::vector<std::string> keys;
    neighbour_keys(w, 2.0 * delta_, keys);
    std::vector<int> out;
    for (const auto& k : keys) {
        auto it = hash_.find(k);
        if (it != hash_.end())
            out.insert(out.end(), it->second.begin(), it->second.end());
    }
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<std::pair<int, double>> DirectionSet::weights(const Vec& xi) const
{
    const Vec w = xi.normalized();
    std::vector<std::pair<int, double>> out;
    double sum = 0.0;
    for (int i : candidates(w)) {
        const double b = bump((w - dirs_[i]).norm() / (2.0 * delta_));
        if (b > 0.0) {
            out.emplace_back(i, b);
            sum += b;
        }
    }
    for (auto& p : out)
        p.second /= sum;
    return out;
}

double DirectionSet::weight(int index, const Vec& xi) const
{
    for (const auto& [i, w] : weights(xi))
        if (i == index)
            return w;
    return 0.0;
}

double DirectionSet::covering_radius(int samples, std::uint64_t seed) const
{
    CounterRng rng(seed, 17);
    double worst = 0.0;
    for (int s = 0; s < samples; ++s) {
        const Vec w = rng.unit_vec(d_);
        double best = 2.0;
        for (int i : candidates(w))
            best = std::min(best, (w - dirs_[i]).norm());
        worst = std::max(worst, best);
    }
    return worst;
}

DirectionSet make_directions(int d, int m, double c)
{
    if (d < 2 || m < 0 || !(c > 0.0))
        throw InputError("make_directions needs d >= 2, m >= 0, c > 0");
    const double delta = c * std::pow(2.0, -0.5 * m);
    std::vector<Vec> dirs;
    std::unordered_map<std::string, std::vector<int>> hash;
    std::vector<std::string> keys;
    auto try_add = [&](const Vec& w) {
        neighbour_keys(w, 2.0 * delta, keys);
        for (const auto& k : keys) {
            auto it = hash.find(k);
            if (it == hash.end())
                continue;
            for (int i : it->second)
                if ((dirs[i] - w).norm() < delta)
                    return;
        }
        hash[cell_key(w, 2.0 * delta)].push_back(static_cast<int>(dirs.size()));
        dirs.push_back(w);
    };
    // quasi-random stream, then a dense deterministic net to close gaps so
    // that the packing covers at radius 1.5 delta
    const double area_ratio = std::pow(delta, -(d - 1));
    const int stream = static_cast<int>(std::min(2e6, 4.0 * area_ratio + 64));
    for (const Vec& w : quasi_random_sphere(d, stream))
        try_add(w);
    if (d <= 3) {
        for (const Vec& w : zonal_points(d, 0.5 * delta))
            try_add(w);
    } else {
        for (const Vec& w : quasi_random_sphere(d, static_cast<int>(std::min(4e6, 40.0 * area_ratio)), stream))
            try_add(w);
    }
    return DirectionSet(d, m, c, std::move(dirs));
}

// ---------------------------------------------------------------------------

double chi_plus(double s) { return smooth_step(1.0 - std::abs(s)); }

double chi_kappa(double s, double kappa)
{
    return window(s, 1.0 / kappa, kappa, 1.0 / kappa - 0.5 / kappa, kappa);
}

MuSectorDecomposition::MuSectorDecomposition(int d2, double T, double kappa, double c_kappa)
    : d2_(d2), T_(T), kappa_(kappa), c_(c_kappa), radius_(c_kappa / T),
      net_(d2 == 1 ? 1 : d2, d2 == 1 ? 1.0 : 0.5 * c_kappa / T)
{
    if (!(kappa > 1.0) || !(T > 0.0) || !(c_kappa > 0.0) || c_kappa > 0.5)
        throw InputError("sector decomposition needs kappa > 1, T > 0, 0 < c_kappa <= 1/2");
}

long long MuSectorDecomposition::count() const { return net_.count(); }

Vec MuSectorDecomposition::sector(long long i) const { return net_.point(i); }

std::vector<std::pair<long long, double>> MuSectorDecomposition::weights(const Vec& mu) const
{
    std::vector<std::pair<long long, double>> out;
    const double n = mu.norm();
    if (n == 0.0)
        return out;
    if (d2_ == 1) {
        out.emplace_back(mu(0) > 0.0 ? 0 : 1, 1.0);
        return out;
    }
    const Vec w = mu / n;
    double sum = 0.0;
    for (long long i : net_.near(w, radius_)) {
        const double b = bump((w - net_.point(i)).norm() / radius_);
        if (b > 0.0) {
            out.emplace_back(i, b);
            sum += b;
        }
    }
    for (auto& p : out)
        p.second /= sum;
    return out;
}

// |mu~ . v| <= 2|xi| from chi_plus, |mu~_perp| = |t||mu_perp| <= 2 kappa T (c/T) ratio_max |xi|
double MuSectorDecomposition::sheared_mu_bound(double ratio_max) const
{
    if (d2_ == 1)
        return 2.0;
    const double perp = c_ * kappa_ * ratio_max;
    return 2.0 * std::sqrt(1.0 + perp * perp);
}

double MuSectorDecomposition::weight(long long i, const Vec& mu) const
{
    if (d2_ == 1) {
        const double n = mu(0) * net_.point(i)(0);
        return n > 0.0 ? 1.0 : 0.0;
    }
    const double n = mu.norm();
    if (n == 0.0 || (mu / n - net_.point(i)).norm() >= radius_)
        return 0.0;
    for (const auto& [j, w] : weights(mu))
        if (j == i)
            return w;
    return 0.0;
}

Covector mu_shear(const Group2Step&, double t, int k, const Vec& v, const Covector& c)
{
    if (t == 0.0)
        throw ZeroTime("shear needs t != 0");
    const double xn = c.xi.norm();
    if (xn == 0.0)
        throw ZeroFrequency("shear needs xi != 0");
    return {c.xi, (2.0 * k * xn * v + c.mu) / t};
}

Covector mu_unshear(const Group2Step&, double t, int k, const Vec& v, const Covector& c)
{
    if (t == 0.0)
        throw ZeroTime("shear needs t != 0");
    return {c.xi, t * c.mu - 2.0 * k * c.xi.norm() * v};
}

Symbol sheared_symbol(const Group2Step& g, const Symbol& q, int k, const Vec& v, const MuSectorDecomposition& dec,
                      long long sector_index)
{
    Symbol s;
    const double norm = std::pow(2.0 * pi, -g.dim());
    s.fn = [g, q, k, v, dec, sector_index, norm](double t, const Covector& c) -> cplx {
        if (t == 0.0)
            return 0.0;
        const double xn = c.xi.norm();
        if (xn == 0.0)
            return 0.0;
        const double vt = (c.mu.dot(v)) / (2.0 * xn);
        const double cp = chi_plus(vt);
        const double ck = chi_kappa(std::abs(t) / dec.T(), dec.kappa());
        if (cp == 0.0 || ck == 0.0)
            return 0.0;
        const Covector orig{c.xi, (2.0 * k * xn * v + c.mu) / t};
        const double sw = dec.weight(sector_index, (t > 0.0 ? 1.0 : -1.0) * orig.mu);
        if (sw == 0.0)
            return 0.0;
        const cplx qv = q(t, orig);
        if (qv == 0.0)
            return 0.0;
        return norm * qv * ck * sw * cp * phase_data(g, t, orig).density / std::sqrt(std::abs(t));
    };
    s.support.xi_min = q.support.xi_min;
    s.support.xi_max = q.support.xi_max;
    s.order_xi = q.order_xi;
    return s;
}

Symbol initial_symbol(const Group2Step& g, int m, int h)
{
    if (h < 0 || h > 1)
        throw InputError("initial symbols are implemented for h = 0 and h = 1");
    const double s = std::ldexp(1.0, m);
    const DyadicCutoffs cut = make_cutoffs();
    auto eta0 = [cut](const Covector& z) { return cut.chi1(z.xi.norm()) * cut.chi1(z.mu.norm()); };
    Symbol q;
    if (h == 0) {
        q.fn = [eta0, s](double, const Covector& c) { return cplx(eta0({c.xi / s, c.mu / s})); };
        q.radial = true;
    } else {
        q.fn = [eta0, s, g](double, const Covector& c) -> cplx {
            const Covector z{c.xi / s, c.mu / s};
            if (eta0(z) == 0.0 && z.xi.norm() > 2.1)
                return 0.0;
            const Mat A = g.abs_j_mu(z.mu);
            const int d1 = g.d1();
            const double hh = 1e-2;
            double v = 0.0;
            for (int a = 0; a < d1; ++a)
                for (int b = 0; b < d1; ++b) {
                    if (A(a, b) == 0.0)
                        continue;
                    auto inner = [&](double x) {
                        return fd::d1(
                            [&](double y) {
                                Covector w = z;
                                w.xi(a) += x;
                                w.xi(b) += y;
                                return eta0(w);
                            },
                            0.0, hh);
                    };
                    v += A(a, b) * fd::d1(inner, 0.0, hh);
                }
            return -v;
        };
    }
    q.support.xi_min = 0.5 * s;
    q.support.xi_max = 2.0 * s;
    q.support.mu_min = 0.5 * s;
    q.support.mu_max = 2.0 * s;
    q.support.ratio_min = 0.25;
    q.support.ratio_max = 4.0;
    q.t_independent = true;
    q.fd_step_xi = 2e-3;
    return q;
}

} // namespace cfio

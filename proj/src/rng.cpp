#include "cfio/rng.hpp"

#include <cmath>
#include <numbers>

namespace cfio {

namespace {

std::uint64_t splitmix(std::uint64_t z)
{
    z += 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

double to_unit(std::uint64_t v) { return static_cast<double>(v >> 11) * 0x1.0p-53; }

} // namespace

CounterRng::CounterRng(std::uint64_t seed, std::uint64_t stream)
    : key_(splitmix(seed ^ splitmix(stream + 0x632BE59BD9B4E019ULL)))
{
}

std::uint64_t CounterRng::next_u64() { return splitmix(key_ + 0x9E3779B97F4A7C15ULL * (++counter_)); }

double CounterRng::uniform() { return to_unit(next_u64()); }

double CounterRng::normal()
{
    double u1 = uniform();
    double u2 = uniform();
    if (u1 < 1e-300)
        u1 = 1e-300;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

Vec CounterRng::normal_vec(int n)
{
    Vec v(n);
    for (int i = 0; i < n; ++i)
        v(i) = normal();
    return v;
}

Vec CounterRng::unit_vec(int n)
{
    Vec v = normal_vec(n);
    while (v.norm() < 1e-12)
        v = normal_vec(n);
    return v / v.norm();
}

std::vector<Vec> quasi_random_sphere(int dim, int count, std::uint64_t offset)
{
    // generalised golden ratio for the R_k sequence, k = even dimension
    int k = dim + (dim % 2);
    double phi = 2.0;
    for (int it = 0; it < 64; ++it)
        phi = std::pow(1.0 + phi, 1.0 / (k + 1));
    Vec alpha(k);
    for (int j = 0; j < k; ++j)
        alpha(j) = std::fmod(std::pow(1.0 / phi, j + 1), 1.0);

    std::vector<Vec> out;
    out.reserve(count);
    for (int n = 0; n < count; ++n) {
        double idx = static_cast<double>(n + 1 + offset);
        Vec g(k);
        for (int j = 0; j < k; j += 2) {
            double u1 = std::fmod(0.5 + alpha(j) * idx, 1.0);
            double u2 = std::fmod(0.5 + alpha(j + 1) * idx, 1.0);
            u1 = std::max(u1, 1e-12);
            double r = std::sqrt(-2.0 * std::log(u1));
            g(j) = r * std::cos(2.0 * std::numbers::pi * u2);
            g(j + 1) = r * std::sin(2.0 * std::numbers::pi * u2);
        }
        Vec v = g.head(dim);
        double nv = v.norm();
        if (nv < 1e-12) {
            v = Vec::Unit(dim, 0);
            nv = 1.0;
        }
        out.push_back(v / nv);
    }
    return out;
}

} // namespace cfio

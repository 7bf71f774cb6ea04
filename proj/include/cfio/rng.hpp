#ifndef CFIO_RNG_HPP
#define CFIO_RNG_HPP

#include "cfio/types.hpp"

#include <cstdint>
#include <vector>

namespace cfio {

// Counter-based generator: draw i of stream s is splitmix64(seed, s, i).
// Streams are independent, so suites can be reordered without changing
// each other's samples.
class CounterRng {
public:
    explicit CounterRng(std::uint64_t seed, std::uint64_t stream = 0);

    std::uint64_t next_u64();
    double uniform();
    double uniform(double a, double b) { return a + (b - a) * uniform(); }
    double normal();
    Vec normal_vec(int n);
    Vec unit_vec(int n);

private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

// low-discrepancy points on S^{dim-1} (Kronecker sequence pushed through Box-Muller)
std::vector<Vec> quasi_random_sphere(int dim, int count, std::uint64_t offset = 0);

} // namespace cfio

#endif

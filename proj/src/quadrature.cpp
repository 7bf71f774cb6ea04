#include "cfio/quadrature.hpp"

#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>

namespace cfio {

namespace {

GaussRule build_rule(int n)
{
    GaussRule r;
    if (n == 1) {
        r.x = {0.0};
        r.w = {2.0};
        return r;
    }
    Vec diag = Vec::Zero(n);
    Vec sub(n - 1);
    for (int k = 1; k < n; ++k)
        sub(k - 1) = k / std::sqrt(4.0 * k * k - 1.0);
    Eigen::SelfAdjointEigenSolver<Mat> es;
    es.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
    r.x.resize(n);
    r.w.resize(n);
    for (int i = 0; i < n; ++i) {
        r.x[i] = es.eigenvalues()(i);
        double v = es.eigenvectors()(0, i);
        r.w[i] = 2.0 * v * v;
    }
    // polish nodes with Newton on P_n, recompute weights from P_n'
    for (int i = 0; i < n; ++i) {
        double x = r.x[i], dp = 1.0;
        for (int it = 0; it < 3; ++it) {
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= n; ++k) {
                double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            x -= p1 / dp;
        }
        r.x[i] = x;
        r.w[i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    return r;
}

GaussRule build_hermite(int n)
{
    Vec diag = Vec::Zero(n);
    Vec sub(std::max(n - 1, 0));
    for (int k = 1; k < n; ++k)
        sub(k - 1) = std::sqrt(0.5 * k);
    Eigen::SelfAdjointEigenSolver<Mat> es;
    es.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
    GaussRule r;
    for (int i = 0; i < n; ++i) {
        const double v = es.eigenvectors()(0, i);
        r.x.push_back(es.eigenvalues()(i));
        r.w.push_back(std::sqrt(std::numbers::pi) * v * v);
    }
    return r;
}

const GaussRule& cached_rule(int n, bool hermite)
{
    static std::mutex mtx;
    static std::map<std::pair<int, bool>, std::unique_ptr<GaussRule>> cache;
    std::lock_guard<std::mutex> lock(mtx);
    auto it = cache.find({n, hermite});
    if (it == cache.end())
        it = cache.emplace(std::pair{n, hermite}, std::make_unique<GaussRule>(hermite ? build_hermite(n) : build_rule(n)))
                 .first;
    return *it->second;
}

} // namespace

const GaussRule& gauss_legendre(int n) { return cached_rule(n, false); }

const GaussRule& gauss_hermite(int n) { return cached_rule(n, true); }

ChebGrid::ChebGrid(double a, double b, int n, double origin)
{
    nodes_.resize(n);
    bw_.resize(n);
    Vec s(n); // reference nodes on [-1,1], increasing
    for (int j = 0; j < n; ++j) {
        s(j) = -std::cos(std::numbers::pi * j / (n - 1));
        nodes_(j) = 0.5 * (a + b) + 0.5 * (b - a) * s(j);
        bw_(j) = ((j % 2) ? -1.0 : 1.0) * ((j == 0 || j == n - 1) ? 0.5 : 1.0);
    }
    // Chebyshev basis values T_k(s_j), k = 0..n
    auto cheb = [](double x, int kmax) {
        Vec T(kmax + 1);
        T(0) = 1.0;
        if (kmax >= 1)
            T(1) = x;
        for (int k = 2; k <= kmax; ++k)
            T(k) = 2.0 * x * T(k - 1) - T(k - 2);
        return T;
    };
    Mat V(n, n), E(n, n + 1);
    for (int j = 0; j < n; ++j) {
        Vec T = cheb(s(j), n);
        V.row(j) = T.head(n).transpose();
        E.row(j) = T.transpose();
    }
    Mat Vinv = V.inverse();
    // coefficient-space derivative
    Mat Dc = Mat::Zero(n, n);
    for (int k = 0; k < n; ++k)
        for (int j = k + 1; j < n; j += 2)
            Dc(k, j) = (k == 0 ? 1.0 : 2.0) * j;
    D_ = V * Dc * Vinv * (2.0 / (b - a));
    // coefficient-space antiderivative (n -> n+1 coefficients)
    Mat Q = Mat::Zero(n + 1, n);
    for (int k = 0; k < n; ++k) {
        if (k == 0) {
            Q(1, 0) += 1.0;
        } else if (k == 1) {
            Q(2, 1) += 0.25;
        } else {
            Q(k + 1, k) += 1.0 / (2.0 * (k + 1));
            Q(k - 1, k) -= 1.0 / (2.0 * (k - 1));
        }
    }
    double s0 = (2.0 * origin - a - b) / (b - a);
    Vec T0 = cheb(s0, n);
    Mat E0 = Vec::Ones(n) * T0.transpose();
    S_ = (E - E0) * Q * Vinv * (0.5 * (b - a));
}

} // namespace cfio

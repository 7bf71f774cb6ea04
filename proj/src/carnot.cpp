#include "cfio/carnot.hpp"

#include "cfio/errors.hpp"
#include "cfio/linalg.hpp"
#include "cfio/rng.hpp"

#include <json.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

namespace cfio {

Group2Step::Group2Step(std::vector<Mat> bracket, std::string name)
    : B_(std::move(bracket)), name_(std::move(name))
{
    if (B_.empty())
        throw InputError("bracket tensor has no second-layer components");
    d2_ = static_cast<int>(B_.size());
    d1_ = static_cast<int>(B_[0].rows());
    if (d1_ < 1)
        throw InputError("first layer must be nontrivial");
    for (int k = 0; k < d2_; ++k) {
        if (B_[k].rows() != d1_ || B_[k].cols() != d1_)
            throw InputError("bracket component " + std::to_string(k) + " is not " + std::to_string(d1_) + "x" +
                             std::to_string(d1_));
        for (int i = 0; i < d1_; ++i)
            for (int j = 0; j < d1_; ++j)
                if (std::abs(B_[k](i, j) + B_[k](j, i)) > 1e-12)
                    throw InputError("bracket not antisymmetric at [k=" + std::to_string(k) + "][i=" +
                                     std::to_string(i) + "][j=" + std::to_string(j) + "]");
    }
    Mat flat(d2_, d1_ * d1_);
    for (int k = 0; k < d2_; ++k)
        for (int i = 0; i < d1_; ++i)
            for (int j = 0; j < d1_; ++j)
                flat(k, i * d1_ + j) = B_[k](i, j);
    if (numerical_rank(flat, 1e-12) < d2_)
        throw InputError("bracket is not onto the second layer");

    // generic rank: Omega is Zariski-open, so a handful of generic directions suffice
    for (const Vec& mu : quasi_random_sphere(d2_, 16, 7))
        generic_rank_ = std::max(generic_rank_, numerical_rank(j_mu(mu), rank_tol_));

    htype_ = true;
    for (int k = 0; k < d2_ && htype_; ++k) {
        Mat Jk = j_mu(Vec::Unit(d2_, k));
        if ((Jk * Jk + Mat::Identity(d1_, d1_)).norm() > 1e-12)
            htype_ = false;
        for (int l = k + 1; l < d2_ && htype_; ++l) {
            Mat Jl = j_mu(Vec::Unit(d2_, l));
            if ((Jk * Jl + Jl * Jk).norm() > 1e-12)
                htype_ = false;
        }
    }
}

Vec Group2Step::bracket(const Vec& x, const Vec& y) const
{
    Vec r(d2_);
    for (int k = 0; k < d2_; ++k)
        r(k) = x.dot(B_[k] * y);
    return r;
}

Mat Group2Step::j_mu(const Vec& mu) const
{
    Mat J = Mat::Zero(d1_, d1_);
    for (int k = 0; k < d2_; ++k)
        if (mu(k) != 0.0)
            J.noalias() += mu(k) * B_[k].transpose();
    return J;
}

Mat Group2Step::abs_j_mu(const Vec& mu) const
{
    Mat J = j_mu(mu);
    Mat B = -(J * J);
    B = 0.5 * (B + B.transpose());
    Eigen::SelfAdjointEigenSolver<Mat> es(B);
    Vec ev = es.eigenvalues();
    // round-off eigenvalues of either sign belong to the kernel
    const double floor = 64.0 * std::numeric_limits<double>::epsilon() * ev.cwiseAbs().maxCoeff();
    for (int i = 0; i < ev.size(); ++i)
        ev(i) = ev(i) > floor ? std::sqrt(ev(i)) : 0.0;
    return es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose();
}

int Group2Step::rank_at(const Vec& mu) const { return numerical_rank(j_mu(mu), rank_tol_); }

bool Group2Step::in_omega(const Vec& mu) const { return mu.norm() > 0.0 && rank_at(mu) == generic_rank_; }

Vec char_poly_coeffs(const Mat& B)
{
    // Newton identities: e_k from power sums, then p_j = e_{n-j}
    const int n = static_cast<int>(B.rows());
    Vec P(n + 1), e(n + 1);
    Mat Bk = Mat::Identity(n, n);
    for (int i = 1; i <= n; ++i) {
        Bk = Bk * B;
        P(i) = Bk.trace();
    }
    e(0) = 1.0;
    for (int k = 1; k <= n; ++k) {
        double s = 0.0;
        for (int i = 1; i <= k; ++i)
            s += ((i % 2) ? 1.0 : -1.0) * e(k - i) * P(i);
        e(k) = s / k;
    }
    Vec p(n + 1);
    for (int j = 0; j <= n; ++j)
        p(j) = e(n - j);
    return p;
}

Mat Group2Step::kernel_projector(const Vec& mu) const
{
    const int r = generic_rank_;
    if (rank_at(mu) < r || mu.norm() == 0.0)
        throw RankDrop("rank of J_mu drops below the generic rank " + std::to_string(r));
    Mat J = j_mu(mu);
    Mat B = -(J * J);
    Vec p = char_poly_coeffs(B);
    // q(lambda) = sum_{j=0}^r (-1)^j p_{j+d1-r} lambda^j, evaluated at B by Horner
    Mat Q = Mat::Zero(d1_, d1_);
    for (int j = r; j >= 0; --j) {
        double c = ((j % 2) ? -1.0 : 1.0) * p(j + d1_ - r);
        Q = Q * B + c * Mat::Identity(d1_, d1_);
    }
    return Q / p(d1_ - r);
}

Mat svd_kernel_projector(const Mat& J, double rel_tol)
{
    Eigen::JacobiSVD<Mat> svd(J, Eigen::ComputeFullV);
    const Vec& s = svd.singularValues();
    const int n = static_cast<int>(J.cols());
    Mat P = Mat::Zero(n, n);
    double smax = s.size() ? s(0) : 0.0;
    for (int i = 0; i < n; ++i) {
        double si = i < s.size() ? s(i) : 0.0;
        if (si <= rel_tol * smax) {
            Vec v = svd.matrixV().col(i);
            P += v * v.transpose();
        }
    }
    return P;
}

Point Group2Step::multiply(const Point& a, const Point& b) const
{
    return {a.x + b.x, a.u + b.u + 0.5 * bracket(a.x, b.x)};
}

Point Group2Step::inverse(const Point& a) const { return {-a.x, -a.u}; }

Point Group2Step::dilate(double r, const Point& a) const { return {r * a.x, r * r * a.u}; }

Covector Group2Step::cotangent_translate(const Point& y, const Covector& c) const
{
    return {c.xi - 0.5 * j_mu(c.mu) * y.x, c.mu};
}

Covector Group2Step::cotangent_translate_inv(const Point& y, const Covector& c) const
{
    return {c.xi + 0.5 * j_mu(c.mu) * y.x, c.mu};
}

GroupClassification classify(const Group2Step& g, int sample_count, std::uint64_t seed, double tol)
{
    GroupClassification gc;
    gc.is_metivier = true;
    gc.is_htype = true;
    gc.min_singular = std::numeric_limits<double>::infinity();
    const int d1 = g.d1();
    std::vector<Vec> mus = quasi_random_sphere(g.d2(), sample_count, seed);
    std::vector<int> ranks;
    ranks.reserve(mus.size());
    for (const Vec& mu : mus) {
        Mat J = g.j_mu(mu);
        Eigen::JacobiSVD<Mat> svd(J);
        const Vec& s = svd.singularValues();
        double thr = tol * std::max(s(0), 1e-300);
        int r = 0;
        for (int i = 0; i < s.size(); ++i)
            if (s(i) > thr)
                ++r;
        ranks.push_back(r);
        gc.max_rank = std::max(gc.max_rank, r);
        double smin = s(s.size() - 1);
        gc.min_singular = std::min(gc.min_singular, smin);
        if (smin <= thr)
            gc.is_metivier = false;
        double defect = (J * J + Mat::Identity(d1, d1)).norm();
        gc.max_htype_defect = std::max(gc.max_htype_defect, defect);
        if (defect > tol * std::max(1.0, J.norm()))
            gc.is_htype = false;
    }
    for (std::size_t i = 0; i < mus.size(); ++i)
        if (ranks[i] < gc.max_rank) {
            gc.omega_witness = mus[i];
            break;
        }
    if (!gc.is_metivier)
        gc.is_htype = false;
    return gc;
}

namespace {

Mat rot90() { return (Mat(2, 2) << 0.0, -1.0, 1.0, 0.0).finished(); }

} // namespace

Group2Step heisenberg()
{
    return Group2Step({rot90().transpose()}, "heisenberg");
}

Group2Step nonisotropic_heisenberg(double l1, double l2)
{
    Mat J = Mat::Zero(4, 4);
    J.block(0, 0, 2, 2) = l1 * rot90();
    J.block(2, 2, 2, 2) = l2 * rot90();
    return Group2Step({Mat(J.transpose())}, "nonisotropic");
}

Group2Step quaternionic_htype()
{
    // left multiplication by i, j, k on H = span(1, i, j, k)
    Mat Li(4, 4), Lj(4, 4), Lk(4, 4);
    Li << 0, -1, 0, 0, 1, 0, 0, 0, 0, 0, 0, -1, 0, 0, 1, 0;
    Lj << 0, 0, -1, 0, 0, 0, 0, 1, 1, 0, 0, 0, 0, -1, 0, 0;
    Lk << 0, 0, 0, -1, 0, 0, -1, 0, 0, 1, 0, 0, 1, 0, 0, 0;
    return Group2Step({Mat(Li.transpose()), Mat(Lj.transpose()), Mat(Lk.transpose())}, "quaternionic");
}

Group2Step free3()
{
    std::vector<Mat> B(3, Mat::Zero(3, 3));
    // [x, y] = x cross y
    for (int k = 0; k < 3; ++k) {
        int i = (k + 1) % 3, j = (k + 2) % 3;
        B[k](i, j) = 1.0;
        B[k](j, i) = -1.0;
    }
    return Group2Step(B, "free3");
}

std::vector<std::string> builtin_names() { return {"heisenberg", "nonisotropic", "quaternionic", "free3"}; }

Group2Step builtin_group(const std::string& name)
{
    if (name == "heisenberg")
        return heisenberg();
    if (name == "nonisotropic")
        return nonisotropic_heisenberg();
    if (name == "quaternionic")
        return quaternionic_htype();
    if (name == "free3")
        return free3();
    throw InputError("unknown builtin group '" + name + "'");
}

Group2Step group_from_json(const std::string& text)
{
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw InputError(std::string("group file is not valid JSON: ") + e.what());
    }
    if (!j.contains("d1") || !j.contains("d2") || !j.contains("bracket"))
        throw InputError("group file needs fields d1, d2, bracket");
    int d1 = j["d1"].get<int>(), d2 = j["d2"].get<int>();
    if (d1 < 1 || d2 < 1)
        throw InputError("d1 and d2 must be positive");
    const auto& b = j["bracket"];
    if (!b.is_array() || static_cast<int>(b.size()) != d2)
        throw InputError("bracket must have d2 = " + std::to_string(d2) + " components");
    std::vector<Mat> B;
    for (int k = 0; k < d2; ++k) {
        if (!b[k].is_array() || static_cast<int>(b[k].size()) != d1)
            throw InputError("bracket[" + std::to_string(k) + "] must have d1 rows");
        Mat M(d1, d1);
        for (int i = 0; i < d1; ++i) {
            if (!b[k][i].is_array() || static_cast<int>(b[k][i].size()) != d1)
                throw InputError("bracket[" + std::to_string(k) + "][" + std::to_string(i) + "] must have d1 entries");
            for (int jj = 0; jj < d1; ++jj)
                M(i, jj) = b[k][i][jj].get<double>();
        }
        B.push_back(M);
    }
    return Group2Step(B, j.value("name", std::string("custom")));
}

std::string group_to_json(const Group2Step& g)
{
    nlohmann::json j;
    j["name"] = g.name();
    j["d1"] = g.d1();
    j["d2"] = g.d2();
    nlohmann::json b = nlohmann::json::array();
    for (const Mat& M : g.bracket_tensor()) {
        nlohmann::json rows = nlohmann::json::array();
        for (int i = 0; i < M.rows(); ++i) {
            nlohmann::json row = nlohmann::json::array();
            for (int jj = 0; jj < M.cols(); ++jj)
                row.push_back(M(i, jj));
            rows.push_back(row);
        }
        b.push_back(rows);
    }
    j["bracket"] = b;
    return j.dump(2);
}

Group2Step load_group(const std::string& name_or_path)
{
    for (const auto& n : builtin_names())
        if (n == name_or_path)
            return builtin_group(n);
    if (!std::filesystem::exists(name_or_path))
        throw InputError("'" + name_or_path + "' is neither a builtin group nor a readable file");
    std::ifstream in(name_or_path);
    std::stringstream ss;
    ss << in.rdbuf();
    return group_from_json(ss.str());
}

} // namespace cfio

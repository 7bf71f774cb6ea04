#ifndef CFIO_CARNOT_HPP
#define CFIO_CARNOT_HPP

#include "cfio/types.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace cfio {

// 2-step Carnot group R^{d1} x R^{d2}, [x,x']_k = sum_ij B[k](i,j) x_i x'_j
class Group2Step {
public:
    Group2Step(std::vector<Mat> bracket, std::string name = "");

    int d1() const { return d1_; }
    int d2() const { return d2_; }
    int dim() const { return d1_ + d2_; }
    int homogeneous_dim() const { return d1_ + 2 * d2_; }
    const std::string& name() const { return name_; }
    const std::vector<Mat>& bracket_tensor() const { return B_; }

    Vec bracket(const Vec& x, const Vec& y) const;

    // <J_mu x, x'> = mu . [x, x']
    Mat j_mu(const Vec& mu) const;
    // (-J_mu^2)^{1/2}
    Mat abs_j_mu(const Vec& mu) const;
    // projection onto Ker J_mu; throws RankDrop off Omega
    Mat kernel_projector(const Vec& mu) const;

    int generic_rank() const { return generic_rank_; }
    int rank_at(const Vec& mu) const;
    bool in_omega(const Vec& mu) const;
    // exact test of J_mu^2 = -|mu|^2 I via the generators
    bool is_htype() const { return htype_; }

    Point multiply(const Point& a, const Point& b) const;
    Point inverse(const Point& a) const;
    Point dilate(double r, const Point& a) const;
    Point identity() const { return {Vec::Zero(d1_), Vec::Zero(d2_)}; }

    // (xi - J_mu y/2, mu) and its inverse
    Covector cotangent_translate(const Point& y, const Covector& c) const;
    Covector cotangent_translate_inv(const Point& y, const Covector& c) const;

    double rank_tol() const { return rank_tol_; }

private:
    std::vector<Mat> B_;
    std::string name_;
    int d1_ = 0, d2_ = 0;
    int generic_rank_ = 0;
    bool htype_ = false;
    double rank_tol_ = 1e-9;
};

struct GroupClassification {
    int max_rank = 0;
    bool is_metivier = false;
    bool is_htype = false;
    std::optional<Vec> omega_witness;
    double min_singular = 0.0; // smallest singular value over the samples
    double max_htype_defect = 0.0;
};

GroupClassification classify(const Group2Step& g, int sample_count, std::uint64_t seed, double tol = 1e-9);

// coefficients p_j of det(B - lambda I) = sum (-1)^j p_j lambda^j, B = -J_mu^2
Vec char_poly_coeffs(const Mat& B);

// null-space projector from the SVD; oracle for kernel_projector
Mat svd_kernel_projector(const Mat& J, double rel_tol);

Group2Step heisenberg();
Group2Step nonisotropic_heisenberg(double l1 = 1.0, double l2 = 2.0);
Group2Step quaternionic_htype();
Group2Step free3();
Group2Step builtin_group(const std::string& name);
std::vector<std::string> builtin_names();

// JSON text with d1, d2, bracket[k][i][j], optional name
Group2Step group_from_json(const std::string& text);
std::string group_to_json(const Group2Step& g);
Group2Step load_group(const std::string& name_or_path);

} // namespace cfio

#endif

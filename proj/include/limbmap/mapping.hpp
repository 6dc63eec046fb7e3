#pragma once

#include <filesystem>
#include <span>
#include <string>

#include <Eigen/Core>

#include "limbmap/feature_extraction.hpp"
#include "limbmap/types.hpp"

namespace limbmap {

/// y = T x + b from upper-limb to lower-limb feature vectors.
struct LinearMap {
    Mat4 T = Mat4::Identity();
    Vec4 b = Vec4::Zero();

    Vec4 apply(const Vec4& x) const { return T * x + b; }
    bool finite() const { return T.allFinite() && b.allFinite(); }
};

/// Per-component mean and population std of apply(x_i) - y_i.
struct ResidualStats {
    Vec4 mean = Vec4::Zero();
    Vec4 std = Vec4::Zero();
    std::size_t count = 0;
};

struct Identification {
    LinearMap map;
    ResidualStats residuals;
    double condition = 0.0;  // of the design matrix
};

inline constexpr double kRankDeficientCondition = 1e8;

/// Rows (x_i1, x_i2, x_i3, x_i4, 1).
Eigen::MatrixXd assemble_design(std::span<const UpperFeature> X);

/// Least-squares estimate of every row t_j and offset b_j, solved by a
/// Householder QR of the design matrix.
Identification identify(std::span<const UpperFeature> X, std::span<const LowerFeature> Y);

Vec4 apply_map(const LinearMap& map, const UpperFeature& x);

ResidualStats residual_stats(const LinearMap& map, std::span<const UpperFeature> X,
                             std::span<const LowerFeature> Y);

/// Spectral norm of T; Lipschitz constant of the map.
double operator_norm(const Mat4& T);

/// Table-style text: a mean row and a std row over y1..y4.
std::string format_residual_table(const ResidualStats& stats);

/// `T` line, four rows of four numbers, `b` line, one row of four numbers.
std::string format_map(const LinearMap& map);
LinearMap parse_map(const std::string& text);
void save_map(const std::filesystem::path& path, const LinearMap& map);
LinearMap load_map(const std::filesystem::path& path);

}  // namespace limbmap

#include "limbmap/mapping.hpp"

#include <cmath>
#include <cstdio>

#include <Eigen/QR>
#include <Eigen/SVD>

#include "limbmap/error.hpp"
#include "text_util.hpp"

namespace limbmap {

namespace {

void check_aligned(std::span<const UpperFeature> X, std::span<const LowerFeature> Y) {
    if (X.size() != Y.size()) {
        throw Error(ErrorCode::InvalidParams, "feature sets differ in size");
    }
    for (std::size_t i = 0; i < X.size(); ++i) {
        if (X[i].cycle_index != Y[i].cycle_index) {
            throw Error(ErrorCode::InvalidParams,
                        "pair " + std::to_string(i) + " is not aligned by cycle index");
        }
    }
}

}  // namespace

Eigen::MatrixXd assemble_design(std::span<const UpperFeature> X) {
    Eigen::MatrixXd phi(static_cast<Eigen::Index>(X.size()), 5);
    for (std::size_t i = 0; i < X.size(); ++i) {
        const auto r = static_cast<Eigen::Index>(i);
        phi.block<1, 4>(r, 0) = X[i].x.transpose();
        phi(r, 4) = 1.0;
    }
    return phi;
}

Identification identify(std::span<const UpperFeature> X, std::span<const LowerFeature> Y) {
    check_aligned(X, Y);
    if (X.size() < 5) {
        throw Error(ErrorCode::TooFewSamples,
                    "need at least 5 cycles, got " + std::to_string(X.size()));
    }
    const Eigen::MatrixXd phi = assemble_design(X);
    Eigen::MatrixXd targets(phi.rows(), 4);
    for (std::size_t i = 0; i < Y.size(); ++i) targets.row(static_cast<Eigen::Index>(i)) = Y[i].y.transpose();

    const Eigen::HouseholderQR<Eigen::MatrixXd> qr(phi);
    const Eigen::Matrix<double, 5, 5> R =
        qr.matrixQR().topRows<5>().triangularView<Eigen::Upper>();
    const Eigen::JacobiSVD<Eigen::Matrix<double, 5, 5>> svd(R);
    const auto& sv = svd.singularValues();
    const double condition = sv(4) > 0.0 ? sv(0) / sv(4) : INFINITY;
    if (!(condition <= kRankDeficientCondition)) {
        throw Error(ErrorCode::RankDeficient, "design matrix condition number " + std::to_string(condition));
    }

    // column j of the solution holds (t_j^T, b_j)
    const Eigen::Matrix<double, 5, 4> theta = qr.solve(targets);
    Identification out;
    out.map.T = theta.topRows<4>().transpose();
    out.map.b = theta.row(4).transpose();
    out.condition = condition;
    out.residuals = residual_stats(out.map, X, Y);
    return out;
}

Vec4 apply_map(const LinearMap& map, const UpperFeature& x) { return map.apply(x.x); }

ResidualStats residual_stats(const LinearMap& map, std::span<const UpperFeature> X,
                             std::span<const LowerFeature> Y) {
    check_aligned(X, Y);
    if (X.size() < 2) throw Error(ErrorCode::TooFewSamples, "residual statistics need >= 2 pairs");
    const auto m = static_cast<double>(X.size());
    Vec4 sum = Vec4::Zero();
    for (std::size_t i = 0; i < X.size(); ++i) sum += map.apply(X[i].x) - Y[i].y;
    ResidualStats s;
    s.count = X.size();
    s.mean = sum / m;
    Vec4 ss = Vec4::Zero();
    for (std::size_t i = 0; i < X.size(); ++i) {
        const Vec4 d = map.apply(X[i].x) - Y[i].y - s.mean;
        ss += d.cwiseProduct(d);
    }
    s.std = (ss / m).cwiseSqrt();
    return s;
}

double operator_norm(const Mat4& T) {
    const Eigen::JacobiSVD<Mat4> svd(T);
    return svd.singularValues()(0);
}

std::string format_residual_table(const ResidualStats& s) {
    std::string out;
    char line[160];
    std::snprintf(line, sizeof line, "%-14s %12s %12s %12s %12s\n", "Model error", "y1", "y2", "y3", "y4");
    out += line;
    std::snprintf(line, sizeof line, "%-14s %12.4g %12.4g %12.4g %12.4g\n", "Mean(degree)", s.mean[0],
                  s.mean[1], s.mean[2], s.mean[3]);
    out += line;
    std::snprintf(line, sizeof line, "%-14s %12.4f %12.4f %12.4f %12.4f\n", "Std(degree)", s.std[0],
                  s.std[1], s.std[2], s.std[3]);
    out += line;
    out += "(population std over m = " + std::to_string(s.count) + " cycles)\n";
    return out;
}

std::string format_map(const LinearMap& map) {
    std::string out = "T\n";
    for (int r = 0; r < 4; ++r) {
        for (int c = 0; c < 4; ++c) {
            if (c) out += ' ';
            detail::append_double(out, map.T(r, c));
        }
        out += '\n';
    }
    out += "b\n";
    for (int r = 0; r < 4; ++r) {
        if (r) out += ' ';
        detail::append_double(out, map.b[r]);
    }
    out += '\n';
    return out;
}

LinearMap parse_map(const std::string& text) {
    const auto lines = detail::split_lines(text);
    if (lines.size() != 7 || detail::trim(lines[0]) != "T" || detail::trim(lines[5]) != "b") {
        throw Error(ErrorCode::BadModelFile, "map file must be 'T', 4 rows, 'b', 1 row");
    }
    auto row = [](std::string_view line) {
        const auto f = detail::split_whitespace(line);
        if (f.size() != 4) throw Error(ErrorCode::BadModelFile, "map row needs 4 numbers");
        Vec4 v;
        for (int i = 0; i < 4; ++i) {
            auto d = detail::parse_double(f[static_cast<std::size_t>(i)]);
            if (!d || !std::isfinite(*d)) throw Error(ErrorCode::BadModelFile, "map entry not finite");
            v[i] = *d;
        }
        return v;
    };
    LinearMap map;
    for (int r = 0; r < 4; ++r) map.T.row(r) = row(lines[static_cast<std::size_t>(r) + 1]).transpose();
    map.b = row(lines[6]);
    return map;
}

void save_map(const std::filesystem::path& path, const LinearMap& map) {
    detail::write_file_atomic(path, format_map(map));
}

LinearMap load_map(const std::filesystem::path& path) { return parse_map(detail::read_file(path)); }

}  // namespace limbmap

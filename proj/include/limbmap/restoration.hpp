#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "limbmap/feature_extraction.hpp"
#include "limbmap/gait_data.hpp"
#include "limbmap/types.hpp"

namespace limbmap {

// ---------------------------------------------------------------------------
// Clustering

/// How upper and lower feature sets are merged before clustering.
enum class ClusterSpace {
    Paired,  // one 8-d point (x_i; y_i) per cycle
    Pooled,  // the 4-d x_i and y_i as separate points
};

struct ClusterConfig {
    std::size_t k = 9;
    std::uint64_t seed = 0;
    std::size_t max_iterations = 300;
    std::size_t max_restarts = 10;
    ClusterSpace space = ClusterSpace::Paired;
};

struct KMeansResult {
    Eigen::MatrixXd centroids;         // k x d
    std::vector<std::size_t> labels;   // one per point
    std::vector<double> wcss_history;  // after every assignment step
    std::size_t iterations = 0;
    bool converged = false;
};

/// Lloyd iterations from a greedy farthest-point start whose first centre
/// is drawn from `seed`. Fails with Error(EmptyCluster) if a cluster loses
/// all members.
KMeansResult kmeans(const Eigen::MatrixXd& points, std::size_t k, std::uint64_t seed,
                    std::size_t max_iterations = 300);

struct ClusterModel {
    std::size_t k = 0;
    ClusterSpace space = ClusterSpace::Paired;
    Eigen::MatrixXd centroids;
    /// cycle index -> cluster id (the cluster of y_i in pooled mode)
    std::map<std::size_t, std::size_t> assignments;
    std::vector<double> wcss_history;
    std::uint64_t seed = 0;  // seed of the successful attempt
    std::size_t iterations = 0;

    std::vector<std::size_t> cluster_sizes() const;
};

ClusterModel cluster_features(std::span<const UpperFeature> X, std::span<const LowerFeature> Y,
                              const ClusterConfig& config = {});

// ---------------------------------------------------------------------------
// Periodic curve fit

/// f(phi) = c0 + sum_h c_{2h-1} cos(2 pi h phi) + c_{2h} sin(2 pi h phi)
class FourierSeries {
public:
    FourierSeries() = default;
    explicit FourierSeries(std::vector<double> coefficients);

    double operator()(double phase) const;
    std::size_t order() const { return (coeffs_.size() - 1) / 2; }
    const std::vector<double>& coefficients() const { return coeffs_; }

private:
    std::vector<double> coeffs_{0.0};
};

struct FourierFit {
    FourierSeries series;
    double rms = 0.0;  // residual on the fitting grid
};

/// Least squares on phases i / N. Throws Error(OrderTooHigh) if 2*order+1 > N.
FourierFit fit_reference_curve(std::span<const double> curve, std::size_t order);

// ---------------------------------------------------------------------------
// References and restoration

struct LowerCurves {
    std::vector<double> hip;
    std::vector<double> knee;
};

/// Representative clusters before the curve fit.
struct RawReferences {
    std::array<Vec4, 4> vectors;
    std::array<LowerCurves, 4> curves;
    std::array<std::size_t, 4> cluster_ids{};
    std::array<std::size_t, 4> sizes{};
};

inline constexpr double kSingularReferenceCondition = 1e12;
inline constexpr double kIllConditionedReference = 1e8;

/// Four reference lower-limb vectors and their periodic hip/knee curves.
class ReferenceSet {
public:
    /// Throws Error(SingularReferenceMatrix) when [y1 y2 y3 y4] is singular.
    ReferenceSet(std::array<Vec4, 4> vectors, std::array<FourierSeries, 4> hip,
                 std::array<FourierSeries, 4> knee);

    const std::array<Vec4, 4>& vectors() const { return vectors_; }
    const FourierSeries& hip(std::size_t k) const { return hip_[k]; }
    const FourierSeries& knee(std::size_t k) const { return knee_[k]; }
    std::size_t fit_order() const { return hip_[0].order(); }
    /// Columns are the reference vectors.
    const Mat4& matrix() const { return matrix_; }
    double condition() const { return condition_; }

    /// Largest grid RMS among the fitted curves; 0 when loaded from file.
    double fit_rms() const { return fit_rms_; }
    void set_fit_rms(double rms) { fit_rms_ = rms; }

private:
    std::array<Vec4, 4> vectors_;
    std::array<FourierSeries, 4> hip_;
    std::array<FourierSeries, 4> knee_;
    Mat4 matrix_;
    double condition_ = 0.0;
    double fit_rms_ = 0.0;
};

double reference_condition(const std::array<Vec4, 4>& vectors);

/// The four clusters with most (lower-limb) members, ties to the lower id.
RawReferences select_representative(const ClusterModel& model, std::span<const LowerFeature> Y,
                                    std::span<const GaitCycle> cycles);

ReferenceSet fit_references(const RawReferences& raw, std::size_t fit_order);

struct RestorationWeights {
    Vec4 a = Vec4::Zero();
    double condition = 0.0;
    bool ill_conditioned = false;
};

/// Solves y' = sum_k a_k ybar_k.
RestorationWeights solve_weights(const Vec4& mapped, const ReferenceSet& refs);

/// sum_k a_k (f_hip_k(phase), f_knee_k(phase))
std::pair<double, double> restore_at(const Vec4& a, const ReferenceSet& refs, double phase);

LowerCurves restore_curve(const RestorationWeights& weights, const ReferenceSet& refs,
                          std::size_t n);

/// Blocks of `ybar <4>`, `fourier_hip <2*order+1>`, `fourier_knee <2*order+1>`.
std::string format_references(const ReferenceSet& refs);
ReferenceSet parse_references(const std::string& text);
void save_references(const std::filesystem::path& path, const ReferenceSet& refs);
ReferenceSet load_references(const std::filesystem::path& path);

}  // namespace limbmap

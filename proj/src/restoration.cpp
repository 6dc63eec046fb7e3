#include "limbmap/restoration.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <random>

#include <Eigen/LU>
#include <Eigen/QR>
#include <Eigen/SVD>

#include "limbmap/error.hpp"
#include "text_util.hpp"

namespace limbmap {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;
}

// ---------------------------------------------------------------------------
// KMeans

KMeansResult kmeans(const Eigen::MatrixXd& points, std::size_t k, std::uint64_t seed,
                    std::size_t max_iterations) {
    const auto n = static_cast<std::size_t>(points.rows());
    if (k < 1) throw Error(ErrorCode::InvalidParams, "k must be >= 1");
    if (n < k) throw Error(ErrorCode::TooFewSamples, "fewer points than clusters");
    const auto d = points.cols();
    const auto K = static_cast<Eigen::Index>(k);

    std::seed_seq seq{seed};
    std::mt19937_64 rng(seq);
    std::uniform_int_distribution<std::size_t> first(0, n - 1);

    KMeansResult res;
    res.centroids.resize(K, d);
    res.centroids.row(0) = points.row(static_cast<Eigen::Index>(first(rng)));
    std::vector<double> nearest(n, std::numeric_limits<double>::infinity());
    for (Eigen::Index c = 1; c < K; ++c) {
        std::size_t best = 0;
        double best_dist = -1.0;
        for (std::size_t i = 0; i < n; ++i) {
            const auto r = static_cast<Eigen::Index>(i);
            nearest[i] = std::min(nearest[i], (points.row(r) - res.centroids.row(c - 1)).squaredNorm());
            if (nearest[i] > best_dist) {
                best_dist = nearest[i];
                best = i;
            }
        }
        res.centroids.row(c) = points.row(static_cast<Eigen::Index>(best));
    }

    res.labels.assign(n, 0);
    std::vector<std::size_t> counts(k);
    for (std::size_t it = 0; it < max_iterations; ++it) {
        bool changed = it == 0;
        double wcss = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const auto r = static_cast<Eigen::Index>(i);
            std::size_t best = 0;
            double best_dist = std::numeric_limits<double>::infinity();
            for (Eigen::Index c = 0; c < K; ++c) {
                const double dist = (points.row(r) - res.centroids.row(c)).squaredNorm();
                if (dist < best_dist) {
                    best_dist = dist;
                    best = static_cast<std::size_t>(c);
                }
            }
            if (res.labels[i] != best) changed = true;
            res.labels[i] = best;
            wcss += best_dist;
        }
        res.wcss_history.push_back(wcss);
        res.iterations = it + 1;
        if (!changed) {
            res.converged = true;
            break;
        }

        std::fill(counts.begin(), counts.end(), 0);
        Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(K, d);
        for (std::size_t i = 0; i < n; ++i) {
            sums.row(static_cast<Eigen::Index>(res.labels[i])) += points.row(static_cast<Eigen::Index>(i));
            ++counts[res.labels[i]];
        }
        for (std::size_t c = 0; c < k; ++c) {
            if (counts[c] == 0) {
                throw Error(ErrorCode::EmptyCluster, "cluster " + std::to_string(c) + " is empty");
            }
            const auto row = static_cast<Eigen::Index>(c);
            res.centroids.row(row) = sums.row(row) / static_cast<double>(counts[c]);
        }
    }
    return res;
}

std::vector<std::size_t> ClusterModel::cluster_sizes() const {
    std::vector<std::size_t> sizes(k, 0);
    for (const auto& [cycle, id] : assignments) ++sizes[id];
    return sizes;
}

ClusterModel cluster_features(std::span<const UpperFeature> X, std::span<const LowerFeature> Y,
                              const ClusterConfig& cfg) {
    if (X.size() != Y.size()) throw Error(ErrorCode::InvalidParams, "feature sets differ in size");
    for (std::size_t i = 0; i < X.size(); ++i) {
        if (X[i].cycle_index != Y[i].cycle_index) {
            throw Error(ErrorCode::InvalidParams, "feature pairs are not aligned");
        }
    }
    if (cfg.k < 1) throw Error(ErrorCode::InvalidParams, "k must be >= 1");
    if (X.size() < cfg.k) {
        throw Error(ErrorCode::TooFewSamples, std::to_string(X.size()) + " cycles for k = " +
                                                  std::to_string(cfg.k));
    }

    const auto m = static_cast<Eigen::Index>(X.size());
    Eigen::MatrixXd points;
    if (cfg.space == ClusterSpace::Paired) {
        points.resize(m, 8);
        for (Eigen::Index i = 0; i < m; ++i) {
            points.block<1, 4>(i, 0) = X[static_cast<std::size_t>(i)].x.transpose();
            points.block<1, 4>(i, 4) = Y[static_cast<std::size_t>(i)].y.transpose();
        }
    } else {
        points.resize(2 * m, 4);
        for (Eigen::Index i = 0; i < m; ++i) {
            points.row(i) = X[static_cast<std::size_t>(i)].x.transpose();
            points.row(m + i) = Y[static_cast<std::size_t>(i)].y.transpose();
        }
    }

    for (std::size_t attempt = 0; attempt <= cfg.max_restarts; ++attempt) {
        const std::uint64_t seed = cfg.seed + attempt;
        try {
            KMeansResult r = kmeans(points, cfg.k, seed, cfg.max_iterations);
            ClusterModel model;
            model.k = cfg.k;
            model.space = cfg.space;
            model.centroids = std::move(r.centroids);
            model.wcss_history = std::move(r.wcss_history);
            model.seed = seed;
            model.iterations = r.iterations;
            const std::size_t offset = cfg.space == ClusterSpace::Paired ? 0 : X.size();
            for (std::size_t i = 0; i < X.size(); ++i) {
                model.assignments[Y[i].cycle_index] = r.labels[offset + i];
            }
            return model;
        } catch (const Error& e) {
            if (e.code() != ErrorCode::EmptyCluster) throw;
        }
    }
    throw Error(ErrorCode::EmptyCluster,
                "still empty after " + std::to_string(cfg.max_restarts) + " restarts");
}

// ---------------------------------------------------------------------------
// Fourier

FourierSeries::FourierSeries(std::vector<double> coefficients) : coeffs_(std::move(coefficients)) {
    if (coeffs_.empty() || coeffs_.size() % 2 == 0) {
        throw Error(ErrorCode::BadModelFile, "Fourier series needs 2*order+1 coefficients");
    }
}

double FourierSeries::operator()(double phase) const {
    double v = coeffs_[0];
    for (std::size_t h = 1; 2 * h < coeffs_.size(); ++h) {
        const double w = kTwoPi * static_cast<double>(h) * phase;
        v += coeffs_[2 * h - 1] * std::cos(w) + coeffs_[2 * h] * std::sin(w);
    }
    return v;
}

FourierFit fit_reference_curve(std::span<const double> curve, std::size_t order) {
    const std::size_t n = curve.size();
    const std::size_t p = 2 * order + 1;
    if (p > n) {
        throw Error(ErrorCode::OrderTooHigh, "order " + std::to_string(order) + " needs " +
                                                 std::to_string(p) + " points, have " +
                                                 std::to_string(n));
    }
    const auto N = static_cast<Eigen::Index>(n);
    const auto P = static_cast<Eigen::Index>(p);
    Eigen::MatrixXd basis(N, P);
    Eigen::VectorXd y(N);
    for (Eigen::Index i = 0; i < N; ++i) {
        const double phase = static_cast<double>(i) / static_cast<double>(n);
        basis(i, 0) = 1.0;
        for (Eigen::Index h = 1; 2 * h < P; ++h) {
            const double w = kTwoPi * static_cast<double>(h) * phase;
            basis(i, 2 * h - 1) = std::cos(w);
            basis(i, 2 * h) = std::sin(w);
        }
        y(i) = curve[static_cast<std::size_t>(i)];
    }
    const Eigen::VectorXd c = basis.householderQr().solve(y);
    const Eigen::VectorXd resid = basis * c - y;
    FourierFit fit{FourierSeries(std::vector<double>(c.data(), c.data() + c.size())),
                   std::sqrt(resid.squaredNorm() / static_cast<double>(n))};
    return fit;
}

// ---------------------------------------------------------------------------
// References

double reference_condition(const std::array<Vec4, 4>& vectors) {
    Mat4 m;
    for (int k = 0; k < 4; ++k) m.col(k) = vectors[static_cast<std::size_t>(k)];
    const Eigen::JacobiSVD<Mat4> svd(m);
    const auto& sv = svd.singularValues();
    return sv(3) > 0.0 ? sv(0) / sv(3) : std::numeric_limits<double>::infinity();
}

ReferenceSet::ReferenceSet(std::array<Vec4, 4> vectors, std::array<FourierSeries, 4> hip,
                           std::array<FourierSeries, 4> knee)
    : vectors_(std::move(vectors)), hip_(std::move(hip)), knee_(std::move(knee)) {
    for (int k = 0; k < 4; ++k) matrix_.col(k) = vectors_[static_cast<std::size_t>(k)];
    if (!matrix_.allFinite()) throw Error(ErrorCode::BadModelFile, "reference vector not finite");
    const std::size_t order = hip_[0].order();
    for (std::size_t k = 0; k < 4; ++k) {
        if (hip_[k].order() != order || knee_[k].order() != order) {
            throw Error(ErrorCode::BadModelFile, "reference curves disagree on fit order");
        }
    }
    condition_ = reference_condition(vectors_);
    if (!(condition_ < kSingularReferenceCondition)) {
        throw Error(ErrorCode::SingularReferenceMatrix,
                    "reference matrix condition number " + std::to_string(condition_));
    }
}

RawReferences select_representative(const ClusterModel& model, std::span<const LowerFeature> Y,
                                    std::span<const GaitCycle> cycles) {
    const std::vector<std::size_t> sizes = model.cluster_sizes();
    std::vector<std::size_t> order(sizes.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return sizes[a] > sizes[b]; });
    const auto non_empty = std::count_if(sizes.begin(), sizes.end(), [](std::size_t s) { return s > 0; });
    if (non_empty < 4) {
        throw Error(ErrorCode::TooFewClusters,
                    std::to_string(non_empty) + " non-empty clusters, need 4");
    }

    std::map<std::size_t, const GaitCycle*> by_index;
    for (const GaitCycle& c : cycles) by_index[c.index] = &c;

    RawReferences raw;
    for (std::size_t r = 0; r < 4; ++r) {
        const std::size_t id = order[r];
        raw.cluster_ids[r] = id;
        Vec4 sum = Vec4::Zero();
        std::size_t count = 0;
        std::vector<double> hip, knee;
        for (const LowerFeature& f : Y) {
            auto it = model.assignments.find(f.cycle_index);
            if (it == model.assignments.end() || it->second != id) continue;
            auto cyc = by_index.find(f.cycle_index);
            if (cyc == by_index.end()) {
                throw Error(ErrorCode::InvalidParams,
                            "no cycle with index " + std::to_string(f.cycle_index));
            }
            const auto& h = cyc->second->curve(Joint::Hip);
            const auto& k = cyc->second->curve(Joint::Knee);
            if (hip.empty()) {
                hip.assign(h.size(), 0.0);
                knee.assign(k.size(), 0.0);
            }
            if (h.size() != hip.size()) throw Error(ErrorCode::InvalidParams, "cycle grids differ");
            for (std::size_t i = 0; i < h.size(); ++i) {
                hip[i] += h[i];
                knee[i] += k[i];
            }
            sum += f.y;
            ++count;
        }
        if (count == 0) throw Error(ErrorCode::TooFewClusters, "representative cluster has no cycles");
        for (double& v : hip) v /= static_cast<double>(count);
        for (double& v : knee) v /= static_cast<double>(count);
        raw.vectors[r] = sum / static_cast<double>(count);
        raw.curves[r] = LowerCurves{std::move(hip), std::move(knee)};
        raw.sizes[r] = count;
    }
    const double cond = reference_condition(raw.vectors);
    if (!(cond < kSingularReferenceCondition)) {
        throw Error(ErrorCode::SingularReferenceMatrix,
                    "reference matrix condition number " + std::to_string(cond));
    }
    return raw;
}

ReferenceSet fit_references(const RawReferences& raw, std::size_t fit_order) {
    std::array<FourierSeries, 4> hip, knee;
    double rms = 0.0;
    for (std::size_t k = 0; k < 4; ++k) {
        FourierFit h = fit_reference_curve(raw.curves[k].hip, fit_order);
        FourierFit n = fit_reference_curve(raw.curves[k].knee, fit_order);
        rms = std::max({rms, h.rms, n.rms});
        hip[k] = std::move(h.series);
        knee[k] = std::move(n.series);
    }
    ReferenceSet refs(raw.vectors, std::move(hip), std::move(knee));
    refs.set_fit_rms(rms);
    return refs;
}

RestorationWeights solve_weights(const Vec4& mapped, const ReferenceSet& refs) {
    const double cond = refs.condition();
    if (!(cond < kSingularReferenceCondition)) {
        throw Error(ErrorCode::SingularReferenceMatrix, "reference matrix is singular");
    }
    RestorationWeights w;
    w.a = refs.matrix().fullPivLu().solve(mapped);
    w.condition = cond;
    w.ill_conditioned = cond > kIllConditionedReference;
    return w;
}

std::pair<double, double> restore_at(const Vec4& a, const ReferenceSet& refs, double phase) {
    double hip = 0.0, knee = 0.0;
    for (std::size_t k = 0; k < 4; ++k) {
        const double w = a[static_cast<Eigen::Index>(k)];
        hip += w * refs.hip(k)(phase);
        knee += w * refs.knee(k)(phase);
    }
    return {hip, knee};
}

LowerCurves restore_curve(const RestorationWeights& weights, const ReferenceSet& refs,
                          std::size_t n) {
    LowerCurves out{std::vector<double>(n), std::vector<double>(n)};
    for (std::size_t i = 0; i < n; ++i) {
        const auto [h, k] =
            restore_at(weights.a, refs, static_cast<double>(i) / static_cast<double>(n));
        out.hip[i] = h;
        out.knee[i] = k;
    }
    return out;
}

// ---------------------------------------------------------------------------

std::string format_references(const ReferenceSet& refs) {
    std::string out;
    auto emit = [&out](std::string_view key, std::span<const double> values) {
        out += key;
        for (double v : values) {
            out += ' ';
            detail::append_double(out, v);
        }
        out += '\n';
    };
    for (std::size_t k = 0; k < 4; ++k) {
        const Vec4& y = refs.vectors()[k];
        emit("ybar", std::span<const double>(y.data(), 4));
        emit("fourier_hip", refs.hip(k).coefficients());
        emit("fourier_knee", refs.knee(k).coefficients());
    }
    return out;
}

ReferenceSet parse_references(const std::string& text) {
    std::vector<std::string_view> lines;
    for (std::string_view l : detail::split_lines(text)) {
        if (!detail::trim(l).empty()) lines.push_back(l);
    }
    if (lines.size() != 12) throw Error(ErrorCode::BadModelFile, "reference file needs 4 blocks of 3 lines");
    auto numbers = [](std::string_view line, std::string_view key) {
        const auto f = detail::split_whitespace(line);
        if (f.empty() || f[0] != key) {
            throw Error(ErrorCode::BadModelFile, "expected '" + std::string(key) + "' line");
        }
        std::vector<double> v;
        for (std::size_t i = 1; i < f.size(); ++i) {
            auto d = detail::parse_double(f[i]);
            if (!d || !std::isfinite(*d)) throw Error(ErrorCode::BadModelFile, "reference value");
            v.push_back(*d);
        }
        return v;
    };
    std::array<Vec4, 4> vectors;
    std::array<FourierSeries, 4> hip, knee;
    for (std::size_t k = 0; k < 4; ++k) {
        const auto y = numbers(lines[3 * k], "ybar");
        if (y.size() != 4) throw Error(ErrorCode::BadModelFile, "ybar needs 4 numbers");
        vectors[k] = Vec4(y[0], y[1], y[2], y[3]);
        hip[k] = FourierSeries(numbers(lines[3 * k + 1], "fourier_hip"));
        knee[k] = FourierSeries(numbers(lines[3 * k + 2], "fourier_knee"));
    }
    return ReferenceSet(vectors, std::move(hip), std::move(knee));
}

void save_references(const std::filesystem::path& path, const ReferenceSet& refs) {
    detail::write_file_atomic(path, format_references(refs));
}

ReferenceSet load_references(const std::filesystem::path& path) {
    return parse_references(detail::read_file(path));
}

}  // namespace limbmap

#include "limbmap/feature_extraction.hpp"

#include <algorithm>
#include <cmath>

#include "limbmap/error.hpp"
#include "signal_util.hpp"
#include "text_util.hpp"

namespace limbmap {

std::vector<double> estimate_change_rate(std::span<const double> curve, double sample_rate) {
    const std::size_t n = curve.size();
    if (n < 3) throw Error(ErrorCode::TooShort, "change rate needs at least 3 samples");
    std::vector<double> rate(n);
    rate[0] = (curve[1] - curve[0]) * sample_rate;
    rate[n - 1] = (curve[n - 1] - curve[n - 2]) * sample_rate;
    for (std::size_t i = 1; i + 1 < n; ++i) {
        rate[i] = 0.5 * (curve[i + 1] - curve[i - 1]) * sample_rate;
    }
    return rate;
}

RateLimits fit_rate_limits(std::span<const std::vector<double>> rates, double q_low,
                           double q_high) {
    if (!(q_low >= 0.0 && q_low < q_high && q_high <= 100.0)) {
        throw Error(ErrorCode::InvalidParams, "percentiles must satisfy 0 <= q_low < q_high <= 100");
    }
    std::vector<double> pooled;
    for (const auto& r : rates) {
        for (double v : r) pooled.push_back(std::abs(v));
    }
    if (pooled.empty()) throw Error(ErrorCode::EmptyInput, "no rate samples");
    auto [mn, mx] = std::minmax_element(pooled.begin(), pooled.end());
    if (*mx - *mn <= 0.0) throw Error(ErrorCode::DegenerateDistribution, "all rates are equal");
    RateLimits limits{detail::percentile(pooled, q_low), detail::percentile(pooled, q_high)};
    if (!(limits.lower_rate < limits.upper_rate)) {
        throw Error(ErrorCode::DegenerateDistribution, "percentile band is empty");
    }
    return limits;
}

void ChangeRateBand::validate() const {
    for (Joint j : kAllJoints) {
        const JointBand& b = joints[index_of(j)];
        const std::string name(joint_name(j));
        if (!(b.lower_rate >= 0.0 && b.lower_rate < b.upper_rate) || !std::isfinite(b.upper_rate)) {
            throw Error(ErrorCode::BadModelFile, name + ": need 0 <= lower_rate < upper_rate");
        }
        for (const PhaseWindow& w : {b.trough, b.peak}) {
            if (!(w.lo >= 0.0 && w.lo <= w.hi && w.hi <= 1.0)) {
                throw Error(ErrorCode::BadModelFile, name + ": phase window outside [0, 1]");
            }
        }
    }
}

namespace {

PhaseWindow window_from(const std::vector<double>& phases, const BandConfig& cfg) {
    if (phases.empty()) return {};
    const double m = detail::mean(phases);
    const double half = std::max(cfg.window_sigmas * detail::stddev(phases), cfg.min_window_half_width);
    return {std::max(0.0, m - half), std::min(1.0, m + half)};
}

double cubic_through(const std::array<double, 4>& xs, const std::array<double, 4>& ys, double x) {
    double acc = 0.0;
    for (int i = 0; i < 4; ++i) {
        double w = 1.0;
        for (int k = 0; k < 4; ++k) {
            if (k != i) w *= (x - xs[k]) / (xs[i] - xs[k]);
        }
        acc += w * ys[i];
    }
    return acc;
}

}  // namespace

ChangeRateBand fit_band(std::span<const GaitCycle> cycles, const BandConfig& cfg) {
    if (cycles.empty()) throw Error(ErrorCode::EmptyInput, "no cycles to fit a band on");
    ChangeRateBand band;
    for (Joint j : kAllJoints) {
        std::vector<std::vector<double>> rates;
        rates.reserve(cycles.size());
        for (const GaitCycle& c : cycles) {
            rates.push_back(estimate_change_rate(c.curve(j), c.grid_rate()));
        }
        const RateLimits limits = fit_rate_limits(rates, cfg.q_low, cfg.q_high);
        JointBand& jb = band[j];
        jb.lower_rate = limits.lower_rate;
        jb.upper_rate = limits.upper_rate;

        std::vector<double> trough_phases, peak_phases;
        JointBand open = jb;
        open.trough = open.peak = PhaseWindow{};
        for (const GaitCycle& c : cycles) {
            try {
                const TroughPeak tp = extract_extrema(c.curve(j), open, c.grid_rate());
                trough_phases.push_back(tp.trough.phase);
                peak_phases.push_back(tp.peak.phase);
            } catch (const Error& e) {
                if (e.code() != ErrorCode::FeatureIncomplete) throw;
            }
        }
        jb.trough = window_from(trough_phases, cfg);
        jb.peak = window_from(peak_phases, cfg);
    }
    return band;
}

std::vector<double> suppress_disturbances(std::span<const double> curve, double upper_rate,
                                          double sample_rate) {
    std::vector<double> out(curve.begin(), curve.end());
    const std::size_t n = curve.size();
    if (n < 5) return out;
    const std::vector<double> rate = estimate_change_rate(curve, sample_rate);
    std::vector<bool> flagged(n);
    for (std::size_t i = 0; i < n; ++i) flagged[i] = std::abs(rate[i]) > upper_rate;

    std::size_t i = 0;
    while (i < n) {
        if (!flagged[i]) {
            ++i;
            continue;
        }
        // A spike at k flags its neighbours k-1 and k+1 under centered
        // differences, so runs separated by a single clean sample merge.
        std::size_t s = i, e = i;
        while (e + 1 < n && (flagged[e + 1] || (e + 2 < n && flagged[e + 2]))) {
            e += flagged[e + 1] ? 1 : 2;
        }
        i = e + 1;
        const std::size_t before = s, after = n - 1 - e;
        if (e - s < 2 || before + after < 4) continue;
        // Only a jump out and back again is a disturbance; a steep but
        // monotone stretch is genuine motion and stays untouched.
        bool rising = false, falling = false;
        for (std::size_t k = s; k <= e; ++k) {
            if (!flagged[k]) continue;
            rising = rising || rate[k] > 0.0;
            falling = falling || rate[k] < 0.0;
        }
        if (!(rising && falling)) continue;
        // The run's own end samples can carry part of a spike that resampling
        // split across two grid points, so they are replaced too. Two clean
        // anchors per side, borrowing from the other side near a curve end.
        const std::size_t right = std::min(after, 4 - std::min<std::size_t>(before, 2));
        const std::size_t left = 4 - right;
        std::array<double, 4> xs{}, ys{};
        for (std::size_t a = 0; a < left; ++a) xs[a] = double(s - left + a), ys[a] = curve[s - left + a];
        for (std::size_t a = 0; a < right; ++a) xs[left + a] = double(e + 1 + a), ys[left + a] = curve[e + 1 + a];
        for (std::size_t k = s; k <= e; ++k) out[k] = cubic_through(xs, ys, double(k));
    }
    return out;
}

std::vector<Extremum> surviving_extrema(std::span<const double> curve, const JointBand& band,
                                        double sample_rate) {
    const std::size_t n = curve.size();
    if (n < 3) throw Error(ErrorCode::TooShort, "curve needs at least 3 samples");
    const std::vector<double> v = suppress_disturbances(curve, band.upper_rate, sample_rate);
    const std::vector<double> rate = estimate_change_rate(v, sample_rate);

    auto flank = [&](std::size_t a, std::size_t b) {
        double m = 0.0;
        for (std::size_t k = a; k <= b; ++k) m = std::max(m, std::abs(rate[k]));
        return m;
    };

    std::vector<Extremum> found;
    for (std::size_t k = 1; k + 1 < n; ++k) {
        const bool trough = v[k] < v[k - 1] && v[k] <= v[k + 1];
        const bool peak = v[k] > v[k - 1] && v[k] >= v[k + 1];
        if (!trough && !peak) continue;
        const double left = flank(k >= 2 ? k - 2 : 0, k - 1);
        const double right = flank(k + 1, std::min(n - 1, k + 2));
        if (left > band.upper_rate || right > band.upper_rate) continue;
        if (left < band.lower_rate && right < band.lower_rate) continue;
        found.push_back({trough ? ExtremumKind::Trough : ExtremumKind::Peak, k,
                         static_cast<double>(k) / static_cast<double>(n), v[k]});
    }
    return found;
}

TroughPeak extract_extrema(std::span<const double> curve, const JointBand& band,
                           double sample_rate) {
    const std::vector<Extremum> all = surviving_extrema(curve, band, sample_rate);
    std::optional<Extremum> trough, peak;
    for (const Extremum& e : all) {
        if (!trough && e.kind == ExtremumKind::Trough && band.trough.contains(e.phase)) trough = e;
        if (!peak && e.kind == ExtremumKind::Peak && band.peak.contains(e.phase)) peak = e;
    }
    if (!trough) throw Error(ErrorCode::FeatureIncomplete, "no surviving trough");
    if (!peak) throw Error(ErrorCode::FeatureIncomplete, "no surviving peak");
    return {*trough, *peak};
}

namespace {

TroughPeak joint_extrema(const GaitCycle& cycle, const ChangeRateBand& band, Joint j) {
    try {
        return extract_extrema(cycle.curve(j), band[j], cycle.grid_rate());
    } catch (const Error& e) {
        if (e.code() != ErrorCode::FeatureIncomplete) throw;
        throw Error(ErrorCode::FeatureIncomplete, "cycle " + std::to_string(cycle.index) + ", " +
                                                      std::string(joint_name(j)) + ": " + e.what());
    }
}

}  // namespace

UpperFeature build_upper_feature(const GaitCycle& cycle, const ChangeRateBand& band) {
    const TroughPeak s = joint_extrema(cycle, band, Joint::Shoulder);
    const TroughPeak e = joint_extrema(cycle, band, Joint::Elbow);
    return {Vec4(s.trough.value, s.peak.value, e.trough.value, e.peak.value), cycle.index};
}

LowerFeature build_lower_feature(const GaitCycle& cycle, const ChangeRateBand& band) {
    const TroughPeak h = joint_extrema(cycle, band, Joint::Hip);
    const TroughPeak k = joint_extrema(cycle, band, Joint::Knee);
    return {Vec4(h.trough.value, h.peak.value, k.peak.value, k.trough.value), cycle.index};
}

FeatureSet extract_features(std::span<const GaitCycle> cycles, const ChangeRateBand& band) {
    FeatureSet set;
    for (const GaitCycle& c : cycles) {
        try {
            UpperFeature u = build_upper_feature(c, band);
            LowerFeature l = build_lower_feature(c, band);
            set.upper.push_back(u);
            set.lower.push_back(l);
        } catch (const Error& e) {
            if (e.code() != ErrorCode::FeatureIncomplete) throw;
            set.skipped.push_back(c.index);
        }
    }
    return set;
}

// ---------------------------------------------------------------------------

std::string format_band(const ChangeRateBand& band) {
    std::string out;
    for (Joint j : kAllJoints) {
        const JointBand& b = band[j];
        out += joint_name(j);
        for (double v : {b.lower_rate, b.upper_rate, b.trough.lo, b.trough.hi, b.peak.lo, b.peak.hi}) {
            out += ',';
            detail::append_double(out, v);
        }
        out += '\n';
    }
    return out;
}

ChangeRateBand parse_band(const std::string& text) {
    ChangeRateBand band;
    PerJoint<bool> seen{};
    for (std::string_view line : detail::split_lines(text)) {
        if (detail::trim(line).empty()) continue;
        const auto f = detail::split(line, ',');
        if (f.size() != 7) throw Error(ErrorCode::BadModelFile, "band line needs 7 fields");
        const Joint j = joint_from_name(detail::trim(f[0]));
        std::array<double, 6> v{};
        for (std::size_t c = 0; c < 6; ++c) {
            auto d = detail::parse_double(f[c + 1]);
            if (!d || !std::isfinite(*d)) throw Error(ErrorCode::BadModelFile, "band value");
            v[c] = *d;
        }
        band[j] = JointBand{v[0], v[1], {v[2], v[3]}, {v[4], v[5]}};
        seen[index_of(j)] = true;
    }
    for (Joint j : kAllJoints) {
        if (!seen[index_of(j)]) {
            throw Error(ErrorCode::BadModelFile, "band file lacks joint " + std::string(joint_name(j)));
        }
    }
    band.validate();
    return band;
}

void save_band(const std::filesystem::path& path, const ChangeRateBand& band) {
    detail::write_file_atomic(path, format_band(band));
}

ChangeRateBand load_band(const std::filesystem::path& path) {
    return parse_band(detail::read_file(path));
}

}  // namespace limbmap

#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "limbmap/gait_data.hpp"
#include "limbmap/types.hpp"

namespace limbmap {

/// Closed phase interval inside [0, 1].
struct PhaseWindow {
    double lo = 0.0;
    double hi = 1.0;

    bool contains(double phase) const { return phase >= lo && phase <= hi; }
};

/// Acceptance band on |d angle / dt| for one joint, plus the phase
/// intervals in which its first trough and first peak are searched.
struct JointBand {
    double lower_rate = 0.0;  // degrees / second
    double upper_rate = 0.0;  // degrees / second
    PhaseWindow trough;
    PhaseWindow peak;
};

struct ChangeRateBand {
    PerJoint<JointBand> joints;

    const JointBand& operator[](Joint j) const { return joints[index_of(j)]; }
    JointBand& operator[](Joint j) { return joints[index_of(j)]; }

    /// Throws Error(BadModelFile) unless 0 <= lower < upper for every joint
    /// and every window lies inside [0, 1].
    void validate() const;
};

struct BandConfig {
    double q_low = 2.0;
    double q_high = 98.0;
    double window_sigmas = 3.0;
    /// Phase windows never get narrower than +/- this.
    double min_window_half_width = 0.05;
};

struct UpperFeature {
    /// shoulder trough, shoulder peak, elbow trough, elbow peak
    Vec4 x = Vec4::Zero();
    std::size_t cycle_index = 0;
};

struct LowerFeature {
    /// hip trough, hip peak, knee peak, knee trough
    Vec4 y = Vec4::Zero();
    std::size_t cycle_index = 0;
};

enum class ExtremumKind { Trough, Peak };

struct Extremum {
    ExtremumKind kind = ExtremumKind::Trough;
    std::size_t index = 0;
    double phase = 0.0;
    double value = 0.0;

    friend bool operator==(const Extremum&, const Extremum&) = default;
};

struct TroughPeak {
    Extremum trough;
    Extremum peak;
};

/// Centered differences inside, one-sided at both ends; degrees / second.
std::vector<double> estimate_change_rate(std::span<const double> curve, double sample_rate);

struct RateLimits {
    double lower_rate = 0.0;
    double upper_rate = 0.0;
};

/// Percentiles of |rate| pooled across all sequences.
RateLimits fit_rate_limits(std::span<const std::vector<double>> rates, double q_low,
                           double q_high);

/// Rate limits for every joint from the cycles' phase-normalized curves,
/// then trough/peak phase windows (mean +/- sigmas * std of the extrema
/// found with unrestricted windows).
ChangeRateBand fit_band(std::span<const GaitCycle> cycles, const BandConfig& config = {});

/// Samples whose change rate exceeds the band are disturbances: every
/// out-of-band run that jumps away and back (flagged rates of both signs)
/// is replaced by a cubic through the four nearest clean samples, two per
/// side where the curve allows.
std::vector<double> suppress_disturbances(std::span<const double> curve, double upper_rate,
                                          double sample_rate);

/// Troughs and peaks that pass the flank test, in phase order. Windows in
/// `band` are not applied here.
std::vector<Extremum> surviving_extrema(std::span<const double> curve, const JointBand& band,
                                        double sample_rate);

/// Earliest surviving trough and earliest surviving peak inside the
/// band's windows. Throws Error(FeatureIncomplete) if either is missing.
TroughPeak extract_extrema(std::span<const double> curve, const JointBand& band,
                           double sample_rate);

UpperFeature build_upper_feature(const GaitCycle& cycle, const ChangeRateBand& band);
LowerFeature build_lower_feature(const GaitCycle& cycle, const ChangeRateBand& band);

/// Paired features of every cycle where both limbs extract cleanly.
struct FeatureSet {
    std::vector<UpperFeature> upper;
    std::vector<LowerFeature> lower;
    std::vector<std::size_t> skipped;  // cycle indices with FeatureIncomplete
};

FeatureSet extract_features(std::span<const GaitCycle> cycles, const ChangeRateBand& band);

/// One line per joint:
/// `joint,lower_rate,upper_rate,trough_phase_lo,trough_phase_hi,peak_phase_lo,peak_phase_hi`
std::string format_band(const ChangeRateBand& band);
ChangeRateBand parse_band(const std::string& text);
void save_band(const std::filesystem::path& path, const ChangeRateBand& band);
ChangeRateBand load_band(const std::filesystem::path& path);

}  // namespace limbmap

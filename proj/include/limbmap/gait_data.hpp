#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "limbmap/types.hpp"

namespace limbmap {

/// One joint's rotation angle stream, degrees, uniformly sampled.
class JointTrace {
public:
    JointTrace(Joint joint, std::vector<double> samples, double sample_rate);

    Joint joint() const noexcept { return joint_; }
    const std::vector<double>& samples() const noexcept { return samples_; }
    double sample_rate() const noexcept { return sample_rate_; }
    std::size_t size() const noexcept { return samples_.size(); }

private:
    Joint joint_;
    std::vector<double> samples_;
    double sample_rate_;
};

/// Synchronized right shoulder / right elbow / left hip / left knee traces.
class GaitRecording {
public:
    /// Traces must be given in joint order and agree in length and rate.
    explicit GaitRecording(PerJoint<JointTrace> traces);
    GaitRecording(PerJoint<std::vector<double>> samples, double sample_rate);

    const JointTrace& trace(Joint j) const { return traces_[index_of(j)]; }
    const std::vector<double>& samples(Joint j) const { return traces_[index_of(j)].samples(); }
    double sample_rate() const noexcept { return traces_[0].sample_rate(); }
    std::size_t size() const noexcept { return traces_[0].size(); }
    double duration() const noexcept { return static_cast<double>(size()) / sample_rate(); }

    friend bool operator==(const GaitRecording& a, const GaitRecording& b);

private:
    PerJoint<JointTrace> traces_;
};

/// One segmented movement period. `curves` are resampled onto a phase grid
/// of N points covering [0, 1).
struct GaitCycle {
    std::size_t index = 0;
    std::size_t start_sample = 0;
    std::size_t end_sample = 0;  // exclusive
    double period = 0.0;         // seconds
    PerJoint<std::vector<double>> curves;

    const std::vector<double>& curve(Joint j) const { return curves[index_of(j)]; }
    std::size_t grid_size() const { return curves[0].size(); }
    /// Samples per second of the phase-normalized curves.
    double grid_rate() const { return static_cast<double>(grid_size()) / period; }
};

struct HarmonicTerm {
    double amplitude = 0.0;  // degrees
    double phase = 0.0;      // fraction of a cycle; term is A*sin(2*pi*h*(phi - phase))
};

/// Per-joint Fourier model: mean + sum_h A_h sin(2 pi h (phi - phase_h)).
struct JointModel {
    double mean = 0.0;
    std::vector<HarmonicTerm> harmonics;

    double evaluate(double phase) const;
};

/// A planted motion mode: per-joint mean shift and harmonic scale.
struct MotionMode {
    PerJoint<double> mean_shift{0.0, 0.0, 0.0, 0.0};
    PerJoint<double> scale{1.0, 1.0, 1.0, 1.0};
    double weight = 1.0;
};

struct SynthParams {
    std::size_t n_cycles = 40;
    double base_period = 1.0;  // seconds
    double sample_rate = 100.0;
    PerJoint<JointModel> joints = default_joint_models();
    double period_jitter = 0.04;     // fractional std of cycle period
    double amplitude_jitter = 0.08;  // fractional std of the per-cycle harmonic scale
    double offset_jitter = 1.5;      // degrees std of the per-cycle mean shift
    /// Correlation between the lower-limb per-cycle draws and the upper-limb ones.
    double coupling = 0.9;
    double noise_std = 0.0;   // degrees
    double spike_rate = 0.0;  // spikes per cycle per joint
    double spike_scale = 10.0;  // spike height in multiples of the first-harmonic amplitude
    /// Fraction of a cycle of model signal added before the first and after
    /// the last full cycle so both outer boundaries are detectable.
    double padding = 0.25;
    std::vector<MotionMode> modes;  // empty: a single neutral mode
    std::uint64_t seed = 1;

    static PerJoint<JointModel> default_joint_models();
    void validate() const;
};

/// Ground truth recorded by the generator for one full cycle.
struct CycleTruth {
    std::size_t cycle_index = 0;
    std::size_t start_sample = 0;
    std::size_t end_sample = 0;
    std::size_t mode = 0;
    /// shoulder trough, shoulder peak, elbow trough, elbow peak
    Vec4 upper = Vec4::Zero();
    /// hip trough, hip peak, knee peak, knee trough
    Vec4 lower = Vec4::Zero();
};

struct SyntheticRecording {
    GaitRecording recording;
    std::vector<CycleTruth> truth;
    /// Sample indices that received a spike, per joint.
    PerJoint<std::vector<std::size_t>> spikes;
};

SyntheticRecording synthesize_recording(const SynthParams& params);

GaitRecording load_recording(const std::filesystem::path& path);
GaitRecording parse_recording(const std::string& text);
std::string format_recording(const GaitRecording& recording);
void write_recording(const std::filesystem::path& path, const GaitRecording& recording);

/// `R.csv` -> `R.meta.csv`
std::filesystem::path sidecar_path(const std::filesystem::path& recording_path);
std::string format_sidecar(const std::vector<CycleTruth>& truth);
std::vector<CycleTruth> parse_sidecar(const std::string& text);
void write_sidecar(const std::filesystem::path& path, const std::vector<CycleTruth>& truth);

struct SegmentationConfig {
    std::size_t grid_size = 100;
    double smoothing_fraction = 0.05;  // moving-average window, fraction of the period
    double min_spacing_fraction = 0.5;  // crossings closer than this (of a period) are merged
    /// Odd window (recording samples) of a median-3 + moving-average pass
    /// applied to every trace before cycles are cut; 1 disables it.
    std::size_t curve_smoothing = 1;
};

/// Median-3 then centered moving average over every trace.
GaitRecording smooth_recording(const GaitRecording& rec, std::size_t window);

/// Dominant autocorrelation lag of `signal`, in samples.
double estimate_period_samples(std::span<const double> signal);

/// Cuts samples [start, end) out of `rec` and resamples every joint.
GaitCycle make_cycle(const GaitRecording& rec, std::size_t index, std::size_t start,
                     std::size_t end, std::size_t grid_size);

std::vector<GaitCycle> segment_cycles(const GaitRecording& recording,
                                      const SegmentationConfig& config = {});

/// `slice[i]` sits at phase i / slice.size(). The value at phase 1 is
/// `closing` when given, otherwise the curve is treated as periodic.
std::vector<double> resample_cycle(std::span<const double> slice, std::size_t n,
                                   std::optional<double> closing = std::nullopt);

}  // namespace limbmap

#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "limbmap/feature_extraction.hpp"
#include "limbmap/gait_data.hpp"
#include "limbmap/mapping.hpp"
#include "limbmap/restoration.hpp"

namespace limbmap {

// ---------------------------------------------------------------------------
// Training: segment -> extract -> least squares -> cluster -> fit references

struct TrainingConfig {
    SegmentationConfig segmentation;
    BandConfig band;
    ClusterConfig cluster;
    std::size_t fit_order = 6;
    /// Fraction of the (chronologically last) featured cycles kept out of
    /// the fit and used only for residual statistics.
    double holdout = 0.0;
};

struct TrainedModels {
    std::vector<GaitCycle> cycles;
    ChangeRateBand band;
    FeatureSet features;
    std::size_t train_count = 0;
    Identification identification;
    std::optional<ResidualStats> holdout_residuals;
    ClusterModel clusters;
    RawReferences raw_references;
    ReferenceSet references;
};

TrainedModels train_models(const GaitRecording& recording, const TrainingConfig& config = {});

// ---------------------------------------------------------------------------
// Pipeline

struct PipelineConfig {
    SegmentationConfig segmentation;
    /// Output cycles are always played back over this fixed period.
    double nominal_period = 1.0;
};

struct PipelineModels {
    std::optional<ChangeRateBand> band;
    std::optional<LinearMap> map;
    std::optional<ReferenceSet> references;
};

/// Lower-limb trajectory emitted during one gait cycle.
struct CycleEmission {
    std::size_t input_cycle = 0;  // cycle whose features produced it
    std::size_t emit_cycle = 0;   // always input_cycle + 1
    bool held = false;            // replay of the previous emission
    Vec4 upper = Vec4::Zero();
    Vec4 mapped = Vec4::Zero();
    RestorationWeights weights;
    std::size_t start_sample = 0;
    std::vector<double> times;   // seconds
    std::vector<double> phases;  // playback phase in [0, 1)
    std::vector<double> hip;
    std::vector<double> knee;
};

struct SkippedCycle {
    std::size_t cycle = 0;
    std::string reason;
};

struct PipelineOutput {
    std::vector<GaitCycle> cycles;
    std::vector<CycleEmission> emissions;  // one per successfully featured cycle
    std::vector<CycleEmission> holds;      // emitted for cycles after a skipped one
    std::vector<SkippedCycle> skipped;
    double sample_rate = 0.0;
    double nominal_period = 0.0;

    /// emissions and holds merged in emission order
    std::vector<const CycleEmission*> timeline() const;
};

PipelineOutput run_pipeline(const GaitRecording& recording, const PipelineModels& models,
                            const PipelineConfig& config = {});

// ---------------------------------------------------------------------------
// Error analysis

/// Cross-correlation lag of `a` relative to `b` as a fraction of the period,
/// in (-0.5, 0.5]; positive means `a` lags `b`. Both curves share one grid.
double circular_lag(std::span<const double> a, std::span<const double> b);

struct PhaseStats {
    double mean = 0.0;  // fraction of a cycle
    double std = 0.0;
    std::vector<double> per_cycle;
};

struct MeanStd {
    double mean = 0.0;
    double std = 0.0;
};

struct AmplitudeStats {
    MeanStd hip;  // degrees
    MeanStd knee;
    std::size_t samples = 0;
};

/// Lag of each output cycle against the original lower-limb cycle it
/// restores (hip and knee correlations pooled).
PhaseStats phase_error(std::span<const LowerCurves> output, std::span<const LowerCurves> original);

/// Pointwise output - original after undoing each cycle's measured lag.
AmplitudeStats amplitude_error(std::span<const LowerCurves> output,
                               std::span<const LowerCurves> original);

/// Lag of each lower-limb curve behind the upper-limb curve of the same cycle.
PhaseStats phase_difference(std::span<const std::vector<double>> upper,
                            std::span<const std::vector<double>> lower);

struct ErrorReport {
    PhaseStats phase_error;
    AmplitudeStats amplitude_error;
    PhaseStats phase_difference;  // shoulder vs emitted hip
    PhaseStats baseline;          // shoulder vs recorded hip, every cycle
    std::optional<ResidualStats> mapping_residual;
    std::size_t compared_cycles = 0;
};

/// `band`, when given, re-extracts the recorded lower features to report
/// the mapping residual y' - y over the run.
ErrorReport analyze_run(const PipelineOutput& output, const ChangeRateBand* band = nullptr);

/// CSV `metric,joint,mean,std` with one block per experiment and the
/// phase-difference rows for the original data and every experiment.
std::string format_error_report(std::span<const ErrorReport> experiments);

// ---------------------------------------------------------------------------
// Run directory (written by `simulate`, read by `analyze` and `plot`)

struct RunDirectory {
    GaitRecording recording;
    ChangeRateBand band;
    PipelineOutput output;
    SegmentationConfig segmentation;
};

void write_run(const std::filesystem::path& dir, const GaitRecording& recording,
               const ChangeRateBand& band, const PipelineOutput& output,
               const SegmentationConfig& segmentation);
RunDirectory load_run(const std::filesystem::path& dir);

/// CSV `emit_cycle,phase,hip_deg,knee_deg`, one row per emitted sample.
std::string format_trajectory(const PipelineOutput& output);

}  // namespace limbmap

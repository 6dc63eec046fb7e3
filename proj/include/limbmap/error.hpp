#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace limbmap {

enum class ErrorCode {
    // recording ingestion / synthesis
    MissingColumn,
    NonFiniteValue,
    InconsistentLength,
    BadHeader,
    InvalidParams,
    // segmentation / resampling
    NoCyclesFound,
    FlatSignal,
    SliceTooShort,
    // feature extraction
    TooShort,
    EmptyInput,
    DegenerateDistribution,
    FeatureIncomplete,
    // identification, clustering, analysis
    TooFewSamples,
    RankDeficient,
    EmptyCluster,
    TooFewClusters,
    SingularReferenceMatrix,
    OrderTooHigh,
    TooFewCycles,
    ModelMissing,
    // model files
    BadModelFile,
    Io,
};

std::string_view to_string(ErrorCode code);

/// Domain error carrying a machine-checkable code. Everything the library
/// rejects is reported through this type.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

}  // namespace limbmap

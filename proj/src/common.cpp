#include "limbmap/error.hpp"
#include "limbmap/types.hpp"

namespace limbmap {

std::string_view to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::MissingColumn: return "MissingColumn";
        case ErrorCode::NonFiniteValue: return "NonFiniteValue";
        case ErrorCode::InconsistentLength: return "InconsistentLength";
        case ErrorCode::BadHeader: return "BadHeader";
        case ErrorCode::InvalidParams: return "InvalidParams";
        case ErrorCode::NoCyclesFound: return "NoCyclesFound";
        case ErrorCode::FlatSignal: return "FlatSignal";
        case ErrorCode::SliceTooShort: return "SliceTooShort";
        case ErrorCode::TooShort: return "TooShort";
        case ErrorCode::EmptyInput: return "EmptyInput";
        case ErrorCode::DegenerateDistribution: return "DegenerateDistribution";
        case ErrorCode::FeatureIncomplete: return "FeatureIncomplete";
        case ErrorCode::TooFewSamples: return "TooFewSamples";
        case ErrorCode::RankDeficient: return "RankDeficient";
        case ErrorCode::EmptyCluster: return "EmptyCluster";
        case ErrorCode::TooFewClusters: return "TooFewClusters";
        case ErrorCode::SingularReferenceMatrix: return "SingularReferenceMatrix";
        case ErrorCode::OrderTooHigh: return "OrderTooHigh";
        case ErrorCode::TooFewCycles: return "TooFewCycles";
        case ErrorCode::ModelMissing: return "ModelMissing";
        case ErrorCode::BadModelFile: return "BadModelFile";
        case ErrorCode::Io: return "Io";
    }
    return "Unknown";
}

std::string_view joint_name(Joint j) {
    switch (j) {
        case Joint::Shoulder: return "shoulder";
        case Joint::Elbow: return "elbow";
        case Joint::Hip: return "hip";
        case Joint::Knee: return "knee";
    }
    return "?";
}

Joint joint_from_name(std::string_view name) {
    for (Joint j : kAllJoints) {
        if (joint_name(j) == name) return j;
    }
    throw Error(ErrorCode::BadModelFile, "unknown joint '" + std::string(name) + "'");
}

}  // namespace limbmap

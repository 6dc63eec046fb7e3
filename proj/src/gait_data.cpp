#include "limbmap/gait_data.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <random>

#include "limbmap/error.hpp"
#include "signal_util.hpp"
#include "text_util.hpp"

namespace limbmap {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

constexpr std::array<std::string_view, 5> kColumns{"time_s", "shoulder_deg", "elbow_deg",
                                                   "hip_deg", "knee_deg"};
constexpr std::string_view kRateKey = "# sample_rate_hz=";

void check_finite(std::span<const double> samples, Joint joint) {
    for (std::size_t i = 0; i < samples.size(); ++i) {
        if (!std::isfinite(samples[i])) {
            throw Error(ErrorCode::NonFiniteValue, std::string(joint_name(joint)) +
                                                       " sample " + std::to_string(i));
        }
    }
}

PerJoint<JointTrace> make_traces(PerJoint<std::vector<double>> samples, double rate) {
    return {JointTrace(Joint::Shoulder, std::move(samples[0]), rate),
            JointTrace(Joint::Elbow, std::move(samples[1]), rate),
            JointTrace(Joint::Hip, std::move(samples[2]), rate),
            JointTrace(Joint::Knee, std::move(samples[3]), rate)};
}

struct FirstExtrema {
    double trough;
    double peak;
};

// First local minimum and maximum of a cycle model in phase order, found on
// a dense grid.
// First local trough and peak of `value` sampled densely over [0, 1).
FirstExtrema dense_first_extrema(const std::function<double(double)>& value) {
    constexpr std::size_t kDense = 20000;
    std::vector<double> v(kDense);
    for (std::size_t i = 0; i < kDense; ++i) v[i] = value(static_cast<double>(i) / kDense);
    std::optional<double> trough, peak;
    for (std::size_t i = 1; i + 1 < kDense && (!trough || !peak); ++i) {
        if (!trough && v[i] < v[i - 1] && v[i] <= v[i + 1]) trough = v[i];
        if (!peak && v[i] > v[i - 1] && v[i] >= v[i + 1]) peak = v[i];
    }
    auto [mn, mx] = std::minmax_element(v.begin(), v.end());
    return {trough.value_or(*mn), peak.value_or(*mx)};
}

}  // namespace

JointTrace::JointTrace(Joint joint, std::vector<double> samples, double sample_rate)
    : joint_(joint), samples_(std::move(samples)), sample_rate_(sample_rate) {
    if (!(sample_rate_ > 0.0) || !std::isfinite(sample_rate_)) {
        throw Error(ErrorCode::InvalidParams, "sample rate must be positive");
    }
    if (samples_.empty()) {
        throw Error(ErrorCode::InconsistentLength,
                    std::string(joint_name(joint_)) + " trace has no samples");
    }
    check_finite(samples_, joint_);
}

GaitRecording::GaitRecording(PerJoint<JointTrace> traces) : traces_(std::move(traces)) {
    for (Joint j : kAllJoints) {
        const JointTrace& t = traces_[index_of(j)];
        if (t.joint() != j) throw Error(ErrorCode::MissingColumn, "traces out of joint order");
        if (t.size() != traces_[0].size()) {
            throw Error(ErrorCode::InconsistentLength,
                        std::string(joint_name(j)) + " trace length differs");
        }
        if (t.sample_rate() != traces_[0].sample_rate()) {
            throw Error(ErrorCode::InconsistentLength,
                        std::string(joint_name(j)) + " sample rate differs");
        }
    }
}

GaitRecording::GaitRecording(PerJoint<std::vector<double>> samples, double sample_rate)
    : GaitRecording(make_traces(std::move(samples), sample_rate)) {}

bool operator==(const GaitRecording& a, const GaitRecording& b) {
    if (a.sample_rate() != b.sample_rate()) return false;
    for (Joint j : kAllJoints) {
        if (a.samples(j) != b.samples(j)) return false;
    }
    return true;
}

double JointModel::evaluate(double phase) const {
    double v = mean;
    for (std::size_t h = 0; h < harmonics.size(); ++h) {
        const double order = static_cast<double>(h + 1);
        v += harmonics[h].amplitude * std::sin(kTwoPi * order * (phase - harmonics[h].phase));
    }
    return v;
}

PerJoint<JointModel> SynthParams::default_joint_models() {
    // Magnitudes follow normal walking: hip roughly -4..40 degrees, knee
    // roughly -103..-8 degrees. Hip uses pure sines so its ascending
    // mean crossing sits at phase 0.
    return {JointModel{2.0, {{20.0, 0.05}, {2.0, 0.10}, {0.6, 0.30}}},
            JointModel{30.0, {{15.0, 0.15}, {1.5, 0.30}, {0.4, 0.10}}},
            JointModel{18.0, {{22.0, 0.0}, {2.0, 0.0}, {0.5, 0.0}}},
            JointModel{-55.5, {{46.0, 0.40}, {4.0, 0.20}, {1.0, 0.50}}}};
}

void SynthParams::validate() const {
    auto bad = [](const std::string& what) { throw Error(ErrorCode::InvalidParams, what); };
    if (n_cycles < 1) bad("n_cycles must be >= 1");
    if (!(base_period > 0.0) || !std::isfinite(base_period)) bad("base_period must be > 0");
    if (!(sample_rate > 0.0) || !std::isfinite(sample_rate)) bad("sample_rate must be > 0");
    for (double v : {period_jitter, amplitude_jitter, offset_jitter, noise_std, spike_rate,
                     spike_scale}) {
        if (!(v >= 0.0) || !std::isfinite(v)) bad("jitters, noise and spike settings must be >= 0");
    }
    if (!(coupling >= 0.0 && coupling <= 1.0)) bad("coupling must lie in [0, 1]");
    if (!(padding >= 0.0 && padding < 1.0)) bad("padding must lie in [0, 1)");
    if (base_period * sample_rate < 8.0) bad("fewer than 8 samples per cycle");
    for (const JointModel& m : joints) {
        if (m.harmonics.empty()) bad("every joint needs at least one harmonic");
        if (!std::isfinite(m.mean)) bad("joint mean must be finite");
        for (const HarmonicTerm& h : m.harmonics) {
            if (!std::isfinite(h.amplitude) || !std::isfinite(h.phase)) bad("non-finite harmonic");
        }
    }
    for (const MotionMode& mode : modes) {
        if (!(mode.weight > 0.0)) bad("mode weights must be > 0");
        for (Joint j : kAllJoints) {
            if (!(mode.scale[index_of(j)] > 0.0)) bad("mode scales must be > 0");
        }
    }
}

SyntheticRecording synthesize_recording(const SynthParams& p) {
    p.validate();
    const std::size_t n = p.n_cycles;
    const double fs = p.sample_rate;

    // Independent streams so that noise and spikes never perturb the
    // per-cycle draws (a spiked run shares its clean signal with the
    // spike-free run of the same seed).
    std::seed_seq cycle_seq{p.seed, std::uint64_t{1}};
    std::seed_seq noise_seq{p.seed, std::uint64_t{2}};
    std::seed_seq spike_seq{p.seed, std::uint64_t{3}};
    std::mt19937_64 cycle_rng(cycle_seq), noise_rng(noise_seq), spike_rng(spike_seq);
    std::normal_distribution<double> gauss(0.0, 1.0);

    struct CycleDraw {
        double period;
        std::size_t mode;
        PerJoint<double> offset;
        PerJoint<double> scale;
    };

    std::vector<double> mode_weights;
    for (const MotionMode& m : p.modes) mode_weights.push_back(m.weight);
    std::discrete_distribution<std::size_t> pick_mode(mode_weights.begin(), mode_weights.end());
    const MotionMode neutral{};

    // Orthogonal mixing from upper-limb draws to lower-limb draws.
    Mat4 mix;
    mix << 1, 1, 1, 1, 1, -1, 1, -1, 1, 1, -1, -1, 1, -1, -1, 1;
    mix *= 0.5;
    const double independent = std::sqrt(1.0 - p.coupling * p.coupling);

    std::vector<CycleDraw> draws(n);
    for (CycleDraw& d : draws) {
        d.period = p.base_period * std::max(0.5, 1.0 + p.period_jitter * gauss(cycle_rng));
        d.mode = p.modes.empty() ? 0 : pick_mode(cycle_rng);
        const MotionMode& mode = p.modes.empty() ? neutral : p.modes[d.mode];

        // (scale, offset) for shoulder, elbow; then hip, knee from the mix.
        Vec4 upper, lower;
        for (int i = 0; i < 4; ++i) upper[i] = gauss(cycle_rng);
        Vec4 fresh;
        for (int i = 0; i < 4; ++i) fresh[i] = gauss(cycle_rng);
        lower = p.coupling * (mix * upper) + independent * fresh;

        const std::array<double, 8> z{upper[0], upper[1], upper[2], upper[3],
                                      lower[0], lower[1], lower[2], lower[3]};
        for (Joint j : kAllJoints) {
            const std::size_t k = index_of(j);
            d.scale[k] = mode.scale[k] * std::max(0.2, 1.0 + p.amplitude_jitter * z[2 * k]);
            d.offset[k] = mode.mean_shift[k] + p.offset_jitter * z[2 * k + 1];
        }
    }

    // Timeline: padding lead-in, n full cycles, padding lead-out.
    std::vector<double> starts(n + 1);
    starts[0] = p.padding * draws.front().period;
    for (std::size_t k = 0; k < n; ++k) starts[k + 1] = starts[k] + draws[k].period;
    const double total = starts[n] + p.padding * draws.back().period;
    const auto n_samples = static_cast<std::size_t>(std::floor(total * fs));

    auto first_sample_at = [fs](double t) {
        return static_cast<std::size_t>(std::ceil(t * fs - 1e-9));
    };

    // Offsets and scales move from one cycle's draw to the next along a
    // raised cosine between cycle midpoints, so the traces have no steps at
    // the cycle boundaries.
    // The padding outside the first and last cycle keeps that cycle's draw.
    auto value_at = [&](std::size_t cycle, std::size_t k, double phase, bool padding = false) {
        std::size_t from = phase < 0.5 ? (cycle == 0 ? 0 : cycle - 1) : cycle;
        std::size_t to = phase < 0.5 ? cycle : std::min(n - 1, cycle + 1);
        if (padding) from = to = cycle;
        const double w = 0.5 - 0.5 * std::cos(std::numbers::pi * (phase < 0.5 ? phase + 0.5 : phase - 0.5));
        const double offset = (1.0 - w) * draws[from].offset[k] + w * draws[to].offset[k];
        const double scale = (1.0 - w) * draws[from].scale[k] + w * draws[to].scale[k];
        const JointModel& model = p.joints[k];
        return model.mean + offset + scale * (model.evaluate(phase) - model.mean);
    };

    PerJoint<std::vector<double>> samples;
    for (auto& s : samples) s.assign(n_samples, 0.0);
    std::size_t cycle = 0;
    for (std::size_t i = 0; i < n_samples; ++i) {
        // in sample units so identical cycles see bit-identical phases
        const auto t = static_cast<double>(i);
        while (cycle + 1 < n && t >= starts[cycle + 1] * fs) ++cycle;
        double phase = (t - starts[cycle] * fs) / (draws[cycle].period * fs);
        const bool padding = phase < 0.0 || phase >= 1.0;
        phase -= std::floor(phase);
        for (std::size_t k = 0; k < kJointCount; ++k) samples[k][i] = value_at(cycle, k, phase, padding);
    }

    if (p.noise_std > 0.0) {
        for (auto& s : samples) {
            for (double& v : s) v += p.noise_std * gauss(noise_rng);
        }
    }

    std::vector<CycleTruth> truth(n);
    for (std::size_t k = 0; k < n; ++k) {
        CycleTruth& ct = truth[k];
        ct.cycle_index = k;
        ct.start_sample = first_sample_at(starts[k]);
        ct.end_sample = std::min(n_samples, first_sample_at(starts[k + 1]));
        ct.mode = draws[k].mode;
        PerJoint<FirstExtrema> ext;
        for (Joint j : kAllJoints) {
            const std::size_t q = index_of(j);
            ext[q] = dense_first_extrema([&](double phase) { return value_at(k, q, phase); });
        }
        ct.upper = Vec4(ext[0].trough, ext[0].peak, ext[1].trough, ext[1].peak);
        ct.lower = Vec4(ext[2].trough, ext[2].peak, ext[3].peak, ext[3].trough);
    }

    PerJoint<std::vector<std::size_t>> spikes;
    if (p.spike_rate > 0.0) {
        const double whole = std::floor(p.spike_rate);
        std::bernoulli_distribution extra(p.spike_rate - whole);
        std::bernoulli_distribution positive(0.5);
        for (std::size_t k = 0; k < n; ++k) {
            const CycleTruth& ct = truth[k];
            if (ct.end_sample <= ct.start_sample) continue;
            std::uniform_int_distribution<std::size_t> where(ct.start_sample, ct.end_sample - 1);
            for (Joint j : kAllJoints) {
                const std::size_t q = index_of(j);
                const auto count = static_cast<std::size_t>(whole) + (extra(spike_rng) ? 1 : 0);
                const double height = p.spike_scale *
                                      std::abs(p.joints[q].harmonics.front().amplitude) *
                                      draws[k].scale[q];
                for (std::size_t s = 0; s < count; ++s) {
                    const std::size_t at = where(spike_rng);
                    samples[q][at] += positive(spike_rng) ? height : -height;
                    spikes[q].push_back(at);
                }
            }
        }
        for (auto& s : spikes) std::sort(s.begin(), s.end());
    }

    return SyntheticRecording{GaitRecording(std::move(samples), fs), std::move(truth),
                              std::move(spikes)};
}

// ---------------------------------------------------------------------------
// CSV

GaitRecording parse_recording(const std::string& text) {
    const auto lines = detail::split_lines(text);
    if (lines.size() < 2) throw Error(ErrorCode::BadHeader, "expected two header lines");
    std::string_view first = lines[0];
    if (first.substr(0, kRateKey.size()) != kRateKey) {
        throw Error(ErrorCode::BadHeader, "first line must be '# sample_rate_hz=<float>'");
    }
    auto rate = detail::parse_double(first.substr(kRateKey.size()));
    if (!rate || !std::isfinite(*rate) || *rate <= 0.0) {
        throw Error(ErrorCode::BadHeader, "sample rate is not a positive number");
    }

    const auto header = detail::split(lines[1], ',');
    std::array<std::size_t, kColumns.size()> where{};
    for (std::size_t c = 0; c < kColumns.size(); ++c) {
        auto it = std::find_if(header.begin(), header.end(),
                               [&](std::string_view h) { return detail::trim(h) == kColumns[c]; });
        if (it == header.end()) {
            throw Error(ErrorCode::MissingColumn, "column '" + std::string(kColumns[c]) + "'");
        }
        where[c] = static_cast<std::size_t>(it - header.begin());
    }

    PerJoint<std::vector<double>> samples;
    for (auto& s : samples) s.reserve(lines.size() - 2);
    for (std::size_t r = 2; r < lines.size(); ++r) {
        const auto fields = detail::split(lines[r], ',');
        if (fields.size() != header.size()) {
            throw Error(ErrorCode::InconsistentLength,
                        "line " + std::to_string(r + 1) + " has " + std::to_string(fields.size()) +
                            " fields, header has " + std::to_string(header.size()));
        }
        for (std::size_t c = 1; c < kColumns.size(); ++c) {
            auto v = detail::parse_double(fields[where[c]]);
            if (!v || !std::isfinite(*v)) {
                throw Error(ErrorCode::NonFiniteValue, "line " + std::to_string(r + 1) +
                                                           ", column " + std::string(kColumns[c]));
            }
            samples[c - 1].push_back(*v);
        }
    }
    if (samples[0].empty()) throw Error(ErrorCode::InconsistentLength, "recording has no rows");
    return GaitRecording(std::move(samples), *rate);
}

GaitRecording load_recording(const std::filesystem::path& path) {
    return parse_recording(detail::read_file(path));
}

std::string format_recording(const GaitRecording& rec) {
    std::string out;
    out.reserve(rec.size() * 64 + 96);
    out += kRateKey;
    detail::append_double(out, rec.sample_rate());
    out += "\ntime_s,shoulder_deg,elbow_deg,hip_deg,knee_deg\n";
    for (std::size_t i = 0; i < rec.size(); ++i) {
        detail::append_double(out, static_cast<double>(i) / rec.sample_rate());
        for (Joint j : kAllJoints) {
            out += ',';
            detail::append_double(out, rec.samples(j)[i]);
        }
        out += '\n';
    }
    return out;
}

void write_recording(const std::filesystem::path& path, const GaitRecording& rec) {
    detail::write_file_atomic(path, format_recording(rec));
}

std::filesystem::path sidecar_path(const std::filesystem::path& recording_path) {
    std::filesystem::path p = recording_path;
    p.replace_extension(".meta.csv");
    return p;
}

namespace {
constexpr std::string_view kSidecarHeader =
    "cycle_index,start_sample,end_sample,shoulder_trough,shoulder_peak,elbow_trough,elbow_peak,"
    "hip_trough,hip_peak,knee_peak,knee_trough,mode";
}

std::string format_sidecar(const std::vector<CycleTruth>& truth) {
    std::string out(kSidecarHeader);
    out += '\n';
    for (const CycleTruth& t : truth) {
        out += std::to_string(t.cycle_index) + ',' + std::to_string(t.start_sample) + ',' +
               std::to_string(t.end_sample);
        for (int i = 0; i < 4; ++i) {
            out += ',';
            detail::append_double(out, t.upper[i]);
        }
        for (int i = 0; i < 4; ++i) {
            out += ',';
            detail::append_double(out, t.lower[i]);
        }
        out += ',' + std::to_string(t.mode) + '\n';
    }
    return out;
}

std::vector<CycleTruth> parse_sidecar(const std::string& text) {
    const auto lines = detail::split_lines(text);
    if (lines.empty() || lines[0] != kSidecarHeader) {
        throw Error(ErrorCode::BadHeader, "unexpected sidecar header");
    }
    std::vector<CycleTruth> truth;
    for (std::size_t r = 1; r < lines.size(); ++r) {
        const auto f = detail::split(lines[r], ',');
        if (f.size() != 12) throw Error(ErrorCode::InconsistentLength, "sidecar row width");
        std::array<double, 12> v{};
        for (std::size_t c = 0; c < 12; ++c) {
            auto d = detail::parse_double(f[c]);
            if (!d || !std::isfinite(*d)) throw Error(ErrorCode::NonFiniteValue, "sidecar value");
            v[c] = *d;
        }
        CycleTruth t;
        t.cycle_index = static_cast<std::size_t>(v[0]);
        t.start_sample = static_cast<std::size_t>(v[1]);
        t.end_sample = static_cast<std::size_t>(v[2]);
        t.upper = Vec4(v[3], v[4], v[5], v[6]);
        t.lower = Vec4(v[7], v[8], v[9], v[10]);
        t.mode = static_cast<std::size_t>(v[11]);
        truth.push_back(t);
    }
    return truth;
}

void write_sidecar(const std::filesystem::path& path, const std::vector<CycleTruth>& truth) {
    detail::write_file_atomic(path, format_sidecar(truth));
}

// ---------------------------------------------------------------------------
// Segmentation

double estimate_period_samples(std::span<const double> signal) {
    const std::size_t n = signal.size();
    if (n < 8) throw Error(ErrorCode::NoCyclesFound, "signal too short for period estimation");
    const double m = detail::mean(signal);
    std::vector<double> x(n);
    for (std::size_t i = 0; i < n; ++i) x[i] = signal[i] - m;
    double energy = 0.0;
    for (double v : x) energy += v * v;
    if (energy <= 0.0) throw Error(ErrorCode::FlatSignal, "signal has no variance");

    const std::size_t max_lag = n / 2;
    std::vector<double> r(max_lag + 2, 0.0);
    for (std::size_t lag = 1; lag <= max_lag + 1 && lag < n; ++lag) {
        double acc = 0.0;
        for (std::size_t i = 0; i + lag < n; ++i) acc += x[i] * x[i + lag];
        r[lag] = acc / energy;
    }
    std::size_t first_negative = 0;
    for (std::size_t lag = 1; lag <= max_lag; ++lag) {
        if (r[lag] < 0.0) {
            first_negative = lag;
            break;
        }
    }
    if (first_negative == 0) {
        throw Error(ErrorCode::NoCyclesFound, "autocorrelation never turns negative");
    }
    std::size_t best = first_negative;
    for (std::size_t lag = first_negative; lag <= max_lag; ++lag) {
        if (r[lag] > r[best]) best = lag;
    }
    if (r[best] <= 0.0 || best >= max_lag) {
        throw Error(ErrorCode::NoCyclesFound, "recording covers fewer than two periods");
    }
    // parabolic refinement around the discrete peak
    const double a = r[best - 1], b = r[best], c = r[best + 1];
    const double denom = a - 2.0 * b + c;
    const double shift = denom < 0.0 ? 0.5 * (a - c) / denom : 0.0;
    return static_cast<double>(best) + std::clamp(shift, -0.5, 0.5);
}

std::vector<double> resample_cycle(std::span<const double> slice, std::size_t n,
                                   std::optional<double> closing) {
    const std::size_t len = slice.size();
    if (len < 2) throw Error(ErrorCode::SliceTooShort, "slice needs at least 2 samples");
    if (n < 2) throw Error(ErrorCode::SliceTooShort, "grid needs at least 2 points");
    const double end_value = closing.value_or(slice[0]);
    std::vector<double> out(n);
    for (std::size_t j = 0; j < n; ++j) {
        const double pos = static_cast<double>(j * len) / static_cast<double>(n);
        const auto i0 = static_cast<std::size_t>(std::floor(pos));
        const double frac = pos - static_cast<double>(i0);
        const double v0 = slice[i0];
        const double v1 = i0 + 1 < len ? slice[i0 + 1] : end_value;
        out[j] = frac == 0.0 ? v0 : v0 + frac * (v1 - v0);
    }
    return out;
}

GaitCycle make_cycle(const GaitRecording& rec, std::size_t index, std::size_t start,
                     std::size_t end, std::size_t grid_size) {
    if (!(start < end) || end > rec.size()) {
        throw Error(ErrorCode::SliceTooShort, "cycle range outside the recording");
    }
    GaitCycle c;
    c.index = index;
    c.start_sample = start;
    c.end_sample = end;
    c.period = static_cast<double>(end - start) / rec.sample_rate();
    for (Joint j : kAllJoints) {
        const auto& s = rec.samples(j);
        std::span<const double> slice(s.data() + start, end - start);
        std::optional<double> closing;
        if (end < s.size()) closing = s[end];
        c.curves[index_of(j)] = resample_cycle(slice, grid_size, closing);
    }
    return c;
}

GaitRecording smooth_recording(const GaitRecording& rec, std::size_t window) {
    PerJoint<std::vector<double>> out;
    for (Joint j : kAllJoints) {
        out[index_of(j)] = detail::moving_average(detail::median3(rec.samples(j)), window | 1);
    }
    return GaitRecording(std::move(out), rec.sample_rate());
}

std::vector<GaitCycle> segment_cycles(const GaitRecording& rec, const SegmentationConfig& cfg) {
    if (cfg.grid_size < 2) throw Error(ErrorCode::InvalidParams, "grid size must be >= 2");
    const auto& hip = rec.samples(Joint::Hip);
    auto [lo, hi] = std::minmax_element(hip.begin(), hip.end());
    if (*hi - *lo < 1e-9) throw Error(ErrorCode::FlatSignal, "hip trace does not oscillate");

    // Median-of-3 first so single-sample spikes cannot fake a crossing.
    std::vector<double> x = detail::median3(hip);
    const double m = detail::mean(x);
    for (double& v : x) v -= m;

    const double period = estimate_period_samples(x);
    if (static_cast<double>(x.size()) < 2.0 * period) {
        throw Error(ErrorCode::NoCyclesFound, "recording covers fewer than two periods");
    }
    std::size_t window =
        std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(cfg.smoothing_fraction * period)));
    if (window % 2 == 0) ++window;
    const std::vector<double> s = detail::moving_average(x, window);

    const double min_spacing = cfg.min_spacing_fraction * period;
    std::vector<std::size_t> crossings;
    for (std::size_t i = 1; i < s.size(); ++i) {
        if (s[i - 1] < 0.0 && s[i] >= 0.0) {
            if (!crossings.empty() && static_cast<double>(i - crossings.back()) < min_spacing) continue;
            crossings.push_back(i);
        }
    }
    if (crossings.size() < 2) throw Error(ErrorCode::NoCyclesFound, "fewer than one full period");

    std::optional<GaitRecording> smoothed;
    if (cfg.curve_smoothing > 1) smoothed = smooth_recording(rec, cfg.curve_smoothing);
    const GaitRecording& source = smoothed ? *smoothed : rec;

    std::vector<GaitCycle> cycles;
    cycles.reserve(crossings.size() - 1);
    for (std::size_t k = 0; k + 1 < crossings.size(); ++k) {
        cycles.push_back(make_cycle(source, k, crossings[k], crossings[k + 1], cfg.grid_size));
    }
    return cycles;
}

}  // namespace limbmap

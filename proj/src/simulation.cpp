#include "limbmap/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "limbmap/error.hpp"
#include "signal_util.hpp"
#include "text_util.hpp"

namespace limbmap {

TrainedModels train_models(const GaitRecording& recording, const TrainingConfig& cfg) {
    if (!(cfg.holdout >= 0.0 && cfg.holdout < 1.0)) {
        throw Error(ErrorCode::InvalidParams, "holdout must lie in [0, 1)");
    }
    std::vector<GaitCycle> cycles = segment_cycles(recording, cfg.segmentation);
    ChangeRateBand band = fit_band(cycles, cfg.band);
    FeatureSet features = extract_features(cycles, band);

    const std::size_t m = features.upper.size();
    const auto held_out = std::min(
        m, static_cast<std::size_t>(std::llround(cfg.holdout * static_cast<double>(m))));
    const std::size_t train_count = m - held_out;

    const std::span<const UpperFeature> X(features.upper.data(), train_count);
    const std::span<const LowerFeature> Y(features.lower.data(), train_count);
    Identification identification = identify(X, Y);
    std::optional<ResidualStats> holdout_residuals;
    if (held_out > 0) {
        holdout_residuals = residual_stats(
            identification.map, std::span<const UpperFeature>(features.upper).subspan(train_count),
            std::span<const LowerFeature>(features.lower).subspan(train_count));
    }
    ClusterModel clusters = cluster_features(X, Y, cfg.cluster);
    RawReferences raw = select_representative(clusters, Y, cycles);
    ReferenceSet references = fit_references(raw, cfg.fit_order);
    return TrainedModels{std::move(cycles),      std::move(band),     std::move(features),
                         train_count,            std::move(identification),
                         std::move(holdout_residuals), std::move(clusters), std::move(raw),
                         std::move(references)};
}

// ---------------------------------------------------------------------------

std::vector<const CycleEmission*> PipelineOutput::timeline() const {
    std::vector<const CycleEmission*> all;
    for (const auto& e : emissions) all.push_back(&e);
    for (const auto& e : holds) all.push_back(&e);
    std::sort(all.begin(), all.end(),
              [](const CycleEmission* a, const CycleEmission* b) { return a->emit_cycle < b->emit_cycle; });
    return all;
}

namespace {

void play_back(CycleEmission& e, const ReferenceSet& refs, std::size_t count, double fs,
               double nominal_period) {
    e.times.resize(count);
    e.phases.resize(count);
    e.hip.resize(count);
    e.knee.resize(count);
    for (std::size_t s = 0; s < count; ++s) {
        double phase = static_cast<double>(s) / (fs * nominal_period);
        phase -= std::floor(phase);
        const auto [h, k] = restore_at(e.weights.a, refs, phase);
        e.times[s] = static_cast<double>(e.start_sample + s) / fs;
        e.phases[s] = phase;
        e.hip[s] = h;
        e.knee[s] = k;
    }
}

}  // namespace

PipelineOutput run_pipeline(const GaitRecording& recording, const PipelineModels& models,
                            const PipelineConfig& cfg) {
    if (!models.band) throw Error(ErrorCode::ModelMissing, "change-rate band");
    if (!models.map) throw Error(ErrorCode::ModelMissing, "linear map");
    if (!models.references) throw Error(ErrorCode::ModelMissing, "reference set");
    if (!models.map->finite()) throw Error(ErrorCode::ModelMissing, "linear map is not finite");
    if (!(cfg.nominal_period > 0.0)) throw Error(ErrorCode::InvalidParams, "nominal period must be > 0");
    const ReferenceSet& refs = *models.references;

    PipelineOutput out;
    out.cycles = segment_cycles(recording, cfg.segmentation);
    out.sample_rate = recording.sample_rate();
    out.nominal_period = cfg.nominal_period;
    const double fs = out.sample_rate;
    const auto nominal_samples = static_cast<std::size_t>(std::llround(cfg.nominal_period * fs));

    std::optional<std::size_t> previous;
    for (std::size_t j = 0; j < out.cycles.size(); ++j) {
        const GaitCycle& cycle = out.cycles[j];
        const std::size_t start = cycle.end_sample;
        const std::size_t count = j + 1 < out.cycles.size()
                                      ? out.cycles[j + 1].end_sample - out.cycles[j + 1].start_sample
                                      : nominal_samples;
        CycleEmission e;
        e.input_cycle = cycle.index;
        e.emit_cycle = cycle.index + 1;
        e.start_sample = start;
        try {
            const UpperFeature x = build_upper_feature(cycle, *models.band);
            e.upper = x.x;
            e.mapped = apply_map(*models.map, x);
            e.weights = solve_weights(e.mapped, refs);
        } catch (const Error& err) {
            if (err.code() != ErrorCode::FeatureIncomplete) throw;
            out.skipped.push_back({cycle.index, err.what()});
            if (previous) {
                CycleEmission hold = out.emissions[*previous];
                hold.held = true;
                hold.input_cycle = cycle.index;
                hold.emit_cycle = cycle.index + 1;
                hold.start_sample = start;
                play_back(hold, refs, count, fs, cfg.nominal_period);
                out.holds.push_back(std::move(hold));
            }
            continue;
        }
        play_back(e, refs, count, fs, cfg.nominal_period);
        out.emissions.push_back(std::move(e));
        previous = out.emissions.size() - 1;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Lags

namespace {

struct CurvePair {
    std::span<const double> a;
    std::span<const double> b;
};

// Integer shift s in (-N/2, N/2] maximizing sum over pairs of the
// normalized circular correlation sum_i a[i] b[i - s].
long best_shift(std::span<const CurvePair> pairs) {
    const std::size_t n = pairs.front().a.size();
    std::vector<std::vector<double>> as, bs;
    std::vector<double> weight;
    for (const CurvePair& p : pairs) {
        if (p.a.size() != n || p.b.size() != n) {
            throw Error(ErrorCode::InvalidParams, "curves must share one phase grid");
        }
        const double ma = detail::mean(p.a), mb = detail::mean(p.b);
        std::vector<double> a(n), b(n);
        double na = 0.0, nb = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            a[i] = p.a[i] - ma;
            b[i] = p.b[i] - mb;
            na += a[i] * a[i];
            nb += b[i] * b[i];
        }
        weight.push_back(na > 0.0 && nb > 0.0 ? 1.0 / std::sqrt(na * nb) : 0.0);
        as.push_back(std::move(a));
        bs.push_back(std::move(b));
    }
    long best = 0;
    double best_score = -std::numeric_limits<double>::infinity();
    const long N = static_cast<long>(n);
    // scan shifts by increasing magnitude so ties resolve toward zero lag
    for (long step = 0; step <= N / 2; ++step) {
        for (long s : {step, -step}) {
            if (s < 0 && 2 * step >= N) continue;
            double score = 0.0;
            for (std::size_t p = 0; p < as.size(); ++p) {
                double acc = 0.0;
                for (long i = 0; i < N; ++i) {
                    const long k = ((i - s) % N + N) % N;
                    acc += as[p][static_cast<std::size_t>(i)] * bs[p][static_cast<std::size_t>(k)];
                }
                score += weight[p] * acc;
            }
            if (score > best_score + 1e-12) {
                best_score = score;
                best = s;
            }
            if (step == 0) break;
        }
    }
    return best;
}

double as_fraction(long shift, std::size_t n) {
    return static_cast<double>(shift) / static_cast<double>(n);
}

PhaseStats stats_of(std::vector<double> lags) {
    PhaseStats s;
    s.mean = detail::mean(lags);
    s.std = detail::stddev(lags);
    s.per_cycle = std::move(lags);
    return s;
}

std::array<CurvePair, 2> lower_pairs(const LowerCurves& a, const LowerCurves& b) {
    return {CurvePair{a.hip, b.hip}, CurvePair{a.knee, b.knee}};
}

}  // namespace

double circular_lag(std::span<const double> a, std::span<const double> b) {
    if (a.size() < 2) throw Error(ErrorCode::TooShort, "lag needs at least 2 grid points");
    const std::array<CurvePair, 1> pair{CurvePair{a, b}};
    return as_fraction(best_shift(pair), a.size());
}

PhaseStats phase_error(std::span<const LowerCurves> output, std::span<const LowerCurves> original) {
    if (output.size() != original.size()) throw Error(ErrorCode::InvalidParams, "unpaired cycles");
    if (output.size() < 2) throw Error(ErrorCode::TooFewCycles, "phase error needs >= 2 cycles");
    std::vector<double> lags;
    for (std::size_t c = 0; c < output.size(); ++c) {
        const auto pairs = lower_pairs(output[c], original[c]);
        lags.push_back(as_fraction(best_shift(pairs), output[c].hip.size()));
    }
    return stats_of(std::move(lags));
}

AmplitudeStats amplitude_error(std::span<const LowerCurves> output,
                               std::span<const LowerCurves> original) {
    if (output.size() != original.size()) throw Error(ErrorCode::InvalidParams, "unpaired cycles");
    if (output.empty()) throw Error(ErrorCode::TooFewCycles, "amplitude error needs >= 1 cycle");
    std::vector<double> hip, knee;
    for (std::size_t c = 0; c < output.size(); ++c) {
        const auto pairs = lower_pairs(output[c], original[c]);
        const long s = best_shift(pairs);
        const long n = static_cast<long>(output[c].hip.size());
        for (long i = 0; i < n; ++i) {
            const auto k = static_cast<std::size_t>(((i + s) % n + n) % n);
            const auto at = static_cast<std::size_t>(i);
            hip.push_back(output[c].hip[k] - original[c].hip[at]);
            knee.push_back(output[c].knee[k] - original[c].knee[at]);
        }
    }
    AmplitudeStats a;
    a.hip = {detail::mean(hip), detail::stddev(hip)};
    a.knee = {detail::mean(knee), detail::stddev(knee)};
    a.samples = hip.size();
    return a;
}

PhaseStats phase_difference(std::span<const std::vector<double>> upper,
                            std::span<const std::vector<double>> lower) {
    if (upper.size() != lower.size()) throw Error(ErrorCode::InvalidParams, "unpaired cycles");
    if (upper.size() < 2) throw Error(ErrorCode::TooFewCycles, "phase difference needs >= 2 cycles");
    std::vector<double> lags;
    for (std::size_t c = 0; c < upper.size(); ++c) lags.push_back(circular_lag(lower[c], upper[c]));
    return stats_of(std::move(lags));
}

ErrorReport analyze_run(const PipelineOutput& output, const ChangeRateBand* band) {
    const auto& cycles = output.cycles;
    if (cycles.empty()) throw Error(ErrorCode::TooFewCycles, "run has no cycles");
    const std::size_t n = cycles.front().grid_size();

    std::vector<LowerCurves> out_curves, original;
    std::vector<std::vector<double>> shoulder, emitted_hip;
    std::vector<Vec4> residuals;
    for (const CycleEmission& e : output.emissions) {
        if (e.emit_cycle >= cycles.size() || e.hip.size() < 2) continue;
        const GaitCycle& now = cycles[e.emit_cycle];
        const GaitCycle& source = cycles[e.input_cycle];
        LowerCurves o{resample_cycle(e.hip, n), resample_cycle(e.knee, n)};
        original.push_back({source.curve(Joint::Hip), source.curve(Joint::Knee)});
        shoulder.push_back(now.curve(Joint::Shoulder));
        emitted_hip.push_back(o.hip);
        out_curves.push_back(std::move(o));
        if (band != nullptr) {
            try {
                residuals.push_back(e.mapped - build_lower_feature(source, *band).y);
            } catch (const Error& err) {
                if (err.code() != ErrorCode::FeatureIncomplete) throw;
            }
        }
    }

    ErrorReport r;
    r.compared_cycles = out_curves.size();
    r.phase_error = phase_error(out_curves, original);
    r.amplitude_error = amplitude_error(out_curves, original);
    r.phase_difference = phase_difference(shoulder, emitted_hip);

    std::vector<std::vector<double>> all_shoulder, all_hip;
    for (const GaitCycle& c : cycles) {
        all_shoulder.push_back(c.curve(Joint::Shoulder));
        all_hip.push_back(c.curve(Joint::Hip));
    }
    r.baseline = phase_difference(all_shoulder, all_hip);

    if (residuals.size() >= 2) {
        ResidualStats s;
        s.count = residuals.size();
        for (const Vec4& d : residuals) s.mean += d;
        s.mean /= static_cast<double>(s.count);
        for (const Vec4& d : residuals) s.std += (d - s.mean).cwiseProduct(d - s.mean);
        s.std = (s.std / static_cast<double>(s.count)).cwiseSqrt();
        r.mapping_residual = s;
    }
    return r;
}

std::string format_error_report(std::span<const ErrorReport> experiments) {
    std::string out = "metric,joint,mean,std\n";
    auto row = [&out](const std::string& metric, std::string_view joint, double mean, double std) {
        out += metric;
        out += ',';
        out += joint;
        out += ',';
        detail::append_double(out, mean);
        out += ',';
        detail::append_double(out, std);
        out += '\n';
    };
    for (std::size_t i = 0; i < experiments.size(); ++i) {
        const ErrorReport& r = experiments[i];
        const std::string label = "experiment" + std::to_string(i + 1) + "/";
        if (r.mapping_residual) {
            for (int j = 0; j < 4; ++j) {
                row(label + "mapping_residual_deg", "y" + std::to_string(j + 1),
                    r.mapping_residual->mean[j], r.mapping_residual->std[j]);
            }
        }
        row(label + "phase_error_frac", "lower", r.phase_error.mean, r.phase_error.std);
        row(label + "phase_error_cycle_deg", "lower", 360.0 * r.phase_error.mean,
            360.0 * r.phase_error.std);
        row(label + "amplitude_error_deg", "hip", r.amplitude_error.hip.mean, r.amplitude_error.hip.std);
        row(label + "amplitude_error_deg", "knee", r.amplitude_error.knee.mean,
            r.amplitude_error.knee.std);
    }

    std::vector<double> pooled;
    for (const ErrorReport& r : experiments) {
        pooled.insert(pooled.end(), r.baseline.per_cycle.begin(), r.baseline.per_cycle.end());
    }
    const double base_mean = detail::mean(pooled), base_std = detail::stddev(pooled);
    for (double scale : {1.0, 360.0}) {
        const std::string metric = scale == 1.0 ? "phase_difference_frac" : "phase_difference_cycle_deg";
        row(metric, "original", scale * base_mean, scale * base_std);
        for (std::size_t i = 0; i < experiments.size(); ++i) {
            row(metric, "experiment" + std::to_string(i + 1), scale * experiments[i].phase_difference.mean,
                scale * experiments[i].phase_difference.std);
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Run directory

std::string format_trajectory(const PipelineOutput& output) {
    std::string out = "emit_cycle,phase,hip_deg,knee_deg\n";
    for (const CycleEmission* e : output.timeline()) {
        const std::string prefix = std::to_string(e->emit_cycle) + ',';
        for (std::size_t s = 0; s < e->hip.size(); ++s) {
            out += prefix;
            detail::append_double(out, e->phases[s]);
            out += ',';
            detail::append_double(out, e->hip[s]);
            out += ',';
            detail::append_double(out, e->knee[s]);
            out += '\n';
        }
    }
    return out;
}

namespace {

constexpr std::string_view kFeaturesHeader =
    "input_cycle,emit_cycle,status,x1,x2,x3,x4,y1,y2,y3,y4,a1,a2,a3,a4,condition";

std::string format_features(const PipelineOutput& output) {
    struct Row {
        std::size_t input;
        std::string text;
    };
    std::vector<Row> rows;
    auto vec = [](std::string& s, const Vec4& v) {
        for (int i = 0; i < 4; ++i) {
            s += ',';
            detail::append_double(s, v[i]);
        }
    };
    for (const CycleEmission* e : output.timeline()) {
        std::string s = std::to_string(e->input_cycle) + ',' + std::to_string(e->emit_cycle) +
                        (e->held ? ",held" : ",emitted");
        vec(s, e->upper);
        vec(s, e->mapped);
        vec(s, e->weights.a);
        s += ',';
        detail::append_double(s, e->weights.condition);
        rows.push_back({e->input_cycle, std::move(s)});
    }
    for (const SkippedCycle& sk : output.skipped) {
        bool has_hold = std::any_of(output.holds.begin(), output.holds.end(),
                                    [&](const CycleEmission& h) { return h.input_cycle == sk.cycle; });
        if (has_hold) continue;
        std::string s = std::to_string(sk.cycle) + ',' + std::to_string(sk.cycle + 1) + ",skipped";
        for (int i = 0; i < 13; ++i) s += ",0";
        rows.push_back({sk.cycle, std::move(s)});
    }
    std::stable_sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) { return a.input < b.input; });
    std::string out(kFeaturesHeader);
    out += '\n';
    for (const Row& r : rows) out += r.text + '\n';
    return out;
}

std::size_t parse_index(std::string_view s) {
    auto d = detail::parse_double(s);
    if (!d || *d < 0.0) throw Error(ErrorCode::BadModelFile, "bad index '" + std::string(s) + "'");
    return static_cast<std::size_t>(*d);
}

double parse_number(std::string_view s) {
    auto d = detail::parse_double(s);
    if (!d) throw Error(ErrorCode::BadModelFile, "bad number '" + std::string(s) + "'");
    return *d;
}

std::filesystem::path need(const std::filesystem::path& p) {
    if (!std::filesystem::exists(p)) throw Error(ErrorCode::ModelMissing, p.string() + " not found");
    return p;
}

}  // namespace

void write_run(const std::filesystem::path& dir, const GaitRecording& recording,
               const ChangeRateBand& band, const PipelineOutput& output,
               const SegmentationConfig& seg) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw Error(ErrorCode::Io, "cannot create " + dir.string());

    write_recording(dir / "input_recording.csv", recording);
    save_band(dir / "band.txt", band);

    std::string run = "sample_rate = " + detail::format_double(output.sample_rate) + '\n';
    run += "nominal_period = " + detail::format_double(output.nominal_period) + '\n';
    run += "grid_size = " + std::to_string(seg.grid_size) + '\n';
    run += "smoothing_fraction = " + detail::format_double(seg.smoothing_fraction) + '\n';
    run += "min_spacing_fraction = " + detail::format_double(seg.min_spacing_fraction) + '\n';
    run += "curve_smoothing = " + std::to_string(seg.curve_smoothing) + '\n';
    detail::write_file_atomic(dir / "run.txt", run);

    std::string cycles = "cycle_index,start_sample,end_sample\n";
    for (const GaitCycle& c : output.cycles) {
        cycles += std::to_string(c.index) + ',' + std::to_string(c.start_sample) + ',' +
                  std::to_string(c.end_sample) + '\n';
    }
    detail::write_file_atomic(dir / "cycles.csv", cycles);
    detail::write_file_atomic(dir / "features.csv", format_features(output));
    detail::write_file_atomic(dir / "trajectory.csv", format_trajectory(output));
}

RunDirectory load_run(const std::filesystem::path& dir) {
    GaitRecording rec = load_recording(need(dir / "input_recording.csv"));
    ChangeRateBand band = load_band(need(dir / "band.txt"));

    std::map<std::string, std::string, std::less<>> settings;
    const std::string run_text = detail::read_file(need(dir / "run.txt"));
    for (std::string_view line : detail::split_lines(run_text)) {
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) continue;
        settings[std::string(detail::trim(line.substr(0, eq)))] = std::string(detail::trim(line.substr(eq + 1)));
    }
    auto setting = [&](const char* key) {
        auto it = settings.find(key);
        if (it == settings.end()) throw Error(ErrorCode::BadModelFile, std::string("run.txt lacks ") + key);
        return parse_number(it->second);
    };
    SegmentationConfig seg;
    seg.grid_size = static_cast<std::size_t>(setting("grid_size"));
    seg.smoothing_fraction = setting("smoothing_fraction");
    seg.min_spacing_fraction = setting("min_spacing_fraction");
    seg.curve_smoothing = static_cast<std::size_t>(setting("curve_smoothing"));

    PipelineOutput out;
    out.sample_rate = rec.sample_rate();
    out.nominal_period = setting("nominal_period");

    std::optional<GaitRecording> smoothed;
    if (seg.curve_smoothing > 1) smoothed = smooth_recording(rec, seg.curve_smoothing);
    const GaitRecording& source = smoothed ? *smoothed : rec;
    const std::string cycle_text = detail::read_file(need(dir / "cycles.csv"));
    const auto cycle_lines = detail::split_lines(cycle_text);
    for (std::size_t r = 1; r < cycle_lines.size(); ++r) {
        const auto f = detail::split(cycle_lines[r], ',');
        if (f.size() != 3) throw Error(ErrorCode::BadModelFile, "cycles.csv row");
        out.cycles.push_back(
            make_cycle(source, parse_index(f[0]), parse_index(f[1]), parse_index(f[2]), seg.grid_size));
    }

    // trajectory rows grouped by emission cycle
    std::map<std::size_t, CycleEmission> by_emit;
    const std::string traj_text = detail::read_file(need(dir / "trajectory.csv"));
    const auto traj = detail::split_lines(traj_text);
    for (std::size_t r = 1; r < traj.size(); ++r) {
        const auto f = detail::split(traj[r], ',');
        if (f.size() != 4) throw Error(ErrorCode::BadModelFile, "trajectory.csv row");
        CycleEmission& e = by_emit[parse_index(f[0])];
        e.phases.push_back(parse_number(f[1]));
        e.hip.push_back(parse_number(f[2]));
        e.knee.push_back(parse_number(f[3]));
    }

    const std::string feat_text = detail::read_file(need(dir / "features.csv"));
    const auto feats = detail::split_lines(feat_text);
    for (std::size_t r = 1; r < feats.size(); ++r) {
        const auto f = detail::split(feats[r], ',');
        if (f.size() != 16) throw Error(ErrorCode::BadModelFile, "features.csv row");
        const std::size_t input = parse_index(f[0]);
        const std::size_t emit = parse_index(f[1]);
        const std::string_view status = f[2];
        if (status == "skipped") {
            out.skipped.push_back({input, "FeatureIncomplete"});
            continue;
        }
        auto it = by_emit.find(emit);
        if (it == by_emit.end()) throw Error(ErrorCode::BadModelFile, "emission without trajectory rows");
        CycleEmission e = std::move(it->second);
        e.input_cycle = input;
        e.emit_cycle = emit;
        e.held = status == "held";
        for (int i = 0; i < 4; ++i) {
            e.upper[i] = parse_number(f[3 + static_cast<std::size_t>(i)]);
            e.mapped[i] = parse_number(f[7 + static_cast<std::size_t>(i)]);
            e.weights.a[i] = parse_number(f[11 + static_cast<std::size_t>(i)]);
        }
        e.weights.condition = parse_number(f[15]);
        e.weights.ill_conditioned = e.weights.condition > kIllConditionedReference;
        if (input < out.cycles.size()) e.start_sample = out.cycles[input].end_sample;
        e.times.resize(e.hip.size());
        for (std::size_t s = 0; s < e.hip.size(); ++s) {
            e.times[s] = static_cast<double>(e.start_sample + s) / out.sample_rate;
        }
        if (e.held) {
            out.skipped.push_back({input, "FeatureIncomplete"});
            out.holds.push_back(std::move(e));
        } else {
            out.emissions.push_back(std::move(e));
        }
    }
    return RunDirectory{std::move(rec), std::move(band), std::move(out), seg};
}

}  // namespace limbmap

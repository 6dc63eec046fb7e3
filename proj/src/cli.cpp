#include "limbmap/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <filesystem>
#include <iostream>

#include "limbmap/error.hpp"
#include "limbmap/plot.hpp"
#include "limbmap/simulation.hpp"
#include "text_util.hpp"

namespace limbmap {

namespace {

namespace fs = std::filesystem;

struct SegmentationFlags {
    SegmentationConfig config;

    void attach(CLI::App* app) {
        app->add_option("--grid", config.grid_size, "phase grid points per cycle")
            ->check(CLI::Range(std::size_t{10}, std::size_t{100000}));
        app->add_option("--smoothing", config.smoothing_fraction,
                        "segmentation moving-average window, fraction of the period")
            ->check(CLI::Range(0.0, 0.5));
        app->add_option("--curve-smoothing", config.curve_smoothing,
                        "moving-average window (samples) applied to every trace before cutting")
            ->check(CLI::Range(std::size_t{1}, std::size_t{1000}));
    }
};

void require_file(const fs::path& p) {
    if (!fs::is_regular_file(p)) throw Error(ErrorCode::ModelMissing, p.string() + " not found");
}

int run_synth(const SynthParams& params, const fs::path& out) {
    const SyntheticRecording s = synthesize_recording(params);
    write_recording(out, s.recording);
    write_sidecar(sidecar_path(out), s.truth);
    std::cerr << "wrote " << out.string() << " (" << s.truth.size() << " cycles)\n";
    return 0;
}

int run_identify(const fs::path& rec_path, const fs::path& map_out, const fs::path& band_out,
                 const fs::path& refs_out, const TrainingConfig& cfg) {
    require_file(rec_path);
    const GaitRecording rec = load_recording(rec_path);
    const TrainedModels t = train_models(rec, cfg);
    save_map(map_out, t.identification.map);
    save_band(band_out, t.band);
    save_references(refs_out, t.references);

    std::cerr << t.cycles.size() << " cycles, " << t.features.upper.size() << " featured, "
              << t.features.skipped.size() << " skipped, " << t.train_count << " used for the fit\n";
    std::cerr << "design condition " << t.identification.condition << ", reference condition "
              << t.references.condition() << ", curve-fit rms " << t.references.fit_rms() << '\n';
    std::cout << format_residual_table(t.identification.residuals);
    if (t.holdout_residuals) {
        std::cout << "\nheld-out cycles (" << t.holdout_residuals->count << ")\n"
                  << format_residual_table(*t.holdout_residuals);
    }
    return 0;
}

int run_simulate(const fs::path& rec_path, const fs::path& map_path, const fs::path& band_path,
                 const fs::path& refs_path, const fs::path& out_dir, const PipelineConfig& cfg) {
    for (const fs::path& p : {rec_path, map_path, band_path, refs_path}) require_file(p);
    const GaitRecording rec = load_recording(rec_path);
    PipelineModels models;
    models.band = load_band(band_path);
    models.map = load_map(map_path);
    models.references = load_references(refs_path);
    const PipelineOutput out = run_pipeline(rec, models, cfg);
    for (const SkippedCycle& s : out.skipped) {
        std::cerr << "cycle " << s.cycle << " skipped: " << s.reason << '\n';
    }
    write_run(out_dir, rec, *models.band, out, cfg.segmentation);
    std::cerr << out.emissions.size() << " cycles emitted, " << out.holds.size() << " held, into "
              << out_dir.string() << '\n';
    return 0;
}

int run_analyze(const std::vector<fs::path>& dirs, fs::path report) {
    std::vector<ErrorReport> reports;
    for (const fs::path& d : dirs) {
        const RunDirectory run = load_run(d);
        reports.push_back(analyze_run(run.output, &run.band));
        std::cerr << d.string() << ": " << reports.back().compared_cycles << " cycles compared\n";
    }
    if (report.empty()) report = dirs.front() / "error_report.csv";
    detail::write_file_atomic(report, format_error_report(reports));
    std::cerr << "wrote " << report.string() << '\n';
    return 0;
}

int run_plot(const fs::path& dir) {
    const RunDirectory run = load_run(dir);
    detail::write_file_atomic(dir / "restoration.svg", restoration_figure(run));
    detail::write_file_atomic(dir / "coordination.svg", coordination_figure(run));
    std::cerr << "wrote restoration.svg and coordination.svg to " << dir.string() << '\n';
    return 0;
}

void add_config(CLI::App* app) {
    app->add_option("--config", "key = value file with the same keys as the flags");
}

// Turns the subcommand's `--config FILE` entries into flags placed before the
// explicit ones. Keys already given on the command line are left alone and
// keys the subcommand does not know are ignored.
std::vector<std::string> expand_config(const CLI::App& app, std::vector<std::string> args) {
    if (args.size() < 3) return args;
    const CLI::App* sub = app.get_subcommand_no_throw(args[1]);
    if (sub == nullptr) return args;
    std::vector<std::string> files;
    for (std::size_t i = 2; i < args.size(); ++i) {
        if (args[i] == "--config" && i + 1 < args.size()) files.push_back(args[i + 1]);
        else if (args[i].rfind("--config=", 0) == 0) files.push_back(args[i].substr(9));
    }
    auto given = [&](const std::string& flag) {
        for (std::size_t i = 2; i < args.size(); ++i) {
            if (args[i] == flag || args[i].rfind(flag + "=", 0) == 0) return true;
        }
        return false;
    };
    std::vector<std::string> injected;
    for (const std::string& file : files) {
        if (!fs::is_regular_file(file)) throw CLI::FileError::Missing(file);
        const std::string text = detail::read_file(file);
        for (std::string_view line : detail::split_lines(text)) {
            line = detail::trim(line);
            if (line.empty() || line.front() == '#' || line.front() == ';' || line.front() == '[') continue;
            const auto eq = line.find('=');
            if (eq == std::string_view::npos) throw CLI::ConversionError("config line without '=': " + std::string(line));
            std::string key(detail::trim(line.substr(0, eq)));
            std::string_view value = detail::trim(line.substr(eq + 1));
            if (value.size() >= 2 && (value.front() == '"' || value.front() == '\'') && value.back() == value.front()) {
                value = value.substr(1, value.size() - 2);
            }
            std::replace(key.begin(), key.end(), '_', '-');
            const std::string flag = "--" + key;
            if (flag == "--config" || sub->get_option_no_throw(flag) == nullptr || given(flag)) continue;
            injected.push_back(flag);
            injected.emplace_back(value);
        }
    }
    args.insert(args.begin() + 2, injected.begin(), injected.end());
    return args;
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
    CLI::App app{"Upper-limb to lower-limb gait mapping pipeline", "limbmap"};
    app.require_subcommand(1);

    // synth
    SynthParams sp;
    fs::path synth_out;
    auto* synth = app.add_subcommand("synth", "write a synthetic recording and its sidecar");
    add_config(synth);
    synth->add_option("--out", synth_out, "recording CSV path")->required();
    synth->add_option("--seed", sp.seed, "random seed");
    synth->add_option("--cycles", sp.n_cycles, "number of gait cycles")
        ->check(CLI::Range(std::size_t{1}, std::size_t{1000000}));
    synth->add_option("--period", sp.base_period, "base cycle period (s)")->check(CLI::PositiveNumber);
    synth->add_option("--sample-rate", sp.sample_rate, "samples per second")->check(CLI::PositiveNumber);
    synth->add_option("--period-jitter", sp.period_jitter, "fractional std of the period")
        ->check(CLI::NonNegativeNumber);
    synth->add_option("--amplitude-jitter", sp.amplitude_jitter, "fractional std of the amplitude")
        ->check(CLI::NonNegativeNumber);
    synth->add_option("--offset-jitter", sp.offset_jitter, "std of the per-cycle offset (deg)")
        ->check(CLI::NonNegativeNumber);
    synth->add_option("--coupling", sp.coupling, "upper/lower jitter correlation")
        ->check(CLI::Range(0.0, 1.0));
    synth->add_option("--noise", sp.noise_std, "additive noise std (deg)")->check(CLI::NonNegativeNumber);
    synth->add_option("--spike-rate", sp.spike_rate, "spikes per cycle per joint")
        ->check(CLI::NonNegativeNumber);
    synth->add_option("--spike-scale", sp.spike_scale, "spike height in first-harmonic amplitudes")
        ->check(CLI::NonNegativeNumber);

    // identify
    TrainingConfig tc;
    SegmentationFlags id_seg;
    fs::path id_rec, id_map, id_band, id_refs;
    std::string space = "paired";
    auto* ident = app.add_subcommand("identify", "fit band, linear map and reference curves");
    add_config(ident);
    ident->add_option("--rec", id_rec, "recording CSV")->required();
    ident->add_option("--out-map", id_map, "linear map output")->required();
    ident->add_option("--out-band", id_band, "change-rate band output")->required();
    ident->add_option("--out-refs", id_refs, "reference set output")->required();
    ident->add_option("--holdout", tc.holdout, "fraction of the last cycles held out")
        ->check(CLI::Range(0.0, 0.95));
    ident->add_option("--q-low", tc.band.q_low, "lower rate percentile")->check(CLI::Range(0.0, 100.0));
    ident->add_option("--q-high", tc.band.q_high, "upper rate percentile")->check(CLI::Range(0.0, 100.0));
    ident->add_option("--k", tc.cluster.k, "number of clusters")
        ->check(CLI::Range(std::size_t{2}, std::size_t{100000}));
    ident->add_option("--seed", tc.cluster.seed, "clustering seed");
    ident->add_option("--fit-order", tc.fit_order, "Fourier order of the reference curves")
        ->check(CLI::Range(std::size_t{1}, std::size_t{20}));
    ident->add_option("--cluster-space", space, "paired or pooled")
        ->check(CLI::IsMember({"paired", "pooled"}));
    id_seg.attach(ident);

    // simulate
    PipelineConfig pc;
    SegmentationFlags sim_seg;
    fs::path sim_rec, sim_map, sim_band, sim_refs, sim_dir;
    auto* sim = app.add_subcommand("simulate", "run the per-cycle pipeline and write trajectories");
    add_config(sim);
    sim->add_option("--rec", sim_rec, "recording CSV")->required();
    sim->add_option("--map", sim_map, "linear map file")->required();
    sim->add_option("--band", sim_band, "change-rate band file")->required();
    sim->add_option("--refs", sim_refs, "reference set file")->required();
    sim->add_option("--out-dir", sim_dir, "run directory")->required();
    sim->add_option("--nominal-period", pc.nominal_period, "output playback period (s)")
        ->check(CLI::PositiveNumber);
    sim_seg.attach(sim);

    // analyze
    std::vector<fs::path> an_dirs;
    fs::path an_report;
    auto* analyze = app.add_subcommand("analyze", "write the restoration and coordination error report");
    add_config(analyze);
    analyze->add_option("--out-dir", an_dirs, "run directories, one per experiment")->required();
    analyze->add_option("--report", an_report, "report CSV (default: first run directory)");

    // plot
    fs::path plot_dir;
    auto* plot = app.add_subcommand("plot", "write SVG figures into a run directory");
    add_config(plot);
    plot->add_option("--out-dir", plot_dir, "run directory")->required();

    try {
        const std::vector<std::string> args = expand_config(app, std::vector<std::string>(argv, argv + argc));
        std::vector<const char*> expanded;
        for (const std::string& a : args) expanded.push_back(a.c_str());
        app.parse(static_cast<int>(expanded.size()), expanded.data());
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e, std::cerr, std::cerr);
        return 1;
    }

    try {
        if (*synth) return run_synth(sp, synth_out);
        if (*ident) {
            tc.segmentation = id_seg.config;
            tc.cluster.space = space == "pooled" ? ClusterSpace::Pooled : ClusterSpace::Paired;
            if (tc.band.q_low >= tc.band.q_high) {
                std::cerr << "--q-low must be below --q-high\n";
                return 1;
            }
            return run_identify(id_rec, id_map, id_band, id_refs, tc);
        }
        if (*sim) {
            pc.segmentation = sim_seg.config;
            return run_simulate(sim_rec, sim_map, sim_band, sim_refs, sim_dir, pc);
        }
        if (*analyze) return run_analyze(an_dirs, an_report);
        if (*plot) return run_plot(plot_dir);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 1;
}

int run_cli(const std::vector<std::string>& args) {
    std::vector<const char*> argv;
    argv.push_back("limbmap");
    for (const std::string& a : args) argv.push_back(a.c_str());
    return run_cli(static_cast<int>(argv.size()), argv.data());
}

}  // namespace limbmap

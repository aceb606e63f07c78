#include "bvq/cli.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>

#include <json.hpp>

#include "bvq/config.hpp"
#include "bvq/parallel.hpp"
#include "bvq/swe.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace bvq::cli {

namespace {

void prepare_out_dir(const std::string& path, bool force) {
    fs::path p(path);
    if (fs::exists(p)) {
        if (!fs::is_directory(p)) config_error("--out '" + path + "' exists and is not a directory");
        if (!fs::is_empty(p) && !force)
            config_error("--out '" + path + "' is not empty; pass --force to overwrite");
    } else {
        std::error_code ec;
        fs::create_directories(p, ec);
        if (ec) data_error("cannot create '" + path + "': " + ec.message());
    }
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream os(path);
    if (!os) data_error("cannot write '" + path + "'");
    os << text;
    if (!os) data_error("write failed for '" + path + "'");
}

NormTensors stats_to_tensors(const NormStats& s) {
    NormTensors t;
    t.mean = Tensor({static_cast<uint32_t>(s.mean.size())}, std::vector<float>(s.mean));
    t.std = Tensor({static_cast<uint32_t>(s.std.size())}, std::vector<float>(s.std));
    return t;
}

NormStats tensors_to_stats(const NormTensors& t) {
    NormStats s;
    s.mean.assign(t.mean.data.begin(), t.mean.data.end());
    s.std.assign(t.std.data.begin(), t.std.data.end());
    return s;
}

void check_dataset_matches(const ExperimentConfig& cfg, const Dataset& ds, const std::string& what) {
    if (ds.h != cfg.data.grid || ds.w != cfg.data.grid)
        config_error(what + ": dataset grid " + std::to_string(ds.h) + "x" + std::to_string(ds.w) +
                     " does not match config grid " + std::to_string(cfg.data.grid));
    if (ds.t_in != cfg.data.t_in || ds.t_out != cfg.data.t_out)
        config_error(what + ": dataset window (" + std::to_string(ds.t_in) + "," + std::to_string(ds.t_out) +
                     ") does not match config (" + std::to_string(cfg.data.t_in) + "," +
                     std::to_string(cfg.data.t_out) + ")");
}

SpectrumCurve training_reference_spectrum(const Dataset& train) {
    std::vector<SpectrumCurve> curves;
    curves.reserve(train.samples.size());
    for (const SampleWindow& s : train.samples) {
        if (s.provenance != Provenance::Original) continue;
        curves.push_back(energy_spectrum(FieldTensor(s.target, train.dx, train.dy, train.boundary)));
    }
    return mean_spectrum(curves);
}

SpectrumCurve load_spectrum_csv(const std::string& path) {
    std::ifstream is(path);
    if (!is) data_error("cannot open spectrum reference '" + path + "'");
    SpectrumCurve c;
    std::string line;
    std::getline(is, line);  // header
    while (std::getline(is, line)) {
        const size_t comma = line.find(',');
        if (comma == std::string::npos) continue;
        c.energy.push_back(std::stof(line.substr(comma + 1)));
    }
    if (c.energy.empty()) data_error("spectrum reference '" + path + "' has no rows");
    return c;
}

bool scorer_needs_reference(const ExperimentConfig& cfg) {
    const ScorerKind kind = scorer_kind_from_string(cfg.beam.scorer);
    return kind == ScorerKind::SpectrumMatch || (kind == ScorerKind::Composite && cfg.beam.w_spec != 0.0);
}

ScoreConfig make_score_config(const ExperimentConfig& cfg, const SpectrumCurve* reference) {
    ScoreConfig sc;
    sc.kind = scorer_kind_from_string(cfg.beam.scorer);
    sc.w_div = cfg.beam.w_div;
    sc.w_spec = cfg.beam.w_spec;
    if (reference) sc.reference = *reference;
    sc.validate();
    return sc;
}

ScoreFn make_score_fn(const ScoreConfig& sc, const NormStats& stats, const Dataset& ds) {
    return [sc, stats, dx = ds.dx, dy = ds.dy, bnd = ds.boundary](const Tensor& norm_frames) {
        return physics_score(FieldTensor(denormalize(norm_frames, stats), dx, dy, bnd), sc);
    };
}

SelfTrainOptions make_train_options(const ExperimentConfig& cfg, const ScoreConfig& scorer, int threads) {
    const VariantWiring wiring = variant_wiring(cfg.variant());
    SelfTrainOptions opt;
    opt.schedule = cfg.schedule();
    opt.weights = cfg.loss_weights();
    opt.lr = cfg.train.lr;
    opt.batch_size = cfg.train.batch;
    opt.beam_k = wiring.force_beam_width_1 ? 1 : cfg.beam.k;
    opt.scorer = scorer;
    opt.self_training = wiring.self_training;
    opt.scorer_greedy_reference = wiring.scorer_greedy_reference;
    opt.threshold_mode =
        cfg.train.threshold == "quartile" ? ThresholdMode::Quartile : ThresholdMode::Constant;
    opt.threshold_value = cfg.train.threshold_value;
    opt.max_gen_inputs = cfg.train.max_gen_inputs;
    opt.patience = cfg.train.patience;
    opt.val_every = cfg.train.val_every;
    opt.seed = cfg.train.seed;
    opt.threads = threads;
    return opt;
}

struct TrainedRun {
    ModelState model;
    NormStats stats;
    TrainOutcome outcome;
    std::string config_hash;
};

TrainedRun train_into_dir(const ExperimentConfig& cfg, const std::string& data_dir,
                          const std::string& out_dir, int threads) {
    Dataset train_ds = load_dataset((fs::path(data_dir) / "train.bvqd").string());
    Dataset val_ds = load_dataset((fs::path(data_dir) / "val.bvqd").string());
    check_dataset_matches(cfg, train_ds, "train");
    check_dataset_matches(cfg, val_ds, "val");

    const NormStats stats = compute_stats(train_ds);

    SpectrumCurve reference;
    const bool needs_ref = scorer_needs_reference(cfg);
    if (needs_ref) {
        reference = training_reference_spectrum(train_ds);
        write_text((fs::path(out_dir) / "spectrum_ref.csv").string(), reference.to_csv());
    }
    const ScoreConfig scorer = make_score_config(cfg, needs_ref ? &reference : nullptr);

    ModelState model = init_model(cfg.backbone(train_ds.c), cfg.bank_config(), cfg.train.seed);
    const SelfTrainOptions opt = make_train_options(cfg, scorer, threads);

    std::ofstream log_os((fs::path(out_dir) / "log.csv").string());
    if (!log_os) data_error("cannot write training log");
    log_os << EpochLog::csv_header() << "\n";

    ModelState last_model = model;
    TrainOutcome outcome;
    try {
        outcome = run_training(std::move(model), train_ds, val_ds, stats, opt,
                               [&](const ModelState& m, const EpochLog& log) {
                                   log_os << log.csv_row() << "\n";
                                   log_os.flush();
                                   last_model = m;
                                   if (log.epoch % 10 == 0)
                                       std::cout << "[train] epoch " << log.epoch << " loss " << log.train_loss
                                                 << " val " << log.val_mse << " pool " << log.pool_size
                                                 << std::endl;
                               });
    } catch (...) {
        // keep whatever progress existed so the run can be inspected
        save_model((fs::path(out_dir) / "checkpoint.abort.bvqp").string(), last_model,
                   stats_to_tensors(stats));
        throw;
    }

    save_model((fs::path(out_dir) / "checkpoint.bvqp").string(), outcome.model, stats_to_tensors(stats));
    save_config((fs::path(out_dir) / "config.resolved.cfg").string(), cfg);
    if (outcome.pool_size() > 0)
        save_dataset((fs::path(out_dir) / "pool.bvqd").string(), pool_as_dataset(outcome.pool, train_ds));

    json summary;
    summary["config_hash"] = cfg.config_hash();
    summary["variant"] = cfg.train.variant;
    summary["seed"] = cfg.train.seed;
    summary["best_val_mse"] = outcome.best_val_mse;
    summary["best_epoch"] = outcome.best_epoch;
    summary["epochs_run"] = outcome.log.size();
    summary["pool_size"] = outcome.pool_size();
    summary["pool_file"] = outcome.pool_size() > 0 ? "pool.bvqd" : "";
    summary["param_count"] = param_count(cfg.backbone(train_ds.c), cfg.bank_config());
    write_text((fs::path(out_dir) / "summary.json").string(), summary.dump(2) + "\n");

    TrainedRun run;
    run.stats = stats;
    run.outcome = std::move(outcome);
    run.model = run.outcome.model;
    run.config_hash = cfg.config_hash();
    return run;
}

struct LoadedModel {
    ExperimentConfig cfg;
    ModelState model;
    NormStats stats;
    std::string checkpoint_dir;
};

LoadedModel load_model_bundle(const std::string& checkpoint, const std::string& config_path) {
    LoadedModel out;
    out.checkpoint_dir = fs::path(checkpoint).parent_path().string();
    std::string cfg_path = config_path;
    if (cfg_path.empty()) {
        cfg_path = (fs::path(out.checkpoint_dir) / "config.resolved.cfg").string();
        if (!fs::exists(cfg_path))
            config_error("no --config given and '" + cfg_path + "' not found next to the checkpoint");
    }
    out.cfg = load_config(cfg_path);
    auto [model, norm] = load_model(checkpoint, out.cfg.backbone(3), out.cfg.bank_config());
    out.model = std::move(model);
    out.stats = tensors_to_stats(norm);
    return out;
}

struct EvalSeries {
    MetricReport mean;
    std::vector<double> rmse_t, ssim_t, rel_l2_t;
    SpectrumCurve spectrum_pred, spectrum_true;
    uint64_t decode_calls = 0;
};

EvalSeries evaluate_dataset(const ModelState& model, const Dataset& ds, const NormStats& stats,
                            uint32_t beam_k, const ScoreConfig& scorer, int threads) {
    if (ds.samples.empty()) data_error("eval: dataset is empty");
    const size_t n = ds.samples.size();
    std::vector<MetricReport> reports(n);
    std::vector<SpectrumCurve> spec_pred(n), spec_true(n);
    std::vector<std::vector<double>> rmse_t(n), ssim_t(n), rel_t(n);

    const uint64_t calls0 = model.decode_calls.n.load();
    parallel_for(n, threads, [&](size_t i) {
        const SampleWindow& s = ds.samples[i];
        const Tensor in_n = normalize(s.input, stats);
        Tensor pred_n;
        if (beam_k <= 1) {
            pred_n = greedy_forecast(model, in_n, ds.t_out);
        } else {
            BeamConfig bc;
            bc.k = beam_k;
            bc.horizon = ds.t_out;
            ScoreConfig sc = scorer;
            if (sc.kind == ScorerKind::NegMseReference)
                sc.reference_frames = denormalize(greedy_forecast(model, in_n, ds.t_out), stats);
            BeamResult res = beam_forecast(in_n, model, bc, make_score_fn(sc, stats, ds));
            pred_n = res.best.frames;
        }
        const Tensor pred = denormalize(pred_n, stats);
        const FieldTensor pred_f(pred, ds.dx, ds.dy, ds.boundary);
        const FieldTensor true_f(s.target, ds.dx, ds.dy, ds.boundary);
        reports[i] = compute_report(pred_f, true_f);
        spec_pred[i] = energy_spectrum(pred_f);
        spec_true[i] = energy_spectrum(true_f);

        const size_t frame = static_cast<size_t>(ds.c) * ds.h * ds.w;
        for (uint32_t t = 0; t < ds.t_out; ++t) {
            Tensor pf({1, ds.c, ds.h, ds.w});
            Tensor tf({1, ds.c, ds.h, ds.w});
            std::copy_n(pred.data.data() + t * frame, frame, pf.data.data());
            std::copy_n(s.target.data.data() + t * frame, frame, tf.data.data());
            rmse_t[i].push_back(std::sqrt(mse(pf, tf)));
            ssim_t[i].push_back(ssim(pf, tf));
            rel_t[i].push_back(rel_l2(pf, tf));
        }
    });

    EvalSeries out;
    out.decode_calls = model.decode_calls.n.load() - calls0;
    auto avg = [&](auto get) {
        double acc = 0.0;
        for (const MetricReport& r : reports) acc += get(r);
        return acc / static_cast<double>(n);
    };
    out.mean.mse = avg([](const MetricReport& r) { return r.mse; });
    out.mean.rmse = std::sqrt(out.mean.mse);
    out.mean.rel_l2 = avg([](const MetricReport& r) { return r.rel_l2; });
    out.mean.ssim = avg([](const MetricReport& r) { return r.ssim; });
    out.mean.mean_abs_divergence = avg([](const MetricReport& r) { return r.mean_abs_divergence; });
    out.mean.tke_pred = avg([](const MetricReport& r) { return r.tke_pred; });
    out.mean.tke_true = avg([](const MetricReport& r) { return r.tke_true; });
    out.mean.tke_rel_error = avg([](const MetricReport& r) { return r.tke_rel_error; });
    out.mean.spectrum_distance = avg([](const MetricReport& r) { return r.spectrum_distance; });

    out.rmse_t.assign(ds.t_out, 0.0);
    out.ssim_t.assign(ds.t_out, 0.0);
    out.rel_l2_t.assign(ds.t_out, 0.0);
    for (size_t i = 0; i < n; ++i)
        for (uint32_t t = 0; t < ds.t_out; ++t) {
            out.rmse_t[t] += rmse_t[i][t] / static_cast<double>(n);
            out.ssim_t[t] += ssim_t[i][t] / static_cast<double>(n);
            out.rel_l2_t[t] += rel_t[i][t] / static_cast<double>(n);
        }
    out.spectrum_pred = mean_spectrum(spec_pred);
    out.spectrum_true = mean_spectrum(spec_true);
    return out;
}

void write_eval_outputs(const std::string& out_dir, const EvalSeries& series, const std::string& config_hash,
                        uint64_t seed, const std::string& variant, uint32_t beam_k, size_t samples) {
    write_text((fs::path(out_dir) / "report.csv").string(),
               MetricReport::csv_header() + "\n" + series.mean.csv_row() + "\n");

    json report;
    report["metrics"] = json::parse(series.mean.to_json());
    report["config_hash"] = config_hash;
    report["seed"] = seed;
    report["variant"] = variant;
    report["beam_k"] = beam_k;
    report["samples"] = samples;
    report["decode_calls"] = series.decode_calls;
    write_text((fs::path(out_dir) / "report.json").string(), report.dump(2) + "\n");

    std::ostringstream lt;
    lt << "leadtime,rmse,ssim,rel_l2\n";
    lt.precision(9);
    for (size_t t = 0; t < series.rmse_t.size(); ++t)
        lt << (t + 1) << "," << series.rmse_t[t] << "," << series.ssim_t[t] << "," << series.rel_l2_t[t] << "\n";
    write_text((fs::path(out_dir) / "leadtime.csv").string(), lt.str());

    write_text((fs::path(out_dir) / "spectrum_pred.csv").string(), series.spectrum_pred.to_csv());
    write_text((fs::path(out_dir) / "spectrum_true.csv").string(), series.spectrum_true.to_csv());
}

ScoreConfig eval_score_config(const ExperimentConfig& cfg, const std::string& checkpoint_dir) {
    if (!scorer_needs_reference(cfg)) return make_score_config(cfg, nullptr);
    const std::string ref_path = (fs::path(checkpoint_dir) / "spectrum_ref.csv").string();
    SpectrumCurve ref = load_spectrum_csv(ref_path);
    return make_score_config(cfg, &ref);
}

}  // namespace

void gen_data(const GenDataArgs& args) {
    ExperimentConfig cfg = load_config(args.config);
    if (args.seed_set) cfg.data.seed = args.seed;
    prepare_out_dir(args.out, args.force);

    Dataset train_all, val_all, test_all;
    json manifest;
    manifest["config_hash"] = cfg.config_hash();
    manifest["seed"] = cfg.data.seed;
    json traj_info = json::array();

    for (uint32_t traj = 0; traj < cfg.data.trajectories; ++traj) {
        SweParams p;
        p.h = cfg.data.grid;
        p.w = cfg.data.grid;
        p.steps = cfg.data.steps;
        p.dx = cfg.data.dx;
        p.dy = cfg.data.dy;
        p.gravity = cfg.data.gravity;
        p.cfl_target = cfg.data.cfl;
        p.seed = cfg.data.seed + traj;
        FieldTensor field = generate_swe(p);

        const double vol0 = swe_volume(field, 0);
        double max_drift = 0.0;
        for (uint32_t t = 1; t < field.t(); ++t)
            max_drift = std::max(max_drift, std::abs(swe_volume(field, t) - vol0) / std::abs(vol0));
        std::cout << "[gen-data] trajectory " << traj << ": volume drift (max rel) " << max_drift << std::endl;
        if (max_drift > 1e-6)
            numeric_error("gen-data: volume conservation drift " + std::to_string(max_drift) + " exceeds 1e-6");
        traj_info.push_back({{"trajectory", traj}, {"volume_drift_rel", max_drift}});

        SplitFields splits = split_time_blocks(field, cfg.data.train_frac, cfg.data.val_frac);
        auto merge = [&](Dataset& dst, const FieldTensor& f) {
            Dataset d = window_dataset(f, cfg.data.t_in, cfg.data.t_out, cfg.data.stride);
            if (dst.samples.empty())
                dst = std::move(d);
            else
                for (SampleWindow& s : d.samples) dst.push(std::move(s));
        };
        merge(train_all, splits.train);
        merge(val_all, splits.val);
        merge(test_all, splits.test);
    }

    save_dataset((fs::path(args.out) / "train.bvqd").string(), train_all);
    save_dataset((fs::path(args.out) / "val.bvqd").string(), val_all);
    save_dataset((fs::path(args.out) / "test.bvqd").string(), test_all);

    manifest["trajectories"] = traj_info;
    manifest["train_windows"] = train_all.size();
    manifest["val_windows"] = val_all.size();
    manifest["test_windows"] = test_all.size();
    write_text((fs::path(args.out) / "manifest.json").string(), manifest.dump(2) + "\n");
    std::cout << "[gen-data] train/val/test windows: " << train_all.size() << "/" << val_all.size() << "/"
              << test_all.size() << std::endl;
}

void train(const TrainArgs& args) {
    ExperimentConfig cfg = load_config(args.config);
    prepare_out_dir(args.out, args.force);
    const int threads = resolve_threads(args.threads);
    TrainedRun run = train_into_dir(cfg, args.data_dir, args.out, threads);
    std::cout << "[train] best val mse " << run.outcome.best_val_mse << " at epoch " << run.outcome.best_epoch
              << ", pool " << run.outcome.pool_size() << std::endl;
}

void predict(const PredictArgs& args) {
    LoadedModel lm = load_model_bundle(args.checkpoint, args.config);
    prepare_out_dir(args.out, args.force);
    const int threads = resolve_threads(args.threads);

    Dataset ds = load_dataset(args.data);
    check_dataset_matches(lm.cfg, ds, "predict");
    if (args.index >= ds.samples.size())
        config_error("--index " + std::to_string(args.index) + " out of range (dataset has " +
                     std::to_string(ds.samples.size()) + " samples)");
    if (args.chunk != 0 && args.chunk != lm.model.cfg.chunk)
        config_error("--chunk " + std::to_string(args.chunk) +
                     " does not match the trained decoder chunk " + std::to_string(lm.model.cfg.chunk) +
                     "; the chunk size is fixed at training time");

    const uint32_t k = args.beam_k ? args.beam_k : lm.cfg.beam.k;
    const SampleWindow& sample = ds.samples[args.index];
    const Tensor in_n = normalize(sample.input, lm.stats);

    ScoreConfig sc = eval_score_config(lm.cfg, lm.checkpoint_dir);
    BeamConfig bc;
    bc.k = k;
    bc.horizon = ds.t_out;
    bc.threads = threads;
    bc.record_trace = args.trace;

    const uint64_t calls0 = lm.model.decode_calls.n.load();
    BeamResult res = beam_forecast(in_n, lm.model, bc, make_score_fn(sc, lm.stats, ds));
    const uint64_t calls = lm.model.decode_calls.n.load() - calls0;

    Dataset out_ds;
    out_ds.t_in = ds.t_in;
    out_ds.t_out = ds.t_out;
    out_ds.c = ds.c;
    out_ds.h = ds.h;
    out_ds.w = ds.w;
    out_ds.dx = ds.dx;
    out_ds.dy = ds.dy;
    out_ds.boundary = ds.boundary;
    SampleWindow forecast;
    forecast.input = sample.input;
    forecast.target = denormalize(res.best.frames, lm.stats);
    forecast.provenance = Provenance::Pseudo;
    out_ds.push(std::move(forecast));
    save_dataset((fs::path(args.out) / "forecast.bvqd").string(), out_ds);

    json scores;
    scores["config_hash"] = lm.cfg.config_hash();
    scores["beam_k"] = k;
    scores["index"] = args.index;
    scores["decode_calls"] = calls;
    scores["expected_decode_calls"] = count_states(ds.t_out, k, lm.model.cfg.chunk);
    scores["best_score"] = res.best.score;
    json finals = json::array();
    for (const BeamCandidate& c : res.finals)
        finals.push_back({{"score", c.score}, {"rank_path", c.rank_path}});
    scores["finals"] = finals;
    write_text((fs::path(args.out) / "scores.json").string(), scores.dump(2) + "\n");

    if (args.trace) {
        std::ostringstream os;
        for (const BeamTraceEntry& e : res.trace) os << e.to_json_line() << "\n";
        write_text((fs::path(args.out) / "trace.jsonl").string(), os.str());
    }
    std::cout << "[predict] best score " << res.best.score << " over " << res.finals.size()
              << " finals, decode calls " << calls << std::endl;
}

void eval(const EvalArgs& args) {
    LoadedModel lm = load_model_bundle(args.checkpoint, args.config);
    prepare_out_dir(args.out, args.force);
    const int threads = resolve_threads(args.threads);

    Dataset ds = load_dataset(args.data);
    check_dataset_matches(lm.cfg, ds, "eval");

    const Variant var = lm.cfg.variant();
    const uint32_t k = args.beam_k ? args.beam_k : (variant_uses_beam_eval(var) ? lm.cfg.beam.k : 1);
    ScoreConfig sc = eval_score_config(lm.cfg, lm.checkpoint_dir);
    if (var == Variant::MseScorer) sc.kind = ScorerKind::NegMseReference;

    EvalSeries series = evaluate_dataset(lm.model, ds, lm.stats, k, sc, threads);
    write_eval_outputs(args.out, series, lm.cfg.config_hash(), lm.cfg.train.seed, lm.cfg.train.variant, k,
                       ds.samples.size());
    std::cout << "[eval] " << MetricReport::csv_header() << "\n[eval] " << series.mean.csv_row() << std::endl;
}

void ablate(const AblateArgs& args) {
    ExperimentConfig base = load_config(args.config);
    prepare_out_dir(args.out, args.force);
    const int threads = resolve_threads(args.threads);

    std::vector<std::string> variants{"baseline"};
    {
        std::stringstream ss(args.variants);
        std::string item;
        while (std::getline(ss, item, ',')) {
            if (item.empty()) continue;
            variant_from_string(item);  // validate early
            if (item != "baseline") variants.push_back(item);
        }
    }
    if (variants.size() < 2) config_error("ablate: need at least one variant besides baseline");

    Dataset test_ds = load_dataset((fs::path(args.data_dir) / "test.bvqd").string());

    std::ostringstream table;
    table << "variant," << MetricReport::csv_header() << ",pool_size,best_epoch,best_val_mse\n";
    table.precision(9);

    for (const std::string& vname : variants) {
        ExperimentConfig cfg = base;
        cfg.train.variant = vname;
        cfg.validate();
        const std::string vdir = (fs::path(args.out) / vname).string();
        prepare_out_dir(vdir, args.force);
        std::cout << "[ablate] training variant '" << vname << "'" << std::endl;
        TrainedRun run = train_into_dir(cfg, args.data_dir, vdir, threads);

        const Variant var = cfg.variant();
        const uint32_t k = variant_uses_beam_eval(var) ? cfg.beam.k : 1;
        ScoreConfig sc = eval_score_config(cfg, vdir);
        if (var == Variant::MseScorer) sc.kind = ScorerKind::NegMseReference;
        EvalSeries series = evaluate_dataset(run.model, test_ds, run.stats, k, sc, threads);
        const std::string edir = (fs::path(vdir) / "eval").string();
        prepare_out_dir(edir, args.force);
        write_eval_outputs(edir, series, cfg.config_hash(), cfg.train.seed, vname, k, test_ds.samples.size());

        table << vname << "," << series.mean.csv_row() << "," << run.outcome.pool_size() << ","
              << run.outcome.best_epoch << "," << run.outcome.best_val_mse << "\n";
    }

    write_text((fs::path(args.out) / "comparison.csv").string(), table.str());
    std::cout << "[ablate] wrote " << (fs::path(args.out) / "comparison.csv").string() << std::endl;
}

}  // namespace bvq::cli

#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "bvq/cli.hpp"
#include "bvq/config.hpp"

using namespace bvq;
namespace fs = std::filesystem;

namespace {

const char* kTinyConfig = R"(
# desk-scale smoke configuration
[data]
grid = 16
steps = 70
trajectories = 1
t_in = 3
t_out = 4
stride = 2
seed = 5

[model]
enc_widths = 6,8
dec_widths = 8,6
chunk = 2

[bank]
size = 24
dim = 8

[beam]
k = 3

[train]
epochs = 6
e1 = 2
e2 = 4
mid_freq = 2
late_freq = 2
batch = 16
max_gen_inputs = 3
patience = 50
val_every = 2
seed = 3
)";

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& name) : path(fs::path("/tmp") / ("bvq_cli_" + name)) {
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string str(const std::string& sub = "") const { return (sub.empty() ? path : path / sub).string(); }
};

std::string write_config(const TempDir& dir, const std::string& text) {
    const std::string p = dir.str("exp.cfg");
    std::ofstream os(p);
    os << text;
    return p;
}

std::vector<char> slurp(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    REQUIRE(is);
    return std::vector<char>((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
}

}  // namespace

TEST_CASE("config: stock defaults") {
    // untouched defaults carry the reference training recipe
    ExperimentConfig d;
    CHECK(d.bank.size == 1024);
    CHECK(d.bank.dim == 64);
    CHECK(d.beam.k == 5);
    CHECK(d.train.lr == doctest::Approx(1e-3));
    CHECK(d.train.batch == 100);
    CHECK(d.train.epochs == 500);
    CHECK(d.train.e1 == 100);
    CHECK(d.train.e2 == 200);
    CHECK(d.train.mid_freq == 50);
    CHECK(d.train.late_freq == 10);
    CHECK(d.train.threshold == "quartile");
    CHECK(d.data.steps == 305);
    CHECK(d.data.t_in == 5);
    d.validate();
}

TEST_CASE("config: parse, defaults, unknown keys, hash stability") {
    ExperimentConfig cfg = parse_config_text(kTinyConfig);
    CHECK(cfg.data.grid == 16);
    CHECK(cfg.model.enc_widths == std::vector<uint32_t>{6, 8});
    CHECK(cfg.train.lr == doctest::Approx(1e-3));  // default survives partial files

    CHECK_THROWS_WITH_AS(parse_config_text("[data]\nnonsense = 3\n"), doctest::Contains("unknown key"),
                         Error);
    CHECK_THROWS_WITH_AS(parse_config_text("[what]\nx = 1\n"), doctest::Contains("unknown section"), Error);
    CHECK_THROWS_WITH_AS(parse_config_text("[data]\ngrid = abc\n"), doctest::Contains("expected"), Error);

    // canonical text reparses to the same hash
    ExperimentConfig again = parse_config_text(cfg.canonical_text());
    CHECK(again.config_hash() == cfg.config_hash());

    // any field change moves the hash
    again.train.lr = 2e-3;
    CHECK(again.config_hash() != cfg.config_hash());
}

TEST_CASE("variant wiring matrix") {
    // every ablation variant is reachable from config alone
    {
        const VariantWiring w = variant_wiring(Variant::Full);
        CHECK_FALSE(w.bypass_quantization);
        CHECK(w.self_training);
        CHECK_FALSE(w.scorer_greedy_reference);
        CHECK(w.beam_eval);
        CHECK_FALSE(w.force_beam_width_1);
    }
    {
        // beam width forced to 1 with filtering retained
        const VariantWiring w = variant_wiring(Variant::NoBeam);
        CHECK(w.force_beam_width_1);
        CHECK(w.self_training);
        CHECK_FALSE(w.bypass_quantization);
    }
    {
        // filtering disabled, beam inference only
        const VariantWiring w = variant_wiring(Variant::NoSelfTrain);
        CHECK_FALSE(w.self_training);
        CHECK(w.beam_eval);
        CHECK_FALSE(w.force_beam_width_1);
    }
    {
        // candidates ranked by MSE against the model's own greedy output
        const VariantWiring w = variant_wiring(Variant::MseScorer);
        CHECK(w.scorer_greedy_reference);
        CHECK(w.self_training);
        CHECK(w.beam_eval);
    }
    {
        const VariantWiring w = variant_wiring(Variant::Baseline);
        CHECK(w.bypass_quantization);
        CHECK_FALSE(w.self_training);
        CHECK_FALSE(w.beam_eval);
    }
    {
        const VariantWiring w = variant_wiring(Variant::VqPlain);
        CHECK_FALSE(w.bypass_quantization);
        CHECK_FALSE(w.self_training);
        CHECK(w.force_beam_width_1);
    }

    // the baseline config builds a quantization-bypassed backbone
    ExperimentConfig cfg = parse_config_text(kTinyConfig);
    cfg.train.variant = "baseline";
    CHECK(cfg.backbone(3).bypass_quantization);
    cfg.train.variant = "full";
    CHECK_FALSE(cfg.backbone(3).bypass_quantization);
}

TEST_CASE("config: cross-field validation fires before any work") {
    ExperimentConfig cfg = parse_config_text(kTinyConfig);
    cfg.data.grid = 18;  // not divisible by downsample 4
    CHECK_THROWS_WITH_AS(cfg.validate(), doctest::Contains("divisible"), Error);

    ExperimentConfig c2 = parse_config_text(kTinyConfig);
    c2.model.chunk = 3;  // does not divide t_out = 4
    CHECK_THROWS_AS(c2.validate(), Error);

    ExperimentConfig c3 = parse_config_text(kTinyConfig);
    c3.beam.k = 200;  // exceeds bank
    CHECK_THROWS_AS(c3.validate(), Error);
}

TEST_CASE("gen-data: determinism, refusal without --force, manifest") {
    TempDir dir("gen");
    const std::string cfgp = write_config(dir, kTinyConfig);

    cli::GenDataArgs args;
    args.config = cfgp;
    args.out = dir.str("data");
    cli::gen_data(args);
    CHECK(fs::exists(dir.str("data") + "/train.bvqd"));
    CHECK(fs::exists(dir.str("data") + "/manifest.json"));
    const auto first = slurp(dir.str("data") + "/train.bvqd");

    // refuses to overwrite a non-empty out dir
    CHECK_THROWS_WITH_AS(cli::gen_data(args), doctest::Contains("--force"), Error);

    // same seed twice -> bitwise-identical files
    args.out = dir.str("data2");
    cli::gen_data(args);
    CHECK(slurp(dir.str("data2") + "/train.bvqd") == first);

    // different seed -> different payload
    args.out = dir.str("data3");
    args.seed = 99;
    args.seed_set = true;
    cli::gen_data(args);
    CHECK(slurp(dir.str("data3") + "/train.bvqd") != first);
}

TEST_CASE("gen-data: invalid grid is rejected before generation") {
    TempDir dir("genbad");
    std::string text(kTinyConfig);
    text.replace(text.find("grid = 16"), 9, "grid = 18");
    const std::string cfgp = write_config(dir, text);
    cli::GenDataArgs args;
    args.config = cfgp;
    args.out = dir.str("data");
    CHECK_THROWS_AS(cli::gen_data(args), Error);
    CHECK_FALSE(fs::exists(dir.str("data") + "/train.bvqd"));
}

TEST_CASE("train, predict, eval round trip through the filesystem") {
    TempDir dir("pipeline");
    const std::string cfgp = write_config(dir, kTinyConfig);

    cli::GenDataArgs gen;
    gen.config = cfgp;
    gen.out = dir.str("data");
    cli::gen_data(gen);

    cli::TrainArgs tr;
    tr.config = cfgp;
    tr.data_dir = dir.str("data");
    tr.out = dir.str("run");
    tr.threads = 1;
    cli::train(tr);
    CHECK(fs::exists(dir.str("run") + "/checkpoint.bvqp"));
    CHECK(fs::exists(dir.str("run") + "/config.resolved.cfg"));
    CHECK(fs::exists(dir.str("run") + "/log.csv"));
    CHECK(fs::exists(dir.str("run") + "/summary.json"));

    // log has the documented header
    {
        std::ifstream is(dir.str("run") + "/log.csv");
        std::string header;
        std::getline(is, header);
        CHECK(header == "epoch,phase,train_loss,val_mse,pool_size,generation_ran,wall_seconds");
    }

    // the pseudo-label pool is persisted as a standard dataset
    {
        REQUIRE(fs::exists(dir.str("run") + "/pool.bvqd"));
        Dataset pool = load_dataset(dir.str("run") + "/pool.bvqd");
        CHECK(pool.size() > 0);
        for (const SampleWindow& s : pool.samples) CHECK(s.provenance == Provenance::Pseudo);
    }

    cli::PredictArgs pr;
    pr.checkpoint = dir.str("run") + "/checkpoint.bvqp";
    pr.data = dir.str("data") + "/test.bvqd";
    pr.index = 0;
    pr.out = dir.str("pred");
    pr.trace = true;
    pr.threads = 1;
    cli::predict(pr);
    CHECK(fs::exists(dir.str("pred") + "/forecast.bvqd"));
    CHECK(fs::exists(dir.str("pred") + "/scores.json"));
    CHECK(fs::exists(dir.str("pred") + "/trace.jsonl"));

    // the forecast file is a loadable dataset with one pseudo sample
    Dataset forecast = load_dataset(dir.str("pred") + "/forecast.bvqd");
    REQUIRE(forecast.size() == 1);
    CHECK(forecast.samples[0].provenance == Provenance::Pseudo);

    // chunk flag must match the trained decoder
    cli::PredictArgs bad = pr;
    bad.out = dir.str("pred2");
    bad.chunk = 3;
    CHECK_THROWS_WITH_AS(cli::predict(bad), doctest::Contains("chunk"), Error);

    cli::EvalArgs ev;
    ev.checkpoint = dir.str("run") + "/checkpoint.bvqp";
    ev.data = dir.str("data") + "/test.bvqd";
    ev.out = dir.str("eval");
    ev.threads = 1;
    cli::eval(ev);
    CHECK(fs::exists(dir.str("eval") + "/report.csv"));
    CHECK(fs::exists(dir.str("eval") + "/report.json"));
    CHECK(fs::exists(dir.str("eval") + "/leadtime.csv"));
    CHECK(fs::exists(dir.str("eval") + "/spectrum_pred.csv"));

    // report commands are reproducible: identical bytes on re-run
    const auto report1 = slurp(dir.str("eval") + "/report.json");
    cli::EvalArgs ev2 = ev;
    ev2.out = dir.str("eval2");
    cli::eval(ev2);
    CHECK(slurp(dir.str("eval2") + "/report.json") == report1);

    // eval on a (pred == truth) pair: mse 0, ssim 1
    {
        Dataset test = load_dataset(dir.str("data") + "/test.bvqd");
        const FieldTensor t(test.samples[0].target, test.dx, test.dy, test.boundary);
        MetricReport r = compute_report(t, t);
        CHECK(r.mse == 0.0);
        CHECK(r.ssim == doctest::Approx(1.0).epsilon(1e-9));
    }
}

TEST_CASE("predict with K=1 vs K=5 reports both scores") {
    TempDir dir("kcmp");
    const std::string cfgp = write_config(dir, kTinyConfig);
    cli::GenDataArgs gen;
    gen.config = cfgp;
    gen.out = dir.str("data");
    cli::gen_data(gen);
    cli::TrainArgs tr;
    tr.config = cfgp;
    tr.data_dir = dir.str("data");
    tr.out = dir.str("run");
    tr.threads = 1;
    cli::train(tr);

    for (uint32_t k : {1u, 5u}) {
        cli::PredictArgs pr;
        pr.checkpoint = dir.str("run") + "/checkpoint.bvqp";
        pr.data = dir.str("data") + "/test.bvqd";
        pr.out = dir.str("pred_k" + std::to_string(k));
        pr.beam_k = k;
        pr.threads = 1;
        cli::predict(pr);
        const auto bytes = slurp(pr.out + "/scores.json");
        const std::string text(bytes.begin(), bytes.end());
        CHECK(text.find("best_score") != std::string::npos);
    }
}

#include <iostream>

#include <CLI11.hpp>

#include "bvq/cli.hpp"
#include "bvq/error.hpp"

int main(int argc, char** argv) {
    CLI::App app{"bvq: physics-scored beam-search forecasting over a vector-quantized latent space"};
    app.require_subcommand(1);

    bvq::cli::GenDataArgs gen;
    auto* gen_cmd = app.add_subcommand("gen-data", "Generate shallow-water train/val/test datasets");
    gen_cmd->add_option("--config", gen.config, "Experiment config file")->required();
    gen_cmd->add_option("--out", gen.out, "Output directory")->required();
    auto* seed_opt = gen_cmd->add_option("--seed", gen.seed, "Override data.seed");
    gen_cmd->add_flag("--force", gen.force, "Overwrite non-empty output directory");

    bvq::cli::TrainArgs train;
    auto* train_cmd = app.add_subcommand("train", "Train a model per the config variant");
    train_cmd->add_option("--config", train.config, "Experiment config file")->required();
    train_cmd->add_option("--data", train.data_dir, "Directory with train/val/test .bvqd files")->required();
    train_cmd->add_option("--out", train.out, "Output directory")->required();
    train_cmd->add_flag("--force", train.force, "Overwrite non-empty output directory");
    train_cmd->add_option("--threads", train.threads, "Worker cap (default: BVQ_THREADS or hardware)");

    bvq::cli::PredictArgs pred;
    auto* pred_cmd = app.add_subcommand("predict", "Beam-search forecast for one input window");
    pred_cmd->add_option("--checkpoint", pred.checkpoint, "Model checkpoint (.bvqp)")->required();
    pred_cmd->add_option("--config", pred.config, "Config (default: config.resolved.cfg next to checkpoint)");
    pred_cmd->add_option("--data", pred.data, "Dataset file (.bvqd)")->required();
    pred_cmd->add_option("--index", pred.index, "Sample index within the dataset");
    pred_cmd->add_option("--out", pred.out, "Output directory")->required();
    pred_cmd->add_option("--beam", pred.beam_k, "Beam width K (default: config)");
    pred_cmd->add_option("--chunk", pred.chunk, "Frames per step c (must match the trained decoder)");
    pred_cmd->add_flag("--trace", pred.trace, "Write per-depth beam trace (trace.jsonl)");
    pred_cmd->add_flag("--force", pred.force, "Overwrite non-empty output directory");
    pred_cmd->add_option("--threads", pred.threads, "Worker cap");

    bvq::cli::EvalArgs ev;
    auto* eval_cmd = app.add_subcommand("eval", "Evaluate a checkpoint on a dataset");
    eval_cmd->add_option("--checkpoint", ev.checkpoint, "Model checkpoint (.bvqp)")->required();
    eval_cmd->add_option("--config", ev.config, "Config (default: config.resolved.cfg next to checkpoint)");
    eval_cmd->add_option("--dataset", ev.data, "Dataset file (.bvqd)")->required();
    eval_cmd->add_option("--out", ev.out, "Output directory")->required();
    eval_cmd->add_option("--beam", ev.beam_k, "Beam width (default: variant-appropriate)");
    eval_cmd->add_flag("--force", ev.force, "Overwrite non-empty output directory");
    eval_cmd->add_option("--threads", ev.threads, "Worker cap");

    bvq::cli::AblateArgs abl;
    auto* abl_cmd = app.add_subcommand("ablate", "Train + evaluate ablation variants, emit comparison table");
    abl_cmd->add_option("--config", abl.config, "Experiment config file")->required();
    abl_cmd->add_option("--data", abl.data_dir, "Directory with train/val/test .bvqd files")->required();
    abl_cmd->add_option("--out", abl.out, "Output directory")->required();
    abl_cmd->add_option("--variants", abl.variants, "Comma list (default: full,no_beam,no_selftrain,mse_scorer)");
    abl_cmd->add_flag("--force", abl.force, "Overwrite non-empty output directory");
    abl_cmd->add_option("--threads", abl.threads, "Worker cap");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*gen_cmd) {
            gen.seed_set = seed_opt->count() > 0;
            bvq::cli::gen_data(gen);
        } else if (*train_cmd) {
            bvq::cli::train(train);
        } else if (*pred_cmd) {
            bvq::cli::predict(pred);
        } else if (*eval_cmd) {
            bvq::cli::eval(ev);
        } else if (*abl_cmd) {
            bvq::cli::ablate(abl);
        }
    } catch (const bvq::Error& e) {
        std::cerr << "error: " << e.what() << std::endl;
        return e.exit_code();
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << std::endl;
        return 1;
    }
    return 0;
}

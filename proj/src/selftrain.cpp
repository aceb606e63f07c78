#include "bvq/selftrain.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>
#include <sstream>

#include "bvq/codebank.hpp"
#include "bvq/hash.hpp"
#include "bvq/parallel.hpp"

namespace bvq {

void TrainSchedule::validate() const {
    if (!(e1 > 0 && e1 < e2 && e2 <= total))
        config_error("schedule: need 0 < e1 < e2 <= total, got e1=" + std::to_string(e1) +
                     " e2=" + std::to_string(e2) + " total=" + std::to_string(total));
    if (mid_freq < 1 || late_freq < 1) config_error("schedule: frequencies must be >= 1");
}

int TrainSchedule::phase(uint32_t epoch) const { return epoch < e1 ? 0 : (epoch < e2 ? 1 : 2); }

bool TrainSchedule::generation_due(uint32_t epoch) const {
    if (epoch < e1) return false;
    if (epoch < e2) return (epoch - e1) % mid_freq == 0;
    return (epoch - e2) % late_freq == 0;
}

void LossWeights::validate() const {
    if (!(lambda >= 0.0) || !(beta >= 0.0) || !(gamma >= 0.0))
        config_error("loss weights must be non-negative");
}

ad::Var total_loss(ad::Graph& g, ad::Var pred, ad::Var truth, ad::Var zprime, ad::Var codes,
                   const LossWeights& w) {
    ad::Var loss = g.scale(g.mse_reduce(pred, truth), static_cast<float>(w.lambda));
    if (zprime.valid() && codes.valid()) {
        VqLossTerms vq = vq_loss_terms(g, zprime, codes);
        loss = g.add(loss, g.scale(vq.commitment_term, static_cast<float>(w.beta)));
        loss = g.add(loss, g.scale(vq.codebook_term, static_cast<float>(w.gamma)));
    }
    return loss;
}

double quantile_type7(std::vector<double> values, double q) {
    if (values.empty()) data_error("quantile_type7: empty sample");
    std::sort(values.begin(), values.end());
    if (values.size() == 1) return values[0];
    const double pos = q * static_cast<double>(values.size() - 1);
    const size_t lo = static_cast<size_t>(pos);
    const double frac = pos - static_cast<double>(lo);
    if (lo + 1 >= values.size()) return values.back();
    return values[lo] + frac * (values[lo + 1] - values[lo]);
}

FilterDecision filter_candidates(const std::vector<ScoredCandidate>& finals, ThresholdMode mode,
                                 double constant_threshold) {
    if (finals.empty()) data_error("filter_candidates: empty candidate set");

    FilterDecision out;
    if (mode == ThresholdMode::Quartile) {
        std::vector<double> scores;
        scores.reserve(finals.size());
        for (const ScoredCandidate& c : finals) scores.push_back(c.score);
        out.threshold = quantile_type7(std::move(scores), 0.25);
    } else {
        out.threshold = constant_threshold;
    }

    // per-input best: max score, ties to the lower candidate index
    std::map<uint64_t, size_t> best;
    for (size_t i = 0; i < finals.size(); ++i) {
        auto it = best.find(finals[i].sample_id);
        if (it == best.end() || finals[i].score > finals[it->second].score) best[finals[i].sample_id] = i;
    }

    for (size_t i = 0; i < finals.size(); ++i) {
        const bool is_best = best.at(finals[i].sample_id) == i;
        if (is_best || finals[i].score >= out.threshold) out.admitted.push_back(i);
    }
    return out;
}

uint64_t pool_payload_hash(const SampleWindow& pair) {
    uint64_t h = fnv1a64(pair.input.data.data(), pair.input.numel() * sizeof(float));
    return fnv1a64(pair.target.data.data(), pair.target.numel() * sizeof(float), h);
}

bool HighQualityPool::admit(PoolEntry entry) {
    const auto key = std::make_tuple(entry.sample_id, entry.admission_epoch, entry.candidate_index);
    if (keys_.count(key)) return false;
    keys_.insert(key);
    entry.pair.provenance = Provenance::Pseudo;
    entry.payload_hash = pool_payload_hash(entry.pair);
    entries_.push_back(std::move(entry));
    return true;
}

bool HighQualityPool::verify_integrity() const {
    for (const PoolEntry& e : entries_)
        if (pool_payload_hash(e.pair) != e.payload_hash || e.pair.provenance != Provenance::Pseudo) return false;
    return true;
}

// ---------------------------------------------------------------------------

namespace {

struct TrainBindings {
    EncoderVars enc;
    DecoderVars dec;
    ad::Var bank;
    std::vector<std::pair<std::string, ad::Var>> named;
};

TrainBindings bind_all(ad::Graph& g, const ModelState& m) {
    TrainBindings b;
    b.enc = bind_encoder(g, m, true);
    b.dec = bind_decoder(g, m, true);
    b.bank = g.leaf(m.params.at("codebank"), !m.cfg.bypass_quantization);
    for (size_t i = 0; i < m.cfg.enc_widths.size(); ++i) {
        b.named.emplace_back("enc.conv" + std::to_string(i) + ".w", b.enc.convs[i].first);
        b.named.emplace_back("enc.conv" + std::to_string(i) + ".b", b.enc.convs[i].second);
    }
    b.named.emplace_back("proj.w", b.enc.proj_w);
    b.named.emplace_back("proj.b", b.enc.proj_b);
    for (size_t i = 0; i < m.cfg.dec_widths.size(); ++i) {
        b.named.emplace_back("dec.conv" + std::to_string(i) + ".w", b.dec.convs[i].first);
        b.named.emplace_back("dec.conv" + std::to_string(i) + ".b", b.dec.convs[i].second);
    }
    b.named.emplace_back("dec.out.w", b.dec.out_w);
    b.named.emplace_back("dec.out.b", b.dec.out_b);
    if (!m.cfg.bypass_quantization) b.named.emplace_back("codebank", b.bank);
    return b;
}

// Autoregressive rollout with the full training loss assembled per chunk and
// averaged over chunks. Gradients flow through predicted frames into the
// following windows.
ad::Var build_rollout_loss(ad::Graph& g, const ModelState& m, const TrainBindings& b,
                           const Tensor& norm_input, const Tensor& norm_target, const LossWeights& w) {
    const BackboneConfig& cfg = m.cfg;
    const uint32_t t_out = norm_target.shape[0];
    if (t_out % cfg.chunk != 0)
        config_error("training: chunk " + std::to_string(cfg.chunk) + " does not divide target length " +
                     std::to_string(t_out));
    const uint32_t steps = t_out / cfg.chunk;
    const size_t frame = static_cast<size_t>(cfg.channels) * cfg.h * cfg.w;

    ad::Var window = g.constant(norm_input);
    ad::Var acc;
    for (uint32_t s = 0; s < steps; ++s) {
        ad::Var zprime = run_encoder(g, cfg, b.enc, window);
        ad::Var dec_in = zprime;
        ad::Var codes;
        if (!cfg.bypass_quantization) {
            const auto [idx, code_vals] = quantize_nearest(m.params.at("codebank"), g.value(zprime));
            (void)code_vals;
            codes = g.gather_rows(b.bank, idx);
            dec_in = g.straight_through(zprime, codes);
        }
        ad::Var pred = run_decoder(g, cfg, b.dec, dec_in);

        Tensor target_chunk({cfg.chunk, cfg.channels, cfg.h, cfg.w});
        std::copy_n(norm_target.data.data() + static_cast<size_t>(s) * cfg.chunk * frame,
                    static_cast<size_t>(cfg.chunk) * frame, target_chunk.data.data());
        ad::Var step_loss = total_loss(g, pred, g.constant(std::move(target_chunk)), zprime, codes, w);
        acc = acc.valid() ? g.add(acc, step_loss) : step_loss;

        if (s + 1 < steps) {
            if (cfg.chunk >= cfg.t_in)
                window = g.slice0(pred, cfg.chunk - cfg.t_in, cfg.t_in);
            else
                window = g.concat0(g.slice0(window, cfg.chunk, cfg.t_in - cfg.chunk), pred);
        }
    }
    return g.scale(acc, 1.0f / static_cast<float>(steps));
}

struct SampleGrad {
    double loss = 0.0;
    std::map<std::string, Tensor> grads;
};

SampleGrad sample_gradient(const ModelState& m, const SampleWindow& sample, const NormStats& stats,
                           const LossWeights& w) {
    ad::Graph g;
    TrainBindings b = bind_all(g, m);
    const Tensor in_n = normalize(sample.input, stats);
    const Tensor tg_n = normalize(sample.target, stats);
    ad::Var loss = build_rollout_loss(g, m, b, in_n, tg_n, w);
    SampleGrad out;
    out.loss = g.scalar(loss);
    if (!std::isfinite(out.loss)) numeric_error("train: non-finite loss");
    g.backward(loss);
    for (const auto& [name, var] : b.named) out.grads.emplace(name, g.grad(var));
    return out;
}

}  // namespace

double train_epoch(ModelState& model, const std::vector<const SampleWindow*>& samples,
                   const NormStats& stats, const LossWeights& weights, AdamState& adam,
                   uint32_t batch_size, Rng& shuffle_rng, int threads) {
    if (samples.empty()) data_error("train_epoch: empty dataset");
    weights.validate();
    if (batch_size < 1) config_error("train_epoch: batch size must be >= 1");

    std::vector<size_t> order(samples.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = i;
    shuffle_rng.shuffle(order);

    double epoch_loss = 0.0;
    size_t done = 0;
    while (done < order.size()) {
        const size_t bsz = std::min<size_t>(batch_size, order.size() - done);

        std::vector<SampleGrad> slot(bsz);
        parallel_for(bsz, threads,
                     [&](size_t i) { slot[i] = sample_gradient(model, *samples[order[done + i]], stats, weights); });

        std::map<std::string, Tensor> acc;
        for (const auto& [name, p] : model.params) acc.emplace(name, Tensor::zeros(p.shape));
        for (size_t i = 0; i < bsz; ++i) {  // fixed fold order keeps runs bitwise stable
            epoch_loss += slot[i].loss;
            for (auto& [name, gsum] : acc) {
                auto it = slot[i].grads.find(name);
                if (it == slot[i].grads.end()) continue;
                for (size_t j = 0; j < gsum.numel(); ++j) gsum.data[j] += it->second.data[j];
            }
        }
        const float inv = 1.0f / static_cast<float>(bsz);
        for (auto& [name, gsum] : acc)
            for (float& v : gsum.data) v *= inv;

        adam_step(model.params, acc, adam);
        done += bsz;
    }
    return epoch_loss / static_cast<double>(samples.size());
}

double eval_greedy_mse(const ModelState& model, const Dataset& ds, const NormStats& stats, int threads) {
    if (ds.samples.empty()) data_error("eval_greedy_mse: empty dataset");
    std::vector<double> errs(ds.samples.size());
    parallel_for(ds.samples.size(), threads, [&](size_t i) {
        const SampleWindow& s = ds.samples[i];
        const Tensor pred_n = greedy_forecast(model, normalize(s.input, stats), ds.t_out);
        errs[i] = mse(denormalize(pred_n, stats), s.target);
    });
    double acc = 0.0;
    for (double e : errs) acc += e;
    return acc / static_cast<double>(errs.size());
}

GenPassStats generation_pass(const ModelState& model, const Dataset& train, const NormStats& stats,
                             uint32_t epoch, const SelfTrainOptions& opt, HighQualityPool& pool, Rng& rng) {
    std::vector<size_t> ids(train.samples.size());
    for (size_t i = 0; i < ids.size(); ++i) ids[i] = i;
    rng.shuffle(ids);
    if (opt.max_gen_inputs > 0 && ids.size() > opt.max_gen_inputs) ids.resize(opt.max_gen_inputs);
    std::sort(ids.begin(), ids.end());

    BeamConfig bc;
    bc.k = opt.beam_k;
    bc.horizon = train.t_out;
    bc.threads = 1;  // parallelism goes over inputs below

    std::vector<ScoredCandidate> scored;
    std::vector<Tensor> frames;  // physical-space frames aligned with `scored`
    std::vector<std::vector<ScoredCandidate>> per_input(ids.size());
    std::vector<std::vector<Tensor>> per_input_frames(ids.size());

    parallel_for(ids.size(), opt.threads, [&](size_t ii) {
        const size_t id = ids[ii];
        const SampleWindow& s = train.samples[id];
        const Tensor in_n = normalize(s.input, stats);

        ScoreConfig sc = opt.scorer;
        if (opt.scorer_greedy_reference) {
            sc.kind = ScorerKind::NegMseReference;
            sc.reference_frames = denormalize(greedy_forecast(model, in_n, train.t_out), stats);
        }
        ScoreFn fn = [&](const Tensor& norm_frames) {
            FieldTensor cand(denormalize(norm_frames, stats), train.dx, train.dy, train.boundary);
            return physics_score(cand, sc);
        };

        BeamResult res = beam_forecast(in_n, model, bc, fn);
        for (size_t ci = 0; ci < res.finals.size(); ++ci) {
            ScoredCandidate c;
            c.sample_id = id;
            c.candidate_index = static_cast<uint32_t>(ci);
            c.score = res.finals[ci].score;
            per_input[ii].push_back(c);
            per_input_frames[ii].push_back(denormalize(res.finals[ci].frames, stats));
        }
    });
    for (size_t ii = 0; ii < ids.size(); ++ii) {
        for (size_t j = 0; j < per_input[ii].size(); ++j) {
            scored.push_back(per_input[ii][j]);
            frames.push_back(std::move(per_input_frames[ii][j]));
        }
    }

    GenPassStats stats_out;
    stats_out.candidates = scored.size();
    if (scored.empty()) return stats_out;

    FilterDecision dec = filter_candidates(scored, opt.threshold_mode, opt.threshold_value);
    stats_out.threshold = dec.threshold;
    for (size_t idx : dec.admitted) {
        PoolEntry e;
        e.sample_id = scored[idx].sample_id;
        e.admission_epoch = epoch;
        e.candidate_index = scored[idx].candidate_index;
        e.pair.input = train.samples[scored[idx].sample_id].input;
        e.pair.target = frames[idx];
        e.pair.provenance = Provenance::Pseudo;
        if (pool.admit(std::move(e))) stats_out.admitted++;
    }
    return stats_out;
}

std::string EpochLog::csv_header() {
    return "epoch,phase,train_loss,val_mse,pool_size,generation_ran,wall_seconds";
}

std::string EpochLog::csv_row() const {
    std::ostringstream os;
    os.precision(9);
    os << epoch << "," << phase << "," << train_loss << ",";
    if (val_mse >= 0.0) os << val_mse;
    os << "," << pool_size << "," << (generation_ran ? 1 : 0) << "," << wall_seconds;
    return os.str();
}

TrainOutcome run_training(ModelState model, const Dataset& train, const Dataset& val,
                          const NormStats& stats, const SelfTrainOptions& opt,
                          const std::function<void(const ModelState&, const EpochLog&)>& on_epoch) {
    opt.schedule.validate();
    opt.weights.validate();
    if (train.samples.empty()) data_error("run_training: empty training dataset");

    AdamState adam;
    adam.lr = opt.lr;
    HighQualityPool pool;
    Rng shuffle_rng(opt.seed);
    Rng gen_rng(opt.seed ^ 0x9e3779b97f4a7c15ull);

    TrainOutcome out;
    out.best_val_mse = std::numeric_limits<double>::infinity();
    std::map<std::string, Tensor> best_params = model.params;

    auto rebuild_samples = [&]() {
        std::vector<const SampleWindow*> all;
        all.reserve(train.samples.size() + pool.size());
        for (const SampleWindow& s : train.samples) all.push_back(&s);
        for (const PoolEntry& e : pool.entries()) all.push_back(&e.pair);
        return all;
    };
    std::vector<const SampleWindow*> samples = rebuild_samples();

    for (uint32_t epoch = 0; epoch < opt.schedule.total; ++epoch) {
        const auto t0 = std::chrono::steady_clock::now();
        EpochLog log;
        log.epoch = epoch;
        log.phase = opt.schedule.phase(epoch);

        if (opt.self_training && opt.schedule.generation_due(epoch)) {
            // generate first, then train, within a scheduled epoch
            generation_pass(model, train, stats, epoch, opt, pool, gen_rng);
            samples = rebuild_samples();
            log.generation_ran = true;
        }

        log.train_loss =
            train_epoch(model, samples, stats, opt.weights, adam, opt.batch_size, shuffle_rng, opt.threads);
        log.pool_size = pool.size();
        model.epoch = epoch + 1;

        if (epoch % opt.val_every == 0 || epoch + 1 == opt.schedule.total) {
            log.val_mse = eval_greedy_mse(model, val, stats, opt.threads);
            if (log.val_mse < out.best_val_mse) {
                out.best_val_mse = log.val_mse;
                out.best_epoch = epoch;
                best_params = model.params;
            }
        }

        log.wall_seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (on_epoch) on_epoch(model, log);
        out.log.push_back(log);

        if (epoch > out.best_epoch + opt.patience) break;  // early stop on validation MSE
    }

    out.pool = std::move(pool);
    out.model = std::move(model);
    out.model.params = std::move(best_params);
    return out;
}

Dataset pool_as_dataset(const HighQualityPool& pool, const Dataset& like) {
    Dataset out;
    out.t_in = like.t_in;
    out.t_out = like.t_out;
    out.c = like.c;
    out.h = like.h;
    out.w = like.w;
    out.dx = like.dx;
    out.dy = like.dy;
    out.boundary = like.boundary;
    for (const PoolEntry& e : pool.entries()) out.push(e.pair);
    return out;
}

}  // namespace bvq

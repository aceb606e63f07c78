#pragma once

#include <functional>
#include <set>
#include <tuple>
#include <vector>

#include "bvq/adam.hpp"
#include "bvq/beam.hpp"
#include "bvq/dataset.hpp"
#include "bvq/metrics.hpp"

namespace bvq {

// Epoch-indexed self-training frequency rule: no generation in the initial
// phase, every mid_freq epochs in [e1, e2), every late_freq epochs from e2.
struct TrainSchedule {
    uint32_t e1 = 100;
    uint32_t e2 = 200;
    uint32_t total = 500;
    uint32_t mid_freq = 50;
    uint32_t late_freq = 10;

    void validate() const;
    int phase(uint32_t epoch) const;  // 0 initial, 1 mid, 2 late
    bool generation_due(uint32_t epoch) const;
};

struct LossWeights {
    double lambda = 1.0;
    double beta = 0.25;
    double gamma = 1.0;
    void validate() const;
};

// lambda * mean squared error + beta * |z' - sg(e)|^2 + gamma * |sg(z') - e|^2
ad::Var total_loss(ad::Graph& g, ad::Var pred, ad::Var truth, ad::Var zprime, ad::Var codes,
                   const LossWeights& w);

// --- candidate filtering -----------------------------------------------------

struct ScoredCandidate {
    uint64_t sample_id = 0;
    uint32_t candidate_index = 0;  // position within the per-input final set
    double score = 0.0;
};

enum class ThresholdMode { Quartile, Constant };

// Type-7 quantile (linear interpolation on the ascending order statistics).
double quantile_type7(std::vector<double> values, double q);

struct FilterDecision {
    std::vector<size_t> admitted;  // indices into the candidate vector
    double threshold = 0.0;
};

// Admits every per-input best candidate plus anything scoring at or above the
// threshold (first quartile of all scores in this pass by default).
FilterDecision filter_candidates(const std::vector<ScoredCandidate>& finals, ThresholdMode mode,
                                 double constant_threshold = 0.0);

// --- pseudo-label pool -------------------------------------------------------

struct PoolEntry {
    uint64_t sample_id = 0;
    uint32_t admission_epoch = 0;
    uint32_t candidate_index = 0;
    SampleWindow pair;      // provenance Pseudo, physical units, frozen at admission
    uint64_t payload_hash = 0;
};

// Monotonically growing set of pseudo-labeled pairs. Entries are immutable
// after admission; the key (sample, epoch, candidate) stops the same candidate
// from being admitted twice in one pass (e.g. best and above threshold).
class HighQualityPool {
  public:
    bool admit(PoolEntry entry);
    size_t size() const { return entries_.size(); }
    const std::vector<PoolEntry>& entries() const { return entries_; }
    bool verify_integrity() const;  // payload hashes still match

  private:
    std::vector<PoolEntry> entries_;
    std::set<std::tuple<uint64_t, uint32_t, uint32_t>> keys_;
};

uint64_t pool_payload_hash(const SampleWindow& pair);

// --- training loop -----------------------------------------------------------

// One pass of shuffled mini-batches over physical-unit samples; gradients are
// averaged per batch and applied with Adam. Returns the mean sample loss.
// Aborts with a diagnostic on non-finite losses.
double train_epoch(ModelState& model, const std::vector<const SampleWindow*>& samples,
                   const NormStats& stats, const LossWeights& weights, AdamState& adam,
                   uint32_t batch_size, Rng& shuffle_rng, int threads = 1);

// Mean physical-space MSE of greedy forecasts over a dataset.
double eval_greedy_mse(const ModelState& model, const Dataset& ds, const NormStats& stats,
                       int threads = 1);

struct SelfTrainOptions {
    TrainSchedule schedule;
    LossWeights weights;
    double lr = 1e-3;
    uint32_t batch_size = 100;
    uint32_t beam_k = 5;
    ScoreConfig scorer;
    bool self_training = true;           // generation + pool growth on schedule
    bool scorer_greedy_reference = false;  // score against the model's own greedy rollout
    ThresholdMode threshold_mode = ThresholdMode::Quartile;
    double threshold_value = 0.0;
    uint32_t max_gen_inputs = 16;
    uint32_t patience = 200;
    uint32_t val_every = 5;
    uint64_t seed = 1;
    int threads = 1;
};

struct EpochLog {
    uint32_t epoch = 0;
    int phase = 0;
    double train_loss = 0.0;
    double val_mse = -1.0;  // negative when not evaluated this epoch
    size_t pool_size = 0;
    bool generation_ran = false;
    double wall_seconds = 0.0;

    static std::string csv_header();
    std::string csv_row() const;
};

struct GenPassStats {
    size_t candidates = 0;
    size_t admitted = 0;
    double threshold = 0.0;
};

// One beam-generate + filter + admit pass over (a capped subset of) the
// training inputs, with the model frozen.
GenPassStats generation_pass(const ModelState& model, const Dataset& train, const NormStats& stats,
                             uint32_t epoch, const SelfTrainOptions& opt, HighQualityPool& pool,
                             Rng& rng);

struct TrainOutcome {
    ModelState model;  // best-validation snapshot
    std::vector<EpochLog> log;
    HighQualityPool pool;
    double best_val_mse = 0.0;
    uint32_t best_epoch = 0;

    size_t pool_size() const { return pool.size(); }
};

// Pool entries as a pseudo-provenance dataset (matching the training
// dataset's geometry) so they can be persisted in the standard container.
Dataset pool_as_dataset(const HighQualityPool& pool, const Dataset& like);

// The closed loop: scheduled generation passes grow the pool, every epoch
// trains on original data plus the pool, validation early-stops on original
// data only.
TrainOutcome run_training(ModelState model, const Dataset& train, const Dataset& val,
                          const NormStats& stats, const SelfTrainOptions& opt,
                          const std::function<void(const ModelState&, const EpochLog&)>& on_epoch = {});

}  // namespace bvq

#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "seqdesign/nn.hpp"
#include "seqdesign/scorer.hpp"
#include "seqdesign/sequence.hpp"

namespace seqdesign {

/// Sample Pearson correlation. Throws DomainError when either series is constant
/// and ContractError for mismatched or too-short inputs.
double pearson(std::span<const double> xs, std::span<const double> ys);

struct LabeledSequence {
  Sequence sequence;
  double label = 0.0;
};

/// Hidden sizes for a two-hidden-layer regressor with roughly `target_params`
/// parameters on `input_size` inputs.
std::vector<std::size_t> proxy_hidden_sizes(std::size_t input_size, std::size_t target_params = 15000);

/// Dense regressor on flattened one-hot input, squashed to (0, 1) with a logistic.
class ProxyModel : public Scorer {
 public:
  ProxyModel(std::size_t seq_len, Alphabet alphabet, Rng& rng, std::vector<std::size_t> hidden = {});
  ProxyModel(std::size_t seq_len, Alphabet alphabet, nn::DenseNet net);

  double predict(const Sequence& seq) const;
  std::vector<double> predict(std::span<const Sequence> batch) const;

  std::vector<ScoreReport> score(std::span<const Sequence> batch) override;
  std::string describe() const override;

  /// Mean squared error of predictions against labels.
  double mse(std::span<const LabeledSequence> data) const;
  /// One pass of shuffled mini-batch descent; returns the mean pre-update batch loss.
  double train_epoch(std::span<const LabeledSequence> data, nn::Adam& optimizer, std::size_t batch_size, Rng& rng);
  /// Accumulates d(mean squared error)/dparams for `data` into `grads` and returns the loss.
  double loss_gradient(std::span<const LabeledSequence> data, std::span<double> grads) const;

  nn::DenseNet& net() { return net_; }
  const nn::DenseNet& net() const { return net_; }
  std::size_t seq_len() const { return seq_len_; }
  const Alphabet& alphabet() const { return alphabet_; }

 private:
  std::size_t seq_len_;
  Alphabet alphabet_;
  nn::DenseNet net_;
};

struct TrainOptions {
  std::size_t epochs = 30;
  std::size_t batch_size = 64;
  double learning_rate = 1e-3;
};

struct TrainReport {
  double initial_loss = 0.0;
  double final_loss = 0.0;
  std::vector<double> epoch_losses;
};

/// Mean-squared-error regression of the proxy onto oracle labels.
TrainReport pretrain(ProxyModel& model, std::span<const LabeledSequence> corpus, const TrainOptions& options,
                     Rng& rng);

struct CorpusOptions {
  std::size_t uniform = 5000;
  std::size_t hill_climb_chains = 0;
  std::size_t hill_climb_steps = 0;
};

/// Uniform random sequences plus hill-climbing chains started from the best
/// uniform samples, every sequence labeled by `oracle`. Issues exactly
/// uniform + chains * steps oracle queries.
std::vector<LabeledSequence> build_pretraining_corpus(Scorer& oracle, std::size_t seq_len, const Alphabet& alphabet,
                                                      const CorpusOptions& options, Rng& rng);

struct FinetuneSchedule {
  /// Environment steps (individual scorer queries) between ticks.
  std::size_t interval = 2000;
  std::size_t top_k = 100;
  std::size_t epochs = 50;
  double learning_rate = 1e-3;
  std::size_t batch_size = 32;

  void validate() const;
};

struct CorrelationEntry {
  std::uint64_t oracle_queries = 0;
  double pearson_r = 0.0;
};

class CorrelationLog {
 public:
  void append(CorrelationEntry e) { entries_.push_back(e); }
  const std::vector<CorrelationEntry>& entries() const { return entries_; }
  bool empty() const { return entries_.empty(); }
  /// CSV with header `oracle_queries,pearson_r`.
  void write_csv(std::ostream& out) const;

 private:
  std::vector<CorrelationEntry> entries_;
};

struct FinetuneResult {
  CorrelationEntry entry;
  std::vector<LabeledSequence> selected;
  std::vector<double> proxy_predictions;
  std::vector<double> epoch_mse;
  std::uint64_t oracle_queries = 0;
};

/// Ranks `pool` by proxy score, labels the top-K distinct sequences with the
/// oracle, logs the pre-finetune proxy/oracle correlation on them, then runs
/// `epochs` of MSE descent on those pairs with a fresh optimizer. If the oracle
/// throws, the model is left unchanged. `oracle_queries_before` stamps the log entry.
FinetuneResult finetune_tick(ProxyModel& model, std::span<const Sequence> pool, Scorer& oracle,
                             const FinetuneSchedule& schedule, Rng& rng, std::uint64_t oracle_queries_before);

}  // namespace seqdesign

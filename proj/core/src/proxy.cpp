#include "seqdesign/proxy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>
#include <unordered_set>

#include "seqdesign/error.hpp"

namespace seqdesign {

double pearson(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size()) throw ContractError("pearson: series lengths differ");
  if (xs.size() < 2) throw ContractError("pearson: need at least two points");
  auto constant = [](std::span<const double> v) {
    return std::all_of(v.begin(), v.end(), [&](double x) { return x == v.front(); });
  };
  if (constant(xs) || constant(ys)) throw DomainError("pearson: constant series, correlation undefined");
  const double n = static_cast<double>(xs.size());
  const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
  const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double dx = xs[i] - mx;
    const double dy = ys[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) throw DomainError("pearson: zero variance, correlation undefined");
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

std::vector<std::size_t> proxy_hidden_sizes(std::size_t input_size, std::size_t target_params) {
  constexpr std::size_t h2 = 16;
  // params = in*h1 + h1 + h1*h2 + h2 + h2 + 1
  const double budget = static_cast<double>(target_params) - 2.0 * h2 - 1.0;
  auto h1 = static_cast<std::size_t>(std::lround(budget / static_cast<double>(input_size + 1 + h2)));
  h1 = std::clamp<std::size_t>(h1, 4, 256);
  return {h1, h2};
}

namespace {

std::vector<std::size_t> layer_sizes(std::size_t input, const std::vector<std::size_t>& hidden) {
  std::vector<std::size_t> sizes{input};
  sizes.insert(sizes.end(), hidden.begin(), hidden.end());
  sizes.push_back(1);
  return sizes;
}

}  // namespace

ProxyModel::ProxyModel(std::size_t seq_len, Alphabet alphabet, Rng& rng, std::vector<std::size_t> hidden)
    : seq_len_(seq_len), alphabet_(std::move(alphabet)) {
  const std::size_t in = seq_len_ * alphabet_.size();
  if (hidden.empty()) hidden = proxy_hidden_sizes(in);
  net_ = nn::DenseNet(layer_sizes(in, hidden), rng);
}

ProxyModel::ProxyModel(std::size_t seq_len, Alphabet alphabet, nn::DenseNet net)
    : seq_len_(seq_len), alphabet_(std::move(alphabet)), net_(std::move(net)) {
  if (net_.input_size() != seq_len_ * alphabet_.size() || net_.output_size() != 1)
    throw ContractError("proxy network shape does not match sequence space");
}

double ProxyModel::predict(const Sequence& seq) const {
  std::vector<double> x(seq_len_ * alphabet_.size());
  encode_one_hot_into(seq, alphabet_.size(), x);
  return nn::logistic(net_.forward(x)[0]);
}

std::vector<double> ProxyModel::predict(std::span<const Sequence> batch) const {
  std::vector<double> out;
  out.reserve(batch.size());
  for (const auto& s : batch) out.push_back(predict(s));
  return out;
}

std::vector<ScoreReport> ProxyModel::score(std::span<const Sequence> batch) {
  std::vector<ScoreReport> out;
  out.reserve(batch.size());
  for (const auto& s : batch) {
    double p = predict(s);
    if (p <= 0.0) p = std::numeric_limits<double>::min();
    out.push_back({p, {}});
  }
  return out;
}

std::string ProxyModel::describe() const {
  return "proxy(params=" + std::to_string(net_.parameter_count()) + ")";
}

double ProxyModel::mse(std::span<const LabeledSequence> data) const {
  if (data.empty()) return 0.0;
  double s = 0.0;
  for (const auto& d : data) {
    const double e = predict(d.sequence) - d.label;
    s += e * e;
  }
  return s / static_cast<double>(data.size());
}

double ProxyModel::loss_gradient(std::span<const LabeledSequence> data, std::span<double> grads) const {
  std::vector<double> x(seq_len_ * alphabet_.size());
  nn::DenseNet::Tape tape;
  double loss = 0.0;
  const double inv_n = 1.0 / static_cast<double>(data.size());
  for (const auto& d : data) {
    encode_one_hot_into(d.sequence, alphabet_.size(), x);
    const double z = net_.forward(x, tape)[0];
    const double p = nn::logistic(z);
    const double err = p - d.label;
    loss += err * err * inv_n;
    const double upstream = 2.0 * err * p * (1.0 - p) * inv_n;
    net_.backward(tape, std::span<const double>(&upstream, 1), grads);
  }
  return loss;
}

double ProxyModel::train_epoch(std::span<const LabeledSequence> data, nn::Adam& optimizer, std::size_t batch_size,
                               Rng& rng) {
  if (data.empty()) throw ContractError("cannot train on empty data");
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<double> grads(net_.parameter_count());
  std::vector<LabeledSequence> batch;
  double total = 0.0;
  std::size_t batches = 0;
  for (std::size_t start = 0; start < order.size(); start += batch_size) {
    const std::size_t end = std::min(order.size(), start + batch_size);
    batch.clear();
    for (std::size_t k = start; k < end; ++k) batch.push_back(data[order[k]]);
    std::fill(grads.begin(), grads.end(), 0.0);
    const double loss = loss_gradient(batch, grads);
    if (!std::isfinite(loss)) throw NumericalError("proxy loss is not finite");
    optimizer.step(net_.parameters(), grads);
    total += loss;
    ++batches;
  }
  return total / static_cast<double>(batches);
}

TrainReport pretrain(ProxyModel& model, std::span<const LabeledSequence> corpus, const TrainOptions& options,
                     Rng& rng) {
  if (corpus.empty()) throw ContractError("pretraining corpus is empty");
  TrainReport report;
  report.initial_loss = model.mse(corpus);
  nn::Adam opt(model.net().parameter_count(), {options.learning_rate});
  for (std::size_t e = 0; e < options.epochs; ++e)
    report.epoch_losses.push_back(model.train_epoch(corpus, opt, options.batch_size, rng));
  report.final_loss = model.mse(corpus);
  return report;
}

std::vector<LabeledSequence> build_pretraining_corpus(Scorer& oracle, std::size_t seq_len, const Alphabet& alphabet,
                                                      const CorpusOptions& options, Rng& rng) {
  std::vector<Sequence> uniform;
  uniform.reserve(options.uniform);
  for (std::size_t i = 0; i < options.uniform; ++i) uniform.push_back(Sequence::random(seq_len, alphabet, rng));
  const auto labels = score_values(oracle, uniform);

  std::vector<LabeledSequence> corpus;
  corpus.reserve(options.uniform + options.hill_climb_chains * options.hill_climb_steps);
  for (std::size_t i = 0; i < uniform.size(); ++i) corpus.push_back({uniform[i], labels[i]});
  if (options.hill_climb_chains == 0 || options.hill_climb_steps == 0 || uniform.empty()) return corpus;

  std::vector<std::size_t> order(uniform.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return labels[a] > labels[b]; });

  std::vector<Sequence> chains;
  std::vector<double> current;
  for (std::size_t c = 0; c < options.hill_climb_chains; ++c) {
    const auto idx = order[c % order.size()];
    chains.push_back(uniform[idx]);
    current.push_back(labels[idx]);
  }
  std::uniform_int_distribution<std::size_t> pick(0, seq_len * alphabet.size() - 1);
  for (std::size_t step = 0; step < options.hill_climb_steps; ++step) {
    std::vector<Sequence> proposals;
    proposals.reserve(chains.size());
    for (const auto& s : chains)
      proposals.push_back(apply_mutation(s, decode_action(pick(rng), seq_len, alphabet.size()), alphabet.size()));
    const auto scores = score_values(oracle, proposals);
    for (std::size_t c = 0; c < chains.size(); ++c) {
      corpus.push_back({proposals[c], scores[c]});
      if (scores[c] > current[c]) {
        chains[c] = std::move(proposals[c]);
        current[c] = scores[c];
      }
    }
  }
  return corpus;
}

void FinetuneSchedule::validate() const {
  if (interval == 0 || top_k == 0 || epochs == 0 || batch_size == 0 || !(learning_rate > 0.0))
    throw ConfigError("finetune schedule values must be positive");
}

void CorrelationLog::write_csv(std::ostream& out) const {
  out << "oracle_queries,pearson_r\n";
  char buf[64];
  for (const auto& e : entries_) {
    std::snprintf(buf, sizeof(buf), "%.17g", e.pearson_r);
    out << e.oracle_queries << ',' << buf << '\n';
  }
}

FinetuneResult finetune_tick(ProxyModel& model, std::span<const Sequence> pool, Scorer& oracle,
                             const FinetuneSchedule& schedule, Rng& rng, std::uint64_t oracle_queries_before) {
  if (pool.empty()) throw ContractError("finetune pool is empty");
  schedule.validate();

  std::vector<Sequence> distinct;
  {
    std::unordered_set<Sequence, SequenceHash> seen;
    for (const auto& s : pool)
      if (seen.insert(s).second) distinct.push_back(s);
  }
  const auto preds = model.predict(distinct);
  std::vector<std::size_t> order(distinct.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return preds[a] > preds[b]; });
  order.resize(std::min(schedule.top_k, order.size()));

  FinetuneResult result;
  std::vector<Sequence> chosen;
  chosen.reserve(order.size());
  for (auto i : order) {
    chosen.push_back(distinct[i]);
    result.proxy_predictions.push_back(preds[i]);
  }
  const auto labels = score_values(oracle, chosen);
  result.oracle_queries = chosen.size();
  for (std::size_t k = 0; k < chosen.size(); ++k) result.selected.push_back({chosen[k], labels[k]});

  result.entry.oracle_queries = oracle_queries_before + result.oracle_queries;
  try {
    result.entry.pearson_r = pearson(result.proxy_predictions, labels);
  } catch (const Error&) {
    result.entry.pearson_r = std::numeric_limits<double>::quiet_NaN();
  }

  nn::Adam opt(model.net().parameter_count(), {schedule.learning_rate});
  result.epoch_mse.push_back(model.mse(result.selected));
  for (std::size_t e = 0; e < schedule.epochs; ++e) {
    model.train_epoch(result.selected, opt, schedule.batch_size, rng);
    result.epoch_mse.push_back(model.mse(result.selected));
  }
  return result;
}

}  // namespace seqdesign

#include "seqdesign/rnd.hpp"

#include <cmath>

#include "seqdesign/agent.hpp"
#include "seqdesign/error.hpp"

namespace seqdesign {

RndPair::RndPair(std::size_t seq_len, std::size_t alphabet_size, const RndConfig& config, Rng& rng)
    : seq_len_(seq_len),
      alphabet_size_(alphabet_size),
      target_(mlp_sizes(seq_len * alphabet_size, config.hidden, config.embedding), rng),
      predictor_(mlp_sizes(seq_len * alphabet_size, config.hidden, config.embedding), rng),
      optimizer_(predictor_.parameter_count(), {config.learning_rate}) {}

double RndPair::raw_bonus(const Sequence& seq) const {
  std::vector<double> x(seq_len_ * alphabet_size_);
  encode_one_hot_into(seq, alphabet_size_, x);
  const auto t = target_.forward(x);
  const auto p = predictor_.forward(x);
  double s = 0.0;
  for (std::size_t k = 0; k < t.size(); ++k) s += (p[k] - t[k]) * (p[k] - t[k]);
  return s;
}

double RndPair::running_std() const {
  if (count_ < 2) return 1.0;
  const double sd = std::sqrt(m2_ / static_cast<double>(count_ - 1));
  return sd > 1e-12 ? sd : 1.0;
}

double RndPair::bonus(const Sequence& seq) const { return raw_bonus(seq) / running_std(); }

void RndPair::observe(double raw) {
  ++count_;
  const double d = raw - mean_;
  mean_ += d / static_cast<double>(count_);
  m2_ += d * (raw - mean_);
}

double RndPair::update(std::span<const Sequence> states) {
  if (states.empty()) return 0.0;
  std::vector<double> grads(predictor_.parameter_count(), 0.0);
  std::vector<double> x(seq_len_ * alphabet_size_);
  std::vector<double> up;
  nn::DenseNet::Tape tape;
  const double inv_n = 1.0 / static_cast<double>(states.size());
  double loss = 0.0;
  for (const auto& s : states) {
    encode_one_hot_into(s, alphabet_size_, x);
    const auto t = target_.forward(x);
    const auto p = predictor_.forward(x, tape);
    up.resize(p.size());
    for (std::size_t k = 0; k < p.size(); ++k) {
      const double e = p[k] - t[k];
      loss += e * e * inv_n;
      up[k] = 2.0 * e * inv_n;
    }
    predictor_.backward(tape, up, grads);
  }
  if (!std::isfinite(loss)) throw NumericalError("RND predictor loss is not finite");
  optimizer_.step(predictor_.parameters(), grads);
  return loss;
}

}  // namespace seqdesign

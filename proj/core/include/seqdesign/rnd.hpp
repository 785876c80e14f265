#pragma once

#include <span>
#include <vector>

#include "seqdesign/nn.hpp"
#include "seqdesign/sequence.hpp"

namespace seqdesign {

struct RndConfig {
  std::size_t embedding = 32;
  std::vector<std::size_t> hidden{64};
  /// Weight of the normalized bonus in the combined reward.
  double coef = 0.05;
  double learning_rate = 1e-3;
};

/// Random network distillation: a frozen random target embedding and a
/// predictor trained toward it. Prediction error is the novelty bonus.
class RndPair {
 public:
  RndPair(std::size_t seq_len, std::size_t alphabet_size, const RndConfig& config, Rng& rng);

  /// Squared embedding error, unnormalized.
  double raw_bonus(const Sequence& seq) const;
  /// raw_bonus divided by the running standard deviation of observed raw bonuses.
  double bonus(const Sequence& seq) const;
  void observe(double raw);
  /// One optimizer step of predictor MSE over `states`; returns the pre-step loss.
  double update(std::span<const Sequence> states);
  double running_std() const;

  const nn::DenseNet& target() const { return target_; }
  nn::DenseNet& predictor() { return predictor_; }
  /// Test hook: make the predictor an exact copy of the target.
  void copy_target_into_predictor() { predictor_ = target_; }

 private:
  std::size_t seq_len_;
  std::size_t alphabet_size_;
  nn::DenseNet target_;
  nn::DenseNet predictor_;
  nn::Adam optimizer_;
  std::size_t count_ = 0;
  double mean_ = 0.0;
  double m2_ = 0.0;
};

}  // namespace seqdesign

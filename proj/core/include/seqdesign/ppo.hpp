#pragma once

#include <optional>
#include <span>
#include <vector>

#include "seqdesign/agent.hpp"
#include "seqdesign/nn.hpp"
#include "seqdesign/rnd.hpp"

namespace seqdesign {

struct PpoConfig {
  double gamma = 0.99;
  double gae_lambda = 0.95;
  double clip = 0.2;
  double entropy_coef = 0.01;
  double value_coef = 0.5;
  std::size_t rollout_steps = 128;
  std::size_t epochs = 4;
  std::size_t minibatches = 8;
  double learning_rate = 3e-4;
  double max_grad_norm = 0.5;
  std::vector<std::size_t> hidden{64, 64};
};

/// min(r * A, clip(r, 1 - eps, 1 + eps) * A)
double ppo_surrogate(double ratio, double advantage, double clip);

/// Gradient of the per-sample PPO policy loss
///   -surrogate(ratio, A) - entropy_coef * H(p)
/// with respect to the logits. `probs` is softmax(logits) and ratio = p[action] / p_old[action].
std::vector<double> ppo_logit_gradient(std::span<const double> probs, std::size_t action, double ratio,
                                       double advantage, double clip, double entropy_coef);

/// Generalized advantage estimation over a [step][env] flattened rollout.
/// `last_values` bootstraps the state after the final step; a done flag cuts the
/// bootstrap for that env at that step.
std::vector<double> compute_gae(std::span<const double> rewards, std::span<const double> values,
                                std::span<const std::uint8_t> dones, std::span<const double> last_values,
                                std::size_t n_envs, double gamma, double lambda);

/// Fixed-horizon storage of B envs x N steps, flattened step-major.
struct RolloutBuffer {
  std::size_t capacity_steps = 0;
  std::size_t n_envs = 0;
  std::size_t steps = 0;
  std::vector<Sequence> states;
  std::vector<std::size_t> actions;
  std::vector<double> log_probs;
  std::vector<double> rewards;
  std::vector<double> values;
  std::vector<std::uint8_t> dones;

  bool full() const { return steps == capacity_steps; }
  void clear();
};

struct PpoStats {
  double policy_loss = 0.0;
  double value_loss = 0.0;
  double entropy = 0.0;
  double clip_fraction = 0.0;
  std::size_t updates = 0;
};

/// Clipped-surrogate actor-critic with separate policy and value networks.
/// With an RndConfig the extrinsic reward is augmented by an RND novelty bonus.
class PpoAgent : public Agent {
 public:
  PpoAgent(const EnvConfig& env, PpoConfig config, Rng& rng, std::optional<RndConfig> rnd = std::nullopt);

  AgentKind kind() const override { return rnd_ ? AgentKind::kPpoRnd : AgentKind::kPpo; }
  StepOutcome step(BatchEnv& env, Scorer& scorer, Rng& rng) override;

  std::vector<double> action_probabilities(const Sequence& state) const;
  double value(const Sequence& state) const;
  const PpoStats& last_stats() const { return stats_; }
  const RolloutBuffer& buffer() const { return buffer_; }
  nn::DenseNet& policy() { return policy_; }
  nn::DenseNet& value_net() { return value_; }

 private:
  void update(const std::vector<Sequence>& next_states, Rng& rng);

  PpoConfig config_;
  std::size_t seq_len_;
  std::size_t alphabet_size_;
  nn::DenseNet policy_;
  nn::DenseNet value_;
  nn::Adam policy_opt_;
  nn::Adam value_opt_;
  std::optional<RndPair> rnd_;
  double rnd_coef_ = 0.0;
  RolloutBuffer buffer_;
  PpoStats stats_;
};

}  // namespace seqdesign

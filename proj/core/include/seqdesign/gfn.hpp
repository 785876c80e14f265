#pragma once

#include <span>
#include <vector>

#include "seqdesign/agent.hpp"
#include "seqdesign/nn.hpp"

namespace seqdesign {

struct GfnConfig {
  /// Reward exponent: the trained sampler targets R(x)^beta.
  double beta = 6.0;
  double learning_rate = 1e-3;
  std::size_t replay_capacity = 10000;
  /// Replayed start states mixed into each update alongside the current batch.
  std::size_t replay_batch = 100;
  std::size_t updates_per_step = 1;
  /// Probability of a uniform action instead of an on-policy one.
  double exploration = 0.05;
  double max_grad_norm = 10.0;
  std::vector<std::size_t> hidden{64, 64};
};

/// One single-step trajectory: start state, chosen mutation, reward of the child.
struct GfnSample {
  Sequence start;
  std::size_t action = 0;
  double reward = 0.0;
};

/// Trajectory-balance residual logZ(s0) + log pi(a|s0) - beta * log R(x).
/// Throws DomainError for R <= 0.
double trajectory_balance_residual(double log_z, double log_prob, double beta, double reward);

/// Single-step GFlowNet. The policy network emits one logit per mutation plus a
/// trailing output read as the state-conditioned log partition logZ(s0).
class GfnAgent : public Agent {
 public:
  GfnAgent(const EnvConfig& env, GfnConfig config, Rng& rng);

  AgentKind kind() const override { return AgentKind::kGfn; }
  StepOutcome step(BatchEnv& env, Scorer& scorer, Rng& rng) override;

  /// One optimizer step on the mean squared trajectory-balance residual; returns the loss.
  double update(std::span<const GfnSample> samples);
  /// Accumulates d(mean loss)/dparams into `grads`; returns the loss.
  double loss_gradient(std::span<const GfnSample> samples, std::span<double> grads) const;

  std::vector<double> action_probabilities(const Sequence& state) const;
  double log_z(const Sequence& state) const;
  /// Action drawn from the exploratory behaviour policy.
  std::size_t sample_action(const Sequence& state, Rng& rng) const;

  nn::DenseNet& net() { return net_; }
  const GfnConfig& config() const { return config_; }

 private:
  GfnConfig config_;
  std::size_t seq_len_;
  std::size_t alphabet_size_;
  std::size_t n_actions_;
  nn::DenseNet net_;
  nn::Adam optimizer_;
  std::vector<GfnSample> replay_;
  std::size_t replay_next_ = 0;
};

}  // namespace seqdesign

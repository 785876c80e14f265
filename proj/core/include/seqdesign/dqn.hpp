#pragma once

#include <span>
#include <vector>

#include "seqdesign/agent.hpp"
#include "seqdesign/nn.hpp"

namespace seqdesign {

struct DqnConfig {
  double gamma = 0.99;
  std::size_t capacity = 100000;
  std::size_t batch_size = 256;
  std::size_t warmup = 256;
  std::size_t target_sync = 1000;
  std::size_t updates_per_step = 1;
  double epsilon_start = 1.0;
  double epsilon_end = 0.05;
  /// Fraction of the run over which epsilon decays linearly.
  double epsilon_fraction = 0.2;
  double learning_rate = 1e-4;
  double huber_delta = 1.0;
  double max_grad_norm = 10.0;
  std::vector<std::size_t> hidden{64, 64};
};

struct ReplayItem {
  Sequence state;
  std::size_t action = 0;
  double reward = 0.0;
  Sequence next_state;
  bool done = false;
};

/// Ring buffer with uniform sampling (with replacement).
class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity);
  void add(ReplayItem item);
  std::vector<const ReplayItem*> sample(std::size_t n, Rng& rng) const;
  std::size_t size() const { return items_.size(); }
  std::size_t capacity() const { return capacity_; }
  const ReplayItem& at(std::size_t i) const { return items_.at(i); }

 private:
  std::size_t capacity_;
  std::size_t next_ = 0;
  std::vector<ReplayItem> items_;
};

/// r + gamma * max_next_q, with the bootstrap dropped on terminal transitions.
double dqn_target(double reward, bool done, double gamma, double max_next_q);
/// Derivative of the Huber loss at residual `error`.
double huber_gradient(double error, double delta);
double huber_loss(double error, double delta);

class DqnAgent : public Agent {
 public:
  DqnAgent(const EnvConfig& env, DqnConfig config, Rng& rng);

  AgentKind kind() const override { return AgentKind::kDqn; }
  void begin(BatchEnv& env, std::size_t total_steps) override;
  StepOutcome step(BatchEnv& env, Scorer& scorer, Rng& rng) override;

  /// One gradient step on the given items; returns the mean Huber loss.
  double train_on(std::span<const ReplayItem* const> batch);
  std::vector<double> q_values(const Sequence& state) const;
  std::size_t greedy_action(const Sequence& state) const;
  double epsilon() const;
  void sync_target() { target_ = online_; }

  const ReplayBuffer& replay() const { return replay_; }
  std::size_t updates() const { return updates_; }

 private:
  DqnConfig config_;
  std::size_t seq_len_;
  std::size_t alphabet_size_;
  nn::DenseNet online_;
  nn::DenseNet target_;
  nn::Adam optimizer_;
  ReplayBuffer replay_;
  std::size_t total_steps_ = 0;
  std::size_t steps_done_ = 0;
  std::size_t updates_ = 0;
};

}  // namespace seqdesign

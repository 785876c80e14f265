#include "seqdesign/dqn.hpp"

#include <algorithm>
#include <cmath>

#include "seqdesign/error.hpp"

namespace seqdesign {

ReplayBuffer::ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
  if (capacity_ == 0) throw ConfigError("replay capacity must be positive");
}

void ReplayBuffer::add(ReplayItem item) {
  if (items_.size() < capacity_) {
    items_.push_back(std::move(item));
  } else {
    items_[next_] = std::move(item);
  }
  next_ = (next_ + 1) % capacity_;
}

std::vector<const ReplayItem*> ReplayBuffer::sample(std::size_t n, Rng& rng) const {
  if (items_.empty()) throw ContractError("cannot sample from an empty replay buffer");
  std::uniform_int_distribution<std::size_t> pick(0, items_.size() - 1);
  std::vector<const ReplayItem*> out(n);
  for (auto& p : out) p = &items_[pick(rng)];
  return out;
}

double dqn_target(double reward, bool done, double gamma, double max_next_q) {
  return done ? reward : reward + gamma * max_next_q;
}

double huber_loss(double error, double delta) {
  const double a = std::abs(error);
  return a <= delta ? 0.5 * error * error : delta * (a - 0.5 * delta);
}

double huber_gradient(double error, double delta) { return std::clamp(error, -delta, delta); }

DqnAgent::DqnAgent(const EnvConfig& env, DqnConfig config, Rng& rng)
    : config_(std::move(config)),
      seq_len_(env.seq_len),
      alphabet_size_(env.alphabet.size()),
      online_(mlp_sizes(env.seq_len * env.alphabet.size(), config_.hidden, env.action_count()), rng),
      target_(online_),
      optimizer_(online_.parameter_count(), {config_.learning_rate}),
      replay_(config_.capacity) {
  if (config_.batch_size == 0 || config_.target_sync == 0) throw ConfigError("DQN batch and sync must be positive");
}

void DqnAgent::begin(BatchEnv& env, std::size_t total_steps) {
  (void)env;
  total_steps_ = total_steps;
  steps_done_ = 0;
}

double DqnAgent::epsilon() const {
  const double horizon = config_.epsilon_fraction * static_cast<double>(total_steps_);
  if (horizon <= 0.0) return config_.epsilon_end;
  const double frac = std::min(1.0, static_cast<double>(steps_done_) / horizon);
  return config_.epsilon_start + frac * (config_.epsilon_end - config_.epsilon_start);
}

std::vector<double> DqnAgent::q_values(const Sequence& state) const {
  std::vector<double> x(seq_len_ * alphabet_size_);
  encode_one_hot_into(state, alphabet_size_, x);
  return online_.forward(x);
}

std::size_t DqnAgent::greedy_action(const Sequence& state) const {
  const auto q = q_values(state);
  return static_cast<std::size_t>(std::max_element(q.begin(), q.end()) - q.begin());
}

double DqnAgent::train_on(std::span<const ReplayItem* const> batch) {
  if (batch.empty()) return 0.0;
  std::vector<double> grads(online_.parameter_count(), 0.0);
  std::vector<double> x(seq_len_ * alphabet_size_);
  std::vector<double> up;
  nn::DenseNet::Tape tape;
  const double inv = 1.0 / static_cast<double>(batch.size());
  double loss = 0.0;
  for (const ReplayItem* item : batch) {
    double max_next = 0.0;
    if (!item->done && config_.gamma != 0.0) {
      encode_one_hot_into(item->next_state, alphabet_size_, x);
      const auto qn = target_.forward(x);
      max_next = *std::max_element(qn.begin(), qn.end());
    }
    const double y = dqn_target(item->reward, item->done, config_.gamma, max_next);
    encode_one_hot_into(item->state, alphabet_size_, x);
    const auto q = online_.forward(x, tape);
    const double err = q[item->action] - y;
    loss += huber_loss(err, config_.huber_delta) * inv;
    up.assign(q.size(), 0.0);
    up[item->action] = huber_gradient(err, config_.huber_delta) * inv;
    online_.backward(tape, up, grads);
  }
  if (!std::isfinite(loss)) throw NumericalError("DQN loss is not finite");
  nn::clip_grad_norm(grads, config_.max_grad_norm);
  optimizer_.step(online_.parameters(), grads);
  ++updates_;
  if (updates_ % config_.target_sync == 0) sync_target();
  return loss;
}

StepOutcome DqnAgent::step(BatchEnv& env, Scorer& scorer, Rng& rng) {
  const std::size_t B = env.batch_size();
  const double eps = epsilon();
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  std::uniform_int_distribution<std::size_t> pick(0, env.config().action_count() - 1);
  std::vector<MutationAction> actions(B);
  for (std::size_t b = 0; b < B; ++b) {
    const std::size_t a = coin(rng) < eps ? pick(rng) : greedy_action(env.sequences()[b]);
    actions[b] = decode_action(a, seq_len_, alphabet_size_);
  }
  auto transitions = env.step(actions, scorer);
  for (const auto& t : transitions) replay_.add({t.state, t.action.flat, t.reward, t.next_state, t.done});

  if (replay_.size() >= std::max(config_.warmup, std::size_t{1})) {
    for (std::size_t u = 0; u < config_.updates_per_step; ++u) {
      const auto batch = replay_.sample(config_.batch_size, rng);
      train_on(batch);
    }
  }
  ++steps_done_;
  auto out = outcome_from_transitions(transitions);
  out.epsilon = eps;
  return out;
}

}  // namespace seqdesign

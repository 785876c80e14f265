#include "seqdesign/gfn.hpp"

#include <cmath>

#include "seqdesign/error.hpp"

namespace seqdesign {

double trajectory_balance_residual(double log_z, double log_prob, double beta, double reward) {
  if (!(reward > 0.0)) throw DomainError("trajectory balance needs a positive reward");
  return log_z + log_prob - beta * std::log(reward);
}

GfnAgent::GfnAgent(const EnvConfig& env, GfnConfig config, Rng& rng)
    : config_(std::move(config)),
      seq_len_(env.seq_len),
      alphabet_size_(env.alphabet.size()),
      n_actions_(env.action_count()),
      net_(mlp_sizes(env.seq_len * env.alphabet.size(), config_.hidden, env.action_count() + 1), rng),
      optimizer_(net_.parameter_count(), {config_.learning_rate}) {
  if (!(config_.beta >= 0.0)) throw ConfigError("GFlowNet beta must be non-negative");
  if (config_.replay_capacity == 0) throw ConfigError("GFlowNet replay capacity must be positive");
}

std::vector<double> GfnAgent::action_probabilities(const Sequence& state) const {
  std::vector<double> x(seq_len_ * alphabet_size_);
  encode_one_hot_into(state, alphabet_size_, x);
  const auto out = net_.forward(x);
  return nn::softmax(std::span<const double>(out.data(), n_actions_));
}

double GfnAgent::log_z(const Sequence& state) const {
  std::vector<double> x(seq_len_ * alphabet_size_);
  encode_one_hot_into(state, alphabet_size_, x);
  return net_.forward(x)[n_actions_];
}

std::size_t GfnAgent::sample_action(const Sequence& state, Rng& rng) const {
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  if (coin(rng) < config_.exploration) {
    std::uniform_int_distribution<std::size_t> pick(0, n_actions_ - 1);
    return pick(rng);
  }
  const auto p = action_probabilities(state);
  return nn::sample_probabilities(p, rng);
}

double GfnAgent::loss_gradient(std::span<const GfnSample> samples, std::span<double> grads) const {
  std::vector<double> x(seq_len_ * alphabet_size_);
  std::vector<double> up(n_actions_ + 1);
  nn::DenseNet::Tape tape;
  const double inv = 1.0 / static_cast<double>(samples.size());
  double loss = 0.0;
  for (const auto& s : samples) {
    encode_one_hot_into(s.start, alphabet_size_, x);
    const auto out = net_.forward(x, tape);
    const auto lsm = nn::log_softmax(std::span<const double>(out.data(), n_actions_));
    const double r = trajectory_balance_residual(out[n_actions_], lsm[s.action], config_.beta, s.reward);
    loss += r * r * inv;
    const double g = 2.0 * r * inv;
    for (std::size_t k = 0; k < n_actions_; ++k) up[k] = g * ((k == s.action ? 1.0 : 0.0) - std::exp(lsm[k]));
    up[n_actions_] = g;
    net_.backward(tape, up, grads);
  }
  return loss;
}

double GfnAgent::update(std::span<const GfnSample> samples) {
  if (samples.empty()) return 0.0;
  std::vector<double> grads(net_.parameter_count(), 0.0);
  const double loss = loss_gradient(samples, grads);
  if (!std::isfinite(loss)) throw NumericalError("trajectory balance loss is not finite");
  nn::clip_grad_norm(grads, config_.max_grad_norm);
  optimizer_.step(net_.parameters(), grads);
  return loss;
}

StepOutcome GfnAgent::step(BatchEnv& env, Scorer& scorer, Rng& rng) {
  const std::size_t B = env.batch_size();
  std::vector<MutationAction> actions(B);
  for (std::size_t b = 0; b < B; ++b)
    actions[b] = decode_action(sample_action(env.sequences()[b], rng), seq_len_, alphabet_size_);
  auto transitions = env.step(actions, scorer);

  std::vector<GfnSample> batch;
  batch.reserve(B + config_.replay_batch);
  for (const auto& t : transitions) batch.push_back({t.state, t.action.flat, t.reward});
  for (std::size_t u = 0; u < config_.updates_per_step; ++u) {
    std::vector<GfnSample> mb = u == 0 ? batch : std::vector<GfnSample>{};
    if (!replay_.empty() && config_.replay_batch > 0) {
      std::uniform_int_distribution<std::size_t> pick(0, replay_.size() - 1);
      for (std::size_t k = 0; k < config_.replay_batch; ++k) mb.push_back(replay_[pick(rng)]);
    }
    update(mb);
  }
  for (auto& s : batch) {
    if (replay_.size() < config_.replay_capacity) {
      replay_.push_back(std::move(s));
    } else {
      replay_[replay_next_] = std::move(s);
    }
    replay_next_ = (replay_next_ + 1) % config_.replay_capacity;
  }
  return outcome_from_transitions(transitions);
}

}  // namespace seqdesign

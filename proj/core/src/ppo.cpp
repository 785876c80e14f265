#include "seqdesign/ppo.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "seqdesign/error.hpp"

namespace seqdesign {

double ppo_surrogate(double ratio, double advantage, double clip) {
  const double clipped = std::clamp(ratio, 1.0 - clip, 1.0 + clip);
  return std::min(ratio * advantage, clipped * advantage);
}

std::vector<double> ppo_logit_gradient(std::span<const double> probs, std::size_t action, double ratio,
                                       double advantage, double clip, double entropy_coef) {
  const std::size_t n = probs.size();
  std::vector<double> g(n, 0.0);
  // The unclipped branch is the active minimum unless the ratio has left the
  // trust region in the direction the advantage rewards.
  const bool active = advantage >= 0.0 ? ratio < 1.0 + clip : ratio > 1.0 - clip;
  if (active) {
    const double coeff = -ratio * advantage;  // d(-r*A)/d(log p_a)
    for (std::size_t k = 0; k < n; ++k) g[k] = coeff * ((k == action ? 1.0 : 0.0) - probs[k]);
  }
  if (entropy_coef != 0.0) {
    double h = 0.0;
    for (double p : probs)
      if (p > 0.0) h -= p * std::log(p);
    for (std::size_t k = 0; k < n; ++k) {
      const double lp = probs[k] > 0.0 ? std::log(probs[k]) : 0.0;
      // dH/dz_k = -p_k (log p_k + H); loss carries -entropy_coef * H
      g[k] += entropy_coef * probs[k] * (lp + h);
    }
  }
  return g;
}

std::vector<double> compute_gae(std::span<const double> rewards, std::span<const double> values,
                                std::span<const std::uint8_t> dones, std::span<const double> last_values,
                                std::size_t n_envs, double gamma, double lambda) {
  const std::size_t total = rewards.size();
  if (values.size() != total || dones.size() != total || last_values.size() != n_envs || total % n_envs != 0)
    throw ContractError("GAE inputs have inconsistent shapes");
  const std::size_t steps = total / n_envs;
  std::vector<double> adv(total, 0.0);
  std::vector<double> running(n_envs, 0.0);
  for (std::size_t t = steps; t-- > 0;) {
    for (std::size_t b = 0; b < n_envs; ++b) {
      const std::size_t k = t * n_envs + b;
      const double next_value = t + 1 == steps ? last_values[b] : values[k + n_envs];
      const double nonterminal = dones[k] ? 0.0 : 1.0;
      const double delta = rewards[k] + gamma * next_value * nonterminal - values[k];
      running[b] = delta + gamma * lambda * nonterminal * running[b];
      adv[k] = running[b];
    }
  }
  return adv;
}

void RolloutBuffer::clear() {
  steps = 0;
  states.clear();
  actions.clear();
  log_probs.clear();
  rewards.clear();
  values.clear();
  dones.clear();
}

PpoAgent::PpoAgent(const EnvConfig& env, PpoConfig config, Rng& rng, std::optional<RndConfig> rnd)
    : config_(std::move(config)),
      seq_len_(env.seq_len),
      alphabet_size_(env.alphabet.size()),
      policy_(mlp_sizes(env.seq_len * env.alphabet.size(), config_.hidden, env.action_count()), rng),
      value_(mlp_sizes(env.seq_len * env.alphabet.size(), config_.hidden, 1), rng),
      policy_opt_(policy_.parameter_count(), {config_.learning_rate}),
      value_opt_(value_.parameter_count(), {config_.learning_rate}) {
  if (config_.rollout_steps == 0 || config_.epochs == 0 || config_.minibatches == 0)
    throw ConfigError("PPO rollout, epochs and minibatches must be positive");
  // Small final-layer weights keep the initial policy close to uniform.
  const std::size_t last = policy_.layer_count() - 1;
  const auto& sizes = policy_.layer_sizes();
  for (std::size_t j = 0; j < sizes[last]; ++j)
    for (std::size_t i = 0; i < sizes[last + 1]; ++i) policy_.weight(last, j, i) *= 0.01;
  if (rnd) {
    rnd_.emplace(env.seq_len, env.alphabet.size(), *rnd, rng);
    rnd_coef_ = rnd->coef;
  }
  buffer_.capacity_steps = config_.rollout_steps;
  buffer_.n_envs = env.batch_size;
}

std::vector<double> PpoAgent::action_probabilities(const Sequence& state) const {
  std::vector<double> x(seq_len_ * alphabet_size_);
  encode_one_hot_into(state, alphabet_size_, x);
  return nn::softmax(policy_.forward(x));
}

double PpoAgent::value(const Sequence& state) const {
  std::vector<double> x(seq_len_ * alphabet_size_);
  encode_one_hot_into(state, alphabet_size_, x);
  return value_.forward(x)[0];
}

StepOutcome PpoAgent::step(BatchEnv& env, Scorer& scorer, Rng& rng) {
  const std::size_t B = env.batch_size();
  std::vector<double> x(seq_len_ * alphabet_size_);
  std::vector<MutationAction> actions(B);
  std::vector<double> logp(B), vals(B);
  for (std::size_t b = 0; b < B; ++b) {
    encode_one_hot_into(env.sequences()[b], alphabet_size_, x);
    const auto lsm = nn::log_softmax(policy_.forward(x));
    std::vector<double> p(lsm.size());
    for (std::size_t k = 0; k < p.size(); ++k) p[k] = std::exp(lsm[k]);
    const std::size_t a = nn::sample_probabilities(p, rng);
    actions[b] = decode_action(a, seq_len_, alphabet_size_);
    logp[b] = lsm[a];
    vals[b] = value_.forward(x)[0];
  }

  auto transitions = env.step(actions, scorer);

  std::vector<Sequence> next_states;
  next_states.reserve(B);
  for (auto& t : transitions) next_states.push_back(t.next_state);
  std::vector<double> bonus(B, 0.0);
  if (rnd_) {
    for (std::size_t b = 0; b < B; ++b) {
      const double raw = rnd_->raw_bonus(next_states[b]);
      rnd_->observe(raw);
      bonus[b] = raw;
    }
    const double sd = rnd_->running_std();
    for (auto& v : bonus) v /= sd;
    rnd_->update(next_states);
  }

  for (std::size_t b = 0; b < B; ++b) {
    buffer_.states.push_back(transitions[b].state);
    buffer_.actions.push_back(actions[b].flat);
    buffer_.log_probs.push_back(logp[b]);
    buffer_.rewards.push_back(transitions[b].reward + rnd_coef_ * bonus[b]);
    buffer_.values.push_back(vals[b]);
    buffer_.dones.push_back(transitions[b].done ? 1 : 0);
  }
  ++buffer_.steps;
  if (buffer_.full()) update(env.sequences(), rng);

  return outcome_from_transitions(transitions);
}

void PpoAgent::update(const std::vector<Sequence>& next_states, Rng& rng) {
  const std::size_t B = buffer_.n_envs;
  const std::size_t n = buffer_.rewards.size();
  std::vector<double> last_values(B);
  for (std::size_t b = 0; b < B; ++b) last_values[b] = value(next_states[b]);

  auto adv = compute_gae(buffer_.rewards, buffer_.values, buffer_.dones, last_values, B, config_.gamma,
                         config_.gae_lambda);
  std::vector<double> returns(n);
  for (std::size_t k = 0; k < n; ++k) returns[k] = adv[k] + buffer_.values[k];
  {
    const double mean = std::accumulate(adv.begin(), adv.end(), 0.0) / static_cast<double>(n);
    double var = 0.0;
    for (double a : adv) var += (a - mean) * (a - mean);
    const double sd = std::sqrt(var / static_cast<double>(n));
    for (double& a : adv) a = (a - mean) / (sd + 1e-8);
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  const std::size_t mb_size = std::max<std::size_t>(1, n / config_.minibatches);
  std::vector<double> gp(policy_.parameter_count()), gv(value_.parameter_count());
  std::vector<double> x(seq_len_ * alphabet_size_);
  nn::DenseNet::Tape tape_p, tape_v;

  stats_ = {};
  double clipped = 0.0;
  std::size_t seen = 0;
  for (std::size_t epoch = 0; epoch < config_.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t start = 0; start < n; start += mb_size) {
      const std::size_t end = std::min(n, start + mb_size);
      const double inv = 1.0 / static_cast<double>(end - start);
      std::fill(gp.begin(), gp.end(), 0.0);
      std::fill(gv.begin(), gv.end(), 0.0);
      double pl = 0.0, vl = 0.0, ent = 0.0;
      for (std::size_t m = start; m < end; ++m) {
        const std::size_t k = order[m];
        encode_one_hot_into(buffer_.states[k], alphabet_size_, x);
        const auto lsm = nn::log_softmax(policy_.forward(x, tape_p));
        std::vector<double> p(lsm.size());
        double h = 0.0;
        for (std::size_t i = 0; i < p.size(); ++i) {
          p[i] = std::exp(lsm[i]);
          h -= p[i] * lsm[i];
        }
        const std::size_t a = buffer_.actions[k];
        const double ratio = std::exp(lsm[a] - buffer_.log_probs[k]);
        const double A = adv[k];
        pl -= ppo_surrogate(ratio, A, config_.clip) * inv;
        ent += h * inv;
        if (std::abs(ratio - 1.0) > config_.clip) clipped += 1.0;
        auto g = ppo_logit_gradient(p, a, ratio, A, config_.clip, config_.entropy_coef);
        for (double& v : g) v *= inv;
        policy_.backward(tape_p, g, gp);

        const double v = value_.forward(x, tape_v)[0];
        const double err = v - returns[k];
        vl += err * err * inv;
        const double up = 2.0 * config_.value_coef * err * inv;
        value_.backward(tape_v, std::span<const double>(&up, 1), gv);
        ++seen;
      }
      if (!std::isfinite(pl) || !std::isfinite(vl))
        throw NumericalError("PPO loss is not finite (policy " + std::to_string(pl) + ", value " +
                             std::to_string(vl) + ")");
      nn::clip_grad_norm(gp, config_.max_grad_norm);
      nn::clip_grad_norm(gv, config_.max_grad_norm);
      policy_opt_.step(policy_.parameters(), gp);
      value_opt_.step(value_.parameters(), gv);
      stats_.policy_loss = pl;
      stats_.value_loss = vl;
      stats_.entropy = ent;
      ++stats_.updates;
    }
  }
  stats_.clip_fraction = seen ? clipped / static_cast<double>(seen) : 0.0;
  buffer_.clear();
}

}  // namespace seqdesign

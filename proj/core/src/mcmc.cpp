#include "seqdesign/mcmc.hpp"

#include <cmath>

#include "seqdesign/error.hpp"

namespace seqdesign {

double metropolis_acceptance(double delta, double temperature) {
  if (!(temperature > 0.0)) throw ContractError("temperature must be positive");
  return delta >= 0.0 ? 1.0 : std::exp(delta / temperature);
}

AnnealState mcmc_step(AnnealState chain, Scorer& scorer, std::size_t alphabet_size, Rng& rng) {
  if (!(chain.temperature > 0.0)) throw ContractError("temperature must be positive");
  const std::size_t L = chain.current.size();
  std::uniform_int_distribution<std::size_t> pick(0, L * alphabet_size - 1);
  const auto action = decode_action(pick(rng), L, alphabet_size);
  auto proposal = apply_mutation(chain.current, action, alphabet_size);
  const double proposed = score_one(scorer, proposal);
  const double p = metropolis_acceptance(proposed - chain.score, chain.temperature);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  if (p >= 1.0 || u(rng) < p) {
    chain.current = std::move(proposal);
    chain.score = proposed;
  }
  chain.temperature *= chain.decay;
  return chain;
}

McmcAgent::McmcAgent(McmcConfig config) : config_(config), temperature_(config.initial_temperature) {
  if (!(config_.initial_temperature > 0.0) || !(config_.final_temperature > 0.0))
    throw ConfigError("MCMC temperatures must be positive");
  if (config_.decay < 0.0 || config_.decay > 1.0) throw ConfigError("MCMC decay must be in (0, 1]");
}

void McmcAgent::begin(BatchEnv& env, std::size_t total_steps) {
  (void)env;
  temperature_ = config_.initial_temperature;
  initialized_ = false;
  if (config_.decay > 0.0) {
    decay_ = config_.decay;
  } else if (total_steps > 2) {
    // One step scores the initial batch; the remaining ones each decay once,
    // so the last proposal step runs at final_temperature.
    decay_ = std::pow(config_.final_temperature / config_.initial_temperature,
                      1.0 / static_cast<double>(total_steps - 2));
  } else {
    decay_ = 1.0;
  }
}

StepOutcome McmcAgent::step(BatchEnv& env, Scorer& scorer, Rng& rng) {
  const std::size_t B = env.batch_size();
  StepOutcome out;
  if (!initialized_) {
    scores_ = env.evaluate(scorer);
    initialized_ = true;
    out.states = env.sequences();
    out.state_scores = scores_;
    out.evaluated = out.states;
    out.evaluated_scores = scores_;
    out.temperature = temperature_;
    return out;
  }

  const auto& cfg = env.config();
  std::uniform_int_distribution<std::size_t> pick(0, cfg.action_count() - 1);
  std::vector<MutationAction> actions(B);
  for (auto& a : actions) a = decode_action(pick(rng), cfg.seq_len, cfg.alphabet.size());
  auto transitions = env.step(actions, scorer);

  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (std::size_t b = 0; b < B; ++b) {
    const auto& t = transitions[b];
    const double p = metropolis_acceptance(t.reward - scores_[b], temperature_);
    if (p >= 1.0 || u(rng) < p) {
      scores_[b] = t.reward;
    } else {
      env.set_sequence(b, t.state);
    }
    out.evaluated.push_back(t.next_state);
    out.evaluated_scores.push_back(t.reward);
  }
  out.states = env.sequences();
  out.state_scores = scores_;
  out.temperature = temperature_;
  temperature_ *= decay_;
  return out;
}

}  // namespace seqdesign

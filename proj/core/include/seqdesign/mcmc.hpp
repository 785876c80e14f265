#pragma once

#include <vector>

#include "seqdesign/agent.hpp"

namespace seqdesign {

struct McmcConfig {
  double initial_temperature = 1.0;
  /// Temperature reached at the end of the run; sets the per-step decay.
  double final_temperature = 1e-2;
  /// Explicit per-step decay factor; overrides final_temperature when positive.
  double decay = 0.0;
};

/// Metropolis acceptance probability for a score change `delta` at `temperature`.
double metropolis_acceptance(double delta, double temperature);

struct AnnealState {
  Sequence current;
  double score = 0.0;
  double temperature = 1.0;
  /// Multiplicative temperature decay applied after every step.
  double decay = 1.0;
};

/// One Metropolis-Hastings step with a uniform single-site proposal, then T <- decay * T.
AnnealState mcmc_step(AnnealState chain, Scorer& scorer, std::size_t alphabet_size, Rng& rng);

/// Parallel annealing chains, one per environment slot. The first step scores
/// the initial batch; later steps propose, score and accept or revert.
class McmcAgent : public Agent {
 public:
  explicit McmcAgent(McmcConfig config);

  AgentKind kind() const override { return AgentKind::kMcmc; }
  void begin(BatchEnv& env, std::size_t total_steps) override;
  StepOutcome step(BatchEnv& env, Scorer& scorer, Rng& rng) override;

  double temperature() const { return temperature_; }
  double decay() const { return decay_; }

 private:
  McmcConfig config_;
  double temperature_;
  double decay_ = 1.0;
  bool initialized_ = false;
  std::vector<double> scores_;
};

}  // namespace seqdesign

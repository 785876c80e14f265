#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "seqdesign/env.hpp"
#include "seqdesign/scorer.hpp"

namespace seqdesign {

enum class AgentKind { kPpo, kPpoRnd, kDqn, kGfn, kMcmc, kRandom };

std::string_view to_string(AgentKind kind);
AgentKind parse_agent_kind(std::string_view text);

/// What one batch step produced.
struct StepOutcome {
  /// Batch states after the step (terminal states in finite mode, before any reset).
  std::vector<Sequence> states;
  std::vector<double> state_scores;
  /// Every sequence the scorer evaluated during the step, with its score.
  std::vector<Sequence> evaluated;
  std::vector<double> evaluated_scores;
  std::optional<double> temperature;
  std::optional<double> epsilon;
};

class Agent {
 public:
  virtual ~Agent() = default;
  virtual AgentKind kind() const = 0;
  /// Called once before the loop with the number of batch steps that will run.
  virtual void begin(BatchEnv& env, std::size_t total_steps) {
    (void)env;
    (void)total_steps;
  }
  /// Advances every slot once, issuing exactly env.batch_size() scorer queries.
  virtual StepOutcome step(BatchEnv& env, Scorer& scorer, Rng& rng) = 0;
};

/// Uniform random mutations.
class RandomAgent : public Agent {
 public:
  AgentKind kind() const override { return AgentKind::kRandom; }
  StepOutcome step(BatchEnv& env, Scorer& scorer, Rng& rng) override;
};

struct CurvePoint {
  std::uint64_t queries = 0;
  double mean_score = 0.0;
  std::optional<double> temperature;
  std::optional<double> epsilon;
};

struct RunResult {
  std::vector<CurvePoint> curve;
  CandidateArchive archive{100};
  std::vector<Sequence> final_batch;
  std::vector<double> final_scores;
  std::uint64_t queries = 0;
  bool ok = true;
  std::string error;
};

/// Invoked after every step with the 1-based step index.
using StepCallback = std::function<void(std::size_t step, const StepOutcome& outcome, const BatchEnv& env)>;

/// Drives `agent` for budget / batch_size steps. The budget must be a positive
/// multiple of the batch size. A ScorerError stops the loop and is reported in
/// the result with everything gathered so far.
RunResult run_agent(Agent& agent, BatchEnv& env, Scorer& scorer, std::uint64_t budget, Rng& rng,
                    const StepCallback& on_step = {}, std::size_t archive_capacity = 100);

/// Fills states/scores/evaluated of an outcome from environment transitions.
StepOutcome outcome_from_transitions(const std::vector<Transition>& transitions);

/// Layer sizes input -> hidden... -> output.
std::vector<std::size_t> mlp_sizes(std::size_t input, const std::vector<std::size_t>& hidden, std::size_t output);

}  // namespace seqdesign

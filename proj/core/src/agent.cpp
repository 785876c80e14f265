#include "seqdesign/agent.hpp"

#include <numeric>

#include "seqdesign/error.hpp"

namespace seqdesign {

std::string_view to_string(AgentKind kind) {
  switch (kind) {
    case AgentKind::kPpo: return "ppo";
    case AgentKind::kPpoRnd: return "ppo-rnd";
    case AgentKind::kDqn: return "dqn";
    case AgentKind::kGfn: return "gfn";
    case AgentKind::kMcmc: return "mcmc";
    case AgentKind::kRandom: return "random";
  }
  return "unknown";
}

AgentKind parse_agent_kind(std::string_view text) {
  for (auto k : {AgentKind::kPpo, AgentKind::kPpoRnd, AgentKind::kDqn, AgentKind::kGfn, AgentKind::kMcmc,
                 AgentKind::kRandom})
    if (to_string(k) == text) return k;
  throw ConfigError("unknown agent '" + std::string(text) + "'");
}

std::vector<std::size_t> mlp_sizes(std::size_t input, const std::vector<std::size_t>& hidden, std::size_t output) {
  std::vector<std::size_t> s{input};
  s.insert(s.end(), hidden.begin(), hidden.end());
  s.push_back(output);
  return s;
}

StepOutcome outcome_from_transitions(const std::vector<Transition>& transitions) {
  StepOutcome out;
  out.states.reserve(transitions.size());
  out.state_scores.reserve(transitions.size());
  for (const auto& t : transitions) {
    out.states.push_back(t.next_state);
    out.state_scores.push_back(t.reward);
  }
  out.evaluated = out.states;
  out.evaluated_scores = out.state_scores;
  return out;
}

StepOutcome RandomAgent::step(BatchEnv& env, Scorer& scorer, Rng& rng) {
  const auto& cfg = env.config();
  std::uniform_int_distribution<std::size_t> pick(0, cfg.action_count() - 1);
  std::vector<MutationAction> actions;
  actions.reserve(env.batch_size());
  for (std::size_t b = 0; b < env.batch_size(); ++b)
    actions.push_back(decode_action(pick(rng), cfg.seq_len, cfg.alphabet.size()));
  return outcome_from_transitions(env.step(actions, scorer));
}

RunResult run_agent(Agent& agent, BatchEnv& env, Scorer& scorer, std::uint64_t budget, Rng& rng,
                    const StepCallback& on_step, std::size_t archive_capacity) {
  const std::uint64_t B = env.batch_size();
  if (budget == 0 || budget % B != 0)
    throw ContractError("query budget must be a positive multiple of the batch size");
  const std::size_t steps = budget / B;

  RunResult result;
  result.archive = CandidateArchive(archive_capacity);
  const std::uint64_t start_queries = env.state().queries;
  agent.begin(env, steps);
  for (std::size_t s = 1; s <= steps; ++s) {
    try {
      StepOutcome out = agent.step(env, scorer, rng);
      result.queries = env.state().queries - start_queries;
      result.archive.update(out.evaluated, out.evaluated_scores);
      CurvePoint p;
      p.queries = result.queries;
      p.mean_score = std::accumulate(out.state_scores.begin(), out.state_scores.end(), 0.0) /
                     static_cast<double>(out.state_scores.size());
      p.temperature = out.temperature;
      p.epsilon = out.epsilon;
      result.curve.push_back(p);
      result.final_batch = out.states;
      result.final_scores = out.state_scores;
      if (on_step) on_step(s, out, env);
    } catch (const ScorerError& e) {
      result.ok = false;
      result.error = e.what();
      break;
    }
  }
  return result;
}

}  // namespace seqdesign

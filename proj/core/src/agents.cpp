#include "seqdesign/agents.hpp"

#include "seqdesign/error.hpp"

namespace seqdesign {

std::unique_ptr<Agent> make_agent(AgentKind kind, const EnvConfig& env, const AgentConfig& config, Rng& rng) {
  switch (kind) {
    case AgentKind::kPpo: return std::make_unique<PpoAgent>(env, config.ppo, rng);
    case AgentKind::kPpoRnd: return std::make_unique<PpoAgent>(env, config.ppo, rng, config.rnd);
    case AgentKind::kDqn: return std::make_unique<DqnAgent>(env, config.dqn, rng);
    case AgentKind::kGfn: return std::make_unique<GfnAgent>(env, config.gfn, rng);
    case AgentKind::kMcmc:
      if (env.horizon != Horizon::kInfinite) throw ConfigError("MCMC runs in the infinite-horizon setting only");
      return std::make_unique<McmcAgent>(config.mcmc);
    case AgentKind::kRandom: return std::make_unique<RandomAgent>();
  }
  throw ConfigError("unknown agent kind");
}

}  // namespace seqdesign

#pragma once

#include <memory>

#include "seqdesign/agent.hpp"
#include "seqdesign/dqn.hpp"
#include "seqdesign/gfn.hpp"
#include "seqdesign/mcmc.hpp"
#include "seqdesign/ppo.hpp"
#include "seqdesign/rnd.hpp"

namespace seqdesign {

/// Hyperparameters for every optimizer; only the selected agent's block is used.
struct AgentConfig {
  PpoConfig ppo;
  RndConfig rnd;
  DqnConfig dqn;
  GfnConfig gfn;
  McmcConfig mcmc;
};

std::unique_ptr<Agent> make_agent(AgentKind kind, const EnvConfig& env, const AgentConfig& config, Rng& rng);

}  // namespace seqdesign

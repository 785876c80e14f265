#include <benchmark/benchmark.h>

#include <cmath>
#include <memory>
#include <vector>

#include "seqdesign/agents.hpp"
#include "seqdesign/biophys.hpp"
#include "seqdesign/env.hpp"
#include "seqdesign/landscape.hpp"
#include "seqdesign/metrics.hpp"
#include "seqdesign/nn.hpp"

using namespace seqdesign;

namespace {

std::vector<Sequence> random_batch(std::size_t n, std::size_t len, Rng& rng) {
  std::vector<Sequence> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(Sequence::random(len, Alphabet::amino_acids(), rng));
  return out;
}

std::vector<Vec3> helix(std::size_t n, double rise, double phase) {
  std::vector<Vec3> out;
  for (std::size_t i = 0; i < n; ++i) {
    const double t = 1.745 * static_cast<double>(i) + phase;
    out.push_back({2.3 * std::cos(t), 2.3 * std::sin(t), rise * static_cast<double>(i)});
  }
  return out;
}

}  // namespace

// Policy-sized net: L*A -> 64 -> 64 -> L*A.
static void BM_DenseForward(benchmark::State& state) {
  const std::size_t in = static_cast<std::size_t>(state.range(0)) * 20;
  Rng rng(1);
  nn::DenseNet net({in, 64, 64, in}, rng);
  std::vector<double> x(in, 0.0);
  for (std::size_t i = 0; i < in; i += 20) x[i] = 1.0;
  for (auto _ : state) benchmark::DoNotOptimize(net.forward(x));
}
BENCHMARK(BM_DenseForward)->Arg(50)->Arg(100);

static void BM_DenseBackward(benchmark::State& state) {
  const std::size_t in = static_cast<std::size_t>(state.range(0)) * 20;
  Rng rng(1);
  nn::DenseNet net({in, 64, 64, in}, rng);
  std::vector<double> x(in, 0.0), upstream(in, 1e-3), grads(net.parameter_count());
  for (std::size_t i = 0; i < in; i += 20) x[i] = 1.0;
  nn::DenseNet::Tape tape;
  net.forward(x, tape);
  for (auto _ : state) {
    net.backward(tape, upstream, grads);
    benchmark::ClobberMemory();
  }
}
BENCHMARK(BM_DenseBackward)->Arg(50)->Arg(100);

static void BM_PottsScoreBatch(benchmark::State& state) {
  LandscapeParams params;
  params.seq_len = static_cast<std::size_t>(state.range(0));
  params.seed = 7;
  PottsScorer scorer(std::make_shared<const PottsLandscape>(PottsLandscape::generate(params)));
  Rng rng(2);
  const auto batch = random_batch(100, params.seq_len, rng);
  for (auto _ : state) benchmark::DoNotOptimize(scorer.score(batch));
  state.SetItemsProcessed(state.iterations() * 100);
}
BENCHMARK(BM_PottsScoreBatch)->Arg(50)->Arg(100);

static void BM_Kabsch(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  StructureTrace a{helix(n, 1.5, 0.0)}, b{helix(n, 1.7, 0.4)};
  for (auto _ : state) benchmark::DoNotOptimize(kabsch_rmsd(a, b));
}
BENCHMARK(BM_Kabsch)->Arg(50)->Arg(200);

static void BM_TmScore(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  StructureTrace a{helix(n, 1.5, 0.0)}, b{helix(n, 1.9, 0.4)};
  for (auto _ : state) benchmark::DoNotOptimize(tm_score(a, b));
}
BENCHMARK(BM_TmScore)->Arg(50)->Arg(200);

static void BM_MpHd(benchmark::State& state) {
  Rng rng(3);
  const auto set = random_batch(static_cast<std::size_t>(state.range(0)), 50, rng);
  for (auto _ : state) benchmark::DoNotOptimize(mp_hd(set));
}
BENCHMARK(BM_MpHd)->Arg(100)->Arg(1000);

static void BM_BiophysReport(benchmark::State& state) {
  Rng rng(4);
  const auto seq = Sequence::random(50, Alphabet::amino_acids(), rng).to_string(Alphabet::amino_acids());
  for (auto _ : state) benchmark::DoNotOptimize(biophys::report(seq));
}
BENCHMARK(BM_BiophysReport);

// One batch step (B = 100 queries) of each agent on the L = 50 landscape.
static void BM_AgentStep(benchmark::State& state) {
  const auto kind = static_cast<AgentKind>(state.range(0));
  EnvConfig env_config;
  env_config.seed = 5;
  LandscapeParams params;
  params.seed = 7;
  PottsScorer scorer(std::make_shared<const PottsLandscape>(PottsLandscape::generate(params)));
  Rng rng(6);
  BatchEnv env(env_config);
  auto agent = make_agent(kind, env_config, AgentConfig{}, rng);
  agent->begin(env, 1000000);
  for (auto _ : state) benchmark::DoNotOptimize(agent->step(env, scorer, rng));
  state.SetLabel(std::string(to_string(kind)));
}
BENCHMARK(BM_AgentStep)
    ->Arg(static_cast<int>(AgentKind::kPpo))
    ->Arg(static_cast<int>(AgentKind::kDqn))
    ->Arg(static_cast<int>(AgentKind::kGfn))
    ->Arg(static_cast<int>(AgentKind::kMcmc))
    ->Arg(static_cast<int>(AgentKind::kRandom));

BENCHMARK_MAIN();

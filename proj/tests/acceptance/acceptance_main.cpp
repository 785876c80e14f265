// Runs every acceptance criterion at its stated tolerance and prints one
// PASS/FAIL line per criterion. Exit status is non-zero when any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>

#include "seqdesign/agents.hpp"
#include "seqdesign/biophys.hpp"
#include "seqdesign/csv.hpp"
#include "seqdesign/error.hpp"
#include "seqdesign/experiment.hpp"
#include "seqdesign/landscape.hpp"
#include "seqdesign/metrics.hpp"
#include "seqdesign/proxy.hpp"
#include "test_support.hpp"

using namespace seqdesign;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(double v, int digits = 4) {
  std::ostringstream os;
  os.precision(digits);
  os << v;
  return os.str();
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

const fs::path& scratch() {
  static const fs::path dir = testkit::scratch_dir("acceptance");
  return dir;
}

LandscapeParams params_of(const RunConfig& c) {
  LandscapeParams p = c.landscape;
  p.seq_len = c.env.seq_len;
  p.alphabet_size = c.env.alphabet.size();
  p.seed = c.oracle.seed;
  return p;
}

// 1. Both MCMC and PPO reach 0.99 of the enumerated optimum score on L=6, A=4.
Outcome exhaustive_optimum() {
  RunConfig c;
  c.env.seq_len = 6;
  c.env.alphabet = Alphabet("ACDE");
  c.budget = 20000;
  c.oracle = OracleSpec::parse("synthetic:2024");
  const auto land = PottsLandscape::generate(params_of(c));
  const auto opt = enumerate_optimum(land);
  const double target = 0.99 * land.score(opt.sequence).score;

  bool all = true;
  std::string detail = "optimum " + fmt(land.score(opt.sequence).score, 6) + ";";
  for (auto kind : {AgentKind::kMcmc, AgentKind::kPpo}) {
    c.agent = kind;
    detail += " " + std::string(to_string(kind)) + " best";
    for (std::uint64_t seed : {1, 2, 3}) {
      auto t0 = std::chrono::steady_clock::now();
      auto r = run_seed(c, seed);
      const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      const double best = r.archive.empty() ? 0.0 : r.archive.front().score;
      const bool ok = r.ok && best >= target && r.ledger.get("oracle.train") <= 20000;
      all = all && ok;
      detail += " " + fmt(best, 6) + "(" + fmt(secs, 2) + "s)";
    }
    detail += ";";
  }
  return {all, detail};
}

// 2. Trained single-start, single-step GFlowNet samples proportional to R^beta.
Outcome gflownet_proportionality() {
  const std::vector<double> reward{0.05, 0.15, 0.25, 0.35, 0.5, 0.65, 0.8, 0.95};
  bool all = true;
  std::string detail;
  for (double beta : {1.0, 2.0}) {
    EnvConfig env_cfg;
    env_cfg.seq_len = 1;
    env_cfg.alphabet = Alphabet("ACDEFGHI");
    env_cfg.batch_size = 16;
    env_cfg.seed = 11;
    BatchEnv env(env_cfg);
    GfnConfig cfg;
    cfg.beta = beta;
    cfg.learning_rate = 1e-3;
    cfg.replay_batch = 32;
    Rng rng(5);
    GfnAgent agent(env_cfg, cfg, rng);
    testkit::FunctionScorer scorer([&](const Sequence& s) { return reward[s[0]]; });
    const Sequence start({0});
    for (int step = 0; step < 3000; ++step) {
      for (std::size_t b = 0; b < env_cfg.batch_size; ++b) env.set_sequence(b, start);
      agent.step(env, scorer, rng);
    }
    // Empirical on-policy sampling distribution from the start state.
    std::vector<double> counts(8, 0.0);
    const auto probs = agent.action_probabilities(start);
    const int n = 200000;
    for (int i = 0; i < n; ++i) counts[decode_action(nn::sample_probabilities(probs, rng), 1, 8).residue] += 1.0;
    double z = 0.0;
    for (double r : reward) z += std::pow(r, beta);
    double tv = 0.0;
    for (std::size_t a = 0; a < 8; ++a) tv += 0.5 * std::abs(counts[a] / n - std::pow(reward[a], beta) / z);
    all = all && tv <= 0.05;
    detail += "beta=" + fmt(beta, 2) + " TV=" + fmt(tv) + "; ";
  }
  return {all, detail};
}

RunConfig proxy_config() {
  RunConfig c;
  c.experiment = ExperimentKind::kProxyFinetune;
  c.agent = AgentKind::kPpo;
  c.env.seq_len = 50;
  c.budget = 20000;
  c.finetune.interval = 2000;
  c.oracle = OracleSpec::parse("synthetic:7");
  c.seeds = {1, 2, 3};
  return c;
}

std::vector<SeedReport>& proxy_runs() {
  static std::vector<SeedReport> runs = [] {
    std::vector<SeedReport> out;
    auto c = proxy_config();
    for (auto s : c.seeds) out.push_back(run_seed(c, s));
    return out;
  }();
  return runs;
}

// 3. Pearson r of proxy against oracle rises from the first to the last finetune tick.
Outcome proxy_trend() {
  auto t0 = std::chrono::steady_clock::now();
  auto& runs = proxy_runs();
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  bool all = true;
  std::string detail;
  for (const auto& r : runs) {
    const auto& e = r.correlation.entries();
    if (!r.ok || e.size() < 2) {
      all = false;
      detail += "seed " + std::to_string(r.seed) + " incomplete; ";
      continue;
    }
    const double first = e.front().pearson_r, last = e.back().pearson_r;
    all = all && last > first;
    detail += "seed " + std::to_string(r.seed) + " r " + fmt(first, 3) + "->" + fmt(last, 3) + "; ";
  }
  detail += "ticks " + std::to_string(runs.front().finetune_ticks) + ", " + fmt(secs, 3) + "s";
  return {all, detail};
}

// 4. Oracle queries of a proxy-mode run are at most 10% of an oracle-mode run at equal step budget.
Outcome query_ratio() {
  auto c = proxy_config();
  c.experiment = ExperimentKind::kOracle;
  auto oracle_run = run_seed(c, 1);
  const double oracle_queries = static_cast<double>(oracle_run.ledger.total("oracle."));
  bool all = oracle_run.ok && oracle_queries > 0;
  std::string detail = "oracle-mode " + fmt(oracle_queries, 8) + " queries;";
  for (const auto& r : proxy_runs()) {
    const double in_loop = static_cast<double>(r.ledger.get("oracle.train") + r.ledger.get("oracle.finetune") +
                                               r.ledger.get("oracle.snapshot"));
    const double ratio = in_loop / oracle_queries;
    all = all && r.ledger.get("proxy") == c.budget && ratio <= 0.10;
    detail += " seed " + std::to_string(r.seed) + " " + fmt(in_loop, 8) + " (ratio " + fmt(ratio, 4) + ", pretraining " +
              std::to_string(r.ledger.get("oracle.pretrain")) + " itemized separately);";
  }
  return {all, detail};
}

// 5. Short episodes give lower score and higher diversity than 5x longer ones, majority of 3 seeds.
Outcome horizon_ablation() {
  RunConfig c;
  c.experiment = ExperimentKind::kAblation;
  c.agent = AgentKind::kPpo;
  c.env.seq_len = 50;
  c.budget = 20000;
  // 200 env steps at B = 100; the default 128-step rollout would update once.
  c.agents.ppo.rollout_steps = 4;
  c.oracle = OracleSpec::parse("synthetic:7");
  c.seeds = {1, 2, 3};
  c.out_dir = (scratch() / "ablation").string();
  auto r = run_ablation(c);
  int wins = 0;
  std::string detail;
  for (auto seed : c.seeds) {
    const AblationRow *short_run = nullptr, *long_run = nullptr;
    for (const auto& row : r.rows) {
      if (row.seed != seed) continue;
      if (row.setting == "T=L") short_run = &row;
      if (row.setting == "T=5L") long_run = &row;
    }
    if (!short_run || !long_run) continue;
    const bool ok = short_run->mp_hd > long_run->mp_hd && short_run->final_mean_score < long_run->final_mean_score;
    wins += ok;
    detail += "seed " + std::to_string(seed) + " HD " + fmt(short_run->mp_hd) + " vs " + fmt(long_run->mp_hd) +
              ", score " + fmt(short_run->final_mean_score) + " vs " + fmt(long_run->final_mean_score) + "; ";
  }
  return {r.ok && wins >= 2, detail + std::to_string(wins) + "/3 seeds"};
}

// 6. MCMC trained on the decoy scores higher on the decoy than on the oracle.
Outcome proxy_overcommit() {
  RunConfig c;
  c.experiment = ExperimentKind::kMismatch;
  c.env.seq_len = 50;
  c.budget = 20000;
  c.oracle = OracleSpec::parse("synthetic:7");
  c.seeds = {1, 2, 3};
  c.mismatch_agents = {AgentKind::kMcmc, AgentKind::kPpo};
  c.out_dir = (scratch() / "mismatch").string();
  auto r = run_mismatch(c);
  bool all = r.ok;
  std::string detail;
  for (const auto& s : r.summary) {
    if (s.method == "mcmc") all = all && s.gap() > 0.0;
    detail += s.method + "/" + std::to_string(s.seed) + " gap " + fmt(s.gap()) + "; ";
  }
  return {all, detail + "(ppo gap reported only)"};
}

// 7. Metric kernels.
Outcome metric_kernels() {
  std::vector<std::string> fails;
  std::vector<Vec3> h(60);
  for (std::size_t i = 0; i < h.size(); ++i) h[i] = {2.3 * std::cos(1.745 * i), 2.3 * std::sin(1.745 * i), 1.5 * i};
  if (tm_score(StructureTrace{h}, StructureTrace{h}) != 1.0) fails.push_back("tm identity");
  if (std::abs(tm_d0(50) - 2.2561) > 1e-3) fails.push_back("d0(50)");

  std::mt19937_64 rng(1);
  std::normal_distribution<double> g(0.0, 10.0);
  double worst = 0.0;
  for (int t = 0; t < 100; ++t) {
    std::vector<Vec3> a(30), b(30);
    for (auto& p : a) p = {g(rng), g(rng), g(rng)};
    const double th = g(rng), ph = g(rng);
    for (std::size_t i = 0; i < a.size(); ++i) {
      const double x = std::cos(th) * a[i][0] - std::sin(th) * a[i][1], y = std::sin(th) * a[i][0] + std::cos(th) * a[i][1];
      const double z = a[i][2];
      b[i] = {x + 3.0, std::cos(ph) * y - std::sin(ph) * z - 7.0, std::sin(ph) * y + std::cos(ph) * z + 1.0};
    }
    worst = std::max(worst, kabsch_rmsd(StructureTrace{a}, StructureTrace{b}));
  }
  if (worst > 1e-9) fails.push_back("rigid rmsd " + fmt(worst));

  std::vector<std::string> hd{"AA", "AB", "BB"};
  if (mp_hd(std::span<const std::string>(hd)) != 4.0 / 3.0) fails.push_back("MP-HD");

  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<ParetoPoint> pts;
  for (int i = 0; i < 100; ++i) pts.push_back({u(rng), u(rng), std::to_string(i)});
  auto front = pareto_front(pts, 0.0);
  std::vector<std::string> want, got;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    bool dominated = false;
    for (std::size_t j = 0; j < pts.size(); ++j) {
      if (j == i) continue;
      if (pts[j].score >= pts[i].score && pts[j].diversity >= pts[i].diversity &&
          (pts[j].score > pts[i].score || pts[j].diversity > pts[i].diversity))
        dominated = true;
    }
    if (!dominated) want.push_back(pts[i].label);
  }
  for (const auto& p : front) got.push_back(p.label);
  if (got != want) fails.push_back("pareto");

  std::string detail = "max rigid rmsd " + fmt(worst, 3) + ", front size " + std::to_string(got.size());
  for (const auto& f : fails) detail += "; failed " + f;
  return {fails.empty(), detail};
}

// 8. Biophysical panel against the independent reference, and DCS self-consistency.
Outcome biophysical_panel() {
  auto table = read_csv_file(testkit::fixture("biophys_reference.csv"));
  const auto cs = table.column("sequence"), cw = table.column("w_mol"), cg = table.column("gravy"),
             ci = table.column("instability"), cp = table.column("pi");
  double dw = 0.0, dg = 0.0, di = 0.0, dp = 0.0;
  for (const auto& row : table.rows) {
    auto r = biophys::report(row[cs]);
    dw = std::max(dw, std::abs(r.w_mol - parse_double(row[cw])));
    dg = std::max(dg, std::abs(r.gravy - parse_double(row[cg])));
    di = std::max(di, std::abs(r.instability - parse_double(row[ci])));
    dp = std::max(dp, std::abs(r.pi - parse_double(row[cp])));
  }
  Rng rng(20);
  std::vector<biophys::BiophysReport> ref;
  for (int i = 0; i < 200; ++i)
    ref.push_back(biophys::report(Sequence::random(50, Alphabet::amino_acids(), rng).to_string(Alphabet::amino_acids())));
  const double self = biophys::dcs(ref, ref).score;
  const bool ok = table.rows.size() == 50 && dw <= 1e-3 && dg <= 1e-3 && di <= 1e-3 && dp <= 1e-2 &&
                  std::abs(self - 0.5) <= 0.05;
  return {ok, "max |dW| " + fmt(dw, 3) + ", |dGRAVY| " + fmt(dg, 3) + ", |dII| " + fmt(di, 3) + ", |dpI| " + fmt(dp, 3) +
                  "; self DCS " + fmt(self)};
}

double net_fd_error(const std::vector<std::size_t>& sizes, Rng& rng) {
  nn::DenseNet net(sizes, rng);
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<double> x(sizes.front()), w(sizes.back());
  for (auto& v : x) v = g(rng);
  for (auto& v : w) v = g(rng);
  auto loss = [&] {
    auto y = net.forward(x);
    double s = 0.0;
    for (std::size_t k = 0; k < y.size(); ++k) s += w[k] * y[k] + 0.5 * y[k] * y[k];
    return s;
  };
  nn::DenseNet::Tape tape;
  auto y = net.forward(x, tape);
  std::vector<double> up(y.size());
  for (std::size_t k = 0; k < y.size(); ++k) up[k] = w[k] + y[k];
  std::vector<double> grads(net.parameter_count(), 0.0);
  net.backward(tape, up, grads);
  return testkit::max_fd_relative_error(net.parameters(), grads, loss);
}

// 9. Finite-difference gradient checks and the two-state MCMC odds.
Outcome numerical_substrate() {
  Rng rng(9);
  double worst = 0.0;
  // Layer shapes used by policy, value, Q, GFlowNet, RND and proxy heads (reduced widths, same depth).
  const std::vector<std::vector<std::size_t>> shapes{
      {12, 8, 8, 12}, {12, 8, 8, 1}, {12, 8, 8, 13}, {12, 8, 6}, {12, 8, 1}, {12, 10, 4, 1}};
  for (const auto& s : shapes) worst = std::max(worst, net_fd_error(s, rng));

  ProxyModel proxy(3, Alphabet("ACDE"), rng, {6, 4});
  std::vector<LabeledSequence> data{{Sequence({0, 1, 2}), 0.3}, {Sequence({3, 2, 1}), 0.8}};
  std::vector<double> pg(proxy.net().parameter_count(), 0.0);
  proxy.loss_gradient(data, pg);
  worst = std::max(worst, testkit::max_fd_relative_error(proxy.net().parameters(), pg, [&] { return proxy.mse(data); }));

  EnvConfig env_cfg;
  env_cfg.seq_len = 3;
  env_cfg.alphabet = Alphabet("ACDE");
  GfnConfig gcfg;
  gcfg.hidden = {8};
  GfnAgent gfn(env_cfg, gcfg, rng);
  std::vector<GfnSample> samples{{Sequence({0, 1, 2}), 4, 0.4}, {Sequence({2, 2, 3}), 9, 0.9}};
  std::vector<double> gg(gfn.net().parameter_count(), 0.0);
  gfn.loss_gradient(samples, gg);
  worst = std::max(worst, testkit::max_fd_relative_error(gfn.net().parameters(), gg, [&] {
                     std::vector<double> scratch(gg.size(), 0.0);
                     return gfn.loss_gradient(samples, scratch);
                   }));

  std::normal_distribution<double> n01(0.0, 1.0);
  for (int t = 0; t < 20; ++t) {
    std::vector<double> z(5);
    for (auto& v : z) v = n01(rng);
    const std::size_t a = t % 5;
    const double adv = n01(rng);
    const double p_old = nn::softmax(z)[a] / (0.7 + 0.03 * t);
    auto loss = [&] {
      auto p = nn::softmax(z);
      double h = 0.0;
      for (double q : p) h -= q * std::log(q);
      return -ppo_surrogate(p[a] / p_old, adv, 0.2) - 0.01 * h;
    };
    auto p = nn::softmax(z);
    const double ratio = p[a] / p_old;
    if (std::abs(ratio - 0.8) < 1e-3 || std::abs(ratio - 1.2) < 1e-3) continue;
    auto g = ppo_logit_gradient(p, a, ratio, adv, 0.2, 0.01);
    worst = std::max(worst, testkit::max_fd_relative_error(z, g, loss, 1e-6, 1e-8));
  }

  testkit::FunctionScorer scorer([](const Sequence& s) { return s[0] == 0 ? 0.3 : 0.6; });
  AnnealState chain{Sequence({0}), 0.3, 0.2, 1.0};
  const int steps = 1000000;
  int in_b = 0;
  for (int i = 0; i < steps; ++i) {
    chain = mcmc_step(chain, scorer, 2, rng);
    in_b += chain.current[0] == 1;
  }
  const double frac_b = static_cast<double>(in_b) / steps;
  const double odds = frac_b / (1.0 - frac_b);
  const double expected = std::exp((0.6 - 0.3) / 0.2);
  const double rel = std::abs(odds - expected) / expected;
  return {worst <= 1e-4 && rel <= 0.05,
          "max FD rel error " + fmt(worst, 3) + "; MCMC odds " + fmt(odds) + " vs " + fmt(expected) + " (rel " +
              fmt(rel, 3) + ")"};
}

// 10. Re-running from a manifest reproduces curves.csv byte for byte.
Outcome reproducibility() {
  const fs::path first = scratch() / "repro_a", second = scratch() / "repro_b";
  RunConfig c;
  c.agent = AgentKind::kPpo;
  c.env.seq_len = 20;
  c.budget = 5000;
  c.seeds = {4};
  c.out_dir = first.string();
  run(c);
  const fs::path manifest = first / "seed_4" / "manifest.json";
  bool same = false;
#ifdef SEQDESIGN_CLI
  const std::string cmd = std::string(SEQDESIGN_CLI) + " run --config " + manifest.string() + " --out " +
                          second.string() + " > /dev/null";
  if (std::system(cmd.c_str()) != 0) return {false, "CLI rerun failed"};
#else
  RunConfig again = load_config(manifest.string());
  again.out_dir = second.string();
  run(again);
#endif
  const auto a = slurp(first / "seed_4" / "curves.csv");
  const auto b = slurp(second / "seed_4" / "curves.csv");
  same = !a.empty() && a == b;
  return {same, std::to_string(a.size()) + " bytes, " + (same ? "identical" : "differ")};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"exhaustive-optimum recovery", exhaustive_optimum},
      {"GFlowNet proportionality", gflownet_proportionality},
      {"proxy finetuning trend", proxy_trend},
      {"query-efficiency ratio", query_ratio},
      {"episode-length ablation ordering", horizon_ablation},
      {"proxy-overcommit phenomenon", proxy_overcommit},
      {"metric-kernel correctness", metric_kernels},
      {"biophysical panel cross-check", biophysical_panel},
      {"numerical substrate", numerical_substrate},
      {"reproducibility", reproducibility},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    failed += !o.pass;
    std::printf("criterion %2zu %-34s %s  [%.1fs] %s\n", i + 1, criteria[i].first.c_str(), o.pass ? "PASS" : "FAIL",
                secs, o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria failed\n", failed, criteria.size());
  return failed == 0 ? 0 : 1;
}

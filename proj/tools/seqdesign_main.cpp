// seqdesign: run, ablate-horizon, mismatch, evaluate, serve-echo-oracle.

#include <CLI11.hpp>

#include <cmath>
#include <iostream>
#include <optional>

#include "seqdesign/error.hpp"
#include "seqdesign/experiment.hpp"
#include "seqdesign/landscape.hpp"
#include "seqdesign/remote.hpp"

namespace {

using namespace seqdesign;

struct CommonFlags {
  std::string config;
  std::vector<std::uint64_t> seeds;
  std::optional<std::uint64_t> budget;
  std::string agent;
  std::optional<double> beta;
  std::string out;
  std::string oracle;
  std::optional<double> threshold;
  std::optional<std::size_t> jobs;
};

void add_common(CLI::App* cmd, CommonFlags& f, bool training) {
  cmd->add_option("--config", f.config, "TOML config, or a manifest.json from an earlier run");
  cmd->add_option("--out", f.out, "Output directory");
  cmd->add_option("--threshold", f.threshold, "Pareto score threshold");
  if (!training) return;
  cmd->add_option("--seed", f.seeds, "Run seed (repeatable)")->take_all();
  cmd->add_option("--budget", f.budget, "Scorer queries per seed");
  cmd->add_option("--agent", f.agent, "ppo | ppo-rnd | dqn | gfn | mcmc | random");
  cmd->add_option("--beta", f.beta, "GFlowNet reward exponent");
  cmd->add_option("--oracle", f.oracle, "synthetic:SEED or remote:HOST:PORT / remote:exec:COMMAND");
  cmd->add_option("--jobs", f.jobs, "Seeds run concurrently");
}

RunConfig resolve(const CommonFlags& f) {
  RunConfig c = f.config.empty() ? RunConfig{} : load_config(f.config);
  if (!f.seeds.empty()) c.seeds = f.seeds;
  if (f.budget) c.budget = *f.budget;
  if (!f.agent.empty()) c.agent = parse_agent_kind(f.agent);
  if (f.beta) c.agents.gfn.beta = *f.beta;
  if (!f.out.empty()) c.out_dir = f.out;
  if (!f.oracle.empty()) c.oracle = OracleSpec::parse(f.oracle);
  if (f.threshold) c.threshold = *f.threshold;
  if (f.jobs) c.jobs = *f.jobs;
  return c;
}

int print_run(const RunReport& r) {
  for (const auto& s : r.seeds) {
    double final_mean = 0.0;
    for (double v : s.final_scores) final_mean += v;
    if (!s.final_scores.empty()) final_mean /= static_cast<double>(s.final_scores.size());
    std::cout << "seed " << s.seed << ": final mean oracle score " << final_mean;
    if (s.finetune_ticks > 0) std::cout << ", " << s.finetune_ticks << " finetune ticks";
    std::cout << (s.ok ? "" : " (stopped early: " + s.error + ")") << " -> " << s.directory << '\n';
  }
  return r.ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Black-box sequence design with RL agents, proxy rewards and evaluation metrics"};
  app.require_subcommand(1);

  CommonFlags run_flags, ablate_flags, mismatch_flags, eval_flags;
  std::string mode;
  auto* run_cmd = app.add_subcommand("run", "Train an agent against the oracle or a finetuned proxy");
  add_common(run_cmd, run_flags, true);
  run_cmd->add_option("--mode", mode, "oracle | proxy-finetune")->check(CLI::IsMember({"oracle", "proxy-finetune", "proxy"}));

  auto* ablate_cmd = app.add_subcommand("ablate-horizon", "Episode-length ablation: T = L, 5L and infinite");
  add_common(ablate_cmd, ablate_flags, true);

  auto* mismatch_cmd = app.add_subcommand("mismatch", "Train on a decoy landscape while logging the true oracle");
  add_common(mismatch_cmd, mismatch_flags, true);

  std::string sequences, traces, reference, reference_sequences;
  auto* eval_cmd = app.add_subcommand("evaluate", "Set metrics for a FASTA of candidates");
  add_common(eval_cmd, eval_flags, false);
  eval_cmd->add_option("--sequences", sequences, "FASTA with `method=NAME score=X` header tags");
  eval_cmd->add_option("--traces", traces, "Directory of <id>.pdb CA traces");
  eval_cmd->add_option("--reference", reference, "Reference biophysical features CSV");
  eval_cmd->add_option("--reference-sequences", reference_sequences, "Reference FASTA for residue frequencies");

  std::optional<std::uint16_t> port;
  double echo_score = 0.5;
  std::string landscape_spec;
  std::size_t seq_len = 50;
  std::size_t max_connections = 0;
  auto* serve_cmd = app.add_subcommand("serve-echo-oracle", "Line-protocol test oracle on stdio or TCP");
  serve_cmd->add_option("--port", port, "Listen on this TCP port instead of stdio");
  serve_cmd->add_option("--score", echo_score, "Constant score returned for every sequence")
      ->check(CLI::Range(std::nextafter(0.0, 1.0), 1.0));
  serve_cmd->add_option("--landscape", landscape_spec, "Score with synthetic:SEED instead of a constant");
  serve_cmd->add_option("--seq-len", seq_len, "Sequence length for --landscape");
  serve_cmd->add_option("--max-connections", max_connections, "Exit after serving this many TCP clients");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run_cmd) {
      RunConfig c = resolve(run_flags);
      if (!mode.empty()) c.experiment = parse_experiment_kind(mode);
      if (c.experiment != ExperimentKind::kProxyFinetune) c.experiment = ExperimentKind::kOracle;
      return print_run(run(c));
    }
    if (*ablate_cmd) {
      RunConfig c = resolve(ablate_flags);
      auto r = run_ablation(c);
      for (const auto& row : r.rows) {
        std::cout << row.setting << " seed " << row.seed << ": final mean score " << row.final_mean_score
                  << ", MP-HD " << row.mp_hd << '\n';
      }
      return r.ok ? 0 : 1;
    }
    if (*mismatch_cmd) {
      RunConfig c = resolve(mismatch_flags);
      auto r = run_mismatch(c);
      for (const auto& s : r.summary) {
        std::cout << s.method << " seed " << s.seed << ": decoy " << s.final_decoy << ", oracle " << s.final_oracle
                  << ", gap " << s.gap() << '\n';
      }
      return r.ok ? 0 : 1;
    }
    if (*eval_cmd) {
      RunConfig c = resolve(eval_flags);
      if (!sequences.empty()) c.evaluate.sequences = sequences;
      if (!traces.empty()) c.evaluate.traces = traces;
      if (!reference.empty()) c.evaluate.reference = reference;
      if (!reference_sequences.empty()) c.evaluate.reference_sequences = reference_sequences;
      auto r = evaluate(c);
      for (const auto& m : r.metrics) {
        std::cout << m.label << ": n=" << m.count << " score " << m.mean_score << " MP-HD " << m.mp_hd << " MP-TM "
                  << m.mp_tm << " MP-RMSD " << m.mp_rmsd << " DCS " << m.dcs << '\n';
      }
      return 0;
    }
    if (*serve_cmd) {
      RequestHandler handler;
      std::unique_ptr<Scorer> scorer;
      if (!landscape_spec.empty()) {
        RunConfig c;
        c.env.seq_len = seq_len;
        c.oracle = OracleSpec::parse(landscape_spec);
        if (c.oracle.kind != OracleSpec::Kind::kSynthetic) throw ConfigError("--landscape must be synthetic:SEED");
        scorer = make_oracle(c);
        handler = scorer_handler(*scorer, c.env.alphabet);
      } else {
        handler = constant_handler(echo_score);
      }
      if (port) {
        serve_tcp(*port, handler, max_connections);
      } else {
        FdChannel stdio(0, 1, false);
        serve_lines(stdio, handler);
      }
      return 0;
    }
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

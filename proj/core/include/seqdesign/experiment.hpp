#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "seqdesign/agents.hpp"
#include "seqdesign/biophys.hpp"
#include "seqdesign/env.hpp"
#include "seqdesign/landscape.hpp"
#include "seqdesign/metrics.hpp"
#include "seqdesign/proxy.hpp"
#include "seqdesign/remote.hpp"

namespace seqdesign {

enum class ExperimentKind { kOracle, kProxyFinetune, kAblation, kMismatch, kEvaluate };

std::string_view to_string(ExperimentKind kind);
ExperimentKind parse_experiment_kind(std::string_view text);

/// "synthetic:SEED" or "remote:ENDPOINT".
struct OracleSpec {
  enum class Kind { kSynthetic, kRemote } kind = Kind::kSynthetic;
  std::uint64_t seed = 0;
  std::string endpoint;

  static OracleSpec parse(std::string_view text);
  std::string to_string() const;
};

struct EvaluateConfig {
  std::string sequences;
  /// Directory holding <record id>.pdb per sequence; empty skips structural metrics.
  std::string traces;
  /// Biophysical reference features (w_mol, instability, pI, gravy).
  std::string reference;
  /// Optional FASTA whose residue frequencies are the aa-distribution reference.
  std::string reference_sequences;
};

struct BiophysConfig {
  /// Directory with residues.csv, diwv.csv, pka_emboss.csv; empty uses the built-in tables.
  std::string tables_dir;
  biophys::PkaSet pka;
};

struct RunConfig {
  ExperimentKind experiment = ExperimentKind::kOracle;
  AgentKind agent = AgentKind::kPpo;
  std::vector<std::uint64_t> seeds{1, 2, 3};
  std::uint64_t budget = 20000;
  std::string out_dir = "runs/latest";
  /// Seeds run concurrently on this many threads.
  std::size_t jobs = 1;
  std::size_t archive_capacity = 100;
  double threshold = 0.5;

  /// env.seed is replaced by the run seed.
  EnvConfig env;
  OracleSpec oracle;
  /// Shape of the synthetic landscape; its seed comes from `oracle`.
  LandscapeParams landscape;
  RemoteOptions remote;

  FinetuneSchedule finetune;
  TrainOptions pretrain;
  CorpusOptions corpus;
  /// Proxy hidden sizes; empty picks the ~15k-parameter default.
  std::vector<std::size_t> proxy_hidden;

  AgentConfig agents;
  /// Methods compared by the mismatch experiment.
  std::vector<AgentKind> mismatch_agents{AgentKind::kMcmc, AgentKind::kPpo};

  EvaluateConfig evaluate;
  BiophysConfig biophys;

  /// Throws ConfigError describing the first problem found.
  void validate() const;
};

/// Every configurable value, including defaults, as nested JSON mirroring the config file sections.
nlohmann::json to_json(const RunConfig& config);
/// Overlays `j` on `base`. Unknown keys are rejected.
RunConfig config_from_json(const nlohmann::json& j, RunConfig base = {});
/// Reads a TOML config, or a manifest.json written by a previous run (whose seed becomes the only seed).
RunConfig load_config(const std::string& path);

/// Manifest document: resolved config, seed, and declared policies.
nlohmann::json make_manifest(const RunConfig& config, std::optional<std::uint64_t> seed);
void write_run_manifest(const RunConfig& config, std::optional<std::uint64_t> seed, std::ostream& out);

struct CurveRow {
  std::size_t step = 0;
  std::uint64_t queries = 0;
  /// Mean training-reward score of the batch states (oracle or proxy).
  double mean_score = 0.0;
  double best_score = 0.0;
  /// Mean oracle score of the batch states; NaN where not measured.
  double oracle_mean_score = 0.0;
  double temperature = 0.0;
  double epsilon = 0.0;
};

/// Panel of set-level metrics for one snapshot. NaN marks values that were not computable.
struct SnapshotMetrics {
  std::string label;
  std::string snapshot;
  std::size_t count = 0;
  double mean_score = 0.0;
  double mp_hd = 0.0;
  double mp_tm = 0.0;
  double mp_rmsd = 0.0;
  double w_mol = 0.0;
  double instability = 0.0;
  double pi = 0.0;
  double gravy = 0.0;
  double dcs = 0.0;
  double aa_mae = 0.0;
};

struct SeedReport {
  std::uint64_t seed = 0;
  std::string directory;
  std::vector<CurveRow> curve;
  std::vector<SnapshotMetrics> metrics;
  QueryLedger ledger;
  CorrelationLog correlation;
  std::size_t finetune_ticks = 0;
  std::vector<Sequence> final_batch;
  /// Oracle scores of the final batch.
  std::vector<double> final_scores;
  /// Oracle-scored archive, best first.
  std::vector<ArchiveEntry> archive;
  bool ok = true;
  std::string error;
};

struct ParetoRecord {
  std::string metric;
  ParetoPoint point;
  bool on_front = false;
};

struct RunReport {
  RunConfig config;
  std::vector<SeedReport> seeds;
  std::vector<SnapshotMetrics> metrics;
  std::vector<ParetoRecord> pareto;
  bool ok = true;
};

/// Oracle-mode or proxy-finetune training across all seeds; writes per-seed
/// subdirectories and aggregate files under config.out_dir.
RunReport run(const RunConfig& config);
/// One seed of `run`, without writing files.
SeedReport run_seed(const RunConfig& config, std::uint64_t seed);

struct AblationRow {
  std::string setting;
  std::size_t episode_length = 0;  // 0 = infinite
  std::uint64_t seed = 0;
  std::uint64_t queries = 0;
  double final_mean_score = 0.0;
  double mp_hd = 0.0;
};

struct AblationReport {
  std::vector<AblationRow> rows;
  bool ok = true;
};

/// The configured agent at T = L_s, T = 5 L_s and infinite horizon, equal budgets, oracle reward.
AblationReport run_ablation(const RunConfig& config);

struct MismatchCurveRow {
  std::string method;
  std::uint64_t seed = 0;
  std::uint64_t queries = 0;
  double decoy_mean = 0.0;
  double oracle_mean = 0.0;
};

struct MismatchSummary {
  std::string method;
  std::uint64_t seed = 0;
  double final_decoy = 0.0;
  double final_oracle = 0.0;
  double gap() const { return final_decoy - final_oracle; }
};

struct MismatchReport {
  std::uint64_t effective_seed = 0;
  std::vector<MismatchCurveRow> curves;
  std::vector<MismatchSummary> summary;
  bool ok = true;
};

/// Trains each mismatch agent on the decoy of a twin-landscape pair while
/// logging oracle scores of the batch states.
MismatchReport run_mismatch(const RunConfig& config);

/// Set metrics for a FASTA of candidates grouped by the `method=` header tag.
RunReport evaluate(const RunConfig& config);

/// Builds the configured oracle for one run.
std::unique_ptr<Scorer> make_oracle(const RunConfig& config);

/// Set-level panel over sequences (and optional traces aligned with them).
SnapshotMetrics compute_snapshot_metrics(const std::vector<std::string>& sequences, const std::vector<double>& scores,
                                         const std::vector<StructureTrace>* traces,
                                         const std::vector<biophys::BiophysReport>* reference,
                                         const std::vector<double>* reference_frequency,
                                         const biophys::ResidueTables& tables, const Alphabet& alphabet);

}  // namespace seqdesign

#include "seqdesign/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <map>
#include <numeric>
#include <sstream>
#include <thread>

#include "seqdesign/csv.hpp"
#include "seqdesign/error.hpp"
#include "seqdesign/fasta.hpp"
#include "seqdesign/pdb.hpp"

namespace seqdesign {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Independent generator streams derived from one run seed.
enum Stream : std::uint64_t { kEnvStream = 1, kAgentStream, kProxyInitStream, kCorpusStream, kFinetuneStream };

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream)};
  std::array<std::uint32_t, 2> out{};
  seq.generate(out.begin(), out.end());
  return (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
}

double mean_of(std::span<const double> xs) {
  if (xs.empty()) return kNaN;
  return std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
}

// Mean and sample standard deviation over the finite entries.
std::pair<double, double> mean_std(const std::vector<double>& xs) {
  std::vector<double> v;
  for (double x : xs)
    if (std::isfinite(x)) v.push_back(x);
  if (v.empty()) return {kNaN, kNaN};
  double m = mean_of(v);
  if (v.size() < 2) return {m, 0.0};
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  return {m, std::sqrt(ss / static_cast<double>(v.size() - 1))};
}

LandscapeParams landscape_params(const RunConfig& config) {
  LandscapeParams p = config.landscape;
  p.seq_len = config.env.seq_len;
  p.alphabet_size = config.env.alphabet.size();
  p.seed = config.oracle.seed;
  return p;
}

biophys::ResidueTables residue_tables(const RunConfig& config) {
  biophys::ResidueTables t = config.biophys.tables_dir.empty()
                                 ? biophys::ResidueTables::standard()
                                 : biophys::ResidueTables::load_directory(config.biophys.tables_dir);
  t.set_pka(config.biophys.pka);
  return t;
}

// Runs fn(i) for i in [0, n) on up to `jobs` threads; rethrows the first failure by index.
void parallel_for(std::size_t n, std::size_t jobs, const std::function<void(std::size_t)>& fn) {
  std::vector<std::exception_ptr> errors(n);
  if (jobs <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> workers;
  for (std::size_t w = 0; w < std::min(jobs, n); ++w) {
    workers.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          fn(i);
        } catch (...) {
          errors[i] = std::current_exception();
        }
      }
    });
  }
  for (auto& t : workers) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

void write_json(const fs::path& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  out << j.dump(2) << '\n';
  if (!out) throw Error("write failed: " + path.string());
}

CsvCell num(double v) { return v; }
CsvCell count(std::uint64_t v) { return static_cast<std::int64_t>(v); }

const std::vector<std::string> kCurveSchema = {"step",       "queries",           "mean_score", "best_score",
                                               "oracle_mean_score", "temperature", "epsilon"};

std::vector<CsvRow> curve_rows(const std::vector<CurveRow>& curve) {
  std::vector<CsvRow> rows;
  for (const auto& c : curve) {
    rows.push_back({count(c.step), count(c.queries), num(c.mean_score), num(c.best_score), num(c.oracle_mean_score),
                    num(c.temperature), num(c.epsilon)});
  }
  return rows;
}

const std::vector<std::string> kMetricsSchema = {"label", "snapshot", "count",       "mean_score", "mp_hd",
                                                 "mp_tm", "mp_rmsd",  "w_mol",       "instability", "pi",
                                                 "gravy", "dcs",      "aa_mae"};

CsvRow metrics_row(const SnapshotMetrics& m) {
  return {m.label,       m.snapshot,  count(m.count), num(m.mean_score), num(m.mp_hd), num(m.mp_tm), num(m.mp_rmsd),
          num(m.w_mol), num(m.instability), num(m.pi), num(m.gravy),     num(m.dcs),   num(m.aa_mae)};
}

std::vector<FastaRecord> fasta_records(const std::string& prefix, const std::string& method,
                                       const std::vector<Sequence>& seqs, const std::vector<double>& scores,
                                       const Alphabet& alphabet) {
  std::vector<FastaRecord> out;
  for (std::size_t i = 0; i < seqs.size(); ++i) {
    FastaRecord r;
    r.id = prefix + "_" + std::to_string(i);
    r.description = "method=" + method;
    if (i < scores.size()) r.description += " score=" + format_double(scores[i]);
    r.sequence = seqs[i].to_string(alphabet);
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<std::string> to_strings(const std::vector<Sequence>& seqs, const Alphabet& alphabet) {
  std::vector<std::string> out;
  out.reserve(seqs.size());
  for (const auto& s : seqs) out.push_back(s.to_string(alphabet));
  return out;
}

json budget_json(const SeedReport& r, std::uint64_t budget) {
  json items = json::object();
  for (const auto& [k, v] : r.ledger.items()) items[k] = v;
  std::uint64_t env_queries = r.ledger.get("proxy") + r.ledger.get("oracle.train");
  std::uint64_t in_loop = r.ledger.get("oracle.finetune") + r.ledger.get("oracle.snapshot");
  json j;
  j["budget"] = budget;
  j["items"] = items;
  j["environment_queries"] = env_queries;
  j["oracle_queries_in_loop"] = in_loop + r.ledger.get("oracle.train");
  j["oracle_queries_pretrain"] = r.ledger.get("oracle.pretrain");
  j["finetune_ticks"] = r.finetune_ticks;
  j["query_ratio"] =
      env_queries == 0 ? 0.0
                       : static_cast<double>(in_loop + r.ledger.get("oracle.train")) / static_cast<double>(env_queries);
  j["ok"] = r.ok;
  j["error"] = r.error;
  return j;
}

// Pareto records for one diversity metric over labeled (score, diversity) pairs.
void add_pareto(std::vector<ParetoRecord>& out, const std::string& metric, const std::vector<ParetoPoint>& points,
                double threshold, DiversityDirection direction) {
  std::vector<ParetoPoint> kept;
  for (const auto& p : points)
    if (std::isfinite(p.score) && std::isfinite(p.diversity) && p.score >= threshold) kept.push_back(p);
  auto front = pareto_front(kept, threshold, direction);
  for (const auto& p : kept) {
    bool on = std::any_of(front.begin(), front.end(), [&](const ParetoPoint& f) { return f.label == p.label; });
    out.push_back({metric, p, on});
  }
}

void write_pareto_files(const fs::path& dir, const std::vector<ParetoRecord>& records,
                        const std::vector<std::string>& metrics) {
  for (const auto& metric : metrics) {
    std::vector<CsvRow> rows;
    for (const auto& r : records)
      if (r.metric == metric)
        rows.push_back({r.point.label, num(r.point.score), num(r.point.diversity), count(r.on_front ? 1 : 0)});
    write_csv_file((dir / ("pareto_" + metric + ".csv")).string(), {"label", "score", "diversity", "on_front"}, rows);
  }
}

bool in_amino_acids(const Alphabet& alphabet) {
  return std::all_of(alphabet.symbols().begin(), alphabet.symbols().end(),
                     [](char c) { return Alphabet::kAminoAcids.find(c) != std::string_view::npos; });
}

}  // namespace

std::unique_ptr<Scorer> make_oracle(const RunConfig& config) {
  if (config.oracle.kind == OracleSpec::Kind::kRemote) {
    return std::make_unique<RemoteScorer>(Endpoint::parse(config.oracle.endpoint), config.env.alphabet, config.remote);
  }
  auto landscape = std::make_shared<const PottsLandscape>(PottsLandscape::generate(landscape_params(config)));
  return std::make_unique<PottsScorer>(std::move(landscape));
}

SnapshotMetrics compute_snapshot_metrics(const std::vector<std::string>& sequences, const std::vector<double>& scores,
                                         const std::vector<StructureTrace>* traces,
                                         const std::vector<biophys::BiophysReport>* reference,
                                         const std::vector<double>* reference_frequency,
                                         const biophys::ResidueTables& tables, const Alphabet& alphabet) {
  SnapshotMetrics m;
  m.count = sequences.size();
  m.mean_score = scores.size() == sequences.size() && !scores.empty() ? mean_of(scores) : kNaN;
  m.mp_hd = m.mp_tm = m.mp_rmsd = kNaN;
  m.w_mol = m.instability = m.pi = m.gravy = m.dcs = m.aa_mae = kNaN;
  if (sequences.empty()) return m;

  bool same_length = std::all_of(sequences.begin(), sequences.end(),
                                 [&](const std::string& s) { return s.size() == sequences.front().size(); });
  if (sequences.size() >= 2 && same_length) m.mp_hd = mp_hd(std::span<const std::string>(sequences));

  if (traces && traces->size() >= 2) {
    try {
      m.mp_tm = mp_tm(*traces);
    } catch (const Error& e) {
      std::cerr << "warning: MP-TM not computable: " << e.what() << '\n';
    }
    try {
      m.mp_rmsd = mp_rmsd(*traces);
    } catch (const Error& e) {
      std::cerr << "warning: MP-RMSD not computable: " << e.what() << '\n';
    }
  }

  try {
    std::vector<biophys::BiophysReport> panel;
    panel.reserve(sequences.size());
    for (const auto& s : sequences) panel.push_back(biophys::report(s, tables));
    std::vector<double> w, ins, pi, gr;
    for (const auto& b : panel) {
      w.push_back(b.w_mol);
      ins.push_back(b.instability);
      pi.push_back(b.pi);
      gr.push_back(b.gravy);
    }
    m.w_mol = mean_of(w);
    m.instability = mean_of(ins);
    m.pi = mean_of(pi);
    m.gravy = mean_of(gr);
    if (reference && reference->size() >= 20) m.dcs = biophys::dcs(panel, *reference).score;
  } catch (const ContractError&) {
    // Sequences outside the amino-acid alphabet or too short for the panel.
  }

  if (reference_frequency) {
    std::vector<Sequence> seqs;
    try {
      for (const auto& s : sequences) seqs.push_back(Sequence::from_string(s, alphabet));
      auto freq = aa_frequency(seqs, alphabet.size());
      m.aa_mae = distribution_mae(freq, *reference_frequency);
    } catch (const ContractError&) {
    }
  }
  return m;
}

SeedReport run_seed(const RunConfig& config, std::uint64_t seed) {
  SeedReport report;
  report.seed = seed;
  const bool proxy_mode = config.experiment == ExperimentKind::kProxyFinetune;
  const Alphabet& alphabet = config.env.alphabet;

  EnvConfig env_config = config.env;
  env_config.seed = derive_seed(seed, kEnvStream);
  BatchEnv env(env_config);
  Rng agent_rng(derive_seed(seed, kAgentStream));
  auto agent = make_agent(config.agent, env_config, config.agents, agent_rng);

  auto oracle = make_oracle(config);
  MeteredScorer train_oracle(*oracle, report.ledger, "oracle.train");
  MeteredScorer finetune_oracle(*oracle, report.ledger, "oracle.finetune");
  MeteredScorer snapshot_oracle(*oracle, report.ledger, "oracle.snapshot");
  MeteredScorer pretrain_oracle(*oracle, report.ledger, "oracle.pretrain");

  std::unique_ptr<ProxyModel> proxy;
  std::unique_ptr<MeteredScorer> proxy_scorer;
  Rng finetune_rng(derive_seed(seed, kFinetuneStream));
  if (proxy_mode) {
    Rng init_rng(derive_seed(seed, kProxyInitStream));
    proxy = std::make_unique<ProxyModel>(config.env.seq_len, alphabet, init_rng, config.proxy_hidden);
    Rng corpus_rng(derive_seed(seed, kCorpusStream));
    try {
      auto corpus = build_pretraining_corpus(pretrain_oracle, config.env.seq_len, alphabet, config.corpus, corpus_rng);
      if (config.pretrain.epochs > 0) pretrain(*proxy, corpus, config.pretrain, corpus_rng);
    } catch (const ScorerError& e) {
      report.ok = false;
      report.error = std::string("pretraining: ") + e.what();
      return report;
    }
    proxy_scorer = std::make_unique<MeteredScorer>(*proxy, report.ledger, "proxy");
  }

  CandidateArchive reward_archive(config.archive_capacity);
  CandidateArchive oracle_archive(config.archive_capacity);
  std::vector<Sequence> interval_states;
  std::vector<double> last_oracle_scores;
  std::size_t last_oracle_step = 0;
  const std::size_t B = env_config.batch_size;

  auto on_step = [&](std::size_t step, const StepOutcome& out, const BatchEnv&) {
    reward_archive.update(out.evaluated, out.evaluated_scores);
    CurveRow row;
    row.step = step;
    row.queries = static_cast<std::uint64_t>(step) * B;
    row.mean_score = mean_of(out.state_scores);
    row.best_score = reward_archive.best_score();
    row.oracle_mean_score = proxy_mode ? kNaN : row.mean_score;
    row.temperature = out.temperature.value_or(kNaN);
    row.epsilon = out.epsilon.value_or(kNaN);
    if (proxy_mode) {
      interval_states.insert(interval_states.end(), out.states.begin(), out.states.end());
      if (row.queries % config.finetune.interval == 0) {
        std::vector<Sequence> pool = reward_archive.sequences();
        pool.insert(pool.end(), interval_states.begin(), interval_states.end());
        std::uint64_t before = report.ledger.get("oracle.finetune");
        auto tick = finetune_tick(*proxy, pool, finetune_oracle, config.finetune, finetune_rng, before);
        ++report.finetune_ticks;
        report.correlation.append(tick.entry);
        for (const auto& s : tick.selected) oracle_archive.insert(s.sequence, s.label);
        interval_states.clear();

        last_oracle_scores = score_values(snapshot_oracle, out.states);
        last_oracle_step = step;
        oracle_archive.update(out.states, last_oracle_scores);
        row.oracle_mean_score = mean_of(last_oracle_scores);
      }
    }
    report.curve.push_back(row);
  };

  Scorer& reward = proxy_mode ? static_cast<Scorer&>(*proxy_scorer) : static_cast<Scorer&>(train_oracle);
  RunResult result = run_agent(*agent, env, reward, config.budget, agent_rng, on_step, config.archive_capacity);
  report.ok = result.ok;
  report.error = result.error;
  report.final_batch = result.final_batch;

  if (!proxy_mode) {
    report.final_scores = result.final_scores;
    report.archive = result.archive.entries();
  } else {
    if (!report.final_batch.empty()) {
      if (last_oracle_step == report.curve.size() && last_oracle_step > 0) {
        report.final_scores = last_oracle_scores;
      } else {
        try {
          report.final_scores = score_values(snapshot_oracle, report.final_batch);
          oracle_archive.update(report.final_batch, report.final_scores);
        } catch (const ScorerError& e) {
          report.ok = false;
          if (report.error.empty()) report.error = e.what();
        }
      }
    }
    report.archive = oracle_archive.entries();
  }

  const auto tables = residue_tables(config);
  auto label = "seed_" + std::to_string(seed);
  if (!report.final_batch.empty()) {
    auto m = compute_snapshot_metrics(to_strings(report.final_batch, alphabet), report.final_scores, nullptr, nullptr,
                                      nullptr, tables, alphabet);
    m.label = label;
    m.snapshot = "final";
    report.metrics.push_back(m);
  }
  if (!report.archive.empty()) {
    std::vector<std::string> seqs;
    std::vector<double> scores;
    for (const auto& e : report.archive) {
      seqs.push_back(e.sequence.to_string(alphabet));
      scores.push_back(e.score);
    }
    auto m = compute_snapshot_metrics(seqs, scores, nullptr, nullptr, nullptr, tables, alphabet);
    m.label = label;
    m.snapshot = "archive";
    report.metrics.push_back(m);
  }
  return report;
}

RunReport run(const RunConfig& config_in) {
  RunConfig config = config_in;
  if (config.experiment != ExperimentKind::kOracle && config.experiment != ExperimentKind::kProxyFinetune) {
    throw ConfigError("run: experiment must be oracle or proxy-finetune");
  }
  config.validate();
  RunReport report;
  report.config = config;
  report.seeds.resize(config.seeds.size());
  parallel_for(config.seeds.size(), config.jobs,
               [&](std::size_t i) { report.seeds[i] = run_seed(config, config.seeds[i]); });

  const fs::path out(config.out_dir);
  fs::create_directories(out);
  const Alphabet& alphabet = config.env.alphabet;
  const std::string method(to_string(config.agent));

  json budget_all = json::object();
  for (auto& s : report.seeds) {
    fs::path dir = out / ("seed_" + std::to_string(s.seed));
    fs::create_directories(dir);
    s.directory = dir.string();
    write_csv_file((dir / "curves.csv").string(), kCurveSchema, curve_rows(s.curve));
    std::vector<CsvRow> mrows;
    for (const auto& m : s.metrics) mrows.push_back(metrics_row(m));
    write_csv_file((dir / "metrics.csv").string(), kMetricsSchema, mrows);
    write_json(dir / "manifest.json", make_manifest(config, s.seed));
    json b = budget_json(s, config.budget);
    write_json(dir / "budget.json", b);
    budget_all["seed_" + std::to_string(s.seed)] = b;
    if (config.experiment == ExperimentKind::kProxyFinetune) {
      std::ofstream corr(dir / "correlation.csv");
      s.correlation.write_csv(corr);
    }
    write_fasta_file((dir / "final.fasta").string(),
                     fasta_records("seed" + std::to_string(s.seed) + "_final", method, s.final_batch, s.final_scores,
                                   alphabet));
    std::vector<Sequence> aseqs;
    std::vector<double> ascores;
    for (const auto& e : s.archive) {
      aseqs.push_back(e.sequence);
      ascores.push_back(e.score);
    }
    write_fasta_file((dir / "archive.fasta").string(),
                     fasta_records("seed" + std::to_string(s.seed) + "_archive", method, aseqs, ascores, alphabet));
    if (!s.ok) {
      report.ok = false;
      std::cerr << "seed " << s.seed << " stopped early: " << s.error << '\n';
    }
  }

  // Aggregate curve by step across seeds.
  std::size_t max_steps = 0;
  for (const auto& s : report.seeds) max_steps = std::max(max_steps, s.curve.size());
  std::vector<CsvRow> agg;
  for (std::size_t k = 0; k < max_steps; ++k) {
    std::vector<double> ms, os;
    std::uint64_t queries = 0;
    for (const auto& s : report.seeds) {
      if (k >= s.curve.size()) continue;
      ms.push_back(s.curve[k].mean_score);
      os.push_back(s.curve[k].oracle_mean_score);
      queries = s.curve[k].queries;
    }
    auto [m_mean, m_std] = mean_std(ms);
    auto [o_mean, o_std] = mean_std(os);
    agg.push_back({count(k + 1), count(queries), num(m_mean), num(m_std), num(o_mean), num(o_std), count(ms.size())});
  }
  write_csv_file((out / "curves.csv").string(),
                 {"step", "queries", "mean_score_mean", "mean_score_std", "oracle_mean_score_mean",
                  "oracle_mean_score_std", "seeds"},
                 agg);

  // Per-seed metrics plus mean/std rows per snapshot.
  std::vector<CsvRow> mrows;
  std::vector<ParetoPoint> pareto_points;
  for (const auto& s : report.seeds) {
    for (const auto& m : s.metrics) {
      report.metrics.push_back(m);
      mrows.push_back(metrics_row(m));
      pareto_points.push_back({m.mean_score, m.mp_hd, method + "/" + m.label + "/" + m.snapshot});
    }
  }
  for (const std::string snapshot : {"final", "archive"}) {
    std::vector<const SnapshotMetrics*> group;
    for (const auto& m : report.metrics)
      if (m.snapshot == snapshot && m.label.rfind("seed_", 0) == 0) group.push_back(&m);
    if (group.empty()) continue;
    SnapshotMetrics mean, sd;
    mean.label = "mean";
    sd.label = "std";
    mean.snapshot = sd.snapshot = snapshot;
    mean.count = sd.count = group.size();
    auto fill = [&](double SnapshotMetrics::*field) {
      std::vector<double> v;
      for (auto* g : group) v.push_back(g->*field);
      auto [mu, s] = mean_std(v);
      mean.*field = mu;
      sd.*field = s;
    };
    for (auto f : {&SnapshotMetrics::mean_score, &SnapshotMetrics::mp_hd, &SnapshotMetrics::mp_tm,
                   &SnapshotMetrics::mp_rmsd, &SnapshotMetrics::w_mol, &SnapshotMetrics::instability,
                   &SnapshotMetrics::pi, &SnapshotMetrics::gravy, &SnapshotMetrics::dcs, &SnapshotMetrics::aa_mae}) {
      fill(f);
    }
    mrows.push_back(metrics_row(mean));
    mrows.push_back(metrics_row(sd));
  }
  write_csv_file((out / "metrics.csv").string(), kMetricsSchema, mrows);

  add_pareto(report.pareto, "mp_hd", pareto_points, config.threshold, DiversityDirection::kHigherBetter);
  write_pareto_files(out, report.pareto, {"mp_hd"});
  write_json(out / "manifest.json", make_manifest(config, std::nullopt));
  write_json(out / "budget.json", budget_all);
  return report;
}

AblationReport run_ablation(const RunConfig& config_in) {
  RunConfig base = config_in;
  base.experiment = ExperimentKind::kAblation;
  base.validate();
  base.experiment = ExperimentKind::kOracle;

  const std::size_t L = base.env.seq_len;
  struct Setting {
    std::string name;
    Horizon horizon;
    std::size_t T;
  };
  const std::vector<Setting> settings = {
      {"T=L", Horizon::kFinite, L}, {"T=5L", Horizon::kFinite, 5 * L}, {"infinite", Horizon::kInfinite, 0}};

  AblationReport report;
  report.rows.resize(settings.size() * base.seeds.size());
  std::vector<std::string> errors(report.rows.size());
  parallel_for(report.rows.size(), base.jobs, [&](std::size_t idx) {
    const auto& setting = settings[idx / base.seeds.size()];
    std::uint64_t seed = base.seeds[idx % base.seeds.size()];
    RunConfig c = base;
    c.env.horizon = setting.horizon;
    c.env.episode_length = setting.T;
    SeedReport r = run_seed(c, seed);
    AblationRow row;
    row.setting = setting.name;
    row.episode_length = setting.T;
    row.seed = seed;
    row.queries = r.ledger.get("oracle.train");
    row.final_mean_score = mean_of(r.final_scores);
    row.mp_hd = r.final_batch.size() >= 2 ? mp_hd(std::span<const Sequence>(r.final_batch)) : kNaN;
    report.rows[idx] = row;
    if (!r.ok) errors[idx] = r.error;
  });
  for (const auto& e : errors) {
    if (!e.empty()) {
      report.ok = false;
      std::cerr << "ablation run stopped early: " << e << '\n';
    }
  }

  const fs::path out(base.out_dir);
  fs::create_directories(out);
  std::vector<CsvRow> rows;
  for (const auto& r : report.rows) {
    rows.push_back({r.setting, count(r.episode_length), count(r.seed), count(r.queries), num(r.final_mean_score),
                    num(r.mp_hd)});
  }
  write_csv_file((out / "ablation.csv").string(),
                 {"setting", "episode_length", "seed", "queries", "final_mean_score", "mp_hd"}, rows);
  std::vector<CsvRow> summary;
  json budgets = json::object();
  for (const auto& s : settings) {
    std::vector<double> sc, hd;
    std::uint64_t q = 0;
    for (const auto& r : report.rows) {
      if (r.setting != s.name) continue;
      sc.push_back(r.final_mean_score);
      hd.push_back(r.mp_hd);
      q = r.queries;
    }
    auto [sm, ss] = mean_std(sc);
    auto [hm, hs] = mean_std(hd);
    summary.push_back({s.name, count(s.T), num(sm), num(ss), num(hm), num(hs)});
    budgets[s.name] = {{"budget", base.budget}, {"queries_per_seed", q}};
  }
  write_csv_file((out / "ablation_summary.csv").string(),
                 {"setting", "episode_length", "final_mean_score_mean", "final_mean_score_std", "mp_hd_mean",
                  "mp_hd_std"},
                 summary);
  json manifest = make_manifest(base, std::nullopt);
  manifest["config"]["experiment"] = "ablation";
  manifest["ablation"] = budgets;
  write_json(out / "manifest.json", manifest);
  return report;
}

MismatchReport run_mismatch(const RunConfig& config_in) {
  RunConfig config = config_in;
  config.experiment = ExperimentKind::kMismatch;
  config.validate();
  for (auto k : config.mismatch_agents) {
    if (k == AgentKind::kMcmc && config.env.horizon != Horizon::kInfinite) {
      throw ConfigError("config: mcmc requires the infinite horizon");
    }
  }

  const TwinLandscapes twins = twin_landscapes(landscape_params(config));
  auto oracle_land = std::make_shared<const PottsLandscape>(twins.oracle);
  auto decoy_land = std::make_shared<const PottsLandscape>(twins.decoy);

  MismatchReport report;
  report.effective_seed = twins.effective_seed;
  const std::size_t n_methods = config.mismatch_agents.size();
  const std::size_t n = n_methods * config.seeds.size();
  std::vector<std::vector<MismatchCurveRow>> curves(n);
  std::vector<MismatchSummary> summary(n);
  std::vector<QueryLedger> ledgers(n);
  std::vector<std::string> errors(n);

  parallel_for(n, config.jobs, [&](std::size_t idx) {
    AgentKind kind = config.mismatch_agents[idx / config.seeds.size()];
    std::uint64_t seed = config.seeds[idx % config.seeds.size()];
    const std::string method(to_string(kind));
    PottsScorer oracle(oracle_land);
    PottsScorer decoy(decoy_land);
    MeteredScorer train(decoy, ledgers[idx], "decoy.train");
    MeteredScorer logged(oracle, ledgers[idx], "oracle.snapshot");

    EnvConfig env_config = config.env;
    env_config.seed = derive_seed(seed, kEnvStream);
    BatchEnv env(env_config);
    Rng rng(derive_seed(seed, kAgentStream));
    auto agent = make_agent(kind, env_config, config.agents, rng);
    std::vector<double> last_oracle;
    auto on_step = [&](std::size_t step, const StepOutcome& out, const BatchEnv&) {
      last_oracle = score_values(logged, out.states);
      curves[idx].push_back({method, seed, static_cast<std::uint64_t>(step) * env_config.batch_size,
                             mean_of(out.state_scores), mean_of(last_oracle)});
    };
    RunResult r = run_agent(*agent, env, train, config.budget, rng, on_step, config.archive_capacity);
    summary[idx] = {method, seed, mean_of(r.final_scores), mean_of(last_oracle)};
    if (!r.ok) errors[idx] = r.error;
  });

  for (std::size_t i = 0; i < n; ++i) {
    report.curves.insert(report.curves.end(), curves[i].begin(), curves[i].end());
    report.summary.push_back(summary[i]);
    if (!errors[i].empty()) {
      report.ok = false;
      std::cerr << "mismatch run stopped early: " << errors[i] << '\n';
    }
  }

  const fs::path out(config.out_dir);
  fs::create_directories(out);
  std::vector<CsvRow> rows;
  for (const auto& c : report.curves)
    rows.push_back({c.method, count(c.seed), count(c.queries), num(c.decoy_mean), num(c.oracle_mean)});
  write_csv_file((out / "mismatch_curves.csv").string(), {"method", "seed", "queries", "decoy_mean", "oracle_mean"},
                 rows);
  rows.clear();
  for (const auto& s : report.summary)
    rows.push_back({s.method, count(s.seed), num(s.final_decoy), num(s.final_oracle), num(s.gap())});
  write_csv_file((out / "mismatch_summary.csv").string(), {"method", "seed", "final_decoy", "final_oracle", "gap"},
                 rows);
  json manifest = make_manifest(config, std::nullopt);
  manifest["twin_effective_seed"] = twins.effective_seed;
  json budgets = json::object();
  for (std::size_t i = 0; i < n; ++i) {
    json items = json::object();
    for (const auto& [k, v] : ledgers[i].items()) items[k] = v;
    budgets[summary[i].method + "/seed_" + std::to_string(summary[i].seed)] = items;
  }
  manifest["budget"] = budgets;
  write_json(out / "manifest.json", manifest);
  return report;
}

RunReport evaluate(const RunConfig& config_in) {
  RunConfig config = config_in;
  config.experiment = ExperimentKind::kEvaluate;
  config.validate();
  const auto& ev = config.evaluate;
  const Alphabet& alphabet = config.env.alphabet;

  FastaReadOptions fopts;
  fopts.alphabet = alphabet.symbols();
  auto records = read_fasta_file(ev.sequences, fopts);
  if (records.size() < 2) throw ContractError("evaluate: need at least 2 sequences");

  // Group by method tag, keeping first-appearance order.
  std::vector<std::string> order;
  std::map<std::string, std::vector<std::size_t>> groups;
  std::vector<double> scores(records.size(), kNaN);
  for (std::size_t i = 0; i < records.size(); ++i) {
    std::string method = "all";
    std::istringstream tags(records[i].description);
    std::string tag;
    while (tags >> tag) {
      if (tag.rfind("method=", 0) == 0) method = tag.substr(7);
      if (tag.rfind("score=", 0) == 0) {
        try {
          scores[i] = parse_double(tag.substr(6));
        } catch (const ParseError&) {
          throw ParseError("evaluate: bad score tag in record '" + records[i].id + "'");
        }
      }
    }
    if (!groups.count(method)) order.push_back(method);
    groups[method].push_back(i);
  }

  std::vector<StructureTrace> traces;
  const bool structural = !ev.traces.empty();
  if (structural) {
    for (const auto& r : records) {
      fs::path p = fs::path(ev.traces) / (r.id + ".pdb");
      if (!fs::exists(p)) throw ConfigError("evaluate: missing trace for sequence '" + r.id + "': " + p.string());
      traces.push_back(read_pdb_ca_file(p.string()).trace());
    }
  }

  std::vector<biophys::BiophysReport> reference;
  if (!ev.reference.empty()) reference = biophys::read_reference_csv(ev.reference);
  std::vector<double> ref_freq;
  if (!ev.reference_sequences.empty()) {
    std::vector<Sequence> ref;
    for (const auto& r : read_fasta_file(ev.reference_sequences, fopts))
      ref.push_back(Sequence::from_string(r.sequence, alphabet));
    ref_freq = aa_frequency(ref, alphabet.size());
  }
  const auto tables = residue_tables(config);

  RunReport report;
  report.config = config;
  std::vector<ParetoPoint> hd_points, tm_points, rmsd_points;
  std::vector<CsvRow> freq_rows;
  for (const auto& method : order) {
    std::vector<std::string> seqs;
    std::vector<double> sc;
    std::vector<StructureTrace> tr;
    std::vector<Sequence> parsed;
    for (auto i : groups[method]) {
      seqs.push_back(records[i].sequence);
      sc.push_back(scores[i]);
      if (structural) tr.push_back(traces[i]);
      parsed.push_back(Sequence::from_string(records[i].sequence, alphabet));
    }
    auto m = compute_snapshot_metrics(seqs, sc, structural ? &tr : nullptr, reference.empty() ? nullptr : &reference,
                                      ref_freq.empty() ? nullptr : &ref_freq, tables, alphabet);
    m.label = method;
    m.snapshot = "evaluate";
    report.metrics.push_back(m);
    hd_points.push_back({m.mean_score, m.mp_hd, method});
    tm_points.push_back({m.mean_score, m.mp_tm, method});
    rmsd_points.push_back({m.mean_score, m.mp_rmsd, method});
    auto freq = aa_frequency(parsed, alphabet.size());
    for (std::size_t a = 0; a < alphabet.size(); ++a) {
      freq_rows.push_back({method, std::string(1, alphabet.symbol(a)), num(freq[a]),
                           num(ref_freq.empty() ? kNaN : ref_freq[a])});
    }
  }
  if (!in_amino_acids(alphabet)) std::cerr << "warning: biophysical panel needs amino-acid sequences\n";

  std::vector<std::string> pareto_metrics{"mp_hd"};
  add_pareto(report.pareto, "mp_hd", hd_points, config.threshold, DiversityDirection::kHigherBetter);
  if (structural) {
    add_pareto(report.pareto, "mp_tm", tm_points, config.threshold, DiversityDirection::kLowerBetter);
    add_pareto(report.pareto, "mp_rmsd", rmsd_points, config.threshold, DiversityDirection::kHigherBetter);
    pareto_metrics.push_back("mp_tm");
    pareto_metrics.push_back("mp_rmsd");
  }

  const fs::path out(config.out_dir);
  fs::create_directories(out);
  std::vector<CsvRow> mrows;
  for (const auto& m : report.metrics) mrows.push_back(metrics_row(m));
  write_csv_file((out / "metrics.csv").string(), kMetricsSchema, mrows);
  write_csv_file((out / "aa_frequency.csv").string(), {"label", "residue", "frequency", "reference"}, freq_rows);
  write_pareto_files(out, report.pareto, pareto_metrics);
  write_json(out / "manifest.json", make_manifest(config, std::nullopt));
  return report;
}

}  // namespace seqdesign

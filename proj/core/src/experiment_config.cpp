#include <fstream>
#include <set>
#include <sstream>

#include "seqdesign/config_file.hpp"
#include "seqdesign/error.hpp"
#include "seqdesign/experiment.hpp"

namespace seqdesign {
namespace {

using nlohmann::json;

constexpr const char* kManifestFormat = "seqdesign.manifest";

// Reads keys from one JSON object and rejects anything left unread.
class Section {
 public:
  Section(const json& j, std::string name) : j_(j), name_(std::move(name)) {
    if (!j_.is_object()) throw ConfigError("config: [" + name_ + "] must be a table");
  }

  ~Section() noexcept(false) {
    if (std::uncaught_exceptions() > 0) return;
    for (const auto& [key, value] : j_.items()) {
      if (!seen_.count(key)) throw ConfigError("config: unknown key '" + key + "' in [" + name_ + "]");
    }
  }

  const json* find(const std::string& key) {
    seen_.insert(key);
    auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }

  template <typename T>
  void get(const std::string& key, T& target) {
    const json* v = find(key);
    if (!v) return;
    try {
      if constexpr (std::is_same_v<T, double>) {
        if (!v->is_number()) throw ConfigError("expected a number");
        target = v->get<double>();
      } else if constexpr (std::is_same_v<T, bool>) {
        if (!v->is_boolean()) throw ConfigError("expected a boolean");
        target = v->get<bool>();
      } else if constexpr (std::is_integral_v<T>) {
        if (!v->is_number_integer()) throw ConfigError("expected an integer");
        if constexpr (std::is_unsigned_v<T>) {
          if (v->is_number_unsigned() || v->get<long long>() >= 0) {
            target = v->get<T>();
          } else {
            throw ConfigError("expected a non-negative integer");
          }
        } else {
          target = v->get<T>();
        }
      } else if constexpr (std::is_same_v<T, std::string>) {
        if (!v->is_string()) throw ConfigError("expected a string");
        target = v->get<std::string>();
      } else {
        if (!v->is_array()) throw ConfigError("expected an array");
        T out;
        for (const auto& item : *v) {
          if (!item.is_number_integer() || item.get<long long>() < 0) {
            throw ConfigError("expected non-negative integers");
          }
          out.push_back(item.get<typename T::value_type>());
        }
        target = std::move(out);
      }
    } catch (const ConfigError& e) {
      throw ConfigError("config: [" + name_ + "] " + key + ": " + e.what());
    } catch (const json::exception& e) {
      throw ConfigError("config: [" + name_ + "] " + key + ": " + e.what());
    }
  }

  void get_ms(const std::string& key, std::chrono::milliseconds& target) {
    long long ms = target.count();
    get(key, ms);
    target = std::chrono::milliseconds(ms);
  }

  const json* sub(const std::string& key) {
    const json* v = find(key);
    if (v && !v->is_object()) throw ConfigError("config: [" + name_ + "." + key + "] must be a table");
    return v;
  }

 private:
  const json& j_;
  std::string name_;
  std::set<std::string> seen_;
};

std::string horizon_name(Horizon h) { return h == Horizon::kInfinite ? "infinite" : "finite"; }

Horizon parse_horizon(const std::string& s) {
  if (s == "infinite") return Horizon::kInfinite;
  if (s == "finite") return Horizon::kFinite;
  throw ConfigError("config: horizon must be 'infinite' or 'finite', got '" + s + "'");
}

json pka_json(const biophys::PkaSet& p) {
  json j = json::object();
  j["Nterm"] = p.n_term;
  j["Cterm"] = p.c_term;
  for (const auto& [res, v] : p.positive) j[std::string(1, res)] = v;
  for (const auto& [res, v] : p.negative) j[std::string(1, res)] = v;
  return j;
}

void read_pka(const json& j, biophys::PkaSet& p) {
  if (!j.is_object()) throw ConfigError("config: [biophys.pka] must be a table");
  for (const auto& [key, value] : j.items()) {
    if (!value.is_number()) throw ConfigError("config: [biophys.pka] " + key + ": expected a number");
    double v = value.get<double>();
    if (key == "Nterm") {
      p.n_term = v;
    } else if (key == "Cterm") {
      p.c_term = v;
    } else if (key.size() == 1 && p.positive.count(key[0])) {
      p.positive[key[0]] = v;
    } else if (key.size() == 1 && p.negative.count(key[0])) {
      p.negative[key[0]] = v;
    } else {
      throw ConfigError("config: unknown key '" + key + "' in [biophys.pka]");
    }
  }
}

}  // namespace

std::string_view to_string(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::kOracle: return "oracle";
    case ExperimentKind::kProxyFinetune: return "proxy-finetune";
    case ExperimentKind::kAblation: return "ablation";
    case ExperimentKind::kMismatch: return "mismatch";
    case ExperimentKind::kEvaluate: return "evaluate";
  }
  return "unknown";
}

ExperimentKind parse_experiment_kind(std::string_view text) {
  for (auto k : {ExperimentKind::kOracle, ExperimentKind::kProxyFinetune, ExperimentKind::kAblation,
                 ExperimentKind::kMismatch, ExperimentKind::kEvaluate}) {
    if (to_string(k) == text) return k;
  }
  if (text == "proxy") return ExperimentKind::kProxyFinetune;
  throw ConfigError("unknown experiment kind '" + std::string(text) + "'");
}

OracleSpec OracleSpec::parse(std::string_view text) {
  OracleSpec spec;
  auto colon = text.find(':');
  if (colon == std::string_view::npos) throw ConfigError("oracle spec must be synthetic:SEED or remote:ADDR");
  auto scheme = text.substr(0, colon);
  auto rest = std::string(text.substr(colon + 1));
  if (scheme == "synthetic") {
    spec.kind = Kind::kSynthetic;
    try {
      std::size_t used = 0;
      spec.seed = std::stoull(rest, &used);
      if (used != rest.size() || rest.empty() || rest[0] == '-') throw std::invalid_argument(rest);
    } catch (const std::exception&) {
      throw ConfigError("oracle spec: bad synthetic seed '" + rest + "'");
    }
  } else if (scheme == "remote") {
    spec.kind = Kind::kRemote;
    if (rest.empty()) throw ConfigError("oracle spec: empty remote endpoint");
    Endpoint::parse(rest);
    spec.endpoint = rest;
  } else {
    throw ConfigError("oracle spec: unknown scheme '" + std::string(scheme) + "'");
  }
  return spec;
}

std::string OracleSpec::to_string() const {
  return kind == Kind::kSynthetic ? "synthetic:" + std::to_string(seed) : "remote:" + endpoint;
}

void RunConfig::validate() const {
  auto fail = [](const std::string& m) { throw ConfigError("config: " + m); };
  if (budget == 0) fail("budget must be positive");
  if (seeds.empty()) fail("at least one seed is required");
  {
    std::set<std::uint64_t> distinct(seeds.begin(), seeds.end());
    if (distinct.size() != seeds.size()) fail("seeds must be distinct");
  }
  if (jobs == 0) fail("jobs must be positive");
  if (archive_capacity == 0) fail("archive_capacity must be positive");
  if (out_dir.empty()) fail("out must be set");
  try {
    env.validate();
    finetune.validate();
  } catch (const Error& e) {
    fail(e.what());
  }
  if (budget % env.batch_size != 0) fail("budget must be a multiple of env.batch_size");
  if (landscape.field_scale < 0 || landscape.adjacent_scale < 0 || landscape.long_range_scale < 0) {
    fail("landscape scales must be non-negative");
  }
  if (remote.attempts < 1) fail("oracle.attempts must be at least 1");
  if (pretrain.epochs > 0 && corpus.uniform + corpus.hill_climb_chains * corpus.hill_climb_steps == 0 &&
      experiment == ExperimentKind::kProxyFinetune) {
    fail("proxy mode needs a non-empty pretraining corpus");
  }
  if (agent == AgentKind::kMcmc && env.horizon != Horizon::kInfinite && experiment != ExperimentKind::kAblation) {
    fail("mcmc requires the infinite horizon");
  }
  if (experiment == ExperimentKind::kAblation && agent == AgentKind::kMcmc) {
    fail("the horizon ablation needs an agent that supports finite episodes");
  }
  if (experiment == ExperimentKind::kMismatch) {
    if (oracle.kind != OracleSpec::Kind::kSynthetic) fail("mismatch needs a synthetic oracle");
    if (mismatch_agents.empty()) fail("mismatch.agents is empty");
  }
  if (experiment == ExperimentKind::kEvaluate) {
    if (evaluate.sequences.empty()) fail("evaluate.sequences is required");
    auto must_exist = [&](const std::string& path, const char* what) {
      if (!path.empty() && !std::ifstream(path)) fail(std::string(what) + " not found: " + path);
    };
    must_exist(evaluate.sequences, "evaluate.sequences");
    must_exist(evaluate.reference, "evaluate.reference");
    must_exist(evaluate.reference_sequences, "evaluate.reference_sequences");
  }
  if (!(threshold >= 0.0 && threshold <= 1.0)) fail("threshold must be in [0, 1]");
  if (!biophys.tables_dir.empty() && !std::ifstream(biophys.tables_dir + "/residues.csv")) {
    fail("biophys.tables_dir has no residues.csv: " + biophys.tables_dir);
  }
}

json to_json(const RunConfig& c) {
  json j;
  j["experiment"] = std::string(to_string(c.experiment));
  j["agent"] = std::string(to_string(c.agent));
  j["seeds"] = c.seeds;
  j["budget"] = c.budget;
  j["out"] = c.out_dir;
  j["jobs"] = c.jobs;
  j["archive_capacity"] = c.archive_capacity;
  j["threshold"] = c.threshold;

  j["env"] = {{"seq_len", c.env.seq_len},
              {"alphabet", c.env.alphabet.symbols()},
              {"batch_size", c.env.batch_size},
              {"horizon", horizon_name(c.env.horizon)},
              {"episode_length", c.env.episode_length}};

  j["oracle"] = {{"spec", c.oracle.to_string()},
                 {"field_scale", c.landscape.field_scale},
                 {"adjacent_scale", c.landscape.adjacent_scale},
                 {"long_range_scale", c.landscape.long_range_scale},
                 {"long_range_edges", c.landscape.long_range_edges},
                 {"timeout_ms", c.remote.timeout.count()},
                 {"attempts", c.remote.attempts},
                 {"backoff_ms", c.remote.initial_backoff.count()}};

  j["proxy"] = {{"interval", c.finetune.interval},
                {"top_k", c.finetune.top_k},
                {"epochs", c.finetune.epochs},
                {"learning_rate", c.finetune.learning_rate},
                {"batch_size", c.finetune.batch_size},
                {"hidden", c.proxy_hidden},
                {"pretrain_epochs", c.pretrain.epochs},
                {"pretrain_batch_size", c.pretrain.batch_size},
                {"pretrain_learning_rate", c.pretrain.learning_rate},
                {"corpus_uniform", c.corpus.uniform},
                {"corpus_chains", c.corpus.hill_climb_chains},
                {"corpus_steps", c.corpus.hill_climb_steps}};

  const auto& a = c.agents;
  j["ppo"] = {{"gamma", a.ppo.gamma},
              {"gae_lambda", a.ppo.gae_lambda},
              {"clip", a.ppo.clip},
              {"entropy_coef", a.ppo.entropy_coef},
              {"value_coef", a.ppo.value_coef},
              {"rollout_steps", a.ppo.rollout_steps},
              {"epochs", a.ppo.epochs},
              {"minibatches", a.ppo.minibatches},
              {"learning_rate", a.ppo.learning_rate},
              {"max_grad_norm", a.ppo.max_grad_norm},
              {"hidden", a.ppo.hidden}};
  j["rnd"] = {{"embedding", a.rnd.embedding},
              {"hidden", a.rnd.hidden},
              {"coef", a.rnd.coef},
              {"learning_rate", a.rnd.learning_rate}};
  j["dqn"] = {{"gamma", a.dqn.gamma},
              {"capacity", a.dqn.capacity},
              {"batch_size", a.dqn.batch_size},
              {"warmup", a.dqn.warmup},
              {"target_sync", a.dqn.target_sync},
              {"updates_per_step", a.dqn.updates_per_step},
              {"epsilon_start", a.dqn.epsilon_start},
              {"epsilon_end", a.dqn.epsilon_end},
              {"epsilon_fraction", a.dqn.epsilon_fraction},
              {"learning_rate", a.dqn.learning_rate},
              {"huber_delta", a.dqn.huber_delta},
              {"max_grad_norm", a.dqn.max_grad_norm},
              {"hidden", a.dqn.hidden}};
  j["gfn"] = {{"beta", a.gfn.beta},
              {"learning_rate", a.gfn.learning_rate},
              {"replay_capacity", a.gfn.replay_capacity},
              {"replay_batch", a.gfn.replay_batch},
              {"updates_per_step", a.gfn.updates_per_step},
              {"exploration", a.gfn.exploration},
              {"max_grad_norm", a.gfn.max_grad_norm},
              {"hidden", a.gfn.hidden}};
  j["mcmc"] = {{"initial_temperature", a.mcmc.initial_temperature},
               {"final_temperature", a.mcmc.final_temperature},
               {"decay", a.mcmc.decay}};

  json agents = json::array();
  for (auto k : c.mismatch_agents) agents.push_back(std::string(to_string(k)));
  j["mismatch"] = {{"agents", agents}};

  j["evaluate"] = {{"sequences", c.evaluate.sequences},
                   {"traces", c.evaluate.traces},
                   {"reference", c.evaluate.reference},
                   {"reference_sequences", c.evaluate.reference_sequences}};
  j["biophys"] = {{"tables_dir", c.biophys.tables_dir}, {"pka", pka_json(c.biophys.pka)}};
  return j;
}

RunConfig config_from_json(const json& j, RunConfig c) {
  if (!j.is_object()) throw ConfigError("config: top level must be a table");
  Section top(j, "top level");

  std::string text;
  if (const json* v = top.find("experiment"); v) {
    top.get("experiment", text);
    c.experiment = parse_experiment_kind(text);
  }
  if (const json* v = top.find("agent"); v) {
    top.get("agent", text);
    try {
      c.agent = parse_agent_kind(text);
    } catch (const Error& e) {
      throw ConfigError(std::string("config: ") + e.what());
    }
  }
  top.get("seeds", c.seeds);
  top.get("budget", c.budget);
  top.get("out", c.out_dir);
  top.get("jobs", c.jobs);
  top.get("archive_capacity", c.archive_capacity);
  top.get("threshold", c.threshold);

  if (const json* s = top.sub("env")) {
    Section env(*s, "env");
    env.get("seq_len", c.env.seq_len);
    std::string alphabet = c.env.alphabet.symbols();
    env.get("alphabet", alphabet);
    try {
      c.env.alphabet = Alphabet(alphabet);
    } catch (const Error& e) {
      throw ConfigError(std::string("config: [env] alphabet: ") + e.what());
    }
    env.get("batch_size", c.env.batch_size);
    std::string horizon = horizon_name(c.env.horizon);
    env.get("horizon", horizon);
    c.env.horizon = parse_horizon(horizon);
    env.get("episode_length", c.env.episode_length);
  }
  if (const json* s = top.sub("oracle")) {
    Section o(*s, "oracle");
    std::string spec = c.oracle.to_string();
    o.get("spec", spec);
    c.oracle = OracleSpec::parse(spec);
    o.get("field_scale", c.landscape.field_scale);
    o.get("adjacent_scale", c.landscape.adjacent_scale);
    o.get("long_range_scale", c.landscape.long_range_scale);
    o.get("long_range_edges", c.landscape.long_range_edges);
    o.get_ms("timeout_ms", c.remote.timeout);
    o.get("attempts", c.remote.attempts);
    o.get_ms("backoff_ms", c.remote.initial_backoff);
  }
  if (const json* s = top.sub("proxy")) {
    Section p(*s, "proxy");
    p.get("interval", c.finetune.interval);
    p.get("top_k", c.finetune.top_k);
    p.get("epochs", c.finetune.epochs);
    p.get("learning_rate", c.finetune.learning_rate);
    p.get("batch_size", c.finetune.batch_size);
    p.get("hidden", c.proxy_hidden);
    p.get("pretrain_epochs", c.pretrain.epochs);
    p.get("pretrain_batch_size", c.pretrain.batch_size);
    p.get("pretrain_learning_rate", c.pretrain.learning_rate);
    p.get("corpus_uniform", c.corpus.uniform);
    p.get("corpus_chains", c.corpus.hill_climb_chains);
    p.get("corpus_steps", c.corpus.hill_climb_steps);
  }
  auto& a = c.agents;
  if (const json* s = top.sub("ppo")) {
    Section p(*s, "ppo");
    p.get("gamma", a.ppo.gamma);
    p.get("gae_lambda", a.ppo.gae_lambda);
    p.get("clip", a.ppo.clip);
    p.get("entropy_coef", a.ppo.entropy_coef);
    p.get("value_coef", a.ppo.value_coef);
    p.get("rollout_steps", a.ppo.rollout_steps);
    p.get("epochs", a.ppo.epochs);
    p.get("minibatches", a.ppo.minibatches);
    p.get("learning_rate", a.ppo.learning_rate);
    p.get("max_grad_norm", a.ppo.max_grad_norm);
    p.get("hidden", a.ppo.hidden);
  }
  if (const json* s = top.sub("rnd")) {
    Section r(*s, "rnd");
    r.get("embedding", a.rnd.embedding);
    r.get("hidden", a.rnd.hidden);
    r.get("coef", a.rnd.coef);
    r.get("learning_rate", a.rnd.learning_rate);
  }
  if (const json* s = top.sub("dqn")) {
    Section d(*s, "dqn");
    d.get("gamma", a.dqn.gamma);
    d.get("capacity", a.dqn.capacity);
    d.get("batch_size", a.dqn.batch_size);
    d.get("warmup", a.dqn.warmup);
    d.get("target_sync", a.dqn.target_sync);
    d.get("updates_per_step", a.dqn.updates_per_step);
    d.get("epsilon_start", a.dqn.epsilon_start);
    d.get("epsilon_end", a.dqn.epsilon_end);
    d.get("epsilon_fraction", a.dqn.epsilon_fraction);
    d.get("learning_rate", a.dqn.learning_rate);
    d.get("huber_delta", a.dqn.huber_delta);
    d.get("max_grad_norm", a.dqn.max_grad_norm);
    d.get("hidden", a.dqn.hidden);
  }
  if (const json* s = top.sub("gfn")) {
    Section g(*s, "gfn");
    g.get("beta", a.gfn.beta);
    g.get("learning_rate", a.gfn.learning_rate);
    g.get("replay_capacity", a.gfn.replay_capacity);
    g.get("replay_batch", a.gfn.replay_batch);
    g.get("updates_per_step", a.gfn.updates_per_step);
    g.get("exploration", a.gfn.exploration);
    g.get("max_grad_norm", a.gfn.max_grad_norm);
    g.get("hidden", a.gfn.hidden);
  }
  if (const json* s = top.sub("mcmc")) {
    Section m(*s, "mcmc");
    m.get("initial_temperature", a.mcmc.initial_temperature);
    m.get("final_temperature", a.mcmc.final_temperature);
    m.get("decay", a.mcmc.decay);
  }
  if (const json* s = top.sub("mismatch")) {
    Section m(*s, "mismatch");
    if (const json* v = m.find("agents")) {
      if (!v->is_array()) throw ConfigError("config: [mismatch] agents: expected an array");
      c.mismatch_agents.clear();
      for (const auto& item : *v) {
        if (!item.is_string()) throw ConfigError("config: [mismatch] agents: expected strings");
        c.mismatch_agents.push_back(parse_agent_kind(item.get<std::string>()));
      }
    }
  }
  if (const json* s = top.sub("evaluate")) {
    Section e(*s, "evaluate");
    e.get("sequences", c.evaluate.sequences);
    e.get("traces", c.evaluate.traces);
    e.get("reference", c.evaluate.reference);
    e.get("reference_sequences", c.evaluate.reference_sequences);
  }
  if (const json* s = top.sub("biophys")) {
    Section b(*s, "biophys");
    b.get("tables_dir", c.biophys.tables_dir);
    if (const json* p = b.sub("pka")) read_pka(*p, c.biophys.pka);
  }
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream probe(path);
  if (!probe) throw ConfigError("cannot open config " + path);
  bool is_json = path.size() >= 5 && path.substr(path.size() - 5) == ".json";
  if (!is_json) return config_from_json(parse_toml_file(path));

  json doc;
  try {
    doc = json::parse(probe);
  } catch (const json::exception& e) {
    throw ConfigError("config " + path + ": " + e.what());
  }
  if (doc.is_object() && doc.value("format", "") == kManifestFormat) {
    if (!doc.contains("config")) throw ConfigError("manifest " + path + " has no config");
    RunConfig c = config_from_json(doc["config"]);
    if (doc.contains("seed") && doc["seed"].is_number_unsigned()) c.seeds = {doc["seed"].get<std::uint64_t>()};
    return c;
  }
  return config_from_json(doc);
}

json make_manifest(const RunConfig& config, std::optional<std::uint64_t> seed) {
  json m;
  m["format"] = kManifestFormat;
  m["version"] = 1;
  m["config"] = to_json(config);
  if (seed) {
    m["seed"] = *seed;
  } else {
    m["seed"] = nullptr;
  }
  m["policies"] = {
      {"oracle_snapshots",
       "proxy mode: the current batch is oracle-scored once at every finetune tick; the final batch is scored once "
       "more when the run does not end on a tick"},
      {"finetune_ticks", "after every proxy.interval environment queries"},
      {"finetune_pool", "proxy-ranked archive plus the batch states visited since the previous tick"},
      {"query_ratio", "in-loop oracle queries (finetune + snapshot) over environment queries; the pretraining "
                      "corpus is itemized separately as oracle.pretrain"},
      {"landscape_seed", "shared by all run seeds; the run seed drives the environment, agent, and proxy"},
  };
  return m;
}

void write_run_manifest(const RunConfig& config, std::optional<std::uint64_t> seed, std::ostream& out) {
  out << make_manifest(config, seed).dump(2) << '\n';
  if (!out) throw Error("manifest: write failed");
}

}  // namespace seqdesign

#include "seqdesign/env.hpp"

#include <algorithm>
#include <limits>

#include "seqdesign/error.hpp"

namespace seqdesign {

void EnvConfig::validate() const {
  if (seq_len < 1) throw ConfigError("seq_len must be positive");
  if (batch_size < 1) throw ConfigError("batch size must be at least 1");
  if (horizon == Horizon::kFinite && episode_length < 1)
    throw ConfigError("finite horizon needs episode_length >= 1");
}

EnvState reset(const EnvConfig& config, Rng& rng) {
  config.validate();
  EnvState s;
  s.sequences.reserve(config.batch_size);
  for (std::size_t b = 0; b < config.batch_size; ++b)
    s.sequences.push_back(Sequence::random(config.seq_len, config.alphabet, rng));
  s.step_counters.assign(config.batch_size, 0);
  return s;
}

BatchEnv::BatchEnv(EnvConfig config) : config_(std::move(config)), rng_(config_.seed) {
  config_.validate();
  state_ = seqdesign::reset(config_, rng_);
}

void BatchEnv::reset() {
  const auto queries = state_.queries;
  state_ = seqdesign::reset(config_, rng_);
  state_.queries = queries;
}

std::vector<Transition> BatchEnv::step(std::span<const MutationAction> actions, Scorer& scorer) {
  const std::size_t B = config_.batch_size;
  if (actions.size() != B) throw ContractError("need exactly one action per environment");
  const std::size_t A = config_.alphabet.size();

  std::vector<Sequence> next;
  next.reserve(B);
  for (std::size_t b = 0; b < B; ++b) next.push_back(apply_mutation(state_.sequences[b], actions[b], A));

  auto reports = scorer.score(next);
  if (reports.size() != B) throw ScorerError("scorer returned wrong batch size");
  for (std::size_t b = 0; b < B; ++b) validate_report(reports[b], config_.seq_len);
  state_.queries += B;

  std::vector<Transition> out(B);
  for (std::size_t b = 0; b < B; ++b) {
    auto& t = out[b];
    t.state = std::move(state_.sequences[b]);
    t.action = actions[b];
    t.reward = reports[b].score;
    t.next_state = next[b];
    ++state_.step_counters[b];
    t.done = config_.horizon == Horizon::kFinite && state_.step_counters[b] >= config_.episode_length;
    if (t.done) {
      state_.sequences[b] = Sequence::random(config_.seq_len, config_.alphabet, rng_);
      state_.step_counters[b] = 0;
    } else {
      state_.sequences[b] = std::move(next[b]);
    }
  }
  return out;
}

std::vector<double> BatchEnv::evaluate(Scorer& scorer) {
  auto reports = scorer.score(state_.sequences);
  if (reports.size() != config_.batch_size) throw ScorerError("scorer returned wrong batch size");
  state_.queries += config_.batch_size;
  std::vector<double> out;
  out.reserve(reports.size());
  for (const auto& r : reports) {
    validate_report(r, config_.seq_len);
    out.push_back(r.score);
  }
  return out;
}

void BatchEnv::set_sequence(std::size_t slot, Sequence seq) {
  if (slot >= config_.batch_size || seq.size() != config_.seq_len) throw ContractError("bad slot or sequence length");
  state_.sequences[slot] = std::move(seq);
}

void CandidateArchive::update(std::span<const Sequence> sequences, std::span<const double> scores) {
  if (sequences.size() != scores.size()) throw ContractError("archive update needs one score per sequence");
  for (std::size_t i = 0; i < sequences.size(); ++i) insert(sequences[i], scores[i]);
}

void CandidateArchive::insert(const Sequence& sequence, double score) {
  if (capacity_ == 0) return;
  const std::uint64_t order = counter_++;
  if (members_.contains(sequence)) return;
  if (entries_.size() == capacity_ && !(score > entries_.back().score)) return;

  ArchiveEntry e{sequence, score, order};
  auto pos = std::upper_bound(entries_.begin(), entries_.end(), e, [](const ArchiveEntry& a, const ArchiveEntry& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.discovered < b.discovered;
  });
  entries_.insert(pos, std::move(e));
  members_.insert(sequence);
  if (entries_.size() > capacity_) {
    members_.erase(entries_.back().sequence);
    entries_.pop_back();
  }
}

std::vector<Sequence> CandidateArchive::sequences() const {
  std::vector<Sequence> out;
  out.reserve(entries_.size());
  for (const auto& e : entries_) out.push_back(e.sequence);
  return out;
}

double CandidateArchive::best_score() const {
  return entries_.empty() ? std::numeric_limits<double>::quiet_NaN() : entries_.front().score;
}

}  // namespace seqdesign

#pragma once

#include <cstdint>
#include <span>
#include <unordered_set>
#include <vector>

#include "seqdesign/scorer.hpp"
#include "seqdesign/sequence.hpp"

namespace seqdesign {

enum class Horizon { kInfinite, kFinite };

struct EnvConfig {
  std::size_t seq_len = 50;
  Alphabet alphabet;
  std::size_t batch_size = 100;
  Horizon horizon = Horizon::kInfinite;
  /// Episode length T; only used in finite mode.
  std::size_t episode_length = 0;
  std::uint64_t seed = 0;

  void validate() const;
  std::size_t action_count() const { return seq_len * alphabet.size(); }
};

struct EnvState {
  std::vector<Sequence> sequences;
  std::vector<std::size_t> step_counters;
  std::uint64_t queries = 0;
};

struct Transition {
  Sequence state;
  MutationAction action;
  double reward = 0.0;
  Sequence next_state;
  bool done = false;
};

/// B uniformly random sequences with zeroed counters.
EnvState reset(const EnvConfig& config, Rng& rng);

/// Batched mutation MDP. Each step applies one substitution per slot and
/// rewards the slot with the score of the mutated sequence. In finite mode a
/// slot finishing its T-th step is marked done and re-randomized.
class BatchEnv {
 public:
  explicit BatchEnv(EnvConfig config);

  const EnvConfig& config() const { return config_; }
  const EnvState& state() const { return state_; }
  const std::vector<Sequence>& sequences() const { return state_.sequences; }
  std::size_t batch_size() const { return config_.batch_size; }

  void reset();
  /// Scores and commits; if the scorer throws the state is left untouched.
  std::vector<Transition> step(std::span<const MutationAction> actions, Scorer& scorer);
  /// Scores the current sequences without moving (counts as B queries).
  std::vector<double> evaluate(Scorer& scorer);
  void set_sequence(std::size_t slot, Sequence seq);

 private:
  EnvConfig config_;
  Rng rng_;
  EnvState state_;
};

struct ArchiveEntry {
  Sequence sequence;
  double score = 0.0;
  std::uint64_t discovered = 0;
};

/// Top-K distinct sequences by score, ties resolved in favour of the earlier discovery.
class CandidateArchive {
 public:
  explicit CandidateArchive(std::size_t capacity = 100) : capacity_(capacity) {}

  void update(std::span<const Sequence> sequences, std::span<const double> scores);
  void insert(const Sequence& sequence, double score);

  std::size_t size() const { return entries_.size(); }
  std::size_t capacity() const { return capacity_; }
  /// Sorted by descending score.
  const std::vector<ArchiveEntry>& entries() const { return entries_; }
  std::vector<Sequence> sequences() const;
  double best_score() const;

 private:
  std::size_t capacity_;
  std::uint64_t counter_ = 0;
  std::vector<ArchiveEntry> entries_;
  std::unordered_set<Sequence, SequenceHash> members_;
};

}  // namespace seqdesign

#pragma once

#include <cstdint>
#include <map>
#include <mutex>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "seqdesign/sequence.hpp"

namespace seqdesign {

/// A scalar plausibility score in (0, 1] with an optional per-residue
/// confidence channel in (0, 100] that is carried through untouched.
struct ScoreReport {
  double score = 0.0;
  std::vector<double> confidence;

  bool operator==(const ScoreReport&) const = default;
};

/// Throws ScoreOutOfRange unless score is in (0, 1] and the confidence vector
/// (if any) has `seq_len` entries in (0, 100].
void validate_report(const ScoreReport& report, std::size_t seq_len);

/// Anything that maps a batch of sequences to reports, order preserving.
class Scorer {
 public:
  virtual ~Scorer() = default;
  virtual std::vector<ScoreReport> score(std::span<const Sequence> batch) = 0;
  virtual std::string describe() const = 0;
};

std::vector<double> score_values(Scorer& scorer, std::span<const Sequence> batch);
double score_one(Scorer& scorer, const Sequence& seq);

/// Memoizes an inner scorer. Thread-safe; the inner scorer is only called for
/// sequences not yet seen, once per distinct sequence.
class CachedScorer : public Scorer {
 public:
  explicit CachedScorer(Scorer& inner) : inner_(inner) {}

  std::vector<ScoreReport> score(std::span<const Sequence> batch) override;
  std::string describe() const override { return "cached(" + inner_.describe() + ")"; }

  std::uint64_t hits() const;
  std::uint64_t misses() const;

 private:
  Scorer& inner_;
  mutable std::mutex mu_;
  std::unordered_map<Sequence, ScoreReport, SequenceHash> cache_;
  std::uint64_t hits_ = 0;
  std::uint64_t misses_ = 0;
};

/// Per-category count of individual sequence scorings.
class QueryLedger {
 public:
  void add(const std::string& category, std::uint64_t n) { counts_[category] += n; }
  std::uint64_t get(const std::string& category) const;
  /// Sum over categories whose name starts with `prefix`.
  std::uint64_t total(const std::string& prefix = "") const;
  const std::map<std::string, std::uint64_t>& items() const { return counts_; }

 private:
  std::map<std::string, std::uint64_t> counts_;
};

/// Counts every sequence passed to the inner scorer under one ledger category.
class MeteredScorer : public Scorer {
 public:
  MeteredScorer(Scorer& inner, QueryLedger& ledger, std::string category)
      : inner_(inner), ledger_(ledger), category_(std::move(category)) {}

  std::vector<ScoreReport> score(std::span<const Sequence> batch) override;
  std::string describe() const override { return inner_.describe(); }

  void set_category(std::string category) { category_ = std::move(category); }
  const std::string& category() const { return category_; }

 private:
  Scorer& inner_;
  QueryLedger& ledger_;
  std::string category_;
};

}  // namespace seqdesign

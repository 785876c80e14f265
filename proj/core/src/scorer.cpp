#include "seqdesign/scorer.hpp"

#include <cmath>

#include "seqdesign/error.hpp"

namespace seqdesign {

void validate_report(const ScoreReport& report, std::size_t seq_len) {
  if (!(report.score > 0.0 && report.score <= 1.0))
    throw ScoreOutOfRange("score " + std::to_string(report.score) + " outside (0, 1]");
  if (report.confidence.empty()) return;
  if (report.confidence.size() != seq_len)
    throw ScoreOutOfRange("confidence vector length does not match sequence length");
  for (double c : report.confidence)
    if (!(c > 0.0 && c <= 100.0)) throw ScoreOutOfRange("confidence value outside (0, 100]");
}

std::vector<double> score_values(Scorer& scorer, std::span<const Sequence> batch) {
  auto reports = scorer.score(batch);
  std::vector<double> out;
  out.reserve(reports.size());
  for (const auto& r : reports) out.push_back(r.score);
  return out;
}

double score_one(Scorer& scorer, const Sequence& seq) {
  return scorer.score(std::span<const Sequence>(&seq, 1)).at(0).score;
}

std::vector<ScoreReport> CachedScorer::score(std::span<const Sequence> batch) {
  std::vector<ScoreReport> out(batch.size());
  std::vector<Sequence> missing;
  std::vector<std::vector<std::size_t>> slots;
  {
    std::lock_guard lock(mu_);
    std::unordered_map<Sequence, std::size_t, SequenceHash> pending;
    for (std::size_t i = 0; i < batch.size(); ++i) {
      if (auto it = cache_.find(batch[i]); it != cache_.end()) {
        out[i] = it->second;
        ++hits_;
      } else if (auto p = pending.find(batch[i]); p != pending.end()) {
        slots[p->second].push_back(i);
        ++hits_;
      } else {
        pending.emplace(batch[i], missing.size());
        missing.push_back(batch[i]);
        slots.push_back({i});
        ++misses_;
      }
    }
  }
  if (missing.empty()) return out;

  auto fresh = inner_.score(missing);
  if (fresh.size() != missing.size()) throw ScorerError("inner scorer returned wrong batch size");
  std::lock_guard lock(mu_);
  for (std::size_t k = 0; k < missing.size(); ++k) {
    for (auto i : slots[k]) out[i] = fresh[k];
    cache_.emplace(std::move(missing[k]), std::move(fresh[k]));
  }
  return out;
}

std::uint64_t CachedScorer::hits() const {
  std::lock_guard lock(mu_);
  return hits_;
}

std::uint64_t CachedScorer::misses() const {
  std::lock_guard lock(mu_);
  return misses_;
}

std::uint64_t QueryLedger::get(const std::string& category) const {
  auto it = counts_.find(category);
  return it == counts_.end() ? 0 : it->second;
}

std::uint64_t QueryLedger::total(const std::string& prefix) const {
  std::uint64_t n = 0;
  for (const auto& [k, v] : counts_)
    if (k.compare(0, prefix.size(), prefix) == 0) n += v;
  return n;
}

std::vector<ScoreReport> MeteredScorer::score(std::span<const Sequence> batch) {
  auto out = inner_.score(batch);
  ledger_.add(category_, batch.size());
  return out;
}

}  // namespace seqdesign

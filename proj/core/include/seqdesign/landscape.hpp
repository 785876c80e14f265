#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <utility>
#include <vector>

#include "seqdesign/scorer.hpp"
#include "seqdesign/sequence.hpp"

namespace seqdesign {

struct LandscapeParams {
  std::size_t seq_len = 50;
  std::size_t alphabet_size = 20;
  std::uint64_t seed = 0;
  double field_scale = 1.0;
  double adjacent_scale = 0.5;
  double long_range_scale = 0.5;
  /// Number of random non-adjacent couplings; negative means 2 * seq_len.
  /// Capped at the number of available non-adjacent pairs.
  long long long_range_edges = -1;
};

struct CouplingEdge {
  std::size_t i = 0;
  std::size_t j = 0;
  bool long_range = false;
};

/// Pairwise (Potts) energy over a fixed-length sequence:
///   e(x) = sum_i h[i][x_i] + sum_{(i,j) in E} J_ij[x_i][x_j]
/// scored as logistic((e - mu) / sigma), where mu and sigma are the exact
/// mean and standard deviation of e under uniformly random sequences.
class PottsLandscape {
 public:
  static PottsLandscape generate(const LandscapeParams& params);
  /// fields: seq_len * alphabet_size; couplings: one alphabet_size^2 block per edge.
  static PottsLandscape from_parameters(std::size_t seq_len, std::size_t alphabet_size,
                                        std::vector<double> fields, std::vector<CouplingEdge> edges,
                                        std::vector<double> couplings);

  std::size_t seq_len() const { return seq_len_; }
  std::size_t alphabet_size() const { return alphabet_size_; }
  const std::vector<CouplingEdge>& edges() const { return edges_; }
  double field(std::size_t i, std::size_t a) const { return fields_[i * alphabet_size_ + a]; }
  double coupling(std::size_t edge, std::size_t a, std::size_t b) const {
    return couplings_[(edge * alphabet_size_ + a) * alphabet_size_ + b];
  }

  double energy(const Sequence& seq) const;
  double energy_mean() const { return mean_; }
  double energy_stddev() const { return stddev_; }
  double standardized(double energy) const;
  ScoreReport score(const Sequence& seq) const;

  /// Copy with every long-range coupling negated.
  PottsLandscape with_negated_long_range() const;

 private:
  void finalize();

  std::size_t seq_len_ = 0;
  std::size_t alphabet_size_ = 0;
  std::vector<double> fields_;
  std::vector<CouplingEdge> edges_;
  std::vector<double> couplings_;
  // Zero-sum-gauge parameters: under uniform sampling their terms are uncorrelated.
  std::vector<double> gauge_fields_;
  std::vector<double> gauge_couplings_;
  double mean_ = 0.0;
  double stddev_ = 0.0;
};

class PottsScorer : public Scorer {
 public:
  explicit PottsScorer(std::shared_ptr<const PottsLandscape> landscape) : landscape_(std::move(landscape)) {}

  std::vector<ScoreReport> score(std::span<const Sequence> batch) override;
  std::string describe() const override;
  const PottsLandscape& landscape() const { return *landscape_; }

 private:
  std::shared_ptr<const PottsLandscape> landscape_;
};

struct EnumeratedOptimum {
  Sequence sequence;
  double energy = 0.0;
};

/// Exhaustive argmax of the energy. Throws ContractError above `max_states`.
EnumeratedOptimum enumerate_optimum(const PottsLandscape& landscape, std::uint64_t max_states = 1ULL << 22);

struct TwinLandscapes {
  PottsLandscape oracle;
  PottsLandscape decoy;
  std::uint64_t effective_seed = 0;
};

/// Oracle/decoy pair sharing fields and adjacent couplings, with long-range
/// couplings negated in the decoy. On instances small enough to enumerate,
/// seeds are re-drawn deterministically until the two global optima differ
/// in at least half the positions.
TwinLandscapes twin_landscapes(const LandscapeParams& params);

}  // namespace seqdesign

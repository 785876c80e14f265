#include "seqdesign/landscape.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "seqdesign/error.hpp"
#include "seqdesign/nn.hpp"

namespace seqdesign {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

std::size_t hamming_distance(const Sequence& a, const Sequence& b) {
  std::size_t d = 0;
  for (std::size_t i = 0; i < a.size(); ++i) d += a[i] != b[i];
  return d;
}

}  // namespace

PottsLandscape PottsLandscape::generate(const LandscapeParams& p) {
  if (p.seq_len < 1 || p.alphabet_size < 2) throw ContractError("landscape needs seq_len >= 1 and alphabet >= 2");
  Rng rng(splitmix64(p.seed));
  std::normal_distribution<double> normal(0.0, 1.0);
  const std::size_t L = p.seq_len;
  const std::size_t A = p.alphabet_size;

  std::vector<double> fields(L * A);
  for (auto& h : fields) h = p.field_scale * normal(rng);

  std::vector<CouplingEdge> edges;
  for (std::size_t i = 0; i + 1 < L; ++i) edges.push_back({i, i + 1, false});

  std::vector<std::pair<std::size_t, std::size_t>> candidates;
  for (std::size_t i = 0; i < L; ++i)
    for (std::size_t j = i + 2; j < L; ++j) candidates.emplace_back(i, j);
  std::shuffle(candidates.begin(), candidates.end(), rng);
  const std::size_t wanted = p.long_range_edges < 0 ? 2 * L : static_cast<std::size_t>(p.long_range_edges);
  const std::size_t n_long = std::min(wanted, candidates.size());
  candidates.resize(n_long);
  std::sort(candidates.begin(), candidates.end());
  for (auto [i, j] : candidates) edges.push_back({i, j, true});

  std::vector<double> couplings(edges.size() * A * A);
  for (std::size_t e = 0; e < edges.size(); ++e) {
    const double scale = edges[e].long_range ? p.long_range_scale : p.adjacent_scale;
    for (std::size_t k = 0; k < A * A; ++k) couplings[e * A * A + k] = scale * normal(rng);
  }
  return from_parameters(L, A, std::move(fields), std::move(edges), std::move(couplings));
}

PottsLandscape PottsLandscape::from_parameters(std::size_t seq_len, std::size_t alphabet_size,
                                               std::vector<double> fields, std::vector<CouplingEdge> edges,
                                               std::vector<double> couplings) {
  if (fields.size() != seq_len * alphabet_size) throw ContractError("field array has wrong size");
  if (couplings.size() != edges.size() * alphabet_size * alphabet_size)
    throw ContractError("coupling array has wrong size");
  for (const auto& e : edges) {
    if (e.i == e.j) throw ContractError("self-edge in coupling graph");
    if (e.i >= seq_len || e.j >= seq_len) throw ContractError("edge endpoint out of range");
  }
  PottsLandscape l;
  l.seq_len_ = seq_len;
  l.alphabet_size_ = alphabet_size;
  l.fields_ = std::move(fields);
  l.edges_ = std::move(edges);
  l.couplings_ = std::move(couplings);
  l.finalize();
  return l;
}

void PottsLandscape::finalize() {
  const std::size_t L = seq_len_;
  const std::size_t A = alphabet_size_;
  const double inv_a = 1.0 / static_cast<double>(A);

  mean_ = 0.0;
  gauge_fields_.assign(L * A, 0.0);
  gauge_couplings_.assign(couplings_.size(), 0.0);

  for (std::size_t i = 0; i < L; ++i) {
    double m = 0.0;
    for (std::size_t a = 0; a < A; ++a) m += field(i, a);
    m *= inv_a;
    mean_ += m;
    for (std::size_t a = 0; a < A; ++a) gauge_fields_[i * A + a] = field(i, a) - m;
  }

  std::vector<double> row(A), col(A);
  for (std::size_t e = 0; e < edges_.size(); ++e) {
    std::fill(row.begin(), row.end(), 0.0);
    std::fill(col.begin(), col.end(), 0.0);
    double total = 0.0;
    for (std::size_t a = 0; a < A; ++a)
      for (std::size_t b = 0; b < A; ++b) {
        const double v = coupling(e, a, b);
        row[a] += v;
        col[b] += v;
        total += v;
      }
    total *= inv_a * inv_a;
    for (std::size_t a = 0; a < A; ++a) {
      row[a] *= inv_a;
      col[a] *= inv_a;
    }
    mean_ += total;
    const auto [i, j, lr] = edges_[e];
    (void)lr;
    for (std::size_t a = 0; a < A; ++a) {
      gauge_fields_[i * A + a] += row[a] - total;
      gauge_fields_[j * A + a] += col[a] - total;
    }
    for (std::size_t a = 0; a < A; ++a)
      for (std::size_t b = 0; b < A; ++b)
        gauge_couplings_[(e * A + a) * A + b] = coupling(e, a, b) - row[a] - col[b] + total;
  }

  double var = 0.0;
  for (double v : gauge_fields_) var += v * v * inv_a;
  for (double v : gauge_couplings_) var += v * v * inv_a * inv_a;
  stddev_ = std::sqrt(var);
}

double PottsLandscape::energy(const Sequence& seq) const {
  if (seq.size() != seq_len_) throw ContractError("sequence length does not match landscape");
  double e = 0.0;
  for (std::size_t i = 0; i < seq_len_; ++i) e += field(i, seq[i]);
  for (std::size_t k = 0; k < edges_.size(); ++k) e += coupling(k, seq[edges_[k].i], seq[edges_[k].j]);
  return e;
}

double PottsLandscape::standardized(double energy) const {
  if (stddev_ == 0.0) return 0.0;
  return (energy - mean_) / stddev_;
}

ScoreReport PottsLandscape::score(const Sequence& seq) const {
  const double e = energy(seq);
  ScoreReport r;
  r.score = nn::logistic(standardized(e));
  // Underflow guard: the score must stay strictly positive.
  if (r.score <= 0.0) r.score = std::numeric_limits<double>::min();

  const std::size_t A = alphabet_size_;
  std::vector<double> site(seq_len_);
  for (std::size_t i = 0; i < seq_len_; ++i) site[i] = gauge_fields_[i * A + seq[i]];
  for (std::size_t k = 0; k < edges_.size(); ++k) {
    const auto& ed = edges_[k];
    const double half = 0.5 * gauge_couplings_[(k * A + seq[ed.i]) * A + seq[ed.j]];
    site[ed.i] += half;
    site[ed.j] += half;
  }
  r.confidence.resize(seq_len_);
  for (std::size_t i = 0; i < seq_len_; ++i)
    r.confidence[i] = std::max(100.0 * nn::logistic(site[i]), 1e-12);
  return r;
}

PottsLandscape PottsLandscape::with_negated_long_range() const {
  auto couplings = couplings_;
  const std::size_t block = alphabet_size_ * alphabet_size_;
  for (std::size_t e = 0; e < edges_.size(); ++e)
    if (edges_[e].long_range)
      for (std::size_t k = 0; k < block; ++k) couplings[e * block + k] = -couplings[e * block + k];
  return from_parameters(seq_len_, alphabet_size_, fields_, edges_, std::move(couplings));
}

std::vector<ScoreReport> PottsScorer::score(std::span<const Sequence> batch) {
  std::vector<ScoreReport> out;
  out.reserve(batch.size());
  for (const auto& s : batch) out.push_back(landscape_->score(s));
  return out;
}

std::string PottsScorer::describe() const {
  return "potts(L=" + std::to_string(landscape_->seq_len()) + ", A=" + std::to_string(landscape_->alphabet_size()) +
         ")";
}

EnumeratedOptimum enumerate_optimum(const PottsLandscape& landscape, std::uint64_t max_states) {
  const std::size_t L = landscape.seq_len();
  const std::size_t A = landscape.alphabet_size();
  double states = std::pow(static_cast<double>(A), static_cast<double>(L));
  if (states > static_cast<double>(max_states)) throw ContractError("landscape too large to enumerate");

  std::vector<std::uint8_t> cur(L, 0);
  EnumeratedOptimum best{Sequence(cur), landscape.energy(Sequence(cur))};
  while (true) {
    std::size_t i = 0;
    while (i < L && ++cur[i] == A) cur[i++] = 0;
    if (i == L) break;
    Sequence s(cur);
    const double e = landscape.energy(s);
    if (e > best.energy) best = {std::move(s), e};
  }
  return best;
}

TwinLandscapes twin_landscapes(const LandscapeParams& params) {
  const double states =
      std::pow(static_cast<double>(params.alphabet_size), static_cast<double>(params.seq_len));
  const bool enumerable = states <= static_cast<double>(1ULL << 20);

  LandscapeParams p = params;
  for (std::uint64_t attempt = 0; attempt < 1000; ++attempt) {
    p.seed = attempt == 0 ? params.seed : splitmix64(params.seed ^ (attempt * 0x632BE59BD9B4E019ULL));
    auto oracle = PottsLandscape::generate(p);
    auto decoy = oracle.with_negated_long_range();
    if (!enumerable) return {std::move(oracle), std::move(decoy), p.seed};
    const auto a = enumerate_optimum(oracle);
    const auto b = enumerate_optimum(decoy);
    if (2 * hamming_distance(a.sequence, b.sequence) >= params.seq_len)
      return {std::move(oracle), std::move(decoy), p.seed};
  }
  throw DomainError("could not construct twin landscapes with divergent optima");
}

}  // namespace seqdesign

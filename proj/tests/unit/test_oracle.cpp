#include <gtest/gtest.h>

#include <cmath>
#include <thread>

#include "seqdesign/error.hpp"
#include "seqdesign/landscape.hpp"
#include "seqdesign/metrics.hpp"
#include "seqdesign/scorer.hpp"
#include "test_support.hpp"

using namespace seqdesign;

namespace {

LandscapeParams params(std::size_t L, std::size_t A, std::uint64_t seed) {
  LandscapeParams p;
  p.seq_len = L;
  p.alphabet_size = A;
  p.seed = seed;
  return p;
}

// Energy straight from the parameter accessors.
double brute_energy(const PottsLandscape& l, const std::vector<std::uint8_t>& x) {
  double e = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) e += l.field(i, x[i]);
  for (std::size_t k = 0; k < l.edges().size(); ++k) e += l.coupling(k, x[l.edges()[k].i], x[l.edges()[k].j]);
  return e;
}

template <typename F>
void for_all_sequences(std::size_t L, std::size_t A, F f) {
  std::vector<std::uint8_t> x(L, 0);
  while (true) {
    f(x);
    std::size_t i = 0;
    while (i < L && ++x[i] == A) x[i++] = 0;
    if (i == L) return;
  }
}

}  // namespace

TEST(Potts, ZeroLandscapeScoresHalf) {
  const std::size_t L = 5, A = 3;
  std::vector<CouplingEdge> edges{{0, 1, false}, {1, 2, false}, {0, 3, true}};
  auto l = PottsLandscape::from_parameters(L, A, std::vector<double>(L * A, 0.0), edges,
                                           std::vector<double>(edges.size() * A * A, 0.0));
  Rng rng(1);
  for (int t = 0; t < 20; ++t) {
    auto s = Sequence::random(L, Alphabet("ACD"), rng);
    EXPECT_EQ(l.energy(s), 0.0);
    EXPECT_EQ(l.score(s).score, 0.5);
  }
}

TEST(Potts, EdgeSetShape) {
  auto l = PottsLandscape::generate(params(20, 20, 3));
  std::size_t adjacent = 0, long_range = 0;
  for (const auto& e : l.edges()) {
    EXPECT_NE(e.i, e.j);
    if (e.long_range) {
      ++long_range;
      EXPECT_GE(e.j, e.i + 2);
    } else {
      ++adjacent;
      EXPECT_EQ(e.j, e.i + 1);
    }
  }
  EXPECT_EQ(adjacent, 19u);
  EXPECT_EQ(long_range, 40u);
  // L=4 has only 3 non-adjacent pairs available.
  auto tiny = PottsLandscape::generate(params(4, 4, 3));
  EXPECT_EQ(tiny.edges().size(), 3u + 3u);
}

TEST(Potts, DeterministicGivenSeed) {
  auto a = PottsLandscape::generate(params(12, 20, 77));
  auto b = PottsLandscape::generate(params(12, 20, 77));
  auto c = PottsLandscape::generate(params(12, 20, 78));
  Rng rng(5);
  for (int t = 0; t < 50; ++t) {
    auto s = Sequence::random(12, Alphabet::amino_acids(), rng);
    EXPECT_EQ(a.score(s), b.score(s));
    EXPECT_NE(a.energy(s), c.energy(s));
  }
}

TEST(Potts, EnumeratedOptimumMatchesBruteForce) {
  for (std::uint64_t seed : {1, 2, 3, 4, 5}) {
    auto l = PottsLandscape::generate(params(4, 4, seed));
    double best = -1e300;
    std::vector<std::uint8_t> arg;
    for_all_sequences(4, 4, [&](const std::vector<std::uint8_t>& x) {
      double e = brute_energy(l, x);
      if (e > best) {
        best = e;
        arg = x;
      }
    });
    auto opt = enumerate_optimum(l);
    EXPECT_EQ(opt.sequence, Sequence(arg));
    EXPECT_NEAR(opt.energy, best, 1e-12);
  }
}

TEST(Potts, ExactMomentsMatchEnumeration) {
  for (auto [L, A, seed] : {std::tuple{4, 4, 11}, std::tuple{5, 3, 12}, std::tuple{6, 4, 13}}) {
    auto l = PottsLandscape::generate(params(L, A, seed));
    double sum = 0.0, sum2 = 0.0, n = 0.0;
    for_all_sequences(L, A, [&](const std::vector<std::uint8_t>& x) {
      double e = brute_energy(l, x);
      sum += e;
      sum2 += e * e;
      n += 1.0;
    });
    double mean = sum / n;
    double sd = std::sqrt(sum2 / n - mean * mean);
    EXPECT_NEAR(l.energy_mean(), mean, 1e-10);
    EXPECT_NEAR(l.energy_stddev(), sd, 1e-10);
  }
}

TEST(Potts, StandardizedScoreCentresOnHalf) {
  auto l = PottsLandscape::generate(params(50, 20, 2024));
  Rng rng(9);
  double sum = 0.0;
  const int n = 100000;
  for (int t = 0; t < n; ++t) sum += l.score(Sequence::random(50, Alphabet::amino_acids(), rng)).score;
  EXPECT_NEAR(sum / n, 0.5, 0.01);
}

TEST(Potts, ScoreIsLogisticMonotone) {
  auto l = PottsLandscape::generate(params(10, 20, 4));
  Rng rng(10);
  std::vector<std::pair<double, double>> es;
  for (int t = 0; t < 500; ++t) {
    auto s = Sequence::random(10, Alphabet::amino_acids(), rng);
    es.emplace_back(l.energy(s), l.score(s).score);
  }
  std::sort(es.begin(), es.end());
  for (std::size_t k = 1; k < es.size(); ++k) {
    if (es[k].first > es[k - 1].first) EXPECT_GE(es[k].second, es[k - 1].second);
  }
}

TEST(Potts, ReportRanges) {
  auto l = PottsLandscape::generate(params(30, 20, 6));
  Rng rng(2);
  for (int t = 0; t < 200; ++t) {
    auto r = l.score(Sequence::random(30, Alphabet::amino_acids(), rng));
    EXPECT_GT(r.score, 0.0);
    EXPECT_LT(r.score, 1.0);
    ASSERT_EQ(r.confidence.size(), 30u);
    for (double c : r.confidence) {
      EXPECT_GT(c, 0.0);
      EXPECT_LE(c, 100.0);
    }
    EXPECT_NO_THROW(validate_report(r, 30));
  }
}

TEST(Potts, LengthMismatchThrows) {
  auto l = PottsLandscape::generate(params(5, 20, 1));
  EXPECT_THROW(l.energy(Sequence({0, 1, 2})), ContractError);
}

TEST(Twins, OptimaDivergeOnTinyInstance) {
  for (std::uint64_t seed : {0, 1, 2, 3, 4, 5, 6, 7}) {
    auto t = twin_landscapes(params(4, 4, seed));
    auto a = enumerate_optimum(t.oracle);
    auto b = enumerate_optimum(t.decoy);
    EXPECT_GE(hamming(a.sequence, b.sequence), 2u);
    EXPECT_LT(t.oracle.score(b.sequence).score, t.oracle.score(a.sequence).score);
  }
}

TEST(Twins, SharedFieldsNegatedLongRange) {
  auto t = twin_landscapes(params(8, 4, 3));
  ASSERT_EQ(t.oracle.edges().size(), t.decoy.edges().size());
  for (std::size_t i = 0; i < 8; ++i)
    for (std::size_t a = 0; a < 4; ++a) EXPECT_EQ(t.oracle.field(i, a), t.decoy.field(i, a));
  for (std::size_t e = 0; e < t.oracle.edges().size(); ++e) {
    double sign = t.oracle.edges()[e].long_range ? -1.0 : 1.0;
    for (std::size_t a = 0; a < 4; ++a)
      for (std::size_t b = 0; b < 4; ++b) EXPECT_EQ(t.decoy.coupling(e, a, b), sign * t.oracle.coupling(e, a, b));
  }
}

TEST(Twins, SameSeedSamePair) {
  auto a = twin_landscapes(params(6, 4, 21));
  auto b = twin_landscapes(params(6, 4, 21));
  EXPECT_EQ(a.effective_seed, b.effective_seed);
  Rng rng(3);
  for (int t = 0; t < 30; ++t) {
    auto s = Sequence::random(6, Alphabet("ACDE"), rng);
    EXPECT_EQ(a.oracle.energy(s), b.oracle.energy(s));
    EXPECT_EQ(a.decoy.energy(s), b.decoy.energy(s));
  }
}

TEST(Twins, NeverShareGlobalOptimumOnEnumerableInstances) {
  for (std::uint64_t seed = 100; seed < 120; ++seed) {
    auto t = twin_landscapes(params(6, 4, seed));
    EXPECT_NE(enumerate_optimum(t.oracle).sequence, enumerate_optimum(t.decoy).sequence);
  }
}

TEST(Cache, HitsAndMisses) {
  auto land = std::make_shared<const PottsLandscape>(PottsLandscape::generate(params(10, 20, 1)));
  PottsScorer inner(land);
  CachedScorer cache(inner);
  Rng rng(4);
  auto s = Sequence::random(10, Alphabet::amino_acids(), rng);
  score_one(cache, s);
  score_one(cache, s);
  EXPECT_EQ(cache.misses(), 1u);
  EXPECT_EQ(cache.hits(), 1u);

  CachedScorer fresh(inner);
  std::vector<Sequence> distinct;
  for (int i = 0; i < 20; ++i) distinct.push_back(Sequence::random(10, Alphabet::amino_acids(), rng));
  fresh.score(distinct);
  EXPECT_EQ(fresh.hits(), 0u);
  EXPECT_EQ(fresh.misses(), 20u);
}

TEST(Cache, AgreesBitwiseWithInnerScorer) {
  auto land = std::make_shared<const PottsLandscape>(PottsLandscape::generate(params(25, 20, 8)));
  PottsScorer inner(land);
  CachedScorer cache(inner);
  Rng rng(12);
  std::vector<Sequence> seqs;
  for (int i = 0; i < 1000; ++i) seqs.push_back(Sequence::random(25, Alphabet::amino_acids(), rng));
  auto direct = inner.score(seqs);
  auto first = cache.score(seqs);
  auto second = cache.score(seqs);
  EXPECT_EQ(direct, first);
  EXPECT_EQ(direct, second);
}

TEST(Cache, MissCountEqualsDistinctQueriesUnderConcurrency) {
  testkit::FunctionScorer inner([](const Sequence& s) { return 0.1 + 0.01 * s[0]; });
  CachedScorer cache(inner);
  const Alphabet ab("AB");
  std::vector<std::thread> threads;
  for (int t = 0; t < 4; ++t) {
    threads.emplace_back([&, t] {
      Rng rng(static_cast<std::uint64_t>(t));
      for (int i = 0; i < 200; ++i) {
        std::vector<Sequence> batch{Sequence::random(4, ab, rng), Sequence::random(4, ab, rng)};
        cache.score(batch);
      }
    });
  }
  for (auto& th : threads) th.join();
  EXPECT_EQ(cache.misses(), inner.calls());
  EXPECT_LE(cache.misses(), 16u);
  EXPECT_EQ(cache.hits() + cache.misses(), 4u * 200u * 2u);
}

TEST(Ledger, MeteredScorerCountsSequences) {
  testkit::ConstantScorer inner(0.5);
  QueryLedger ledger;
  MeteredScorer m(inner, ledger, "oracle.train");
  std::vector<Sequence> batch(7, Sequence({0, 1}));
  m.score(batch);
  m.set_category("oracle.snapshot");
  m.score(std::span<const Sequence>(batch).first(3));
  EXPECT_EQ(ledger.get("oracle.train"), 7u);
  EXPECT_EQ(ledger.get("oracle.snapshot"), 3u);
  EXPECT_EQ(ledger.total("oracle."), 10u);
  EXPECT_EQ(ledger.get("proxy"), 0u);
}

TEST(Ledger, FailedCallsAreNotCounted) {
  testkit::FunctionScorer bad([](const Sequence&) -> double { throw ScorerError("x"); });
  QueryLedger ledger;
  MeteredScorer m(bad, ledger, "oracle.train");
  std::vector<Sequence> batch(3, Sequence({0}));
  EXPECT_THROW(m.score(batch), ScorerError);
  EXPECT_EQ(ledger.total(), 0u);
}

TEST(ScoreReport, Validation) {
  EXPECT_THROW(validate_report({0.0, {}}, 3), ScoreOutOfRange);
  EXPECT_THROW(validate_report({1.5, {}}, 3), ScoreOutOfRange);
  EXPECT_NO_THROW(validate_report({1.0, {}}, 3));
  EXPECT_THROW(validate_report({0.5, {50.0, 50.0}}, 3), ScoreOutOfRange);
  EXPECT_THROW(validate_report({0.5, {50.0, 0.0, 10.0}}, 3), ScoreOutOfRange);
  EXPECT_NO_THROW(validate_report({0.5, {50.0, 100.0, 10.0}}, 3));
}

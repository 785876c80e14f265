#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "seqdesign/error.hpp"
#include "seqdesign/landscape.hpp"
#include "seqdesign/proxy.hpp"
#include "test_support.hpp"

using namespace seqdesign;

namespace {

std::shared_ptr<const PottsLandscape> landscape(std::size_t L, std::uint64_t seed) {
  LandscapeParams p;
  p.seq_len = L;
  p.seed = seed;
  return std::make_shared<const PottsLandscape>(PottsLandscape::generate(p));
}

std::vector<Sequence> random_pool(std::size_t n, std::size_t L, Rng& rng) {
  std::vector<Sequence> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(Sequence::random(L, Alphabet::amino_acids(), rng));
  return out;
}

}  // namespace

TEST(Pearson, KnownValues) {
  std::vector<double> x{1, 2, 3, 4, 5};
  std::vector<double> y{2, 4, 5, 4, 5};
  // 6 / sqrt(10 * 6)
  EXPECT_NEAR(pearson(x, y), 0.7745966692414834, 1e-12);
  std::vector<double> neg{5, 4, 3, 2, 1};
  EXPECT_NEAR(pearson(x, neg), -1.0, 1e-12);
  std::vector<double> affine{3, 5, 7, 9, 11};
  EXPECT_NEAR(pearson(x, affine), 1.0, 1e-12);
}

TEST(Pearson, UndefinedCases) {
  std::vector<double> x{1, 2, 3};
  std::vector<double> c{2, 2, 2};
  EXPECT_THROW(pearson(x, c), DomainError);
  std::vector<double> shorter{1, 2};
  EXPECT_THROW(pearson(x, shorter), ContractError);
}

TEST(Proxy, DefaultSizeNearFifteenThousandParameters) {
  for (std::size_t L : {10, 50, 100}) {
    Rng rng(1);
    ProxyModel m(L, Alphabet::amino_acids(), rng);
    const double n = static_cast<double>(m.net().parameter_count());
    EXPECT_NEAR(n, 15000.0, 0.1 * 15000.0) << L;
    EXPECT_EQ(m.net().layer_sizes().front(), L * 20);
    EXPECT_EQ(m.net().layer_sizes().back(), 1u);
  }
}

TEST(Proxy, PredictionsAreInUnitInterval) {
  Rng rng(2);
  ProxyModel m(12, Alphabet::amino_acids(), rng);
  for (const auto& s : random_pool(200, 12, rng)) {
    double p = m.predict(s);
    EXPECT_GT(p, 0.0);
    EXPECT_LT(p, 1.0);
  }
}

TEST(Proxy, GradientMatchesFiniteDifferences) {
  Rng rng(3);
  ProxyModel m(4, Alphabet("ACDE"), rng, {6, 5});
  std::vector<LabeledSequence> data;
  for (const auto& s : std::vector<Sequence>{Sequence({0, 1, 2, 3}), Sequence({3, 3, 0, 1}), Sequence({2, 0, 1, 1})})
    data.push_back({s, 0.3 + 0.1 * s[0]});
  std::vector<double> grads(m.net().parameter_count(), 0.0);
  m.loss_gradient(data, grads);
  auto params = m.net().parameters();
  double err = testkit::max_fd_relative_error(params, grads, [&] { return m.mse(data); });
  EXPECT_LT(err, 1e-4);
}

TEST(Proxy, RegressesConstantTarget) {
  Rng rng(4);
  ProxyModel m(8, Alphabet::amino_acids(), rng);
  std::vector<LabeledSequence> data;
  for (const auto& s : random_pool(500, 8, rng)) data.push_back({s, 0.5});
  TrainOptions opt;
  opt.epochs = 100;
  auto report = pretrain(m, data, opt, rng);
  EXPECT_LT(report.final_loss, 1e-4);
  for (const auto& d : data) EXPECT_NEAR(m.predict(d.sequence), 0.5, 0.02);
}

TEST(Proxy, MemorizesSingleExample) {
  Rng rng(5);
  ProxyModel m(10, Alphabet::amino_acids(), rng);
  std::vector<LabeledSequence> data{{Sequence::random(10, Alphabet::amino_acids(), rng), 0.8}};
  TrainOptions opt;
  opt.epochs = 500;
  opt.learning_rate = 1e-3;
  auto rep = pretrain(m, data, opt, rng);
  EXPECT_LT(rep.final_loss, 1e-4);
  EXPECT_NEAR(m.predict(data[0].sequence), 0.8, 0.01);
}

TEST(Proxy, PretrainingGeneralizesOnPotts) {
  auto land = landscape(50, 11);
  PottsScorer oracle(land);
  Rng rng(6);
  auto corpus = build_pretraining_corpus(oracle, 50, Alphabet::amino_acids(), {5000, 0, 0}, rng);
  ASSERT_EQ(corpus.size(), 5000u);
  ProxyModel m(50, Alphabet::amino_acids(), rng);
  TrainOptions opt;
  opt.epochs = 30;
  auto rep = pretrain(m, corpus, opt, rng);
  EXPECT_LT(rep.final_loss, rep.initial_loss);

  auto held = random_pool(1000, 50, rng);
  auto truth = score_values(oracle, held);
  auto pred = m.predict(held);
  EXPECT_GE(pearson(pred, truth), 0.5);
}

TEST(Corpus, QueryCountIsExact) {
  testkit::FunctionScorer oracle([](const Sequence& s) { return 0.1 + 0.04 * s[0]; });
  Rng rng(7);
  auto corpus = build_pretraining_corpus(oracle, 6, Alphabet::amino_acids(), {100, 4, 25}, rng);
  EXPECT_EQ(corpus.size(), 200u);
  EXPECT_EQ(oracle.calls(), 200u);
  for (const auto& d : corpus) EXPECT_DOUBLE_EQ(d.label, 0.1 + 0.04 * d.sequence[0]);
}

TEST(Finetune, QueriesExactlyMinOfKAndDistinctPool) {
  Rng rng(8);
  ProxyModel m(6, Alphabet::amino_acids(), rng);
  testkit::ConstantScorer oracle(0.4);
  FinetuneSchedule sched;
  sched.top_k = 10;
  sched.epochs = 2;

  auto pool = random_pool(30, 6, rng);
  auto r = finetune_tick(m, pool, oracle, sched, rng, 1000);
  EXPECT_EQ(r.oracle_queries, 10u);
  EXPECT_EQ(oracle.calls(), 10u);
  EXPECT_EQ(r.entry.oracle_queries, 1010u);
  // Constant labels: correlation undefined.
  EXPECT_TRUE(std::isnan(r.entry.pearson_r));

  std::vector<Sequence> dup(12, pool[0]);
  dup.push_back(pool[1]);
  auto r2 = finetune_tick(m, dup, oracle, sched, rng, 0);
  EXPECT_EQ(r2.oracle_queries, 2u);
  EXPECT_EQ(r2.selected.size(), 2u);

  EXPECT_THROW(finetune_tick(m, std::span<const Sequence>(), oracle, sched, rng, 0), ContractError);
}

TEST(Finetune, SelectsTopKByProxy) {
  Rng rng(9);
  ProxyModel m(6, Alphabet::amino_acids(), rng);
  auto pool = random_pool(50, 6, rng);
  auto preds = m.predict(pool);
  std::vector<double> sorted = preds;
  std::sort(sorted.rbegin(), sorted.rend());
  testkit::ConstantScorer oracle(0.5);
  FinetuneSchedule sched;
  sched.top_k = 5;
  sched.epochs = 1;
  auto r = finetune_tick(m, pool, oracle, sched, rng, 0);
  ASSERT_EQ(r.proxy_predictions.size(), 5u);
  for (std::size_t k = 0; k < 5; ++k) EXPECT_DOUBLE_EQ(r.proxy_predictions[k], sorted[k]);
}

TEST(Finetune, SelfLabelingCorrelatesPerfectly) {
  Rng rng(10);
  ProxyModel m(8, Alphabet::amino_acids(), rng);
  const ProxyModel frozen = m;
  testkit::FunctionScorer oracle([&](const Sequence& s) { return frozen.predict(s); });
  FinetuneSchedule sched;
  sched.top_k = 40;
  sched.epochs = 1;
  auto r = finetune_tick(m, random_pool(100, 8, rng), oracle, sched, rng, 0);
  EXPECT_NEAR(r.entry.pearson_r, 1.0, 1e-12);
}

TEST(Finetune, OracleFailureLeavesModelUntouched) {
  Rng rng(11);
  ProxyModel m(5, Alphabet::amino_acids(), rng);
  const auto before = m.net();
  testkit::FunctionScorer bad([](const Sequence&) -> double { throw ScorerError("down"); });
  FinetuneSchedule sched;
  EXPECT_THROW(finetune_tick(m, random_pool(20, 5, rng), bad, sched, rng, 0), ScorerError);
  EXPECT_TRUE(m.net() == before);
}

TEST(Finetune, TrainingReducesSelectedSetError) {
  auto land = landscape(20, 12);
  PottsScorer oracle(land);
  Rng rng(12);
  ProxyModel m(20, Alphabet::amino_acids(), rng);
  FinetuneSchedule sched;
  sched.top_k = 100;
  sched.epochs = 20;
  int improved = 0;
  const int ticks = 10;
  for (int t = 0; t < ticks; ++t) {
    auto r = finetune_tick(m, random_pool(400, 20, rng), oracle, sched, rng, 0);
    ASSERT_EQ(r.epoch_mse.size(), sched.epochs + 1);
    if (r.epoch_mse.back() <= r.epoch_mse.front()) ++improved;
  }
  EXPECT_GE(improved, 9);
}

TEST(CorrelationLog, CsvFormat) {
  CorrelationLog log;
  log.append({200, 0.5});
  log.append({400, std::numeric_limits<double>::quiet_NaN()});
  std::ostringstream os;
  log.write_csv(os);
  EXPECT_EQ(os.str(), "oracle_queries,pearson_r\n200,0.5\n400,nan\n");
}

TEST(FinetuneSchedule, Validation) {
  FinetuneSchedule s;
  EXPECT_NO_THROW(s.validate());
  s.top_k = 0;
  EXPECT_THROW(s.validate(), ConfigError);
}

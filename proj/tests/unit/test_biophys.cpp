#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "seqdesign/biophys.hpp"
#include "seqdesign/csv.hpp"
#include "seqdesign/error.hpp"
#include "test_support.hpp"

using namespace seqdesign;
using namespace seqdesign::biophys;

namespace {

std::vector<BiophysReport> gaussian_reports(std::size_t n, std::mt19937_64& rng, double shift = 0.0) {
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<BiophysReport> out(n);
  for (auto& r : out) r = {6000.0 + 500.0 * g(rng) + shift, 40.0 + 10.0 * g(rng), 7.0 + 1.5 * g(rng), -0.3 + 0.2 * g(rng)};
  return out;
}

// Conformal p-values from a direct double-loop Gaussian KDE on standardized features.
std::vector<double> reference_p_values(const std::vector<BiophysReport>& gen, const std::vector<BiophysReport>& ref) {
  const std::size_t n = ref.size(), d = 4;
  std::array<double, 4> mean{}, sd{};
  for (const auto& r : ref)
    for (std::size_t k = 0; k < d; ++k) mean[k] += r.features()[k] / n;
  for (const auto& r : ref)
    for (std::size_t k = 0; k < d; ++k) sd[k] += std::pow(r.features()[k] - mean[k], 2) / (n - 1);
  for (auto& s : sd) s = std::sqrt(s);
  const double h = std::pow(static_cast<double>(n), -1.0 / (d + 4));
  auto z = [&](const BiophysReport& r) {
    std::array<double, 4> out;
    for (std::size_t k = 0; k < d; ++k) out[k] = (r.features()[k] - mean[k]) / sd[k];
    return out;
  };
  auto nc = [&](const BiophysReport& x) {
    auto zx = z(x);
    double s = 0.0;
    for (const auto& r : ref) {
      auto zr = z(r);
      double q = 0.0;
      for (std::size_t k = 0; k < d; ++k) q += (zx[k] - zr[k]) * (zx[k] - zr[k]);
      s += std::exp(-q / (2 * h * h));
    }
    return -std::log(s);
  };
  std::vector<double> ref_nc;
  for (const auto& r : ref) ref_nc.push_back(nc(r));
  std::vector<double> out;
  for (const auto& g : gen) {
    const double a = nc(g);
    std::size_t count = 0;
    for (double v : ref_nc) count += v >= a;
    out.push_back((1.0 + count) / (n + 1.0));
  }
  return out;
}

}  // namespace

TEST(MolecularWeight, SingleAndDipeptide) {
  EXPECT_NEAR(molecular_weight("G"), 75.07, 0.005);
  EXPECT_NEAR(molecular_weight("GG"), 132.12, 0.005);
}

TEST(MolecularWeight, BondsReleaseWater) {
  const auto& t = ResidueTables::standard();
  std::mt19937_64 rng(1);
  for (int i = 0; i < 20; ++i) {
    auto a = Sequence::random(1 + i, Alphabet::amino_acids(), rng).to_string(Alphabet::amino_acids());
    auto b = Sequence::random(3 + i, Alphabet::amino_acids(), rng).to_string(Alphabet::amino_acids());
    EXPECT_NEAR(molecular_weight(a + b), molecular_weight(a) + molecular_weight(b) - t.water(), 1e-9);
  }
}

TEST(Gravy, KyteDoolittle) {
  EXPECT_DOUBLE_EQ(gravy("I"), 4.5);
  EXPECT_DOUBLE_EQ(gravy("R"), -4.5);
  EXPECT_DOUBLE_EQ(gravy("IR"), 0.0);
}

TEST(Instability, DipeptideAndHomopolymer) {
  const auto& t = ResidueTables::standard();
  ASSERT_DOUBLE_EQ(t.diwv('A', 'A'), 1.0);
  EXPECT_DOUBLE_EQ(instability_index("AA"), 5.0);
  for (char c : std::string("ACDEFGHIKLMNPQRSTVWY")) {
    for (std::size_t n : {2, 5, 17}) {
      std::string s(n, c);
      EXPECT_NEAR(instability_index(s), 10.0 / n * (n - 1) * t.diwv(c, c), 1e-9) << s;
    }
  }
  EXPECT_THROW(instability_index("A"), ContractError);
}

TEST(IsoelectricPoint, TwoPkaClosedForm) {
  ResidueTables t = ResidueTables::standard();
  PkaSet p;
  p.n_term = 9.6;
  p.c_term = 2.34;
  t.set_pka(p);
  EXPECT_NEAR(isoelectric_point("GG", t), 5.97, 1e-3);
}

TEST(IsoelectricPoint, ChargedHomopolymers) {
  EXPECT_GT(isoelectric_point(std::string(20, 'K')), 9.0);
  EXPECT_LT(isoelectric_point(std::string(20, 'D')), 4.0);
}

TEST(IsoelectricPoint, ZeroChargeAndMonotoneCharge) {
  std::mt19937_64 rng(2);
  for (int i = 0; i < 30; ++i) {
    auto s = Sequence::random(40, Alphabet::amino_acids(), rng).to_string(Alphabet::amino_acids());
    const double pi = isoelectric_point(s);
    EXPECT_NEAR(net_charge(s, pi), 0.0, 1e-2);
    double prev = net_charge(s, 0.0);
    for (double ph = 0.5; ph <= 14.0; ph += 0.5) {
      const double z = net_charge(s, ph);
      EXPECT_LT(z, prev);
      prev = z;
    }
  }
}

TEST(Biophys, UnknownResidueRejected) {
  EXPECT_THROW(molecular_weight("AXA"), ContractError);
  EXPECT_THROW(gravy(""), ContractError);
}

TEST(Biophys, MatchesIndependentReferenceImplementation) {
  auto table = read_csv_file(testkit::fixture("biophys_reference.csv"));
  ASSERT_EQ(table.rows.size(), 50u);
  const auto cs = table.column("sequence"), cw = table.column("w_mol"), cg = table.column("gravy"),
             ci = table.column("instability"), cp = table.column("pi");
  for (const auto& row : table.rows) {
    const auto& seq = row[cs];
    auto r = report(seq);
    EXPECT_NEAR(r.w_mol, parse_double(row[cw]), 1e-3) << seq;
    EXPECT_NEAR(r.gravy, parse_double(row[cg]), 1e-3) << seq;
    EXPECT_NEAR(r.instability, parse_double(row[ci]), 1e-3) << seq;
    EXPECT_NEAR(r.pi, parse_double(row[cp]), 1e-2) << seq;
  }
}

TEST(Tables, BundledFilesMatchBuiltIns) {
  auto loaded = ResidueTables::load_directory(std::string(SEQDESIGN_DATA_DIR));
  const auto& builtin = ResidueTables::standard();
  for (char a : std::string("ACDEFGHIKLMNPQRSTVWY")) {
    EXPECT_DOUBLE_EQ(loaded.mass(a), builtin.mass(a));
    EXPECT_DOUBLE_EQ(loaded.hydropathy(a), builtin.hydropathy(a));
    for (char b : std::string("ACDEFGHIKLMNPQRSTVWY")) EXPECT_DOUBLE_EQ(loaded.diwv(a, b), builtin.diwv(a, b));
  }
  EXPECT_EQ(loaded.pka().positive, builtin.pka().positive);
  EXPECT_EQ(loaded.pka().negative, builtin.pka().negative);
  EXPECT_DOUBLE_EQ(loaded.pka().n_term, builtin.pka().n_term);
  EXPECT_DOUBLE_EQ(loaded.pka().c_term, builtin.pka().c_term);
}

TEST(Dcs, MatchesDirectKde) {
  std::mt19937_64 rng(3);
  auto ref = gaussian_reports(30, rng);
  auto gen = gaussian_reports(10, rng, 400.0);
  auto got = dcs(gen, ref);
  auto want = reference_p_values(gen, ref);
  ASSERT_EQ(got.p_values.size(), want.size());
  double mean = 0.0;
  for (std::size_t i = 0; i < want.size(); ++i) {
    EXPECT_DOUBLE_EQ(got.p_values[i], want[i]);
    mean += want[i] / want.size();
  }
  EXPECT_NEAR(got.score, mean, 1e-12);
}

TEST(Dcs, ReferenceAgainstItselfIsNearHalf) {
  std::mt19937_64 rng(4);
  auto ref = gaussian_reports(200, rng);
  EXPECT_NEAR(dcs(ref, ref).score, 0.5, 0.02);
}

TEST(Dcs, FarPointsGetMinimalPValue) {
  std::mt19937_64 rng(5);
  auto ref = gaussian_reports(200, rng);
  std::vector<BiophysReport> far{{1e6, 1e3, 14.0, 5.0}};
  auto r = dcs(far, ref);
  EXPECT_DOUBLE_EQ(r.p_values[0], 1.0 / 201.0);
}

TEST(Dcs, PValuesBounded) {
  std::mt19937_64 rng(6);
  auto ref = gaussian_reports(50, rng);
  auto gen = gaussian_reports(100, rng, 300.0);
  for (double p : dcs(gen, ref).p_values) {
    EXPECT_GE(p, 1.0 / 51.0);
    EXPECT_LE(p, 1.0);
  }
}

TEST(Dcs, InvariantUnderPerFeatureAffineMaps) {
  std::mt19937_64 rng(7);
  auto ref = gaussian_reports(60, rng);
  auto gen = gaussian_reports(20, rng, 200.0);
  auto map = [](std::vector<BiophysReport> v) {
    for (auto& r : v) r = {3.0 * r.w_mol - 100.0, 0.5 * r.instability + 7.0, 2.0 * r.pi, r.gravy + 10.0};
    return v;
  };
  auto a = dcs(gen, ref);
  auto b = dcs(map(gen), map(ref));
  for (std::size_t i = 0; i < a.p_values.size(); ++i) EXPECT_DOUBLE_EQ(a.p_values[i], b.p_values[i]);
}

TEST(Dcs, ZeroVarianceFeatureDropped) {
  std::mt19937_64 rng(8);
  auto ref = gaussian_reports(40, rng);
  for (auto& r : ref) r.gravy = 0.25;
  auto gen = gaussian_reports(5, rng);
  auto r = dcs(gen, ref);
  EXPECT_EQ(r.dropped_features, std::vector<std::size_t>{3});
  EXPECT_EQ(r.p_values.size(), 5u);
}

TEST(Dcs, TooFewReferencePoints) {
  std::mt19937_64 rng(9);
  auto ref = gaussian_reports(19, rng);
  EXPECT_THROW(dcs(ref, ref), ContractError);
}

TEST(ReferenceCsv, HeaderOrderFree) {
  std::istringstream in("gravy,pI,W_mol,instability\n-0.5,6.5,5000,30\n0.1,8,7000,45\n");
  auto r = read_reference_csv(in);
  ASSERT_EQ(r.size(), 2u);
  EXPECT_DOUBLE_EQ(r[0].w_mol, 5000);
  EXPECT_DOUBLE_EQ(r[0].pi, 6.5);
  EXPECT_DOUBLE_EQ(r[1].gravy, 0.1);
  EXPECT_DOUBLE_EQ(r[1].instability, 45);
  std::istringstream bad("w_mol,pi\n1,2\n");
  EXPECT_THROW(read_reference_csv(bad), ParseError);
}

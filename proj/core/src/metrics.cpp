#include "seqdesign/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <Eigen/Dense>

#include "seqdesign/error.hpp"

namespace seqdesign {

std::size_t hamming(const Sequence& a, const Sequence& b) {
  if (a.size() != b.size()) throw ContractError("hamming: sequences differ in length");
  std::size_t d = 0;
  for (std::size_t i = 0; i < a.size(); ++i) d += a[i] != b[i];
  return d;
}

std::size_t hamming(std::string_view a, std::string_view b) {
  if (a.size() != b.size()) throw ContractError("hamming: sequences differ in length");
  std::size_t d = 0;
  for (std::size_t i = 0; i < a.size(); ++i) d += a[i] != b[i];
  return d;
}

namespace {

template <typename T, typename F>
double mean_pairwise(std::span<const T> set, F&& distance) {
  if (set.size() < 2) throw ContractError("pairwise mean needs at least two items");
  double total = 0.0;
  for (std::size_t i = 0; i < set.size(); ++i)
    for (std::size_t j = 0; j < set.size(); ++j)
      if (i != j) total += distance(set[i], set[j]);
  const double n = static_cast<double>(set.size());
  return total / (n * (n - 1.0));
}

Eigen::Vector3d to_eigen(const Vec3& v) { return {v[0], v[1], v[2]}; }

}  // namespace

double mp_hd(std::span<const Sequence> set) {
  return mean_pairwise(set, [](const Sequence& a, const Sequence& b) { return static_cast<double>(hamming(a, b)); });
}

double mp_hd(std::span<const std::string> set) {
  return mean_pairwise(set,
                       [](const std::string& a, const std::string& b) { return static_cast<double>(hamming(a, b)); });
}

double tm_d0(std::size_t target_length) {
  if (target_length <= 15) throw DomainError("TM-score d0 undefined for target length <= 15");
  const double d0 = 1.24 * std::cbrt(static_cast<double>(target_length) - 15.0) - 1.8;
  if (!(d0 > 0.0)) throw DomainError("TM-score d0 is not positive for this target length");
  return d0;
}

Vec3 Superposition::apply(const Vec3& x) const {
  Vec3 d{x[0] - mobile_centroid[0], x[1] - mobile_centroid[1], x[2] - mobile_centroid[2]};
  Vec3 out{};
  for (int r = 0; r < 3; ++r)
    out[r] = rotation[r][0] * d[0] + rotation[r][1] * d[1] + rotation[r][2] * d[2] + target_centroid[r];
  return out;
}

Superposition kabsch(std::span<const Vec3> mobile, std::span<const Vec3> target) {
  if (mobile.size() != target.size()) throw ContractError("kabsch: point counts differ");
  if (mobile.empty()) throw ContractError("kabsch: no points");
  const std::size_t n = mobile.size();
  Eigen::Vector3d cm = Eigen::Vector3d::Zero();
  Eigen::Vector3d ct = Eigen::Vector3d::Zero();
  for (std::size_t i = 0; i < n; ++i) {
    cm += to_eigen(mobile[i]);
    ct += to_eigen(target[i]);
  }
  cm /= static_cast<double>(n);
  ct /= static_cast<double>(n);

  Eigen::Matrix3d h = Eigen::Matrix3d::Zero();
  for (std::size_t i = 0; i < n; ++i) h += (to_eigen(mobile[i]) - cm) * (to_eigen(target[i]) - ct).transpose();
  Eigen::JacobiSVD<Eigen::Matrix3d> svd(h, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Eigen::Matrix3d u = svd.matrixU();
  const Eigen::Matrix3d v = svd.matrixV();
  Eigen::Matrix3d d = Eigen::Matrix3d::Identity();
  if ((v * u.transpose()).determinant() < 0.0) d(2, 2) = -1.0;
  const Eigen::Matrix3d rot = v * d * u.transpose();

  Superposition s;
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) s.rotation[r][c] = rot(r, c);
    s.mobile_centroid[r] = cm[r];
    s.target_centroid[r] = ct[r];
  }
  double sq = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto x = s.apply(mobile[i]);
    for (int r = 0; r < 3; ++r) sq += (x[r] - target[i][r]) * (x[r] - target[i][r]);
  }
  s.rmsd = std::sqrt(sq / static_cast<double>(n));
  return s;
}

double kabsch_rmsd(const StructureTrace& a, const StructureTrace& b) {
  if (a.size() != b.size()) throw ContractError("kabsch_rmsd: traces differ in length");
  if (a.size() < 3) throw ContractError("kabsch_rmsd: need at least three points");
  return kabsch(a.coords, b.coords).rmsd;
}

double tm_score_from_distances(std::span<const double> distances, std::size_t target_length) {
  const double d0 = tm_d0(target_length);
  double s = 0.0;
  for (double d : distances) s += 1.0 / (1.0 + (d / d0) * (d / d0));
  return s / static_cast<double>(target_length);
}

double tm_score(const StructureTrace& target, const StructureTrace& templ, const ResiduePairing& pairing) {
  if (pairing.empty()) throw ContractError("tm_score: empty residue pairing");
  const std::size_t lt = target.size();
  const double d0 = tm_d0(lt);
  std::vector<Vec3> mob, tgt;
  mob.reserve(pairing.size());
  tgt.reserve(pairing.size());
  for (auto [ti, mi] : pairing) {
    if (ti >= target.size() || mi >= templ.size()) throw ContractError("tm_score: pairing index out of range");
    tgt.push_back(target.coords[ti]);
    mob.push_back(templ.coords[mi]);
  }
  const std::size_t n = pairing.size();

  std::vector<double> dist(n);
  auto evaluate = [&](const Superposition& s) {
    for (std::size_t k = 0; k < n; ++k) {
      const auto x = s.apply(mob[k]);
      dist[k] = std::sqrt((x[0] - tgt[k][0]) * (x[0] - tgt[k][0]) + (x[1] - tgt[k][1]) * (x[1] - tgt[k][1]) +
                          (x[2] - tgt[k][2]) * (x[2] - tgt[k][2]));
    }
    return tm_score_from_distances(dist, lt);
  };

  double best = evaluate(kabsch(mob, tgt));
  if (n < 4) return best;

  const double cutoff = std::clamp(d0, 4.5, 8.0);
  std::vector<std::size_t> subset, previous;
  std::vector<Vec3> sm, st;
  // Refines from the superposition currently reflected in `dist`, keeping residues within the cutoff.
  auto refine = [&] {
    previous.clear();
    for (int iter = 0; iter < 20; ++iter) {
      subset.clear();
      for (std::size_t k = 0; k < n; ++k)
        if (dist[k] < cutoff) subset.push_back(k);
      if (subset.size() < 3 || subset == previous) break;
      sm.clear();
      st.clear();
      for (auto k : subset) {
        sm.push_back(mob[k]);
        st.push_back(tgt[k]);
      }
      best = std::max(best, evaluate(kabsch(sm, st)));
      previous = subset;
    }
  };
  refine();

  // Seeds from contiguous fragments of length n/2, n/4, ... (at least 4).
  for (std::size_t len = n / 2; len >= 4; len /= 2) {
    const std::size_t stride = std::max<std::size_t>(1, len / 2);
    for (std::size_t start = 0; start + len <= n; start += stride) {
      sm.assign(mob.begin() + static_cast<std::ptrdiff_t>(start), mob.begin() + static_cast<std::ptrdiff_t>(start + len));
      st.assign(tgt.begin() + static_cast<std::ptrdiff_t>(start), tgt.begin() + static_cast<std::ptrdiff_t>(start + len));
      best = std::max(best, evaluate(kabsch(sm, st)));
      refine();
    }
  }
  return best;
}

double tm_score(const StructureTrace& target, const StructureTrace& templ) {
  const std::size_t n = std::min(target.size(), templ.size());
  ResiduePairing pairing(n);
  for (std::size_t i = 0; i < n; ++i) pairing[i] = {i, i};
  return tm_score(target, templ, pairing);
}

double mp_tm(std::span<const StructureTrace> set) {
  for (const auto& s : set)
    if (s.size() != set.front().size()) throw ContractError("mp_tm: traces differ in length");
  return mean_pairwise(set, [](const StructureTrace& a, const StructureTrace& b) { return tm_score(a, b); });
}

double mp_rmsd(std::span<const StructureTrace> set) {
  return mean_pairwise(set, [](const StructureTrace& a, const StructureTrace& b) { return kabsch_rmsd(a, b); });
}

std::vector<double> aa_frequency(std::span<const Sequence> set, std::size_t alphabet_size) {
  if (set.empty()) throw ContractError("aa_frequency: empty set");
  std::vector<double> counts(alphabet_size, 0.0);
  double total = 0.0;
  for (const auto& s : set)
    for (auto r : s.residues()) {
      if (r >= alphabet_size) throw ContractError("aa_frequency: residue outside alphabet");
      counts[r] += 1.0;
      total += 1.0;
    }
  if (total == 0.0) throw ContractError("aa_frequency: sequences are empty");
  for (auto& c : counts) c /= total;
  return counts;
}

double distribution_mae(std::span<const double> p, std::span<const double> q) {
  if (p.size() != q.size() || p.empty()) throw ContractError("distribution_mae: length mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) s += std::abs(p[i] - q[i]);
  return s / static_cast<double>(p.size());
}

std::vector<ParetoPoint> pareto_front(std::span<const ParetoPoint> points, double threshold,
                                      DiversityDirection direction) {
  const double sign = direction == DiversityDirection::kHigherBetter ? 1.0 : -1.0;
  std::vector<const ParetoPoint*> eligible;
  for (const auto& p : points)
    if (p.score >= threshold) eligible.push_back(&p);
  std::vector<ParetoPoint> front;
  for (const auto* p : eligible) {
    bool dominated = false;
    for (const auto* q : eligible) {
      if (q == p) continue;
      const double qd = sign * q->diversity;
      const double pd = sign * p->diversity;
      if (q->score >= p->score && qd >= pd && (q->score > p->score || qd > pd)) {
        dominated = true;
        break;
      }
    }
    if (!dominated) front.push_back(*p);
  }
  return front;
}

}  // namespace seqdesign

#pragma once

#include <array>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "seqdesign/sequence.hpp"

namespace seqdesign {

using Vec3 = std::array<double, 3>;

/// Ordered alpha-carbon coordinates in Angstrom.
struct StructureTrace {
  std::vector<Vec3> coords;

  std::size_t size() const { return coords.size(); }
};

std::size_t hamming(const Sequence& a, const Sequence& b);
std::size_t hamming(std::string_view a, std::string_view b);

/// Mean pairwise Hamming distance over ordered distinct pairs.
double mp_hd(std::span<const Sequence> set);
double mp_hd(std::span<const std::string> set);

/// Length normalization 1.24 * cbrt(L - 15) - 1.8. Throws DomainError when not positive.
double tm_d0(std::size_t target_length);

/// Index-aligned residue pairing: pairs[k] = (target index, template index).
using ResiduePairing = std::vector<std::pair<std::size_t, std::size_t>>;

/// Rigid superposition result: x' = rotation * (x - mobile_centroid) + target_centroid.
struct Superposition {
  std::array<std::array<double, 3>, 3> rotation{};
  Vec3 mobile_centroid{};
  Vec3 target_centroid{};
  double rmsd = 0.0;

  Vec3 apply(const Vec3& x) const;
};

/// Least-squares rigid superposition of `mobile` onto `target` (SVD with reflection correction).
Superposition kabsch(std::span<const Vec3> mobile, std::span<const Vec3> target);

/// Minimum RMSD over rigid motions. Needs equal counts >= 3.
double kabsch_rmsd(const StructureTrace& a, const StructureTrace& b);

/// TM-score of `templ` against `target` normalized by the target length.
/// Superpositions are seeded by Kabsch on the full pairing and on contiguous
/// fragments of half, quarter, ... length, each refined on close-residue
/// subsets; the best score found is returned.
double tm_score(const StructureTrace& target, const StructureTrace& templ, const ResiduePairing& pairing);
/// Same, with the identity pairing over min(len) residues.
double tm_score(const StructureTrace& target, const StructureTrace& templ);

/// TM-score terms for given post-superposition distances.
double tm_score_from_distances(std::span<const double> distances, std::size_t target_length);

double mp_tm(std::span<const StructureTrace> set);
double mp_rmsd(std::span<const StructureTrace> set);

/// Normalized residue frequencies over the set (length alphabet_size).
std::vector<double> aa_frequency(std::span<const Sequence> set, std::size_t alphabet_size);
double distribution_mae(std::span<const double> p, std::span<const double> q);

struct ParetoPoint {
  double score = 0.0;
  double diversity = 0.0;
  std::string label;
};

enum class DiversityDirection { kHigherBetter, kLowerBetter };

/// Non-dominated points (maximize score, optimize diversity in `direction`)
/// among those with score >= threshold, in input order.
std::vector<ParetoPoint> pareto_front(std::span<const ParetoPoint> points, double threshold,
                                      DiversityDirection direction = DiversityDirection::kHigherBetter);

}  // namespace seqdesign

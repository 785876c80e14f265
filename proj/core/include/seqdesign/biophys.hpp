#pragma once

#include <array>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace seqdesign::biophys {

/// Ionizable-group pKa values.
struct PkaSet {
  double n_term = 8.6;
  double c_term = 3.6;
  /// Side chains that carry a positive charge when protonated.
  std::map<char, double> positive{{'K', 10.8}, {'R', 12.5}, {'H', 6.5}};
  /// Side chains that carry a negative charge when deprotonated.
  std::map<char, double> negative{{'D', 3.9}, {'E', 4.1}, {'C', 8.5}, {'Y', 10.1}};

  static PkaSet emboss() { return {}; }
};

/// Residue property tables over the 20 canonical amino acids: average free
/// amino-acid masses (Da), Kyte-Doolittle hydropathy, Guruprasad dipeptide
/// instability weights, and a pKa set.
class ResidueTables {
 public:
  static constexpr double kWater = 18.0153;

  /// Built-in tables (identical to the bundled CSV files).
  static const ResidueTables& standard();
  /// Loads residues.csv (residue,mass,kyte_doolittle), diwv.csv (20x20 matrix
  /// with header row) and pka.csv (group,pka,charge).
  static ResidueTables load(const std::string& residues_csv, const std::string& diwv_csv, const std::string& pka_csv);
  static ResidueTables load_directory(const std::string& dir);

  double mass(char residue) const;
  double hydropathy(char residue) const;
  double diwv(char first, char second) const;
  const PkaSet& pka() const { return pka_; }
  void set_pka(PkaSet pka) { pka_ = std::move(pka); }
  double water() const { return water_; }

 private:
  static int slot(char residue);

  std::array<double, 20> mass_{};
  std::array<double, 20> kd_{};
  std::array<std::array<double, 20>, 20> diwv_{};
  PkaSet pka_;
  double water_ = kWater;
};

double molecular_weight(std::string_view seq, const ResidueTables& tables = ResidueTables::standard());
double gravy(std::string_view seq, const ResidueTables& tables = ResidueTables::standard());
double instability_index(std::string_view seq, const ResidueTables& tables = ResidueTables::standard());
/// Modeled net charge at `ph` (Henderson-Hasselbalch over termini and side chains).
double net_charge(std::string_view seq, double ph, const ResidueTables& tables = ResidueTables::standard());
/// pH of zero net charge, bisection on [0, 14] to 1e-4.
double isoelectric_point(std::string_view seq, const ResidueTables& tables = ResidueTables::standard());

struct BiophysReport {
  double w_mol = 0.0;
  double instability = 0.0;
  double pi = 0.0;
  double gravy = 0.0;

  std::array<double, 4> features() const { return {w_mol, instability, pi, gravy}; }
};

BiophysReport report(std::string_view seq, const ResidueTables& tables = ResidueTables::standard());

struct DcsResult {
  double score = 0.0;
  std::vector<double> p_values;
  /// Indices (into w_mol, instability, pI, gravy) dropped for zero reference variance.
  std::vector<std::size_t> dropped_features;
};

/// Distributional conformity: mean conformal p-value of the generated feature
/// vectors, with nonconformity = -log density of a Gaussian KDE (Scott
/// bandwidth) fit on the standardized reference set.
DcsResult dcs(std::span<const BiophysReport> generated, std::span<const BiophysReport> reference);

/// Reads a CSV with header w_mol,instability,pI,gravy (column order free).
std::vector<BiophysReport> read_reference_csv(std::istream& in);
std::vector<BiophysReport> read_reference_csv(const std::string& path);

}  // namespace seqdesign::biophys

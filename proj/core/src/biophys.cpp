#include "seqdesign/biophys.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <limits>
#include <numbers>
#include <sstream>

#include "seqdesign/error.hpp"

namespace seqdesign::biophys {
namespace {

constexpr std::string_view kOrder = "ACDEFGHIKLMNPQRSTVWY";

// Average masses of the free amino acids (Da), IUPAC.
constexpr std::array<double, 20> kMass = {89.0932,  121.1582, 133.1027, 147.1293, 165.1891, 75.0666,  155.1546,
                                          131.1729, 146.1876, 131.1729, 149.2113, 132.1179, 115.1305, 146.1445,
                                          174.201,  105.0926, 119.1192, 117.1463, 204.2252, 181.1885};

// Kyte & Doolittle (1982).
constexpr std::array<double, 20> kKyteDoolittle = {1.8, 2.5,  -3.5, -3.5, 2.8,  -0.4, -3.2, 4.5,  -3.9, 3.8,
                                                   1.9, -3.5, -1.6, -3.5, -4.5, -0.8, -0.7, 4.2,  -0.9, -1.3};

// Guruprasad, Reddy & Pandit (1990); row = first residue, column = second.
constexpr std::array<std::array<double, 20>, 20> kDiwv = {{
    {1.0, 44.94, -7.49, 1.0, 1.0, 1.0, -7.49, 1.0, 1.0, 1.0, 1.0, 1.0, 20.26, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0},
    {1.0, 1.0, 20.26, 1.0, 1.0, 1.0, 33.6, 1.0, 1.0, 20.26, 33.6, 1.0, 20.26, -6.54, 1.0, 1.0, 33.6, -6.54, 24.68, 1.0},
    {1.0, 1.0, 1.0, 1.0, -6.54, 1.0, 1.0, 1.0, -7.49, 1.0, 1.0, 1.0, 1.0, 1.0, -6.54, 20.26, -14.03, 1.0, 1.0, 1.0},
    {1.0, 44.94, 20.26, 33.6, 1.0, 1.0, -6.54, 20.26, 1.0, 1.0, 1.0, 1.0, 20.26, 20.26, 1.0, 20.26, 1.0, 1.0, -14.03, 1.0},
    {1.0, 1.0, 13.34, 1.0, 1.0, 1.0, 1.0, 1.0, -14.03, 1.0, 1.0, 1.0, 20.26, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 33.601},
    {-7.49, 1.0, 1.0, -6.54, 1.0, 13.34, 1.0, -7.49, -7.49, 1.0, 1.0, -7.49, 1.0, 1.0, 1.0, 1.0, -7.49, 1.0, 13.34, -7.49},
    {1.0, 1.0, 1.0, 1.0, -9.37, -9.37, 1.0, 44.94, 24.68, 1.0, 1.0, 24.68, -1.88, 1.0, 1.0, 1.0, -6.54, 1.0, -1.88, 44.94},
    {1.0, 1.0, 1.0, 44.94, 1.0, 1.0, 13.34, 1.0, -7.49, 20.26, 1.0, 1.0, -1.88, 1.0, 1.0, 1.0, 1.0, -7.49, 1.0, 1.0},
    {1.0, 1.0, 1.0, 1.0, 1.0, -7.49, 1.0, -7.49, 1.0, -7.49, 33.6, 1.0, -6.54, 24.64, 33.6, 1.0, 1.0, -7.49, 1.0, 1.0},
    {1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, -7.49, 1.0, 1.0, 1.0, 20.26, 33.6, 20.26, 1.0, 1.0, 1.0, 24.68, 1.0},
    {13.34, 1.0, 1.0, 1.0, 1.0, 1.0, 58.28, 1.0, 1.0, 1.0, -1.88, 1.0, 44.94, -6.54, -6.54, 44.94, -1.88, 1.0, 1.0, 24.68},
    {1.0, -1.88, 1.0, 1.0, -14.03, -14.03, 1.0, 44.94, 24.68, 1.0, 1.0, 1.0, -1.88, -6.54, 1.0, 1.0, -7.49, 1.0, -9.37, 1.0},
    {20.26, -6.54, -6.54, 18.38, 20.26, 1.0, 1.0, 1.0, 1.0, 1.0, -6.54, 1.0, 20.26, 20.26, -6.54, 20.26, 1.0, 20.26, -1.88, 1.0},
    {1.0, -6.54, 20.26, 20.26, -6.54, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 20.26, 20.26, 1.0, 44.94, 1.0, -6.54, 1.0, -6.54},
    {1.0, 1.0, 1.0, 1.0, 1.0, -7.49, 20.26, 1.0, 1.0, 1.0, 1.0, 13.34, 20.26, 20.26, 58.28, 44.94, 1.0, 1.0, 58.28, -6.54},
    {1.0, 33.6, 1.0, 20.26, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 44.94, 20.26, 20.26, 20.26, 1.0, 1.0, 1.0, 1.0},
    {1.0, 1.0, 1.0, 20.26, 13.34, -7.49, 1.0, 1.0, 1.0, 1.0, 1.0, -14.03, 1.0, -6.54, 1.0, 1.0, 1.0, 1.0, -14.03, 1.0},
    {1.0, 1.0, -14.03, 1.0, 1.0, -7.49, 1.0, 1.0, -1.88, 1.0, 1.0, 1.0, 20.26, 1.0, 1.0, 1.0, -7.49, 1.0, 1.0, -6.54},
    {-14.03, 1.0, 1.0, 1.0, 1.0, -9.37, 24.68, 1.0, 1.0, 13.34, 24.68, 13.34, 1.0, 1.0, 1.0, 1.0, -14.03, -7.49, 1.0, 1.0},
    {24.68, 1.0, 24.68, -6.54, 1.0, -7.49, 13.34, 1.0, 1.0, 1.0, 44.94, 1.0, 13.34, 1.0, -15.91, 1.0, -7.49, 1.0, -9.37, 13.34},
}};

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) {
    auto b = cell.find_first_not_of(" \t\r");
    auto e = cell.find_last_not_of(" \t\r");
    out.push_back(b == std::string::npos ? std::string{} : cell.substr(b, e - b + 1));
  }
  return out;
}

double parse_number(const std::string& s, const std::string& where) {
  try {
    std::size_t used = 0;
    double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ParseError(where + ": not a number: '" + s + "'");
  }
}

std::ifstream open_or_throw(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path);
  return in;
}

// Lines with content, header included.
std::vector<std::vector<std::string>> read_rows(std::istream& in) {
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    if (line[0] == '#') continue;
    rows.push_back(split_csv_line(line));
  }
  return rows;
}

char residue_cell(const std::string& cell, const std::string& where) {
  if (cell.size() != 1 || kOrder.find(cell[0]) == std::string_view::npos) {
    throw ParseError(where + ": unknown residue '" + cell + "'");
  }
  return cell[0];
}

}  // namespace

int ResidueTables::slot(char residue) {
  auto pos = kOrder.find(residue);
  if (pos == std::string_view::npos) {
    throw ContractError(std::string("unknown residue '") + residue + "'");
  }
  return static_cast<int>(pos);
}

const ResidueTables& ResidueTables::standard() {
  static const ResidueTables tables = [] {
    ResidueTables t;
    t.mass_ = kMass;
    t.kd_ = kKyteDoolittle;
    t.diwv_ = kDiwv;
    t.pka_ = PkaSet::emboss();
    return t;
  }();
  return tables;
}

ResidueTables ResidueTables::load(const std::string& residues_csv, const std::string& diwv_csv,
                                  const std::string& pka_csv) {
  ResidueTables t;
  {
    auto in = open_or_throw(residues_csv);
    auto rows = read_rows(in);
    if (rows.empty()) throw ParseError(residues_csv + ": empty");
    const auto& header = rows[0];
    auto col = [&](std::string_view name) {
      auto it = std::find(header.begin(), header.end(), name);
      if (it == header.end()) throw ParseError(residues_csv + ": missing column " + std::string(name));
      return static_cast<std::size_t>(it - header.begin());
    };
    std::size_t c_res = col("residue"), c_mass = col("mass"), c_kd = col("kyte_doolittle");
    std::array<bool, 20> seen{};
    for (std::size_t r = 1; r < rows.size(); ++r) {
      const auto& row = rows[r];
      if (row.size() < header.size()) throw ParseError(residues_csv + ": short row " + std::to_string(r + 1));
      int s = slot(residue_cell(row[c_res], residues_csv));
      t.mass_[s] = parse_number(row[c_mass], residues_csv);
      t.kd_[s] = parse_number(row[c_kd], residues_csv);
      seen[s] = true;
    }
    if (!std::all_of(seen.begin(), seen.end(), [](bool b) { return b; })) {
      throw ParseError(residues_csv + ": table does not cover all 20 residues");
    }
  }
  {
    auto in = open_or_throw(diwv_csv);
    auto rows = read_rows(in);
    if (rows.size() != 21) throw ParseError(diwv_csv + ": expected header plus 20 rows");
    const auto& header = rows[0];
    if (header.size() != 21) throw ParseError(diwv_csv + ": expected 21 columns");
    std::array<int, 20> col_slot{};
    for (std::size_t c = 1; c < 21; ++c) col_slot[c - 1] = slot(residue_cell(header[c], diwv_csv));
    std::array<bool, 20> seen{};
    for (std::size_t r = 1; r < 21; ++r) {
      const auto& row = rows[r];
      if (row.size() != 21) throw ParseError(diwv_csv + ": expected 21 columns in row " + std::to_string(r + 1));
      int s = slot(residue_cell(row[0], diwv_csv));
      seen[s] = true;
      for (std::size_t c = 1; c < 21; ++c) t.diwv_[s][col_slot[c - 1]] = parse_number(row[c], diwv_csv);
    }
    if (!std::all_of(seen.begin(), seen.end(), [](bool b) { return b; })) {
      throw ParseError(diwv_csv + ": matrix does not cover all 20 residues");
    }
  }
  {
    auto in = open_or_throw(pka_csv);
    auto rows = read_rows(in);
    PkaSet p;
    p.positive.clear();
    p.negative.clear();
    bool have_n = false, have_c = false;
    for (std::size_t r = 1; r < rows.size(); ++r) {
      const auto& row = rows[r];
      if (row.size() < 3) throw ParseError(pka_csv + ": short row " + std::to_string(r + 1));
      double pka = parse_number(row[1], pka_csv);
      double charge = parse_number(row[2], pka_csv);
      if (row[0] == "Nterm") {
        p.n_term = pka;
        have_n = true;
      } else if (row[0] == "Cterm") {
        p.c_term = pka;
        have_c = true;
      } else {
        char res = residue_cell(row[0], pka_csv);
        (charge > 0 ? p.positive : p.negative)[res] = pka;
      }
    }
    if (!have_n || !have_c) throw ParseError(pka_csv + ": needs Nterm and Cterm rows");
    t.pka_ = std::move(p);
  }
  return t;
}

ResidueTables ResidueTables::load_directory(const std::string& dir) {
  return load(dir + "/residues.csv", dir + "/diwv.csv", dir + "/pka_emboss.csv");
}

double ResidueTables::mass(char residue) const { return mass_[slot(residue)]; }
double ResidueTables::hydropathy(char residue) const { return kd_[slot(residue)]; }
double ResidueTables::diwv(char first, char second) const { return diwv_[slot(first)][slot(second)]; }

double molecular_weight(std::string_view seq, const ResidueTables& tables) {
  if (seq.empty()) throw ContractError("molecular_weight: empty sequence");
  double w = 0.0;
  for (char c : seq) w += tables.mass(c);
  return w - static_cast<double>(seq.size() - 1) * tables.water();
}

double gravy(std::string_view seq, const ResidueTables& tables) {
  if (seq.empty()) throw ContractError("gravy: empty sequence");
  double s = 0.0;
  for (char c : seq) s += tables.hydropathy(c);
  return s / static_cast<double>(seq.size());
}

double instability_index(std::string_view seq, const ResidueTables& tables) {
  if (seq.size() < 2) throw ContractError("instability_index: length < 2");
  double s = 0.0;
  for (std::size_t i = 0; i + 1 < seq.size(); ++i) s += tables.diwv(seq[i], seq[i + 1]);
  return 10.0 / static_cast<double>(seq.size()) * s;
}

double net_charge(std::string_view seq, double ph, const ResidueTables& tables) {
  const PkaSet& p = tables.pka();
  auto pos = [ph](double pka) { return 1.0 / (1.0 + std::pow(10.0, ph - pka)); };
  auto neg = [ph](double pka) { return 1.0 / (1.0 + std::pow(10.0, pka - ph)); };
  double z = pos(p.n_term) - neg(p.c_term);
  for (char c : seq) {
    (void)tables.mass(c);  // rejects unknown residues
    if (auto it = p.positive.find(c); it != p.positive.end()) z += pos(it->second);
    if (auto it = p.negative.find(c); it != p.negative.end()) z -= neg(it->second);
  }
  return z;
}

double isoelectric_point(std::string_view seq, const ResidueTables& tables) {
  if (seq.empty()) throw ContractError("isoelectric_point: empty sequence");
  double lo = 0.0, hi = 14.0;
  while (hi - lo > 1e-4) {
    double mid = 0.5 * (lo + hi);
    if (net_charge(seq, mid, tables) > 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

BiophysReport report(std::string_view seq, const ResidueTables& tables) {
  BiophysReport r;
  r.w_mol = molecular_weight(seq, tables);
  r.instability = instability_index(seq, tables);
  r.pi = isoelectric_point(seq, tables);
  r.gravy = gravy(seq, tables);
  return r;
}

DcsResult dcs(std::span<const BiophysReport> generated, std::span<const BiophysReport> reference) {
  if (reference.size() < 20) throw ContractError("dcs: reference set needs at least 20 points");
  if (generated.empty()) throw ContractError("dcs: no generated samples");
  constexpr std::array<const char*, 4> names = {"w_mol", "instability", "pI", "gravy"};
  const double n = static_cast<double>(reference.size());

  DcsResult result;
  std::vector<std::size_t> kept;
  std::array<double, 4> mean{}, sd{};
  for (std::size_t f = 0; f < 4; ++f) {
    double m = 0.0;
    for (const auto& r : reference) m += r.features()[f];
    m /= n;
    double v = 0.0;
    for (const auto& r : reference) v += (r.features()[f] - m) * (r.features()[f] - m);
    v /= n - 1.0;
    mean[f] = m;
    sd[f] = std::sqrt(v);
    if (!(sd[f] > 1e-12 * std::max(1.0, std::abs(m)))) {
      std::cerr << "warning: dcs: reference feature " << names[f] << " has zero variance; dropped\n";
      result.dropped_features.push_back(f);
    } else {
      kept.push_back(f);
    }
  }
  if (kept.empty()) throw DomainError("dcs: every reference feature is degenerate");

  const std::size_t d = kept.size();
  auto standardize = [&](const BiophysReport& r) {
    std::vector<double> z(d);
    auto f = r.features();
    for (std::size_t k = 0; k < d; ++k) z[k] = (f[kept[k]] - mean[kept[k]]) / sd[kept[k]];
    return z;
  };
  std::vector<std::vector<double>> ref;
  ref.reserve(reference.size());
  for (const auto& r : reference) ref.push_back(standardize(r));

  // Scott's factor on unit-variance data; kernel covariance h^2 I.
  const double h = std::pow(n, -1.0 / (static_cast<double>(d) + 4.0));
  const double log_norm = -0.5 * static_cast<double>(d) * std::log(2.0 * std::numbers::pi * h * h) - std::log(n);
  auto nonconformity = [&](const std::vector<double>& x) {
    std::vector<double> terms(ref.size());
    double top = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < ref.size(); ++i) {
      double d2 = 0.0;
      for (std::size_t k = 0; k < d; ++k) d2 += (x[k] - ref[i][k]) * (x[k] - ref[i][k]);
      terms[i] = -0.5 * d2 / (h * h);
      top = std::max(top, terms[i]);
    }
    double s = 0.0;
    for (double t : terms) s += std::exp(t - top);
    return -(log_norm + top + std::log(s));
  };

  std::vector<double> ref_nc(ref.size());
  for (std::size_t i = 0; i < ref.size(); ++i) ref_nc[i] = nonconformity(ref[i]);
  std::sort(ref_nc.begin(), ref_nc.end());

  double total = 0.0;
  result.p_values.reserve(generated.size());
  for (const auto& g : generated) {
    double nc = nonconformity(standardize(g));
    auto at_least = static_cast<double>(ref_nc.end() - std::lower_bound(ref_nc.begin(), ref_nc.end(), nc));
    double p = (1.0 + at_least) / (n + 1.0);
    result.p_values.push_back(p);
    total += p;
  }
  result.score = total / static_cast<double>(generated.size());
  return result;
}

std::vector<BiophysReport> read_reference_csv(std::istream& in) {
  auto rows = read_rows(in);
  if (rows.empty()) throw ParseError("reference csv: empty");
  std::vector<std::string> header = rows[0];
  for (auto& h : header) std::transform(h.begin(), h.end(), h.begin(), [](unsigned char c) { return std::tolower(c); });
  auto col = [&](std::string_view name) {
    auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw ParseError("reference csv: missing column " + std::string(name));
    return static_cast<std::size_t>(it - header.begin());
  };
  std::size_t cw = col("w_mol"), ci = col("instability"), cp = col("pi"), cg = col("gravy");
  std::vector<BiophysReport> out;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    if (row.size() < header.size()) throw ParseError("reference csv: short row " + std::to_string(r + 1));
    BiophysReport b;
    b.w_mol = parse_number(row[cw], "reference csv");
    b.instability = parse_number(row[ci], "reference csv");
    b.pi = parse_number(row[cp], "reference csv");
    b.gravy = parse_number(row[cg], "reference csv");
    out.push_back(b);
  }
  return out;
}

std::vector<BiophysReport> read_reference_csv(const std::string& path) {
  auto in = open_or_throw(path);
  return read_reference_csv(in);
}

}  // namespace seqdesign::biophys

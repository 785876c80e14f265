#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "seqdesign/metrics.hpp"

namespace seqdesign {

/// Alpha-carbon trace of one chain, in file order.
struct PdbCaTrace {
  char chain = ' ';
  std::vector<int> residue_numbers;
  std::vector<char> insertion_codes;
  std::vector<Vec3> coords;

  std::size_t size() const { return coords.size(); }
  StructureTrace trace() const { return StructureTrace{coords}; }
};

/// Parses ATOM records named CA from the first model. Without a chain filter
/// the first chain encountered is taken. Throws ParseError on malformed
/// numeric fields, non-increasing residue numbering, or an empty trace.
PdbCaTrace read_pdb_ca(std::istream& in, std::optional<char> chain = std::nullopt);
PdbCaTrace read_pdb_ca_file(const std::string& path, std::optional<char> chain = std::nullopt);

}  // namespace seqdesign

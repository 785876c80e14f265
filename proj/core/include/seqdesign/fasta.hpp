#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "seqdesign/sequence.hpp"

namespace seqdesign {

struct FastaRecord {
  /// First whitespace-delimited token of the header.
  std::string id;
  /// Remainder of the header after the id, possibly empty.
  std::string description;
  std::string sequence;

  bool operator==(const FastaRecord&) const = default;
};

enum class FastaMode { kStrict, kLenient };

struct FastaReadOptions {
  FastaMode mode = FastaMode::kStrict;
  std::string alphabet = std::string(Alphabet::kAminoAcids);
  /// Lenient mode: replacement for unknown residues. Unset drops the record.
  std::optional<char> substitute;
  /// Lenient-mode warnings are appended here when set, else printed to stderr.
  std::vector<std::string>* warnings = nullptr;
};

std::vector<FastaRecord> read_fasta(std::istream& in, const FastaReadOptions& options = {});
std::vector<FastaRecord> read_fasta_file(const std::string& path, const FastaReadOptions& options = {});

/// `line_width` 0 writes each sequence on one line.
void write_fasta(std::ostream& out, const std::vector<FastaRecord>& records, std::size_t line_width = 60);
void write_fasta_file(const std::string& path, const std::vector<FastaRecord>& records, std::size_t line_width = 60);

}  // namespace seqdesign

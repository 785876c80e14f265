#include "seqdesign/fasta.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <iostream>

#include "seqdesign/error.hpp"

namespace seqdesign {
namespace {

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

void warn(const FastaReadOptions& options, std::string message) {
  if (options.warnings) {
    options.warnings->push_back(std::move(message));
  } else {
    std::cerr << "warning: " << message << '\n';
  }
}

// Returns false when the record must be dropped.
bool finish_record(FastaRecord& rec, std::size_t header_line, const FastaReadOptions& options) {
  if (rec.sequence.empty()) {
    throw ParseError("fasta: record '" + rec.id + "' (line " + std::to_string(header_line) + ") has an empty sequence");
  }
  if (options.mode == FastaMode::kStrict) {
    for (char c : rec.sequence) {
      if (options.alphabet.find(c) == std::string::npos) {
        throw ParseError("fasta: record '" + rec.id + "' has invalid residue '" + std::string(1, c) + "'");
      }
    }
    return true;
  }
  std::size_t replaced = 0;
  for (char& c : rec.sequence) {
    c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    if (options.alphabet.find(c) != std::string::npos) continue;
    if (!options.substitute) {
      warn(options, "fasta: dropping record '" + rec.id + "' with unknown residue '" + std::string(1, c) + "'");
      return false;
    }
    c = *options.substitute;
    ++replaced;
  }
  if (replaced > 0) {
    warn(options, "fasta: record '" + rec.id + "': replaced " + std::to_string(replaced) + " unknown residue(s) with '" +
                      std::string(1, *options.substitute) + "'");
  }
  return true;
}

}  // namespace

std::vector<FastaRecord> read_fasta(std::istream& in, const FastaReadOptions& options) {
  if (options.substitute && options.alphabet.find(*options.substitute) == std::string::npos) {
    throw ContractError("fasta: substitute residue is not in the alphabet");
  }
  std::vector<FastaRecord> records;
  FastaRecord current;
  bool open = false;
  std::size_t header_line = 0;
  std::string line;
  std::size_t line_no = 0;
  auto close = [&] {
    if (open && finish_record(current, header_line, options)) records.push_back(std::move(current));
    current = FastaRecord{};
    open = false;
  };
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty() && line[0] == '>') {
      close();
      std::string header = trim(line.substr(1));
      auto split = header.find_first_of(" \t");
      current.id = header.substr(0, split);
      current.description = split == std::string::npos ? std::string{} : trim(header.substr(split));
      if (current.id.empty()) throw ParseError("fasta: empty id at line " + std::to_string(line_no));
      open = true;
      header_line = line_no;
      continue;
    }
    if (!line.empty() && line[0] == ';') continue;
    std::string body;
    for (char c : line) {
      if (!std::isspace(static_cast<unsigned char>(c))) body.push_back(c);
    }
    if (body.empty()) continue;
    if (!open) throw ParseError("fasta: sequence data before any header at line " + std::to_string(line_no));
    current.sequence += body;
  }
  close();
  return records;
}

std::vector<FastaRecord> read_fasta_file(const std::string& path, const FastaReadOptions& options) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path);
  return read_fasta(in, options);
}

void write_fasta(std::ostream& out, const std::vector<FastaRecord>& records, std::size_t line_width) {
  for (const auto& rec : records) {
    if (rec.id.empty() || rec.id.find_first_of(" \t\r\n") != std::string::npos) {
      throw ContractError("fasta: record id must be a non-empty token");
    }
    if (rec.sequence.empty()) throw ContractError("fasta: record '" + rec.id + "' has an empty sequence");
    out << '>' << rec.id;
    if (!rec.description.empty()) out << ' ' << rec.description;
    out << '\n';
    std::size_t width = line_width == 0 ? rec.sequence.size() : line_width;
    for (std::size_t i = 0; i < rec.sequence.size(); i += width) {
      out << rec.sequence.substr(i, width) << '\n';
    }
  }
  if (!out) throw Error("fasta: write failed");
}

void write_fasta_file(const std::string& path, const std::vector<FastaRecord>& records, std::size_t line_width) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open " + path + " for writing");
  write_fasta(out, records, line_width);
}

}  // namespace seqdesign

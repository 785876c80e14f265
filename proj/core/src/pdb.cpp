#include "seqdesign/pdb.hpp"

#include <fstream>

#include "seqdesign/csv.hpp"
#include "seqdesign/error.hpp"

namespace seqdesign {
namespace {

// 1-indexed inclusive columns; missing trailing columns read as blanks.
std::string field(const std::string& line, std::size_t first, std::size_t last) {
  if (line.size() < first) return std::string(last - first + 1, ' ');
  std::string s = line.substr(first - 1, last - first + 1);
  s.resize(last - first + 1, ' ');
  return s;
}

std::string strip(const std::string& s) {
  auto b = s.find_first_not_of(' ');
  if (b == std::string::npos) return {};
  auto e = s.find_last_not_of(' ');
  return s.substr(b, e - b + 1);
}

double coordinate(const std::string& line, std::size_t first, std::size_t last, std::size_t line_no) {
  std::string text = strip(field(line, first, last));
  try {
    if (text.empty()) throw ParseError("empty");
    return parse_double(text);
  } catch (const ParseError&) {
    throw ParseError("pdb: malformed coordinate '" + text + "' at line " + std::to_string(line_no));
  }
}

int residue_number(const std::string& line, std::size_t line_no) {
  std::string text = strip(field(line, 23, 26));
  try {
    std::size_t used = 0;
    int v = std::stoi(text, &used);
    if (used != text.size()) throw std::invalid_argument(text);
    return v;
  } catch (const std::exception&) {
    throw ParseError("pdb: malformed residue number '" + text + "' at line " + std::to_string(line_no));
  }
}

}  // namespace

PdbCaTrace read_pdb_ca(std::istream& in, std::optional<char> chain) {
  PdbCaTrace trace;
  bool have_chain = false;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::string record = field(line, 1, 6);
    if (record == "ENDMDL") break;
    if (record != "ATOM  ") continue;
    if (strip(field(line, 13, 16)) != "CA") continue;
    char alt = field(line, 17, 17)[0];
    if (alt != ' ' && alt != 'A') continue;
    char ch = field(line, 22, 22)[0];
    if (chain) {
      if (ch != *chain) continue;
    } else if (!have_chain) {
      trace.chain = ch;
      have_chain = true;
    } else if (ch != trace.chain) {
      continue;
    }
    trace.chain = ch;
    int number = residue_number(line, line_no);
    char icode = field(line, 27, 27)[0];
    if (!trace.residue_numbers.empty()) {
      int prev = trace.residue_numbers.back();
      char prev_icode = trace.insertion_codes.back();
      bool increasing = number > prev || (number == prev && icode > prev_icode);
      if (!increasing) {
        throw ParseError("pdb: residue numbering does not increase at line " + std::to_string(line_no));
      }
    }
    Vec3 xyz{coordinate(line, 31, 38, line_no), coordinate(line, 39, 46, line_no), coordinate(line, 47, 54, line_no)};
    trace.residue_numbers.push_back(number);
    trace.insertion_codes.push_back(icode);
    trace.coords.push_back(xyz);
  }
  if (trace.coords.empty()) throw ParseError("pdb: no CA atoms found");
  return trace;
}

PdbCaTrace read_pdb_ca_file(const std::string& path, std::optional<char> chain) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path);
  return read_pdb_ca(in, chain);
}

}  // namespace seqdesign

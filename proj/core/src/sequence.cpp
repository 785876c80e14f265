#include "seqdesign/sequence.hpp"

#include <algorithm>

#include "seqdesign/error.hpp"

namespace seqdesign {

Alphabet::Alphabet() : Alphabet(kAminoAcids) {}

Alphabet::Alphabet(std::string_view symbols) : symbols_(symbols) {
  if (symbols_.size() < 2) throw ContractError("alphabet needs at least two symbols");
  if (symbols_.size() > 255) throw ContractError("alphabet larger than 255 symbols");
  std::fill(std::begin(lookup_), std::end(lookup_), std::int16_t{-1});
  for (std::size_t i = 0; i < symbols_.size(); ++i) {
    auto c = static_cast<unsigned char>(symbols_[i]);
    if (lookup_[c] != -1) throw ContractError(std::string("duplicate alphabet symbol '") + symbols_[i] + "'");
    lookup_[c] = static_cast<std::int16_t>(i);
  }
}

const Alphabet& Alphabet::amino_acids() {
  static const Alphabet kAlphabet;
  return kAlphabet;
}

char Alphabet::symbol(std::size_t index) const {
  if (index >= symbols_.size()) throw ContractError("alphabet index out of range");
  return symbols_[index];
}

std::uint8_t Alphabet::index(char symbol) const {
  auto v = lookup_[static_cast<unsigned char>(symbol)];
  if (v < 0) throw ContractError(std::string("symbol '") + symbol + "' not in alphabet");
  return static_cast<std::uint8_t>(v);
}

bool Alphabet::contains(char symbol) const { return lookup_[static_cast<unsigned char>(symbol)] >= 0; }

Sequence Sequence::from_string(std::string_view text, const Alphabet& alphabet) {
  std::vector<std::uint8_t> r;
  r.reserve(text.size());
  for (char c : text) r.push_back(alphabet.index(c));
  return Sequence(std::move(r));
}

Sequence Sequence::random(std::size_t length, const Alphabet& alphabet, Rng& rng) {
  std::uniform_int_distribution<int> pick(0, static_cast<int>(alphabet.size()) - 1);
  std::vector<std::uint8_t> r(length);
  for (auto& v : r) v = static_cast<std::uint8_t>(pick(rng));
  return Sequence(std::move(r));
}

std::string Sequence::to_string(const Alphabet& alphabet) const {
  std::string s;
  s.reserve(residues_.size());
  for (auto r : residues_) s.push_back(alphabet.symbol(r));
  return s;
}

std::size_t SequenceHash::operator()(const Sequence& s) const noexcept {
  // FNV-1a
  std::uint64_t h = 1469598103934665603ULL;
  for (auto r : s.residues()) {
    h ^= r;
    h *= 1099511628211ULL;
  }
  return static_cast<std::size_t>(h);
}

MutationAction decode_action(std::size_t flat, std::size_t seq_len, std::size_t alphabet_size) {
  if (flat >= seq_len * alphabet_size) throw ContractError("flat action index out of range");
  return {flat / alphabet_size, flat % alphabet_size, flat};
}

std::size_t encode_action(std::size_t position, std::size_t residue, std::size_t seq_len,
                          std::size_t alphabet_size) {
  if (position >= seq_len || residue >= alphabet_size) throw ContractError("action out of range");
  return position * alphabet_size + residue;
}

OneHotState encode_one_hot(const Sequence& seq, std::size_t alphabet_size) {
  OneHotState s{seq.size(), alphabet_size, std::vector<double>(seq.size() * alphabet_size, 0.0)};
  encode_one_hot_into(seq, alphabet_size, s.values);
  return s;
}

void encode_one_hot_into(const Sequence& seq, std::size_t alphabet_size, std::span<double> out) {
  if (out.size() != seq.size() * alphabet_size) throw ContractError("one-hot buffer has wrong size");
  std::fill(out.begin(), out.end(), 0.0);
  for (std::size_t i = 0; i < seq.size(); ++i) {
    if (seq[i] >= alphabet_size) throw ContractError("residue index exceeds alphabet size");
    out[i * alphabet_size + seq[i]] = 1.0;
  }
}

Sequence apply_mutation(const Sequence& seq, const MutationAction& action, std::size_t alphabet_size) {
  if (action.position >= seq.size() || action.residue >= alphabet_size)
    throw ContractError("mutation action out of range");
  Sequence out = seq;
  out.set(action.position, static_cast<std::uint8_t>(action.residue));
  return out;
}

}  // namespace seqdesign

#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace seqdesign {

using Rng = std::mt19937_64;

/// Ordered residue alphabet. Index lookup is a bijection onto [0, size).
class Alphabet {
 public:
  /// The 20 canonical amino acids in alphabetical one-letter order.
  static constexpr std::string_view kAminoAcids = "ACDEFGHIKLMNPQRSTVWY";

  Alphabet();
  explicit Alphabet(std::string_view symbols);

  static const Alphabet& amino_acids();

  std::size_t size() const { return symbols_.size(); }
  const std::string& symbols() const { return symbols_; }
  char symbol(std::size_t index) const;
  /// Throws ContractError for characters outside the alphabet.
  std::uint8_t index(char symbol) const;
  bool contains(char symbol) const;

  bool operator==(const Alphabet& other) const { return symbols_ == other.symbols_; }

 private:
  std::string symbols_;
  std::int16_t lookup_[256];
};

/// A fixed-length residue sequence stored as alphabet indices.
class Sequence {
 public:
  Sequence() = default;
  explicit Sequence(std::vector<std::uint8_t> residues) : residues_(std::move(residues)) {}

  static Sequence from_string(std::string_view text, const Alphabet& alphabet);
  static Sequence random(std::size_t length, const Alphabet& alphabet, Rng& rng);

  std::string to_string(const Alphabet& alphabet) const;

  std::size_t size() const { return residues_.size(); }
  std::uint8_t operator[](std::size_t i) const { return residues_[i]; }
  std::span<const std::uint8_t> residues() const { return residues_; }
  void set(std::size_t i, std::uint8_t residue) { residues_[i] = residue; }

  auto operator<=>(const Sequence&) const = default;

 private:
  std::vector<std::uint8_t> residues_;
};

struct SequenceHash {
  std::size_t operator()(const Sequence& s) const noexcept;
};

/// Single-site substitution. `flat` is the position-major action index.
struct MutationAction {
  std::size_t position = 0;
  std::size_t residue = 0;
  std::size_t flat = 0;

  bool operator==(const MutationAction&) const = default;
};

MutationAction decode_action(std::size_t flat, std::size_t seq_len, std::size_t alphabet_size);
std::size_t encode_action(std::size_t position, std::size_t residue, std::size_t seq_len,
                          std::size_t alphabet_size);
inline std::size_t action_count(std::size_t seq_len, std::size_t alphabet_size) {
  return seq_len * alphabet_size;
}

/// Row-major L_s x L_a one-hot matrix.
struct OneHotState {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> values;

  double at(std::size_t r, std::size_t c) const { return values[r * cols + c]; }
};

OneHotState encode_one_hot(const Sequence& seq, std::size_t alphabet_size);
/// Writes the flattened one-hot encoding into `out` (length seq.size() * alphabet_size).
void encode_one_hot_into(const Sequence& seq, std::size_t alphabet_size, std::span<double> out);

/// Returns a copy of `seq` with `action` applied. Throws ContractError when out of range.
Sequence apply_mutation(const Sequence& seq, const MutationAction& action, std::size_t alphabet_size);

}  // namespace seqdesign

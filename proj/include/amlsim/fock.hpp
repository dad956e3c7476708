#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace amlsim {

using Occupation = std::vector<int>;

// Ordered set of bosonic modes together with the weight each mode carries in
// the conserved particle count (atomic modes 1, molecular modes 2).
struct ModeSet {
  std::vector<std::string> labels;
  std::vector<int> charge_weights;

  ModeSet(std::vector<std::string> labels_, std::vector<int> weights_);

  std::size_t size() const { return labels.size(); }
  bool has(const std::string& label) const;
  std::size_t index_of(const std::string& label) const;  // throws ConfigError
};

// Finite representation of the Fock space: a hard per-mode occupation cutoff
// plus an optional bound on the weighted occupation sum.
struct TruncationSpec {
  std::vector<int> per_mode_cutoff;        // inclusive, one entry per mode
  std::optional<long> total_charge_cutoff; // weighted sum bound, inclusive

  static TruncationSpec uniform(std::size_t n_modes, int cutoff,
                                std::optional<long> charge_cutoff = {});
};

// Enumerated truncated multi-mode occupation basis. States are ordered
// lexicographically over occupations so every downstream artifact
// (operators, serialized series) is reproducible. Immutable after build.
class FockBasis {
 public:
  static std::shared_ptr<const FockBasis> build(ModeSet modes,
                                                TruncationSpec trunc);

  const ModeSet& modes() const { return m_modes; }
  const TruncationSpec& truncation() const { return m_trunc; }
  std::size_t dim() const { return m_keys.size(); }
  std::size_t n_modes() const { return m_modes.size(); }

  int occupation_of(std::size_t state, std::size_t mode) const;
  Occupation occupation(std::size_t state) const;
  long charge_of(std::size_t state) const;

  std::optional<std::size_t> index_of(const Occupation& occ) const;
  std::size_t index_of_or_throw(const Occupation& occ) const;

  // Index of the state with one more/fewer quantum in `mode`, or nullopt when
  // the neighbour lies outside the basis (truncation boundary).
  std::optional<std::size_t> raised(std::size_t state, std::size_t mode) const;
  std::optional<std::size_t> lowered(std::size_t state, std::size_t mode) const;

  // True when adding a single quantum to some mode leaves the basis; the set
  // of boundary states is the support of the truncation-leakage proxy.
  bool is_boundary(std::size_t state) const { return m_boundary[state] != 0; }

 private:
  FockBasis(ModeSet modes, TruncationSpec trunc);

  std::uint64_t pack(const Occupation& occ) const;
  std::optional<std::size_t> find(std::uint64_t key) const;

  ModeSet m_modes;
  TruncationSpec m_trunc;
  std::vector<std::uint64_t> m_keys;    // lex-sorted packed occupations
  std::vector<std::uint8_t> m_boundary; // per-state boundary flag
  std::vector<int> m_shift;             // per-mode bit shift inside a key
};

std::shared_ptr<const FockBasis> build_basis(ModeSet modes,
                                             TruncationSpec trunc);

}  // namespace amlsim

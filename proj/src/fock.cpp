#include "amlsim/fock.hpp"

#include <algorithm>
#include <unordered_set>

#include "amlsim/errors.hpp"

namespace amlsim {

namespace {

constexpr int kBitsPerMode = 8;
constexpr int kMaxModes = 8;
constexpr int kMaxCutoff = 255;
constexpr std::size_t kMaxDim = 50'000'000;

}  // namespace

ModeSet::ModeSet(std::vector<std::string> labels_, std::vector<int> weights_)
    : labels(std::move(labels_)), charge_weights(std::move(weights_)) {
  if (labels.empty()) throw ConfigError("ModeSet: no modes given");
  if (labels.size() != charge_weights.size())
    throw ConfigError("ModeSet: labels and charge_weights differ in length");
  if (labels.size() > kMaxModes)
    throw ConfigError("ModeSet: at most 8 modes are supported");
  std::unordered_set<std::string> seen;
  for (const auto& l : labels) {
    if (l.empty()) throw ConfigError("ModeSet: empty mode label");
    if (!seen.insert(l).second)
      throw ConfigError("ModeSet: duplicate mode label '" + l + "'");
  }
  for (int w : charge_weights) {
    if (w <= 0) throw ConfigError("ModeSet: charge weights must be positive");
  }
}

bool ModeSet::has(const std::string& label) const {
  return std::find(labels.begin(), labels.end(), label) != labels.end();
}

std::size_t ModeSet::index_of(const std::string& label) const {
  auto it = std::find(labels.begin(), labels.end(), label);
  if (it == labels.end())
    throw ConfigError("ModeSet: unknown mode label '" + label + "'");
  return static_cast<std::size_t>(it - labels.begin());
}

TruncationSpec TruncationSpec::uniform(std::size_t n_modes, int cutoff,
                                       std::optional<long> charge_cutoff) {
  TruncationSpec spec;
  spec.per_mode_cutoff.assign(n_modes, cutoff);
  spec.total_charge_cutoff = charge_cutoff;
  return spec;
}

FockBasis::FockBasis(ModeSet modes, TruncationSpec trunc)
    : m_modes(std::move(modes)), m_trunc(std::move(trunc)) {}

std::uint64_t FockBasis::pack(const Occupation& occ) const {
  std::uint64_t key = 0;
  for (std::size_t m = 0; m < occ.size(); ++m)
    key |= static_cast<std::uint64_t>(occ[m]) << m_shift[m];
  return key;
}

std::shared_ptr<const FockBasis> FockBasis::build(ModeSet modes,
                                                  TruncationSpec trunc) {
  const std::size_t k = modes.size();
  if (trunc.per_mode_cutoff.size() != k)
    throw ConfigError("TruncationSpec: per_mode_cutoff length must match mode count");
  for (int c : trunc.per_mode_cutoff) {
    if (c < 0) throw ConfigError("TruncationSpec: negative per-mode cutoff");
    if (c > kMaxCutoff)
      throw ConfigError("TruncationSpec: per-mode cutoff above 255 unsupported");
  }
  if (trunc.total_charge_cutoff && *trunc.total_charge_cutoff < 0)
    throw ConfigError(
        "TruncationSpec: total_charge_cutoff excludes the vacuum state");

  auto basis = std::shared_ptr<FockBasis>(
      new FockBasis(std::move(modes), std::move(trunc)));

  basis->m_shift.resize(k);
  for (std::size_t m = 0; m < k; ++m)
    basis->m_shift[m] = kBitsPerMode * static_cast<int>(k - 1 - m);

  // Depth-first enumeration in lexicographic occupation order; packing the
  // first mode into the most significant bits makes key order == lex order.
  const auto& cut = basis->m_trunc.per_mode_cutoff;
  const auto& w = basis->m_modes.charge_weights;
  const long charge_max = basis->m_trunc.total_charge_cutoff
                              ? *basis->m_trunc.total_charge_cutoff
                              : -1;
  Occupation occ(k, 0);
  auto recurse = [&](auto&& self, std::size_t mode, long charge) -> void {
    if (mode == k) {
      if (basis->m_keys.size() >= kMaxDim)
        throw ConfigError("FockBasis: dimension exceeds the 5e7 safety cap");
      basis->m_keys.push_back(basis->pack(occ));
      bool boundary = false;
      for (std::size_t m = 0; m < k && !boundary; ++m) {
        if (occ[m] == cut[m]) boundary = true;
        else if (charge_max >= 0 && charge + w[m] > charge_max) boundary = true;
      }
      basis->m_boundary.push_back(boundary ? 1 : 0);
      return;
    }
    for (int n = 0; n <= cut[mode]; ++n) {
      const long c = charge + static_cast<long>(n) * w[mode];
      if (charge_max >= 0 && c > charge_max) break;
      occ[mode] = n;
      self(self, mode + 1, c);
    }
    occ[mode] = 0;
  };
  recurse(recurse, 0, 0);

  if (basis->m_keys.empty())
    throw ConfigError("FockBasis: truncation admits no states");
  return basis;
}

int FockBasis::occupation_of(std::size_t state, std::size_t mode) const {
  return static_cast<int>((m_keys[state] >> m_shift[mode]) & 0xFFu);
}

Occupation FockBasis::occupation(std::size_t state) const {
  Occupation occ(n_modes());
  for (std::size_t m = 0; m < occ.size(); ++m) occ[m] = occupation_of(state, m);
  return occ;
}

long FockBasis::charge_of(std::size_t state) const {
  long charge = 0;
  for (std::size_t m = 0; m < n_modes(); ++m)
    charge += static_cast<long>(occupation_of(state, m)) *
              m_modes.charge_weights[m];
  return charge;
}

std::optional<std::size_t> FockBasis::find(std::uint64_t key) const {
  auto it = std::lower_bound(m_keys.begin(), m_keys.end(), key);
  if (it == m_keys.end() || *it != key) return std::nullopt;
  return static_cast<std::size_t>(it - m_keys.begin());
}

std::optional<std::size_t> FockBasis::index_of(const Occupation& occ) const {
  if (occ.size() != n_modes()) return std::nullopt;
  for (std::size_t m = 0; m < occ.size(); ++m) {
    if (occ[m] < 0 || occ[m] > m_trunc.per_mode_cutoff[m]) return std::nullopt;
  }
  return find(pack(occ));
}

std::size_t FockBasis::index_of_or_throw(const Occupation& occ) const {
  auto idx = index_of(occ);
  if (!idx) throw ConfigError("FockBasis: occupation outside the basis");
  return *idx;
}

std::optional<std::size_t> FockBasis::raised(std::size_t state,
                                             std::size_t mode) const {
  const int n = occupation_of(state, mode);
  if (n >= m_trunc.per_mode_cutoff[mode]) return std::nullopt;
  if (m_trunc.total_charge_cutoff &&
      charge_of(state) + m_modes.charge_weights[mode] >
          *m_trunc.total_charge_cutoff)
    return std::nullopt;
  return find(m_keys[state] + (std::uint64_t{1} << m_shift[mode]));
}

std::optional<std::size_t> FockBasis::lowered(std::size_t state,
                                              std::size_t mode) const {
  if (occupation_of(state, mode) == 0) return std::nullopt;
  return find(m_keys[state] - (std::uint64_t{1} << m_shift[mode]));
}

std::shared_ptr<const FockBasis> build_basis(ModeSet modes,
                                             TruncationSpec trunc) {
  return FockBasis::build(std::move(modes), std::move(trunc));
}

}  // namespace amlsim

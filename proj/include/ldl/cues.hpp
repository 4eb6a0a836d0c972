#pragma once

#include <algorithm>
#include <cstdint>
#include <istream>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "ldl/error.hpp"
#include "ldl/linalg.hpp"

namespace ldl {

enum class CueUnit { phone, syllable, letter };

inline std::string_view to_string(CueUnit u) {
  switch (u) {
    case CueUnit::phone: return "phone";
    case CueUnit::syllable: return "syllable";
    case CueUnit::letter: return "letter";
  }
  return "?";
}

inline CueUnit parse_cue_unit(std::string_view s) {
  if (s == "phone") return CueUnit::phone;
  if (s == "syllable") return CueUnit::syllable;
  if (s == "letter") return CueUnit::letter;
  throw ParseError("unknown cue unit '" + std::string(s) + "'");
}

struct CueConfig {
  CueUnit unit = CueUnit::phone;
  int n = 3;
  std::string boundary = "#";
  /// Separates syllables in syllabified input and joins them inside grams.
  std::string syllable_separator = "-";

  void validate() const {
    if (n < 1) throw InvalidArgument("cue n must be >= 1");
    if (boundary.empty()) throw InvalidArgument("boundary marker must be non-empty");
  }
};

namespace detail {

inline std::size_t utf8_length(unsigned char lead) {
  if (lead < 0x80) return 1;
  if ((lead >> 5) == 0x6) return 2;
  if ((lead >> 4) == 0xE) return 3;
  if ((lead >> 3) == 0x1E) return 4;
  return 1;  // stray continuation byte: treat as its own unit
}

inline std::vector<std::string> split_codepoints(std::string_view s) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < s.size()) {
    const std::size_t len = std::min(utf8_length(static_cast<unsigned char>(s[i])), s.size() - i);
    out.emplace_back(s.substr(i, len));
    i += len;
  }
  return out;
}

inline std::vector<std::string> split_on(std::string_view s, std::string_view sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    if (pos == std::string_view::npos) {
      out.emplace_back(s.substr(start));
      break;
    }
    out.emplace_back(s.substr(start, pos - start));
    start = pos + sep.size();
  }
  return out;
}

}  // namespace detail

/// Splits a form (or a gram) into the units n-grams are built from: code
/// points for phones and letters, separator-delimited chunks for syllables.
inline std::vector<std::string> split_units(std::string_view s, const CueConfig& cfg) {
  if (s.empty()) return {};
  if (cfg.unit == CueUnit::syllable) return detail::split_on(s, cfg.syllable_separator);
  return detail::split_codepoints(s);
}

inline std::string join_units(std::span<const std::string> units, const CueConfig& cfg) {
  std::string out;
  for (std::size_t i = 0; i < units.size(); ++i) {
    if (i > 0 && cfg.unit == CueUnit::syllable) out += cfg.syllable_separator;
    out += units[i];
  }
  return out;
}

/// Boundary-padded n-grams of `s`, in order. Forms whose padded length is
/// shorter than n yield the whole padded form as their only gram.
inline std::vector<std::string> extract_grams(std::string_view s, const CueConfig& cfg) {
  cfg.validate();
  auto units = split_units(s, cfg);
  if (units.empty()) throw InvalidArgument("extract_grams: empty input");
  for (const auto& u : units) {
    if (u.empty()) throw InvalidArgument("extract_grams: empty unit in '" + std::string(s) + "'");
    if (u.find(cfg.boundary) != std::string::npos)
      throw InvalidArgument("extract_grams: boundary marker inside '" + std::string(s) + "'");
  }
  std::vector<std::string> padded;
  padded.reserve(units.size() + 2);
  padded.push_back(cfg.boundary);
  for (auto& u : units) padded.push_back(std::move(u));
  padded.push_back(cfg.boundary);

  const auto n = static_cast<std::size_t>(cfg.n);
  std::vector<std::string> grams;
  if (padded.size() < n) {
    grams.push_back(join_units(padded, cfg));
    return grams;
  }
  grams.reserve(padded.size() - n + 1);
  for (std::size_t i = 0; i + n <= padded.size(); ++i)
    grams.push_back(join_units(std::span<const std::string>(padded).subspan(i, n), cfg));
  return grams;
}

/// Ordered gram vocabulary; column order is first occurrence.
class CueInventory {
 public:
  CueInventory() = default;

  std::size_t size() const { return cues_.size(); }
  bool empty() const { return cues_.empty(); }
  const std::vector<std::string>& cues() const { return cues_; }
  const std::string& operator[](std::size_t i) const { return cues_.at(i); }

  std::optional<std::size_t> find(std::string_view gram) const {
    const auto it = index_.find(std::string(gram));
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

  bool contains(std::string_view gram) const { return find(gram).has_value(); }

  /// Returns the column of `gram`, appending it when new.
  std::size_t add(const std::string& gram) {
    const auto [it, inserted] = index_.try_emplace(gram, cues_.size());
    if (inserted) cues_.push_back(gram);
    return it->second;
  }

 private:
  std::vector<std::string> cues_;
  std::unordered_map<std::string, std::size_t> index_;
};

inline void extend_inventory(CueInventory& inv, std::span<const std::string> corpus, const CueConfig& cfg) {
  for (const auto& item : corpus)
    for (const auto& g : extract_grams(item, cfg)) inv.add(g);
}

inline CueInventory build_inventory(std::span<const std::string> corpus, const CueConfig& cfg) {
  CueInventory inv;
  extend_inventory(inv, corpus, cfg);
  return inv;
}

/// Binary item-by-cue matrix stored as sorted column lists per row.
class CueMatrix {
 public:
  CueMatrix() = default;
  explicit CueMatrix(std::size_t cols) : cols_(cols) {}

  std::size_t rows() const { return rows_.size(); }
  std::size_t cols() const { return cols_; }
  const std::vector<std::uint32_t>& row(std::size_t i) const { return rows_.at(i); }
  /// Grams of item i that were not in the inventory.
  std::size_t dropped(std::size_t i) const { return dropped_.at(i); }
  std::size_t total_dropped() const {
    std::size_t n = 0;
    for (auto d : dropped_) n += d;
    return n;
  }

  void push_row(std::vector<std::uint32_t> cols, std::size_t dropped = 0) {
    std::sort(cols.begin(), cols.end());
    cols.erase(std::unique(cols.begin(), cols.end()), cols.end());
    if (!cols.empty() && cols.back() >= cols_) throw DimensionMismatch("cue column out of range");
    rows_.push_back(std::move(cols));
    dropped_.push_back(dropped);
  }

  Vector dense_row(std::size_t i) const {
    Vector v = Vector::Zero(static_cast<Eigen::Index>(cols_));
    for (auto c : rows_.at(i)) v[c] = 1.0;
    return v;
  }

  Matrix to_dense() const {
    Matrix m = Matrix::Zero(static_cast<Eigen::Index>(rows()), static_cast<Eigen::Index>(cols_));
    for (std::size_t i = 0; i < rows(); ++i)
      for (auto c : rows_[i]) m(static_cast<Eigen::Index>(i), c) = 1.0;
    return m;
  }

  /// Copy restricted to the given rows, in that order.
  CueMatrix select(std::span<const std::size_t> ids) const {
    CueMatrix out(cols_);
    for (auto id : ids) out.push_row(rows_.at(id), dropped_.at(id));
    return out;
  }

  bool operator==(const CueMatrix&) const = default;

 private:
  std::size_t cols_ = 0;
  std::vector<std::vector<std::uint32_t>> rows_;
  std::vector<std::size_t> dropped_;
};

enum class EmptyRows { reject, allow };

/// Presence coding of each item against `inv`. Grams outside the inventory
/// are ignored and counted per item.
inline CueMatrix build_cue_matrix(std::span<const std::string> corpus, const CueInventory& inv,
                                  const CueConfig& cfg, EmptyRows empty = EmptyRows::reject) {
  CueMatrix m(inv.size());
  for (const auto& item : corpus) {
    std::vector<std::uint32_t> cols;
    std::size_t dropped = 0;
    for (const auto& g : extract_grams(item, cfg)) {
      if (auto c = inv.find(g))
        cols.push_back(static_cast<std::uint32_t>(*c));
      else
        ++dropped;
    }
    if (cols.empty() && empty == EmptyRows::reject)
      throw InvalidArgument("build_cue_matrix: item '" + item + "' has no in-inventory cues");
    m.push_row(std::move(cols), dropped);
  }
  return m;
}

/// Grams of `items` absent from `inv`, in first-occurrence order.
inline std::vector<std::string> novel_cues(std::span<const std::string> items, const CueInventory& inv,
                                           const CueConfig& cfg) {
  std::vector<std::string> out;
  std::unordered_set<std::string> seen;
  for (const auto& item : items)
    for (auto& g : extract_grams(item, cfg))
      if (!inv.contains(g) && seen.insert(g).second) out.push_back(std::move(g));
  return out;
}

// Text serialization: one gram per line for the inventory, "row<TAB>col<TAB>1"
// triplets for the matrix, preceded by a "rows<TAB>cols" header line.

inline void write_inventory(std::ostream& os, const CueInventory& inv) {
  for (const auto& c : inv.cues()) os << c << '\n';
}

inline CueInventory read_inventory(std::istream& is) {
  CueInventory inv;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    if (inv.contains(line)) throw ParseError("duplicate cue in inventory: " + line);
    inv.add(line);
  }
  return inv;
}

inline void write_triplets(std::ostream& os, const CueMatrix& m) {
  os << m.rows() << '\t' << m.cols() << '\n';
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (auto c : m.row(i)) os << i << '\t' << c << "\t1\n";
}

inline CueMatrix read_triplets(std::istream& is) {
  std::size_t rows = 0, cols = 0;
  if (!(is >> rows >> cols)) throw ParseError("cue matrix: missing header");
  std::vector<std::vector<std::uint32_t>> data(rows);
  std::size_t r = 0, c = 0;
  int v = 0;
  while (is >> r >> c >> v) {
    if (r >= rows || c >= cols || v != 1) throw ParseError("cue matrix: bad triplet");
    data[r].push_back(static_cast<std::uint32_t>(c));
  }
  CueMatrix m(cols);
  for (auto& row : data) m.push_row(std::move(row));
  return m;
}

}  // namespace ldl

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstring>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "ldl/cues.hpp"
#include "ldl/error.hpp"
#include "ldl/lexicon.hpp"
#include "ldl/linalg.hpp"
#include "ldl/mappings.hpp"

namespace ldl {

inline Vector predict_semantics(const Vector& c, const Mapping& F) {
  if (c.size() != F.W.rows()) throw DimensionMismatch("predict_semantics: cue vector length != mapping inputs");
  return (c.transpose() * F.W).transpose();
}

/// Predicted rows for every item of a binary cue matrix.
inline Matrix predict_semantics(const CueMatrix& C, const Mapping& F) {
  if (C.cols() != static_cast<std::size_t>(F.W.rows()))
    throw DimensionMismatch("predict_semantics: cue columns != mapping inputs");
  Matrix out = Matrix::Zero(static_cast<Eigen::Index>(C.rows()), F.W.cols());
  for (std::size_t i = 0; i < C.rows(); ++i)
    for (auto c : C.row(i)) out.row(static_cast<Eigen::Index>(i)) += F.W.row(c);
  return out;
}

/// Centered, unit-norm copy of v; nullopt when v has no variance.
inline std::optional<Vector> standardize(const Eigen::Ref<const Eigen::RowVectorXd>& v) {
  if (v.size() < 2) return std::nullopt;
  Vector z = v.transpose().array() - v.mean();
  const double norm = z.norm();
  if (!(norm > 0.0) || !std::isfinite(norm)) return std::nullopt;
  return Vector(z / norm);
}

inline std::optional<double> correlation(const Eigen::Ref<const Eigen::RowVectorXd>& a,
                                         const Eigen::Ref<const Eigen::RowVectorXd>& b) {
  if (a.size() != b.size()) throw DimensionMismatch("correlation: length mismatch");
  auto za = standardize(a);
  auto zb = standardize(b);
  if (!za || !zb) return std::nullopt;
  return std::clamp(za->dot(*zb), -1.0, 1.0);
}

/// Distinct gold rows a prediction is compared against. Entries with
/// bit-identical semantic rows share one pool row.
class GoldPool {
 public:
  GoldPool(const Matrix& S, std::span<const std::size_t> ids) {
    std::unordered_map<std::string, std::size_t> row_of;
    const auto bytes = static_cast<std::size_t>(S.cols()) * sizeof(double);
    std::vector<Eigen::Index> src;
    for (auto id : ids) {
      std::string key(bytes, '\0');
      std::memcpy(key.data(), S.row(static_cast<Eigen::Index>(id)).data(), bytes);
      auto [it, inserted] = row_of.try_emplace(std::move(key), members_.size());
      if (inserted) {
        members_.emplace_back();
        src.push_back(static_cast<Eigen::Index>(id));
      }
      members_[it->second].push_back(id);
      pool_row_of_[id] = it->second;
    }
    Z_ = Matrix::Zero(static_cast<Eigen::Index>(src.size()), S.cols());
    for (std::size_t k = 0; k < src.size(); ++k)
      if (auto z = standardize(S.row(src[k]))) Z_.row(static_cast<Eigen::Index>(k)) = z->transpose();
  }

  std::size_t size() const { return members_.size(); }
  const std::vector<std::size_t>& members(std::size_t pool_row) const { return members_.at(pool_row); }
  const Matrix& standardized() const { return Z_; }
  std::optional<std::size_t> pool_row_of(std::size_t id) const {
    auto it = pool_row_of_.find(id);
    if (it == pool_row_of_.end()) return std::nullopt;
    return it->second;
  }

 private:
  std::vector<std::vector<std::size_t>> members_;
  std::unordered_map<std::size_t, std::size_t> pool_row_of_;
  Matrix Z_;
};

struct GoldMatch {
  std::size_t pool_row;
  double r;
};

/// Pool row with the highest Pearson r; the lowest index wins ties.
/// nullopt when the prediction has zero variance.
inline std::optional<GoldMatch> nearest_gold(const Eigen::Ref<const Eigen::RowVectorXd>& s_hat, const GoldPool& pool) {
  if (pool.size() == 0) throw InvalidArgument("nearest_gold: empty gold pool");
  if (s_hat.size() != pool.standardized().cols()) throw DimensionMismatch("nearest_gold: dimension mismatch");
  auto z = standardize(s_hat);
  if (!z) return std::nullopt;
  const Vector r = pool.standardized() * *z;
  GoldMatch best{0, r[0]};
  for (Eigen::Index k = 1; k < r.size(); ++k)
    if (r[k] > best.r) best = {static_cast<std::size_t>(k), r[k]};
  return best;
}

struct ComprehensionResult {
  std::size_t id = 0;
  std::optional<double> r_target;      // r with the item's own gold row
  std::optional<std::size_t> best_id;  // first entry of the best pool row
  double r_max = std::numeric_limits<double>::quiet_NaN();
  bool correct_strict = false;
  bool correct_lenient = false;
  bool zero_variance = false;
};

/// Scores predicted rows `S_hat` (aligned with `ids`) against `pool`.
/// Strict: the best pool row holds the item itself. Lenient: it holds any
/// entry with the same cue string.
inline std::vector<ComprehensionResult> comprehend(const Matrix& S_hat, std::span<const std::size_t> ids,
                                                   const Matrix& S_gold, const GoldPool& pool,
                                                   std::span<const std::string> cue_strings) {
  if (S_hat.rows() != static_cast<Eigen::Index>(ids.size()))
    throw DimensionMismatch("comprehend: prediction rows != item count");
  std::vector<ComprehensionResult> out;
  out.reserve(ids.size());
  const Matrix& Z = pool.standardized();
  for (std::size_t k = 0; k < ids.size(); ++k) {
    ComprehensionResult res;
    res.id = ids[k];
    const auto row = S_hat.row(static_cast<Eigen::Index>(k));
    auto z = standardize(row);
    if (!z) {
      res.zero_variance = true;
      out.push_back(res);
      continue;
    }
    if (auto zg = standardize(S_gold.row(static_cast<Eigen::Index>(res.id))))
      res.r_target = std::clamp(z->dot(*zg), -1.0, 1.0);
    const Vector r = Z * *z;
    std::size_t best = 0;
    for (Eigen::Index j = 1; j < r.size(); ++j)
      if (r[j] > r[static_cast<Eigen::Index>(best)]) best = static_cast<std::size_t>(j);
    res.r_max = r[static_cast<Eigen::Index>(best)];
    const auto& members = pool.members(best);
    res.best_id = members.front();
    for (auto m : members) {
      if (m == res.id) res.correct_strict = true;
      if (cue_strings[m] == cue_strings[res.id]) res.correct_lenient = true;
    }
    out.push_back(res);
  }
  return out;
}

enum class Scheme { train, train_lenient, val_all, val_all_lenient, val_strict, val_lenient, val_newform };

inline constexpr std::array kSchemes = {Scheme::train,      Scheme::train_lenient, Scheme::val_all,
                                        Scheme::val_all_lenient, Scheme::val_strict, Scheme::val_lenient,
                                        Scheme::val_newform};

inline std::string_view to_string(Scheme s) {
  switch (s) {
    case Scheme::train: return "train";
    case Scheme::train_lenient: return "train_lenient";
    case Scheme::val_all: return "val_all";
    case Scheme::val_all_lenient: return "val_all_lenient";
    case Scheme::val_strict: return "val_strict";
    case Scheme::val_lenient: return "val_lenient";
    case Scheme::val_newform: return "val_newform";
  }
  return "?";
}

inline Scheme parse_scheme(std::string_view s) {
  for (auto sc : kSchemes)
    if (to_string(sc) == s) return sc;
  throw InvalidArgument("unknown evaluation scheme '" + std::string(s) + "'");
}

struct Accuracy {
  std::size_t correct = 0;
  std::size_t total = 0;
  double value() const {
    return total == 0 ? std::numeric_limits<double>::quiet_NaN()
                      : static_cast<double>(correct) / static_cast<double>(total);
  }
};

/// Ids a scheme scores, and whether it scores leniently.
inline std::pair<std::vector<std::size_t>, bool> scheme_items(const SplitResult& split, Scheme scheme) {
  switch (scheme) {
    case Scheme::train: return {split.train_ids, false};
    case Scheme::train_lenient: return {split.train_ids, true};
    case Scheme::val_all: return {split.val_ids, false};
    case Scheme::val_all_lenient: return {split.val_ids, true};
    case Scheme::val_strict: return {split.homophone_val_ids, false};
    case Scheme::val_lenient: return {split.homophone_val_ids, true};
    case Scheme::val_newform: return {split.scored_newform_ids(), true};
  }
  return {{}, false};
}

/// Accuracy under `scheme`; `results` may cover more items than the scheme uses.
inline Accuracy evaluate(std::span<const ComprehensionResult> results, const SplitResult& split, Scheme scheme) {
  std::unordered_map<std::size_t, const ComprehensionResult*> by_id;
  for (const auto& r : results) by_id[r.id] = &r;
  const auto [ids, lenient] = scheme_items(split, scheme);
  Accuracy acc;
  for (auto id : ids) {
    auto it = by_id.find(id);
    if (it == by_id.end()) throw InvalidArgument("evaluate: no result for item " + std::to_string(id));
    ++acc.total;
    if (lenient ? it->second->correct_lenient : it->second->correct_strict) ++acc.correct;
  }
  return acc;
}

}  // namespace ldl

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <istream>
#include <limits>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include <nlohmann/json.hpp>

#include "ldl/cues.hpp"
#include "ldl/error.hpp"
#include "ldl/io.hpp"
#include "ldl/linalg.hpp"

namespace ldl {

enum class MappingKind { comprehension, production, positional };
enum class Provenance { endstate, incremental };

inline std::string_view to_string(MappingKind k) {
  switch (k) {
    case MappingKind::comprehension: return "comprehension";
    case MappingKind::production: return "production";
    case MappingKind::positional: return "positional";
  }
  return "?";
}
inline std::string_view to_string(Provenance p) { return p == Provenance::endstate ? "endstate" : "incremental"; }

/// Dense input-by-output weight matrix with its training metadata.
struct Mapping {
  Matrix W;
  MappingKind kind = MappingKind::comprehension;
  Provenance provenance = Provenance::endstate;
  std::uint64_t trained_tokens = 0;
  double eta = 0.0;

  Eigen::Index inputs() const { return W.rows(); }
  Eigen::Index outputs() const { return W.cols(); }
};

namespace detail {

/// Indices of the first occurrence of every distinct (x, y) row pair.
inline std::vector<Eigen::Index> distinct_pairs(const Matrix& X, const Matrix& Y) {
  std::unordered_set<std::string> seen;
  std::vector<Eigen::Index> keep;
  const auto xbytes = static_cast<std::size_t>(X.cols()) * sizeof(double);
  const auto ybytes = static_cast<std::size_t>(Y.cols()) * sizeof(double);
  std::string key(xbytes + ybytes, '\0');
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    std::memcpy(key.data(), X.row(i).data(), xbytes);
    std::memcpy(key.data() + xbytes, Y.row(i).data(), ybytes);
    if (seen.insert(key).second) keep.push_back(i);
  }
  return keep;
}

}  // namespace detail

/// Minimum-norm least-squares W for X W ~ Y on the distinct (x, y) pairs.
inline Matrix solve_least_squares(const Matrix& X, const Matrix& Y) {
  if (X.rows() == 0 || X.cols() == 0) throw InvalidArgument("solve_endstate: empty input");
  if (X.rows() != Y.rows()) throw DimensionMismatch("solve_endstate: row count mismatch");
  const auto keep = detail::distinct_pairs(X, Y);
  Eigen::MatrixXd Xd(static_cast<Eigen::Index>(keep.size()), X.cols());
  Eigen::MatrixXd Yd(static_cast<Eigen::Index>(keep.size()), Y.cols());
  for (std::size_t k = 0; k < keep.size(); ++k) {
    Xd.row(static_cast<Eigen::Index>(k)) = X.row(keep[k]);
    Yd.row(static_cast<Eigen::Index>(k)) = Y.row(keep[k]);
  }
  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(Xd);
  return Matrix(cod.solve(Yd));
}

inline Mapping solve_endstate(const Matrix& X, const Matrix& Y, MappingKind kind = MappingKind::comprehension) {
  Mapping m;
  m.W = solve_least_squares(X, Y);
  m.kind = kind;
  m.provenance = Provenance::endstate;
  return m;
}

/// One Widrow-Hoff step: W += eta * c (o' - c' W). Only rows of W at nonzero
/// components of c are touched.
inline void wh_update(Matrix& W, const Vector& c, const Vector& o, double eta) {
  if (c.size() != W.rows() || o.size() != W.cols()) throw DimensionMismatch("wh_update: dimension mismatch");
  if (!(eta > 0.0)) throw InvalidArgument("wh_update: eta must be positive");
  std::vector<Eigen::Index> active;
  for (Eigen::Index i = 0; i < c.size(); ++i)
    if (c[i] != 0.0) active.push_back(i);
  if (active.empty()) return;
  Eigen::RowVectorXd error = o.transpose();
  for (auto i : active) error -= c[i] * W.row(i);
  for (auto i : active) W.row(i) += (eta * c[i]) * error;
}

/// Same step for a binary cue vector given by its active columns.
inline void wh_update(Matrix& W, std::span<const std::uint32_t> active, const Eigen::Ref<const Eigen::RowVectorXd>& o,
                      double eta) {
  if (o.size() != W.cols()) throw DimensionMismatch("wh_update: dimension mismatch");
  if (active.empty()) return;
  Eigen::RowVectorXd error = o;
  for (auto i : active) error -= W.row(i);
  error *= eta;
  for (auto i : active) W.row(i) += error;
}

inline Matrix wh_updated(Matrix W, const Vector& c, const Vector& o, double eta) {
  wh_update(W, c, o, eta);
  return W;
}

struct IncrementalResult {
  Mapping mapping;
  std::vector<Mapping> checkpoints;
};

/// Single pass of Widrow-Hoff updates over `stream` (row ids of C and S),
/// starting from zero weights. A checkpoint at k snapshots the weights after
/// the first k tokens.
inline IncrementalResult train_incremental(std::span<const std::size_t> stream, const CueMatrix& C, const Matrix& S,
                                           double eta, std::span<const std::size_t> checkpoints = {}) {
  if (C.rows() != static_cast<std::size_t>(S.rows())) throw DimensionMismatch("train_incremental: C/S row mismatch");
  if (!(eta > 0.0)) throw InvalidArgument("train_incremental: eta must be positive");
  if (!std::is_sorted(checkpoints.begin(), checkpoints.end()))
    throw InvalidArgument("train_incremental: checkpoints must be sorted");
  for (auto id : stream)
    if (id >= C.rows()) throw InvalidArgument("train_incremental: stream id out of range");

  IncrementalResult r;
  r.mapping.W = Matrix::Zero(static_cast<Eigen::Index>(C.cols()), S.cols());
  r.mapping.kind = MappingKind::comprehension;
  r.mapping.provenance = Provenance::incremental;
  r.mapping.eta = eta;

  std::size_t next_cp = 0;
  auto snapshot_upto = [&](std::size_t tokens) {
    while (next_cp < checkpoints.size() && checkpoints[next_cp] == tokens) {
      Mapping snap = r.mapping;
      snap.trained_tokens = tokens;
      r.checkpoints.push_back(std::move(snap));
      ++next_cp;
    }
  };
  snapshot_upto(0);
  for (std::size_t t = 0; t < stream.size(); ++t) {
    const auto id = stream[t];
    wh_update(r.mapping.W, C.row(id), S.row(static_cast<Eigen::Index>(id)), eta);
    r.mapping.trained_tokens = t + 1;
    snapshot_upto(t + 1);
  }
  if (next_cp < checkpoints.size()) throw InvalidArgument("train_incremental: checkpoint beyond stream length");
  return r;
}

struct PruneResult {
  Mapping mapping;
  double pruned_fraction = 0.0;  // share of weights that are zero afterwards
};

/// Zeroes every weight with |w| < theta.
inline PruneResult prune(const Mapping& m, double theta) {
  if (theta < 0.0 || std::isnan(theta)) throw InvalidArgument("prune: threshold must be >= 0");
  PruneResult r{m, 0.0};
  Eigen::Index zeros = 0;
  for (Eigen::Index i = 0; i < r.mapping.W.size(); ++i) {
    double& w = r.mapping.W.data()[i];
    if (std::abs(w) < theta) w = 0.0;
    if (w == 0.0) ++zeros;
  }
  r.pruned_fraction = r.mapping.W.size() == 0 ? 0.0 : static_cast<double>(zeros) / static_cast<double>(r.mapping.W.size());
  return r;
}

/// Threshold that prunes (about) the smallest-magnitude `fraction` of weights.
inline double magnitude_threshold(const Mapping& m, double fraction) {
  if (fraction <= 0.0) return 0.0;
  if (fraction >= 1.0) return std::numeric_limits<double>::infinity();
  std::vector<double> mags(static_cast<std::size_t>(m.W.size()));
  for (Eigen::Index i = 0; i < m.W.size(); ++i) mags[static_cast<std::size_t>(i)] = std::abs(m.W.data()[i]);
  const auto k = static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(mags.size())));
  if (k >= mags.size()) return std::numeric_limits<double>::infinity();
  std::nth_element(mags.begin(), mags.begin() + static_cast<std::ptrdiff_t>(k), mags.end());
  return mags[k];
}

/// JSON header line, newline, then the binary matrix.
inline void write_mapping(std::ostream& os, const Mapping& m) {
  nlohmann::json header = {{"kind", to_string(m.kind)},     {"provenance", to_string(m.provenance)},
                           {"rows", m.W.rows()},            {"cols", m.W.cols()},
                           {"eta", m.eta},                  {"tokens", m.trained_tokens}};
  os << header.dump() << '\n';
  io::write_matrix(os, m.W);
}

inline Mapping read_mapping(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw ParseError("mapping: missing header");
  const auto header = nlohmann::json::parse(line);
  Mapping m;
  const auto kind = header.at("kind").get<std::string>();
  if (kind == "comprehension")
    m.kind = MappingKind::comprehension;
  else if (kind == "production")
    m.kind = MappingKind::production;
  else if (kind == "positional")
    m.kind = MappingKind::positional;
  else
    throw ParseError("mapping: unknown kind " + kind);
  m.provenance = header.at("provenance").get<std::string>() == "endstate" ? Provenance::endstate : Provenance::incremental;
  m.eta = header.at("eta").get<double>();
  m.trained_tokens = header.at("tokens").get<std::uint64_t>();
  m.W = io::read_matrix(is);
  if (m.W.rows() != header.at("rows").get<Eigen::Index>() || m.W.cols() != header.at("cols").get<Eigen::Index>())
    throw ParseError("mapping: header dimensions disagree with matrix");
  return m;
}

}  // namespace ldl

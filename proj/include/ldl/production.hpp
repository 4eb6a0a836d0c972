#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "ldl/comprehension.hpp"
#include "ldl/cues.hpp"
#include "ldl/error.hpp"
#include "ldl/linalg.hpp"
#include "ldl/mappings.hpp"

namespace ldl {

/// Joins an overlap-valid gram sequence into its surface form: the first
/// gram plus the last unit of every later gram, boundaries removed.
inline std::string merge_grams(std::span<const std::string> grams, const CueConfig& cfg) {
  if (grams.empty()) throw InvalidArgument("merge_grams: no grams");
  std::vector<std::string> units = split_units(grams.front(), cfg);
  const auto width = units.size();
  for (std::size_t i = 1; i < grams.size(); ++i) {
    const auto next = split_units(grams[i], cfg);
    if (next.size() != width) throw InvalidArgument("merge_grams: grams of unequal length");
    if (width < 2 || !std::equal(next.begin(), next.end() - 1, units.end() - static_cast<std::ptrdiff_t>(width - 1)))
      throw InvalidArgument("merge_grams: '" + grams[i - 1] + "' and '" + grams[i] + "' do not overlap");
    units.push_back(next.back());
  }
  if (units.size() < 2 || units.front() != cfg.boundary || units.back() != cfg.boundary)
    throw InvalidArgument("merge_grams: path must start and end with the boundary marker");
  return join_units(std::span<const std::string>(units).subspan(1, units.size() - 2), cfg);
}

/// Gram-level structure of an inventory used for path search.
class GramGraph {
 public:
  GramGraph(const CueInventory& inv, const CueConfig& cfg) : cfg_(cfg) {
    if (cfg.n < 2) throw InvalidArgument("path search needs n >= 2");
    const auto n = static_cast<std::size_t>(cfg.n);
    info_.resize(inv.size());
    for (std::size_t g = 0; g < inv.size(); ++g) {
      auto units = split_units(inv[g], cfg);
      auto& in = info_[g];
      in.initial = !units.empty() && units.front() == cfg.boundary;
      in.final = !units.empty() && units.back() == cfg.boundary;
      in.full_width = units.size() == n;
      if (in.full_width) {
        in.head = join_units(std::span<const std::string>(units).first(n - 1), cfg);
        in.tail = join_units(std::span<const std::string>(units).last(n - 1), cfg);
        successors_[in.head].push_back(static_cast<std::uint32_t>(g));
      }
    }
  }

  bool initial(std::size_t g) const { return info_[g].initial; }
  bool final(std::size_t g) const { return info_[g].final; }
  std::size_t size() const { return info_.size(); }

  /// Grams that overlap `g` in n-1 units.
  std::span<const std::uint32_t> successors(std::size_t g) const {
    const auto& in = info_[g];
    if (!in.full_width || in.final) return {};
    auto it = successors_.find(in.tail);
    if (it == successors_.end()) return {};
    return it->second;
  }

  const CueConfig& config() const { return cfg_; }

 private:
  struct Info {
    bool initial = false, final = false, full_width = false;
    std::string head, tail;
  };
  CueConfig cfg_;
  std::vector<Info> info_;
  std::unordered_map<std::string, std::vector<std::uint32_t>> successors_;
};

enum class PositionalInput { predicted_cues, semantics };

/// One linear map per word position from the input space to cue support.
/// All positions are stored side by side: column p * cues + j is the
/// support of cue j at position p.
struct PositionalSupportModel {
  Matrix W;
  std::size_t cues = 0;
  std::size_t max_len = 0;
  PositionalInput input = PositionalInput::predicted_cues;

  /// max_len x cues support matrix for one input row.
  Matrix support(const Eigen::Ref<const Eigen::RowVectorXd>& x) const {
    if (x.size() != W.rows()) throw DimensionMismatch("positional support: input dimension mismatch");
    const Eigen::RowVectorXd flat = x * W;
    return Eigen::Map<const Matrix>(flat.data(), static_cast<Eigen::Index>(max_len), static_cast<Eigen::Index>(cues));
  }
};

/// Cue index at each position of each training form.
inline std::vector<std::vector<std::uint32_t>> positional_targets(std::span<const std::string> forms,
                                                                  const CueInventory& inv, const CueConfig& cfg) {
  std::vector<std::vector<std::uint32_t>> out;
  out.reserve(forms.size());
  for (const auto& f : forms) {
    std::vector<std::uint32_t> seq;
    for (const auto& g : extract_grams(f, cfg)) {
      auto c = inv.find(g);
      if (!c) throw InvalidArgument("positional target gram '" + g + "' not in inventory");
      seq.push_back(static_cast<std::uint32_t>(*c));
    }
    out.push_back(std::move(seq));
  }
  return out;
}

/// Fits every position's end-state mapping from `inputs` (one row per
/// training form) in a single least-squares solve.
inline PositionalSupportModel train_positional(const Matrix& inputs,
                                               std::span<const std::vector<std::uint32_t>> targets, std::size_t cues,
                                               std::size_t margin = 2,
                                               PositionalInput kind = PositionalInput::predicted_cues) {
  if (inputs.rows() == 0 || targets.empty()) throw InvalidArgument("train_positional: empty training set");
  if (static_cast<std::size_t>(inputs.rows()) != targets.size())
    throw DimensionMismatch("train_positional: inputs and targets differ in length");
  std::size_t longest = 0;
  for (const auto& t : targets) longest = std::max(longest, t.size());
  PositionalSupportModel m;
  m.cues = cues;
  m.max_len = longest + margin;
  m.input = kind;
  Matrix Y = Matrix::Zero(inputs.rows(), static_cast<Eigen::Index>(m.max_len * cues));
  for (std::size_t i = 0; i < targets.size(); ++i)
    for (std::size_t p = 0; p < targets[i].size(); ++p) {
      if (targets[i][p] >= cues) throw DimensionMismatch("train_positional: cue index out of range");
      Y(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(p * cues + targets[i][p])) = 1.0;
    }
  m.W = solve_least_squares(inputs, Y);
  return m;
}

struct PathParams {
  std::size_t k = 10;      // best-supported cues kept per position
  double theta = 0.1;      // support threshold
  bool tolerance = false;  // admit weakly supported cues
  std::size_t max_tolerated = 2;
  /// Weak cues need at least this support.
  double tolerance_floor = -std::numeric_limits<double>::infinity();
  /// Search stops after this many complete paths.
  std::size_t max_paths = 20000;
};

struct CandidatePath {
  std::vector<std::uint32_t> cue_ids;
  std::vector<std::string> grams;
  std::string surface;
  Vector projected;  // semantics of the path's cue vector under F
  double score = -std::numeric_limits<double>::infinity();
  bool scored = false;
  std::size_t tolerated_count = 0;
};

/// Checks the path invariants: boundary-initial, boundary-final, n-1 overlap
/// between neighbours, and a surface equal to the merged grams.
inline bool path_is_valid(const CandidatePath& p, const CueConfig& cfg) {
  if (p.grams.empty()) return false;
  try {
    return merge_grams(p.grams, cfg) == p.surface;
  } catch (const Error&) {
    return false;
  }
}

namespace detail {

struct PathSearch {
  const PositionalSupportModel& model;
  const GramGraph& graph;
  const CueInventory& inv;
  const PathParams& params;
  Matrix support;
  std::vector<std::vector<char>> strong;  // per position, per cue
  std::vector<CandidatePath> found;
  std::unordered_map<std::string, std::size_t> seen;
  std::vector<std::uint32_t> stack;
  std::vector<char> weak_flags;

  void mark_strong() {
    const auto L = model.max_len;
    strong.assign(L, std::vector<char>(model.cues, 0));
    std::vector<std::uint32_t> idx(model.cues);
    for (std::size_t p = 0; p < L; ++p) {
      std::iota(idx.begin(), idx.end(), 0u);
      const auto row = support.row(static_cast<Eigen::Index>(p));
      const auto k = std::min(params.k, idx.size());
      std::partial_sort(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(k), idx.end(),
                        [&](std::uint32_t a, std::uint32_t b) { return row[a] > row[b] || (row[a] == row[b] && a < b); });
      for (std::size_t j = 0; j < k; ++j)
        if (row[idx[j]] >= params.theta) strong[p][idx[j]] = 1;
    }
  }

  /// Allowed extensions at position p, strong ones first, each by descending support.
  std::vector<std::pair<std::uint32_t, bool>> options(std::size_t p, std::span<const std::uint32_t> pool,
                                                      std::size_t tolerated) const {
    std::vector<std::pair<std::uint32_t, bool>> strong_opts, weak_opts;
    const auto row = support.row(static_cast<Eigen::Index>(p));
    for (auto g : pool) {
      if (strong[p][g])
        strong_opts.emplace_back(g, false);
      else if (params.tolerance && tolerated < params.max_tolerated && row[g] >= params.tolerance_floor)
        weak_opts.emplace_back(g, true);
    }
    auto by_support = [&](const auto& a, const auto& b) {
      return row[a.first] > row[b.first] || (row[a.first] == row[b.first] && a.first < b.first);
    };
    std::sort(strong_opts.begin(), strong_opts.end(), by_support);
    std::sort(weak_opts.begin(), weak_opts.end(), by_support);
    if (weak_opts.size() > params.k) weak_opts.resize(params.k);
    strong_opts.insert(strong_opts.end(), weak_opts.begin(), weak_opts.end());
    return strong_opts;
  }

  void record(std::size_t tolerated) {
    CandidatePath path;
    path.cue_ids = stack;
    for (auto g : stack) path.grams.push_back(inv[g]);
    path.surface = merge_grams(path.grams, graph.config());
    path.tolerated_count = tolerated;
    if (seen.contains(path.surface)) return;
    seen.emplace(path.surface, found.size());
    found.push_back(std::move(path));
  }

  void extend(std::size_t p, std::size_t tolerated) {
    if (found.size() >= params.max_paths) return;
    const auto last = stack.back();
    if (graph.final(last)) {
      record(tolerated);
      return;
    }
    if (p >= model.max_len) return;
    for (const auto& [g, weak] : options(p, graph.successors(last), tolerated)) {
      stack.push_back(g);
      extend(p + 1, tolerated + (weak ? 1 : 0));
      stack.pop_back();
    }
  }

  void run() {
    mark_strong();
    if (model.max_len == 0) return;
    std::vector<std::uint32_t> initial;
    for (std::size_t g = 0; g < graph.size(); ++g)
      if (graph.initial(g)) initial.push_back(static_cast<std::uint32_t>(g));
    for (const auto& [g, weak] : options(0, initial, 0)) {
      stack.assign(1, g);
      extend(1, weak ? 1 : 0);
    }
  }
};

}  // namespace detail

/// All overlap-valid paths from boundary-initial to boundary-final grams
/// built from well-supported cues (plus up to max_tolerated weak cues in
/// tolerance mode), deduplicated by surface.
inline std::vector<CandidatePath> enumerate_paths(const PositionalSupportModel& model, const GramGraph& graph,
                                                  const CueInventory& inv,
                                                  const Eigen::Ref<const Eigen::RowVectorXd>& input,
                                                  const PathParams& params) {
  if (params.k < 1) throw InvalidArgument("enumerate_paths: k must be >= 1");
  if (params.theta < 0.0) throw InvalidArgument("enumerate_paths: theta must be >= 0");
  if (graph.size() != model.cues || inv.size() != model.cues)
    throw DimensionMismatch("enumerate_paths: inventory size != model cue count");
  detail::PathSearch search{model, graph, inv, params, model.support(input), {}, {}, {}, {}, {}};
  search.run();
  return std::move(search.found);
}

/// Scores each candidate by the correlation between its projected semantics
/// (cue vector through F) and the target; best first, ties by surface.
inline std::vector<CandidatePath> synthesize_by_analysis(std::vector<CandidatePath> candidates, const Mapping& F,
                                                         const Eigen::Ref<const Eigen::RowVectorXd>& s_target) {
  if (s_target.size() != F.W.cols()) throw DimensionMismatch("synthesize_by_analysis: target dimension mismatch");
  for (auto& c : candidates) {
    Eigen::RowVectorXd s = Eigen::RowVectorXd::Zero(F.W.cols());
    std::vector<std::uint32_t> ids = c.cue_ids;
    std::sort(ids.begin(), ids.end());
    ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
    for (auto id : ids) {
      if (id >= F.W.rows()) throw DimensionMismatch("synthesize_by_analysis: cue outside mapping");
      s += F.W.row(id);
    }
    c.projected = s.transpose();
    if (auto r = correlation(s, s_target)) {
      c.score = *r;
      c.scored = true;
    } else {
      c.score = -std::numeric_limits<double>::infinity();
      c.scored = false;
    }
  }
  std::sort(candidates.begin(), candidates.end(), [](const CandidatePath& a, const CandidatePath& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.surface < b.surface;
  });
  return candidates;
}

struct ProductionResult {
  std::vector<CandidatePath> ranked;
  const CandidatePath* best() const { return ranked.empty() ? nullptr : &ranked.front(); }
};

/// Trained pieces of the production route.
struct ProductionModel {
  const Mapping& G;
  const Mapping& F;
  const PositionalSupportModel& positional;
  const GramGraph& graph;
  const CueInventory& inventory;
};

/// Meaning to form: c_hat = s G, candidate paths from positional support,
/// reranked by synthesis by analysis.
inline ProductionResult produce(const Eigen::Ref<const Eigen::RowVectorXd>& s_target, const ProductionModel& pm,
                                const PathParams& params) {
  if (s_target.size() != pm.G.W.rows()) throw DimensionMismatch("produce: target dimension != G inputs");
  ProductionResult out;
  Eigen::RowVectorXd input;
  if (pm.positional.input == PositionalInput::predicted_cues)
    input = s_target * pm.G.W;
  else
    input = s_target;
  auto candidates = enumerate_paths(pm.positional, pm.graph, pm.inventory, input, params);
  out.ranked = synthesize_by_analysis(std::move(candidates), pm.F, s_target);
  return out;
}

}  // namespace ldl

#pragma once

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "ldl/error.hpp"
#include "ldl/io.hpp"
#include "ldl/lexicon.hpp"
#include "ldl/linalg.hpp"
#include "ldl/random.hpp"
#include "ldl/stats.hpp"

namespace ldl {

inline const std::string kSingular = "SINGULAR";
inline const std::string kPlural = "PLURAL";
inline const std::string kDefinite = "DEFINITE";
inline const std::string kIndefinite = "INDEFINITE";

inline std::string feature_name(Case c) {
  std::string s(to_string(c));
  for (auto& ch : s) ch = static_cast<char>(std::toupper(static_cast<unsigned char>(ch)));
  return s;
}
inline std::string feature_name(Role r) {
  std::string s(to_string(r));
  for (auto& ch : s) ch = static_cast<char>(std::toupper(static_cast<unsigned char>(ch)));
  return s;
}

/// Lexeme and inflectional-feature vectors a semantic matrix was composed from.
struct FeatureRegistry {
  std::map<std::string, Vector> lexemes;
  std::map<std::string, Vector> features;
  Eigen::Index dimension = 0;

  const Vector& feature(const std::string& name) const {
    auto it = features.find(name);
    if (it == features.end()) throw InvalidArgument("feature vector '" + name + "' not in registry");
    return it->second;
  }
  const Vector& lexeme(const std::string& lemma) const {
    auto it = lexemes.find(lemma);
    if (it == lexemes.end()) throw InvalidArgument("lexeme vector '" + lemma + "' not in registry");
    return it->second;
  }
};

/// Item-by-dimension semantic matrix, one row per dataset entry.
struct SemanticSpace {
  Matrix S;
  std::vector<std::string> gold_keys;
  std::optional<FeatureRegistry> registry;

  std::size_t rows() const { return static_cast<std::size_t>(S.rows()); }
  Eigen::Index dimension() const { return S.cols(); }
};

enum class InflectionScheme { case_labels, semantic_roles };
enum class NumberCoding { equipollent, privative };

struct SimulationParams {
  Eigen::Index dim = 0;
  double sd_lexeme = 4.0;
  double sd_feature = 4.0;
  double sd_noise = 1.0;
  double feature_scale = 1.0;
  InflectionScheme scheme = InflectionScheme::case_labels;
  NumberCoding number = NumberCoding::equipollent;
  /// Adds DEFINITE / INDEFINITE to entries that carry a definiteness flag.
  bool definiteness = false;
};

/// Inflectional features an entry's row is composed of, in canonical order.
inline std::vector<std::string> inflection_features(const WordEntry& e, const SimulationParams& p) {
  std::vector<std::string> out;
  if (e.number == Number::plural)
    out.push_back(kPlural);
  else if (p.number == NumberCoding::equipollent)
    out.push_back(kSingular);
  if (p.scheme == InflectionScheme::case_labels) {
    out.push_back(feature_name(e.gram_case));
  } else {
    if (!e.role) throw InvalidArgument("role scheme: entry '" + e.wordform + "' has no semantic role");
    out.push_back(feature_name(*e.role));
  }
  if (p.definiteness && e.definiteness)
    out.push_back(*e.definiteness == Definiteness::definite ? kDefinite : kIndefinite);
  return out;
}

inline std::string gold_key(const WordEntry& e, const std::vector<std::string>& features) {
  std::string key = e.lemma;
  for (const auto& f : features) key += "|" + f;
  return key;
}

/// Rows are lexeme + inflectional features + per-entry noise.
///
/// Draw order is fixed (lexemes by first occurrence, then every feature of
/// the scheme, then noise per entry) so the matrix is reproducible from the
/// seed alone.
inline SemanticSpace simulate_vectors(const Dataset& d, const SimulationParams& p, std::uint64_t seed) {
  if (p.dim < 1) throw InvalidArgument("semantic dimension must be >= 1");
  if (p.sd_lexeme < 0 || p.sd_feature < 0 || p.sd_noise < 0 || p.feature_scale < 0)
    throw InvalidArgument("standard deviations must be non-negative");

  Rng rng(seed);
  auto draw = [&](double sd) {
    Vector v(p.dim);
    for (Eigen::Index k = 0; k < p.dim; ++k) v[k] = rng.gaussian(0.0, sd);
    return v;
  };

  FeatureRegistry reg;
  reg.dimension = p.dim;
  std::vector<std::string> lemma_order;
  for (const auto& e : d)
    if (!reg.lexemes.contains(e.lemma)) {
      reg.lexemes.emplace(e.lemma, Vector());
      lemma_order.push_back(e.lemma);
    }
  for (const auto& lemma : lemma_order) reg.lexemes[lemma] = draw(p.sd_lexeme);

  std::vector<std::string> feature_order = {kSingular, kPlural};
  if (p.scheme == InflectionScheme::case_labels)
    for (auto c : kCases) feature_order.push_back(feature_name(c));
  else
    for (auto r : kRoles) feature_order.push_back(feature_name(r));
  if (p.definiteness) {
    feature_order.push_back(kDefinite);
    feature_order.push_back(kIndefinite);
  }
  const double sd_feat = p.sd_feature * p.feature_scale;
  for (const auto& f : feature_order) reg.features[f] = draw(sd_feat);

  SemanticSpace space;
  space.S.resize(static_cast<Eigen::Index>(d.size()), p.dim);
  space.gold_keys.reserve(d.size());
  for (std::size_t i = 0; i < d.size(); ++i) {
    const auto& e = d[i];
    const auto feats = inflection_features(e, p);
    Vector row = reg.lexemes.at(e.lemma);
    for (const auto& f : feats) row += reg.features.at(f);
    row += draw(p.sd_noise);
    space.S.row(static_cast<Eigen::Index>(i)) = row.transpose();
    space.gold_keys.push_back(gold_key(e, feats));
  }
  space.registry = std::move(reg);
  return space;
}

/// Semantic vector for the nominative plural of a form known only in the
/// nominative singular.
inline Vector wug_plural_vector(const Vector& s_nom_sg, const FeatureRegistry& reg) {
  const auto& pl = reg.feature(kPlural);
  const auto& sg = reg.feature(kSingular);
  if (pl.size() != s_nom_sg.size() || sg.size() != s_nom_sg.size())
    throw DimensionMismatch("wug_plural_vector: dimension mismatch");
  return s_nom_sg + pl - sg;
}

// ---------------------------------------------------------------------------
// Embeddings

struct EmbeddingTable {
  std::unordered_map<std::string, Vector> vectors;
  Eigen::Index dimension = 0;
};

/// Text table: one word per line followed by its components. A leading
/// "count dim" line is skipped.
inline EmbeddingTable parse_embeddings(std::istream& is) {
  EmbeddingTable t;
  std::string line;
  bool first = true;
  while (std::getline(is, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    std::istringstream ls(line);
    std::string word;
    ls >> word;
    std::vector<double> comps;
    std::string tok;
    while (ls >> tok) {
      try {
        std::size_t used = 0;
        comps.push_back(std::stod(tok, &used));
        if (used != tok.size()) throw std::invalid_argument(tok);
      } catch (const std::exception&) {
        throw ParseError("embeddings: bad component '" + tok + "' for '" + word + "'");
      }
    }
    if (first) {
      first = false;
      const bool digits = !word.empty() && std::all_of(word.begin(), word.end(), [](unsigned char c) {
        return std::isdigit(c);
      });
      if (digits && comps.size() == 1) continue;
    }
    if (comps.empty()) throw ParseError("embeddings: no components for '" + word + "'");
    if (t.dimension == 0) t.dimension = static_cast<Eigen::Index>(comps.size());
    if (static_cast<Eigen::Index>(comps.size()) != t.dimension)
      throw ParseError("embeddings: inconsistent dimension for '" + word + "'");
    t.vectors[word] = Eigen::Map<const Vector>(comps.data(), t.dimension);
  }
  return t;
}

struct EmbeddingSpace {
  SemanticSpace space;
  Dataset kept;                         // entries that received a vector
  std::vector<std::size_t> kept_ids;    // their ids in the input dataset
  std::vector<std::string> missing;     // word forms without a vector
};

/// Looks up each entry's word form. Homophonous entries get identical rows;
/// entries without a vector are dropped and reported.
inline EmbeddingSpace embed_dataset(const EmbeddingTable& table, const Dataset& d) {
  EmbeddingSpace out;
  std::vector<WordEntry> kept;
  std::unordered_set<std::string> missing_seen;
  for (std::size_t i = 0; i < d.size(); ++i) {
    if (table.vectors.contains(d[i].wordform)) {
      kept.push_back(d[i]);
      out.kept_ids.push_back(i);
    } else if (missing_seen.insert(d[i].wordform).second) {
      out.missing.push_back(d[i].wordform);
    }
  }
  out.kept = Dataset(std::move(kept));
  out.space.S.resize(static_cast<Eigen::Index>(out.kept.size()), table.dimension);
  for (std::size_t i = 0; i < out.kept.size(); ++i) {
    const auto& e = out.kept[i];
    out.space.S.row(static_cast<Eigen::Index>(i)) = table.vectors.at(e.wordform).transpose();
    out.space.gold_keys.push_back(e.wordform);
  }
  return out;
}

inline EmbeddingSpace load_embeddings(const std::string& path, const Dataset& d) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open embeddings '" + path + "'");
  return embed_dataset(parse_embeddings(in), d);
}

struct AnalyticalOptions {
  /// Subtract the grand mean of all distinct form vectors from each feature
  /// vector. Off reproduces plain averaging.
  bool center_features = false;
  /// Use zero feature vectors (lexeme averages only).
  bool zero_features = false;
};

struct AnalyticalResult {
  FeatureRegistry registry;
  SemanticSpace space;
  std::vector<double> correlations;  // analytical vs. original row, per entry
};

/// Rebuilds rows as lexeme + number + case from averaged embeddings.
///
/// A lexeme vector is the mean of its distinct word-form vectors; a feature
/// vector is the mean over all distinct forms that realize the feature.
inline AnalyticalResult reconstruct_analytical(const SemanticSpace& original, const Dataset& d,
                                               const AnalyticalOptions& opt = {}) {
  if (original.rows() != d.size()) throw DimensionMismatch("reconstruct_analytical: row count != entries");
  const Eigen::Index dim = original.dimension();

  // Distinct (lemma, wordform) forms and the features each can realize.
  struct Form {
    std::size_t row;
    std::string lemma;
    std::unordered_set<std::string> features;
  };
  std::vector<Form> forms;
  std::unordered_map<std::string, std::size_t> form_of;
  for (std::size_t i = 0; i < d.size(); ++i) {
    const auto key = d[i].lemma + '\t' + d[i].wordform;
    auto [it, inserted] = form_of.try_emplace(key, forms.size());
    if (inserted) forms.push_back({i, d[i].lemma, {}});
    auto& f = forms[it->second];
    f.features.insert(d[i].number == Number::plural ? kPlural : kSingular);
    f.features.insert(feature_name(d[i].gram_case));
  }

  AnalyticalResult out;
  out.registry.dimension = dim;
  std::map<std::string, std::pair<Vector, std::size_t>> lex_acc, feat_acc;
  Vector grand = Vector::Zero(dim);
  for (const auto& f : forms) {
    const Vector v = original.S.row(static_cast<Eigen::Index>(f.row)).transpose();
    grand += v;
    auto& l = lex_acc.try_emplace(f.lemma, Vector::Zero(dim), 0).first->second;
    l.first += v;
    ++l.second;
    for (const auto& name : f.features) {
      auto& a = feat_acc.try_emplace(name, Vector::Zero(dim), 0).first->second;
      a.first += v;
      ++a.second;
    }
  }
  if (!forms.empty()) grand /= static_cast<double>(forms.size());
  for (auto& [lemma, acc] : lex_acc) {
    if (acc.second == 0) throw InvalidArgument("lemma '" + lemma + "' has no forms");
    out.registry.lexemes[lemma] = acc.first / static_cast<double>(acc.second);
  }
  for (auto& [name, acc] : feat_acc) {
    Vector v = acc.first / static_cast<double>(acc.second);
    if (opt.center_features) v -= grand;
    if (opt.zero_features) v.setZero();
    out.registry.features[name] = std::move(v);
  }

  out.space.S.resize(static_cast<Eigen::Index>(d.size()), dim);
  for (std::size_t i = 0; i < d.size(); ++i) {
    const auto& e = d[i];
    const std::string number = e.number == Number::plural ? kPlural : kSingular;
    const std::string gcase = feature_name(e.gram_case);
    Vector row = out.registry.lexemes.at(e.lemma) + out.registry.features.at(number) +
                 out.registry.features.at(gcase);
    out.space.S.row(static_cast<Eigen::Index>(i)) = row.transpose();
    out.space.gold_keys.push_back(e.lemma + "|" + number + "|" + gcase);
    const Vector orig = original.S.row(static_cast<Eigen::Index>(i)).transpose();
    out.correlations.push_back(
        stats::pearson(std::span<const double>(row.data(), static_cast<std::size_t>(dim)),
                       std::span<const double>(orig.data(), static_cast<std::size_t>(dim)))
            .value_or(0.0));
  }
  out.space.registry = out.registry;
  return out;
}

/// Binary matrix followed by one key per line.
inline void write_semantic_space(std::ostream& matrix_out, std::ostream& keys_out, const SemanticSpace& s) {
  io::write_matrix(matrix_out, s.S);
  for (const auto& k : s.gold_keys) keys_out << k << '\n';
}

inline SemanticSpace read_semantic_space(std::istream& matrix_in, std::istream& keys_in) {
  SemanticSpace s;
  s.S = io::read_matrix(matrix_in);
  std::string line;
  while (std::getline(keys_in, line)) s.gold_keys.push_back(line);
  if (s.gold_keys.size() != s.rows()) throw ParseError("semantic space: key count != row count");
  return s;
}

}  // namespace ldl

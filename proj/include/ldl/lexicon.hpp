#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <numeric>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include <nlohmann/json.hpp>

#include "ldl/cues.hpp"
#include "ldl/error.hpp"
#include "ldl/random.hpp"

namespace ldl {

enum class Case { nominative, genitive, dative, accusative };
enum class Number { singular, plural };
enum class Gender { masculine, feminine, neuter };
enum class Role { agent, theme, patient, possessive, partitive, beneficiary, location, motion, experiencer };
enum class Definiteness { definite, indefinite };

inline constexpr std::array kCases = {Case::nominative, Case::genitive, Case::dative, Case::accusative};
inline constexpr std::array kRoles = {Role::agent,       Role::theme,    Role::patient,
                                      Role::possessive,  Role::partitive, Role::beneficiary,
                                      Role::location,    Role::motion,   Role::experiencer};

inline std::string_view to_string(Case c) {
  constexpr std::array<std::string_view, 4> names = {"nominative", "genitive", "dative", "accusative"};
  return names[static_cast<std::size_t>(c)];
}
inline std::string_view to_string(Number n) { return n == Number::singular ? "singular" : "plural"; }
inline std::string_view to_string(Gender g) {
  constexpr std::array<std::string_view, 3> names = {"m", "f", "n"};
  return names[static_cast<std::size_t>(g)];
}
inline std::string_view to_string(Role r) {
  constexpr std::array<std::string_view, 9> names = {"agent",       "theme",    "patient",
                                                     "possessive",  "partitive", "beneficiary",
                                                     "location",    "motion",   "experiencer"};
  return names[static_cast<std::size_t>(r)];
}
inline std::string_view to_string(Definiteness d) {
  return d == Definiteness::definite ? "definite" : "indefinite";
}

inline Case parse_case(std::string_view s) {
  for (auto c : kCases)
    if (s == to_string(c)) return c;
  throw ParseError("unknown case value '" + std::string(s) + "'");
}
inline Number parse_number(std::string_view s) {
  if (s == "singular") return Number::singular;
  if (s == "plural") return Number::plural;
  throw ParseError("unknown number value '" + std::string(s) + "'");
}
inline Gender parse_gender(std::string_view s) {
  if (s == "m" || s == "masculine") return Gender::masculine;
  if (s == "f" || s == "feminine") return Gender::feminine;
  if (s == "n" || s == "neuter") return Gender::neuter;
  throw ParseError("unknown gender value '" + std::string(s) + "'");
}
inline Role parse_role(std::string_view s) {
  for (auto r : kRoles)
    if (s == to_string(r)) return r;
  throw ParseError("unknown role value '" + std::string(s) + "'");
}
inline Definiteness parse_definiteness(std::string_view s) {
  if (s == "definite") return Definiteness::definite;
  if (s == "indefinite") return Definiteness::indefinite;
  throw ParseError("unknown definiteness value '" + std::string(s) + "'");
}

/// One paradigm-cell realization of a word form.
struct WordEntry {
  std::string wordform;
  std::string pronunciation;  // DISC, one character per phone
  std::optional<std::string> syllabified;
  std::string lemma;
  Case gram_case = Case::nominative;
  Number number = Number::singular;
  Gender gender = Gender::masculine;
  std::optional<Role> role;
  std::uint64_t frequency = 0;
  std::optional<std::uint64_t> role_frequency;
  // Set by attach_articles. `article` is orthographic and empty for bare forms.
  std::string article;
  std::optional<Definiteness> definiteness;

  /// Tokens this entry contributes to a learning stream.
  std::uint64_t token_count() const { return role_frequency.value_or(frequency); }

  bool operator==(const WordEntry&) const = default;
};

/// Which string of an entry n-gram cues are extracted from.
enum class FormSource { pronunciation, syllables, orthography };

inline FormSource parse_form_source(std::string_view s) {
  if (s == "pronunciation") return FormSource::pronunciation;
  if (s == "syllables") return FormSource::syllables;
  if (s == "orthography") return FormSource::orthography;
  throw ParseError("unknown form source '" + std::string(s) + "'");
}
inline std::string_view to_string(FormSource s) {
  switch (s) {
    case FormSource::pronunciation: return "pronunciation";
    case FormSource::syllables: return "syllables";
    case FormSource::orthography: return "orthography";
  }
  return "?";
}

/// The form an entry is recognized and produced as. Articles are already
/// folded into pronunciation and syllables; orthography prefixes the
/// orthographic article with no separator.
inline std::string cue_string(const WordEntry& e, FormSource src) {
  switch (src) {
    case FormSource::pronunciation: return e.pronunciation;
    case FormSource::syllables:
      if (!e.syllabified) throw InvalidArgument("entry '" + e.wordform + "' has no syllabified pronunciation");
      return *e.syllabified;
    case FormSource::orthography: return e.article + e.wordform;
  }
  return e.pronunciation;
}

/// FormSource matching a cue unit when no explicit choice is configured.
inline FormSource default_form_source(CueUnit unit) {
  switch (unit) {
    case CueUnit::phone: return FormSource::pronunciation;
    case CueUnit::syllable: return FormSource::syllables;
    case CueUnit::letter: return FormSource::orthography;
  }
  return FormSource::pronunciation;
}

inline void validate_entry(const WordEntry& e, std::string_view boundary = "#") {
  if (e.pronunciation.empty()) throw InvalidArgument("empty pronunciation for '" + e.wordform + "'");
  if (e.pronunciation.find(boundary) != std::string::npos)
    throw InvalidArgument("pronunciation contains boundary marker: " + e.pronunciation);
  if (e.syllabified) {
    std::string joined;
    for (char ch : *e.syllabified)
      if (ch != '-') joined += ch;
    if (joined != e.pronunciation)
      throw InvalidArgument("syllabified form '" + *e.syllabified + "' does not match pronunciation '" +
                            e.pronunciation + "'");
  }
  if (e.role_frequency && !e.role) throw InvalidArgument("role_frequency without semantic role");
}

/// Ordered entries; an entry's id is its index.
class Dataset {
 public:
  Dataset() = default;
  explicit Dataset(std::vector<WordEntry> entries) : entries_(std::move(entries)) {
    for (const auto& e : entries_) validate_entry(e);
  }

  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  const WordEntry& operator[](std::size_t id) const { return entries_.at(id); }
  const std::vector<WordEntry>& entries() const { return entries_; }
  auto begin() const { return entries_.begin(); }
  auto end() const { return entries_.end(); }

  std::vector<std::string> cue_strings(FormSource src) const {
    std::vector<std::string> out;
    out.reserve(size());
    for (const auto& e : entries_) out.push_back(cue_string(e, src));
    return out;
  }

  Dataset select(std::span<const std::size_t> ids) const {
    std::vector<WordEntry> out;
    out.reserve(ids.size());
    for (auto id : ids) out.push_back(entries_.at(id));
    return Dataset(std::move(out));
  }

  /// Homophone groups: entries sharing a cue string, in first-occurrence order.
  std::vector<std::vector<std::size_t>> homophone_groups(FormSource src) const {
    std::unordered_map<std::string, std::size_t> group_of;
    std::vector<std::vector<std::size_t>> groups;
    for (std::size_t i = 0; i < size(); ++i) {
      auto [it, inserted] = group_of.try_emplace(cue_string(entries_[i], src), groups.size());
      if (inserted) groups.emplace_back();
      groups[it->second].push_back(i);
    }
    return groups;
  }

 private:
  std::vector<WordEntry> entries_;
};

// ---------------------------------------------------------------------------
// TSV input/output

namespace detail {

inline std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find('\t', start);
    if (pos == std::string::npos) {
      out.push_back(line.substr(start));
      break;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  if (!out.empty() && !out.back().empty() && out.back().back() == '\r') out.back().pop_back();
  return out;
}

inline std::uint64_t parse_count(const std::string& s, std::string_view column, std::size_t line_no) {
  std::uint64_t v = 0;
  const bool digits = !s.empty() && std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isdigit(c); });
  if (!digits) {
    throw ParseError("line " + std::to_string(line_no) + ": malformed " + std::string(column) + " '" + s + "'");
  }
  try {
    v = std::stoull(s);
  } catch (const std::exception&) {
    throw ParseError("line " + std::to_string(line_no) + ": malformed " + std::string(column) + " '" + s + "'");
  }
  return v;
}

}  // namespace detail

inline Dataset parse_dataset(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw ParseError("dataset: missing header row");
  const auto header = detail::split_tabs(line);
  std::unordered_map<std::string, std::size_t> col;
  for (std::size_t i = 0; i < header.size(); ++i) col[header[i]] = i;
  for (const char* required : {"wordform", "pronunciation", "lemma", "case", "number", "frequency", "gender"})
    if (!col.contains(required)) throw ParseError(std::string("dataset: missing required column '") + required + "'");

  auto optional_col = [&](const char* name) -> std::optional<std::size_t> {
    if (auto it = col.find(name); it != col.end()) return it->second;
    return std::nullopt;
  };
  const auto syl = optional_col("syllables");
  const auto role = optional_col("role");
  const auto role_freq = optional_col("role_frequency");
  const auto article = optional_col("article");
  const auto definiteness = optional_col("definiteness");

  std::vector<WordEntry> entries;
  std::size_t line_no = 1;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const auto f = detail::split_tabs(line);
    if (f.size() < header.size())
      throw ParseError("line " + std::to_string(line_no) + ": expected " + std::to_string(header.size()) +
                       " fields, got " + std::to_string(f.size()));
    auto field = [&](const char* name) -> const std::string& { return f[col.at(name)]; };
    auto opt_field = [&](const std::optional<std::size_t>& c) -> std::optional<std::string> {
      if (!c || f[*c].empty()) return std::nullopt;
      return f[*c];
    };

    WordEntry e;
    e.wordform = field("wordform");
    e.pronunciation = field("pronunciation");
    if (e.pronunciation.empty()) throw ParseError("line " + std::to_string(line_no) + ": empty pronunciation");
    e.lemma = field("lemma");
    e.gram_case = parse_case(field("case"));
    e.number = parse_number(field("number"));
    e.gender = parse_gender(field("gender"));
    e.frequency = detail::parse_count(field("frequency"), "frequency", line_no);
    e.syllabified = opt_field(syl);
    if (auto r = opt_field(role)) e.role = parse_role(*r);
    if (auto rf = opt_field(role_freq)) e.role_frequency = detail::parse_count(*rf, "role_frequency", line_no);
    if (auto a = opt_field(article)) e.article = *a;
    if (auto d = opt_field(definiteness)) e.definiteness = parse_definiteness(*d);
    try {
      validate_entry(e);
    } catch (const Error& err) {
      throw ParseError("line " + std::to_string(line_no) + ": " + err.what());
    }
    entries.push_back(std::move(e));
  }
  return Dataset(std::move(entries));
}

inline Dataset load_dataset(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open dataset '" + path + "'");
  return parse_dataset(in);
}

inline void write_dataset(std::ostream& os, const Dataset& d) {
  os << "wordform\tpronunciation\tlemma\tcase\tnumber\tfrequency\tgender\tsyllables\trole\trole_frequency"
        "\tarticle\tdefiniteness\n";
  for (const auto& e : d) {
    os << e.wordform << '\t' << e.pronunciation << '\t' << e.lemma << '\t' << to_string(e.gram_case) << '\t'
       << to_string(e.number) << '\t' << e.frequency << '\t' << to_string(e.gender) << '\t'
       << e.syllabified.value_or("") << '\t' << (e.role ? to_string(*e.role) : "") << '\t';
    if (e.role_frequency) os << *e.role_frequency;
    os << '\t' << e.article << '\t' << (e.definiteness ? to_string(*e.definiteness) : "") << '\n';
  }
}

// ---------------------------------------------------------------------------
// Articles

struct Article {
  std::string_view orthography;
  std::string_view disc;
  std::string_view disc_syllabified;
};

inline constexpr Article kDer{"der", "der", "der"};
inline constexpr Article kDie{"die", "di", "di"};
inline constexpr Article kDas{"das", "das", "das"};
inline constexpr Article kDem{"dem", "dem", "dem"};
inline constexpr Article kDen{"den", "den", "den"};
inline constexpr Article kDes{"des", "dEs", "dEs"};
inline constexpr Article kEin{"ein", "Bn", "Bn"};
inline constexpr Article kEine{"eine", "Bn@", "B-n@"};
inline constexpr Article kEinem{"einem", "Bn@m", "B-n@m"};
inline constexpr Article kEinen{"einen", "Bn@n", "B-n@n"};
inline constexpr Article kEiner{"einer", "Bn@r", "B-n@r"};
inline constexpr Article kEines{"eines", "Bn@s", "B-n@s"};

inline const Article& definite_article(Gender g, Case c, Number n) {
  if (n == Number::plural) {
    switch (c) {
      case Case::nominative:
      case Case::accusative: return kDie;
      case Case::genitive: return kDer;
      case Case::dative: return kDen;
    }
  }
  switch (g) {
    case Gender::masculine:
      switch (c) {
        case Case::nominative: return kDer;
        case Case::genitive: return kDes;
        case Case::dative: return kDem;
        case Case::accusative: return kDen;
      }
      break;
    case Gender::neuter:
      switch (c) {
        case Case::nominative:
        case Case::accusative: return kDas;
        case Case::genitive: return kDes;
        case Case::dative: return kDem;
      }
      break;
    case Gender::feminine:
      switch (c) {
        case Case::nominative:
        case Case::accusative: return kDie;
        case Case::genitive:
        case Case::dative: return kDer;
      }
      break;
  }
  throw InvalidArgument("unknown article cell");
}

/// Indefinite article of a singular cell. Plurals have none.
inline const Article& indefinite_article(Gender g, Case c) {
  if (g == Gender::feminine) {
    switch (c) {
      case Case::nominative:
      case Case::accusative: return kEine;
      case Case::genitive:
      case Case::dative: return kEiner;
    }
  }
  switch (c) {
    case Case::nominative: return kEin;
    case Case::genitive: return kEines;
    case Case::dative: return kEinem;
    case Case::accusative: return g == Gender::masculine ? kEinen : kEin;
  }
  throw InvalidArgument("unknown article cell");
}

enum class ArticleMode { none, definite, definite_and_indefinite };

inline ArticleMode parse_article_mode(std::string_view s) {
  if (s == "none") return ArticleMode::none;
  if (s == "definite") return ArticleMode::definite;
  if (s == "definite_and_indefinite") return ArticleMode::definite_and_indefinite;
  throw ParseError("unknown article mode '" + std::string(s) + "'");
}
inline std::string_view to_string(ArticleMode m) {
  switch (m) {
    case ArticleMode::none: return "none";
    case ArticleMode::definite: return "definite";
    case ArticleMode::definite_and_indefinite: return "definite_and_indefinite";
  }
  return "?";
}

namespace detail {

inline WordEntry with_article(WordEntry e, const Article& a, Definiteness d) {
  e.pronunciation = std::string(a.disc) + e.pronunciation;
  if (e.syllabified) e.syllabified = std::string(a.disc_syllabified) + "-" + *e.syllabified;
  e.article = std::string(a.orthography);
  e.definiteness = d;
  return e;
}

}  // namespace detail

/// Prefixes articles onto pronunciations (no separator). In
/// definite_and_indefinite mode the result is the definite copy followed by
/// the indefinite copy, whose plurals stay bare.
inline Dataset attach_articles(const Dataset& d, ArticleMode mode) {
  if (mode == ArticleMode::none) return d;
  std::vector<WordEntry> out;
  out.reserve(mode == ArticleMode::definite ? d.size() : 2 * d.size());
  for (const auto& e : d) {
    out.push_back(detail::with_article(e, definite_article(e.gender, e.gram_case, e.number), Definiteness::definite));
  }
  if (mode == ArticleMode::definite_and_indefinite) {
    for (const auto& e : d) {
      if (e.number == Number::singular) {
        out.push_back(detail::with_article(e, indefinite_article(e.gender, e.gram_case), Definiteness::indefinite));
      } else {
        WordEntry bare = e;
        bare.definiteness = Definiteness::indefinite;
        out.push_back(std::move(bare));
      }
    }
  }
  return Dataset(std::move(out));
}

// ---------------------------------------------------------------------------
// Splits

/// Ids in every set refer to the dataset that was split.
struct SplitResult {
  std::vector<std::size_t> train_ids;
  std::vector<std::size_t> val_ids;
  std::vector<std::size_t> homophone_val_ids;  // cue string also occurs in train
  std::vector<std::size_t> newform_val_ids;    // cue string absent from train
  std::vector<std::size_t> novel_lemma_ids;    // validation entries whose lemma is absent from train
  double requested_fraction = 0.0;
  double achieved_fraction = 0.0;
  Dataset train;
  Dataset validation;

  /// newform ids that take part in newform scoring.
  std::vector<std::size_t> scored_newform_ids() const {
    std::vector<std::size_t> out;
    std::set_difference(newform_val_ids.begin(), newform_val_ids.end(), novel_lemma_ids.begin(),
                        novel_lemma_ids.end(), std::back_inserter(out));
    return out;
  }
};

namespace detail {

inline void check_fraction(double f) {
  if (!(f > 0.0 && f < 1.0)) throw InvalidArgument("train fraction must lie strictly between 0 and 1");
}

inline SplitResult finish_split(const Dataset& d, std::vector<std::size_t> train, std::vector<std::size_t> val,
                                FormSource src, double fraction) {
  std::sort(train.begin(), train.end());
  std::sort(val.begin(), val.end());
  SplitResult r;
  std::unordered_set<std::string> train_forms;
  std::unordered_set<std::string> train_lemmas;
  for (auto id : train) {
    train_forms.insert(cue_string(d[id], src));
    train_lemmas.insert(d[id].lemma);
  }
  for (auto id : val) {
    if (train_forms.contains(cue_string(d[id], src)))
      r.homophone_val_ids.push_back(id);
    else
      r.newform_val_ids.push_back(id);
    if (!train_lemmas.contains(d[id].lemma)) r.novel_lemma_ids.push_back(id);
  }
  r.requested_fraction = fraction;
  r.achieved_fraction = d.empty() ? 0.0 : static_cast<double>(train.size()) / static_cast<double>(d.size());
  r.train = d.select(train);
  r.validation = d.select(val);
  r.train_ids = std::move(train);
  r.val_ids = std::move(val);
  return r;
}

inline std::size_t train_target(std::size_t n, double fraction) {
  return static_cast<std::size_t>(std::llround(fraction * static_cast<double>(n)));
}

}  // namespace detail

inline SplitResult split_random(const Dataset& d, double train_fraction, std::uint64_t seed,
                                FormSource src = FormSource::pronunciation) {
  detail::check_fraction(train_fraction);
  std::vector<std::size_t> order(d.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(seed);
  rng.shuffle(order);
  const std::size_t n_train = detail::train_target(d.size(), train_fraction);
  std::vector<std::size_t> train(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_train));
  std::vector<std::size_t> val(order.begin() + static_cast<std::ptrdiff_t>(n_train), order.end());
  return detail::finish_split(d, std::move(train), std::move(val), src, train_fraction);
}

/// Random split repaired so that validation holds no cue unseen in train.
///
/// Validation entries with unseen cues move to train; validation is then
/// refilled (in shuffled order) from train entries all of whose cues are
/// attested by at least one other train entry. The achieved fraction may
/// exceed the requested one when too few candidates qualify.
inline SplitResult split_no_novel_cues(const Dataset& d, double train_fraction, std::uint64_t seed,
                                       const CueConfig& cfg, FormSource src) {
  detail::check_fraction(train_fraction);
  const std::size_t n = d.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(seed);
  rng.shuffle(order);
  const std::size_t n_train = detail::train_target(n, train_fraction);
  const std::size_t val_target = n - n_train;

  std::vector<std::vector<std::string>> grams(n);
  for (std::size_t i = 0; i < n; ++i) {
    grams[i] = extract_grams(cue_string(d[i], src), cfg);
    std::sort(grams[i].begin(), grams[i].end());
    grams[i].erase(std::unique(grams[i].begin(), grams[i].end()), grams[i].end());
  }

  std::vector<char> in_train(n, 0);
  for (std::size_t k = 0; k < n_train; ++k) in_train[order[k]] = 1;
  std::unordered_map<std::string, std::size_t> count;
  for (std::size_t i = 0; i < n; ++i)
    if (in_train[i])
      for (const auto& g : grams[i]) ++count[g];

  auto covered = [&](std::size_t i) {
    return std::all_of(grams[i].begin(), grams[i].end(), [&](const std::string& g) {
      auto it = count.find(g);
      return it != count.end() && it->second > 0;
    });
  };

  // Moving an entry into train can only add coverage, so repeat until stable.
  bool moved = true;
  while (moved) {
    moved = false;
    for (auto id : order) {
      if (in_train[id] || covered(id)) continue;
      in_train[id] = 1;
      for (const auto& g : grams[id]) ++count[g];
      moved = true;
    }
  }

  std::size_t n_val = 0;
  for (std::size_t i = 0; i < n; ++i) n_val += in_train[i] ? 0 : 1;

  for (auto id : order) {
    if (n_val >= val_target) break;
    if (!in_train[id]) continue;
    const bool removable = std::all_of(grams[id].begin(), grams[id].end(),
                                       [&](const std::string& g) { return count[g] >= 2; });
    if (!removable) continue;
    in_train[id] = 0;
    for (const auto& g : grams[id]) --count[g];
    ++n_val;
  }

  std::vector<std::size_t> train, val;
  for (std::size_t i = 0; i < n; ++i) (in_train[i] ? train : val).push_back(i);
  return detail::finish_split(d, std::move(train), std::move(val), src, train_fraction);
}

inline nlohmann::json split_sidecar(const SplitResult& s) {
  return nlohmann::json{{"requested_fraction", s.requested_fraction},
                        {"achieved_fraction", s.achieved_fraction},
                        {"train_ids", s.train_ids},
                        {"validation_ids", s.val_ids},
                        {"homophone_ids", s.homophone_val_ids},
                        {"newform_ids", s.newform_val_ids},
                        {"novel_lemma_ids", s.novel_lemma_ids}};
}

// ---------------------------------------------------------------------------
// Semantic roles and token frequencies

/// Role distribution per case.
struct RoleTable {
  std::map<Case, std::vector<std::pair<Role, double>>> by_case;

  void validate() const {
    for (const auto& [c, roles] : by_case) {
      double sum = 0.0;
      for (const auto& [r, p] : roles) {
        if (p < 0.0) throw InvalidArgument("negative role probability");
        sum += p;
      }
      if (std::abs(sum - 1.0) > 1e-9)
        throw InvalidArgument("role probabilities for " + std::string(to_string(c)) + " do not sum to 1");
    }
  }

  const std::vector<std::pair<Role, double>>& roles(Case c) const {
    auto it = by_case.find(c);
    if (it == by_case.end()) throw InvalidArgument("no roles for case " + std::string(to_string(c)));
    return it->second;
  }
};

inline RoleTable default_role_table() {
  RoleTable t;
  t.by_case[Case::nominative] = {{Role::agent, 0.5}, {Role::theme, 0.4}, {Role::patient, 0.1}};
  t.by_case[Case::genitive] = {{Role::possessive, 0.9}, {Role::partitive, 0.1}};
  t.by_case[Case::dative] = {{Role::beneficiary, 0.5}, {Role::location, 0.5}};
  t.by_case[Case::accusative] = {{Role::patient, 0.4}, {Role::motion, 0.3}, {Role::experiencer, 0.3}};
  return t;
}

enum class RoleRounding {
  largest_remainder,  // totals never exceed the form frequency
  ceiling,            // rounds every share up
};

inline RoleRounding parse_role_rounding(std::string_view s) {
  if (s == "largest_remainder") return RoleRounding::largest_remainder;
  if (s == "ceiling") return RoleRounding::ceiling;
  throw ParseError("unknown role rounding '" + std::string(s) + "'");
}

/// Role slot inside one paradigm cell.
struct RoleSlot {
  double probability = 0.0;
  bool survives = true;
};

/// Integer token counts for the role slots of one word form.
///
/// The form frequency is split equally over the cells; within a cell each
/// surviving role gets a share proportional to its probability renormalized
/// over the survivors.
inline std::vector<std::vector<std::uint64_t>> allocate_role_frequencies(
    std::uint64_t form_frequency, const std::vector<std::vector<RoleSlot>>& cells, RoleRounding rounding) {
  std::vector<std::vector<std::uint64_t>> out(cells.size());
  if (cells.empty()) return out;
  const double freq_p = static_cast<double>(form_frequency) / static_cast<double>(cells.size());

  struct Share {
    std::size_t cell, slot;
    double exact;
  };
  std::vector<Share> shares;
  for (std::size_t c = 0; c < cells.size(); ++c) {
    out[c].assign(cells[c].size(), 0);
    double mass = 0.0;
    for (const auto& s : cells[c])
      if (s.survives) mass += s.probability;
    if (mass <= 0.0) continue;
    for (std::size_t k = 0; k < cells[c].size(); ++k)
      if (cells[c][k].survives) shares.push_back({c, k, freq_p * cells[c][k].probability / mass});
  }

  if (rounding == RoleRounding::ceiling) {
    for (const auto& s : shares) out[s.cell][s.slot] = static_cast<std::uint64_t>(std::ceil(s.exact - 1e-9));
    return out;
  }

  double exact_total = 0.0;
  std::uint64_t floor_total = 0;
  for (const auto& s : shares) {
    exact_total += s.exact;
    const auto fl = static_cast<std::uint64_t>(std::floor(s.exact + 1e-9));
    out[s.cell][s.slot] = fl;
    floor_total += fl;
  }
  const auto target = static_cast<std::uint64_t>(std::floor(exact_total + 1e-9));
  std::vector<std::size_t> order(shares.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  auto remainder = [&](const Share& s) { return s.exact - std::floor(s.exact + 1e-9); };
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const double ra = remainder(shares[a]), rb = remainder(shares[b]);
    if (std::abs(ra - rb) > 1e-12) return ra > rb;
    return shares[a].exact > shares[b].exact;
  });
  for (std::size_t k = 0; k < order.size() && floor_total < target; ++k, ++floor_total)
    ++out[shares[order[k]].cell][shares[order[k]].slot];
  return out;
}

/// Expands every entry into one entry per semantic role of its case, with
/// simulated role frequencies. Each role of a cell is independently dropped
/// with probability 1/K, K being the number of roles of that case.
inline Dataset simulate_role_frequencies(const Dataset& d, const RoleTable& table, std::uint64_t seed,
                                         RoleRounding rounding = RoleRounding::largest_remainder) {
  table.validate();
  // A word form is identified by everything but its paradigm cell.
  auto form_key = [](const WordEntry& e) {
    return e.lemma + '\t' + e.wordform + '\t' + e.pronunciation + '\t' + e.article + '\t' +
           (e.definiteness ? std::string(to_string(*e.definiteness)) : std::string());
  };
  std::unordered_map<std::string, std::size_t> group_of;
  std::vector<std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < d.size(); ++i) {
    auto [it, inserted] = group_of.try_emplace(form_key(d[i]), groups.size());
    if (inserted) groups.emplace_back();
    groups[it->second].push_back(i);
  }

  Rng rng(seed);
  std::vector<std::vector<std::vector<RoleSlot>>> slots(groups.size());
  for (std::size_t g = 0; g < groups.size(); ++g) {
    for (auto id : groups[g]) {
      const auto& roles = table.roles(d[id].gram_case);
      const double p_drop = 1.0 / static_cast<double>(roles.size());
      std::vector<RoleSlot> cell;
      for (const auto& [role, prob] : roles) cell.push_back({prob, !rng.bernoulli(p_drop)});
      slots[g].push_back(std::move(cell));
    }
  }

  std::vector<std::vector<std::vector<std::uint64_t>>> alloc(groups.size());
  for (std::size_t g = 0; g < groups.size(); ++g)
    alloc[g] = allocate_role_frequencies(d[groups[g].front()].frequency, slots[g], rounding);

  // Emit in dataset order.
  std::vector<std::pair<std::size_t, std::size_t>> where(d.size());
  for (std::size_t g = 0; g < groups.size(); ++g)
    for (std::size_t c = 0; c < groups[g].size(); ++c) where[groups[g][c]] = {g, c};

  std::vector<WordEntry> out;
  for (std::size_t i = 0; i < d.size(); ++i) {
    const auto [g, c] = where[i];
    const auto& roles = table.roles(d[i].gram_case);
    for (std::size_t k = 0; k < roles.size(); ++k) {
      WordEntry e = d[i];
      e.role = roles[k].first;
      e.role_frequency = alloc[g][c][k];
      out.push_back(std::move(e));
    }
  }
  return Dataset(std::move(out));
}

/// Each entry id repeated token_count() times, shuffled once.
inline std::vector<std::size_t> sample_token_stream(const Dataset& d, std::uint64_t seed) {
  std::vector<std::size_t> stream;
  for (std::size_t i = 0; i < d.size(); ++i)
    for (std::uint64_t k = 0; k < d[i].token_count(); ++k) stream.push_back(i);
  if (stream.empty()) throw InvalidArgument("token stream: all frequencies are zero");
  Rng rng(seed);
  rng.shuffle(stream);
  return stream;
}

/// Keeps all entries of `count` lemmas drawn at random (without replacement).
inline Dataset subsample_lemmas(const Dataset& d, std::size_t count, std::uint64_t seed) {
  std::vector<std::string> lemmas;
  std::unordered_set<std::string> seen;
  for (const auto& e : d)
    if (seen.insert(e.lemma).second) lemmas.push_back(e.lemma);
  if (count >= lemmas.size()) return d;
  Rng rng(seed);
  rng.shuffle(lemmas);
  std::unordered_set<std::string> keep(lemmas.begin(), lemmas.begin() + static_cast<std::ptrdiff_t>(count));
  std::vector<WordEntry> out;
  for (const auto& e : d)
    if (keep.contains(e.lemma)) out.push_back(e);
  return Dataset(std::move(out));
}

}  // namespace ldl

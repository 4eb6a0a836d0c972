#pragma once

// Synthetic German-like noun paradigms. Used for demo data, tests and the
// acceptance suite where the licensed corpus is not available.

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include <Eigen/Dense>

#include "ldl/cues.hpp"
#include "ldl/lexicon.hpp"
#include "ldl/random.hpp"

namespace ldl::synthetic {

struct Segment {
  std::string_view orth;
  std::string_view disc;
};

inline constexpr std::array<Segment, 26> kOnsets = {{
    {"B", "b"},   {"Br", "br"}, {"D", "d"},   {"F", "f"},   {"G", "g"},   {"Gr", "gr"}, {"H", "h"},
    {"K", "k"},   {"Kl", "kl"}, {"Kr", "kr"}, {"L", "l"},   {"M", "m"},   {"N", "n"},   {"P", "p"},
    {"Pf", "pf"}, {"R", "r"},   {"S", "z"},   {"Sch", "S"}, {"Sp", "Sp"}, {"St", "St"}, {"T", "t"},
    {"Tr", "tr"}, {"V", "f"},   {"W", "v"},   {"Z", "="},   {"Fl", "fl"},
}};

inline constexpr std::array<Segment, 10> kVowels = {{
    {"a", "a"}, {"e", "e"}, {"i", "I"}, {"o", "o"}, {"u", "U"}, {"au", "W"}, {"ei", "B"}, {"uh", "u"}, {"ah", "a"},
    {"ie", "i"},
}};

inline constexpr std::array<Segment, 23> kCodas = {{
    {"l", "l"},  {"n", "n"},   {"m", "m"},   {"t", "t"},  {"d", "t"},  {"k", "k"},  {"ch", "x"}, {"sch", "S"},
    {"nd", "nt"}, {"rt", "rt"}, {"ng", "N"}, {"f", "f"},  {"p", "p"},  {"st", "st"}, {"nt", "nt"}, {"ll", "l"},
    {"tt", "t"}, {"hl", "l"},  {"r", "r"},   {"ck", "k"}, {"rn", "rn"}, {"lt", "lt"}, {"g", "k"},
}};

enum class PluralClass { en, e, er, zero, s };

struct Suffix {
  std::string orth;
  std::string disc;
};

/// Paradigm of one synthetic lexeme: the eight case/number cells.
struct Lexeme {
  std::string stem_orth;
  std::string stem_disc;
  Gender gender = Gender::masculine;
  PluralClass plural = PluralClass::en;
};

inline Suffix plural_suffix(PluralClass c) {
  switch (c) {
    case PluralClass::en: return {"en", "@n"};
    case PluralClass::e: return {"e", "@"};
    case PluralClass::er: return {"er", "6"};
    case PluralClass::zero: return {"", ""};
    case PluralClass::s: return {"s", "s"};
  }
  return {"", ""};
}

inline Suffix cell_suffix(const Lexeme& lx, Case c, Number n) {
  if (n == Number::plural) {
    Suffix s = plural_suffix(lx.plural);
    const std::string surface = lx.stem_orth + s.orth;
    if (c == Case::dative && !surface.ends_with('n') && !surface.ends_with('s')) {
      s.orth += "n";
      s.disc += "n";
    }
    return s;
  }
  if (c == Case::genitive && lx.gender != Gender::feminine) {
    if (lx.plural == PluralClass::en && lx.gender == Gender::masculine) return {"en", "@n"};
    if (lx.plural == PluralClass::s) return {"s", "s"};
    return {"es", "@s"};
  }
  if (lx.plural == PluralClass::en && lx.gender == Gender::masculine && c != Case::nominative) return {"en", "@n"};
  return {"", ""};
}

/// Syllables: one for the stem, and a new one for a schwa-initial suffix.
inline std::string syllabify(const std::string& stem_disc, const std::string& suffix_disc) {
  if (suffix_disc.empty()) return stem_disc;
  if (suffix_disc.front() == '@' || suffix_disc.front() == '6') return stem_disc + "-" + suffix_disc;
  return stem_disc + suffix_disc;
}

struct LexiconParams {
  std::size_t lemmas = 100;
  std::uint64_t seed = 1;
  double zipf_exponent = 1.0;
  std::uint64_t max_frequency = 1000;
  /// Stems (orthographic) that must not be generated, e.g. nonce words.
  std::unordered_set<std::string> exclude;
};

inline PluralClass draw_plural(Rng& rng) {
  // Type frequencies of German plural classes (-(e)n, -e, -er, -0, -s).
  constexpr std::array<double, 5> weights = {56.5, 23.9, 2.3, 13.3, 2.6};
  double total = 0.0;
  for (double w : weights) total += w;
  double u = rng.uniform() * total;
  for (std::size_t k = 0; k < weights.size(); ++k) {
    if (u < weights[k]) return static_cast<PluralClass>(k);
    u -= weights[k];
  }
  return PluralClass::en;
}

inline std::vector<Lexeme> generate_lexemes(std::size_t count, Rng& rng,
                                            const std::unordered_set<std::string>& exclude = {}) {
  std::vector<Lexeme> out;
  std::unordered_set<std::string> used = exclude;
  std::size_t attempts = 0;
  while (out.size() < count) {
    if (++attempts > 200 * count + 10000) throw InvalidArgument("synthetic: cannot generate enough distinct stems");
    const auto& on = kOnsets[rng.below(kOnsets.size())];
    const auto& vo = kVowels[rng.below(kVowels.size())];
    const auto& co = kCodas[rng.below(kCodas.size())];
    Lexeme lx;
    lx.stem_orth = std::string(on.orth) + std::string(vo.orth) + std::string(co.orth);
    lx.stem_disc = std::string(on.disc) + std::string(vo.disc) + std::string(co.disc);
    if (!used.insert(lx.stem_orth).second) continue;
    lx.plural = draw_plural(rng);
    if (lx.plural == PluralClass::en && rng.bernoulli(0.6)) {
      lx.gender = Gender::feminine;
    } else {
      const auto g = rng.below(3);
      lx.gender = g == 0 ? Gender::masculine : g == 1 ? Gender::neuter : Gender::feminine;
    }
    out.push_back(std::move(lx));
  }
  return out;
}

/// All eight paradigm cells of each lexeme. Each distinct word form gets a
/// Zipfian frequency max_frequency / rank^exponent from a random ranking;
/// cells realizing the same form share it.
inline Dataset paradigm_dataset(const std::vector<Lexeme>& lexemes, Rng& rng, double zipf_exponent,
                                std::uint64_t max_frequency) {
  std::vector<WordEntry> entries;
  for (const auto& lx : lexemes) {
    for (auto n : {Number::singular, Number::plural}) {
      for (auto c : kCases) {
        const auto sfx = cell_suffix(lx, c, n);
        WordEntry e;
        e.wordform = lx.stem_orth + sfx.orth;
        e.pronunciation = lx.stem_disc + sfx.disc;
        e.syllabified = syllabify(lx.stem_disc, sfx.disc);
        e.lemma = lx.stem_orth;
        e.gram_case = c;
        e.number = n;
        e.gender = lx.gender;
        entries.push_back(std::move(e));
      }
    }
  }
  std::vector<std::string> forms;
  std::unordered_map<std::string, std::size_t> form_index;
  for (const auto& e : entries)
    if (form_index.try_emplace(e.lemma + "\t" + e.wordform, forms.size()).second) forms.push_back(e.wordform);
  std::vector<std::size_t> rank(forms.size());
  std::iota(rank.begin(), rank.end(), std::size_t{1});
  rng.shuffle(rank);
  for (auto& e : entries) {
    const auto r = static_cast<double>(rank[form_index.at(e.lemma + "\t" + e.wordform)]);
    e.frequency = std::max<std::uint64_t>(
        1, static_cast<std::uint64_t>(std::llround(static_cast<double>(max_frequency) / std::pow(r, zipf_exponent))));
  }
  return Dataset(std::move(entries));
}

inline Dataset generate_lexicon(const LexiconParams& p) {
  Rng rng(p.seed);
  const auto lexemes = generate_lexemes(p.lemmas, rng, p.exclude);
  return paradigm_dataset(lexemes, rng, p.zipf_exponent, p.max_frequency);
}

/// Distinct-form lexicon whose cue rows are linearly independent. Forms are
/// drawn from generated paradigms and kept only when they raise the rank of
/// the cue matrix.
inline Dataset independent_lexicon(std::size_t forms, std::uint64_t seed, const CueConfig& cfg,
                                   FormSource src = FormSource::pronunciation) {
  Rng rng(seed);
  std::vector<WordEntry> kept;
  std::unordered_set<std::string> seen_forms;
  CueInventory inv;
  std::vector<std::vector<std::string>> kept_grams;
  Eigen::Index rank = 0;
  std::size_t rounds = 0;
  while (kept.size() < forms) {
    if (++rounds > 1000) throw InvalidArgument("independent_lexicon: could not reach requested size");
    const auto batch = paradigm_dataset(generate_lexemes(8, rng), rng, 1.0, 100);
    for (const auto& e : batch) {
      if (kept.size() >= forms) break;
      const auto form = cue_string(e, src);
      if (seen_forms.contains(form)) continue;
      // Rank test over the candidate's own grams plus all kept rows.
      CueInventory trial = inv;
      const auto grams = extract_grams(form, cfg);
      for (const auto& g : grams) trial.add(g);
      Eigen::MatrixXd X = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(kept.size() + 1),
                                                static_cast<Eigen::Index>(trial.size()));
      for (std::size_t i = 0; i < kept_grams.size(); ++i)
        for (const auto& g : kept_grams[i]) X(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(*trial.find(g))) = 1.0;
      for (const auto& g : grams) X(static_cast<Eigen::Index>(kept.size()), static_cast<Eigen::Index>(*trial.find(g))) = 1.0;
      Eigen::FullPivLU<Eigen::MatrixXd> lu(X);
      if (lu.rank() != rank + 1) continue;
      rank = lu.rank();
      inv = std::move(trial);
      kept_grams.push_back(grams);
      seen_forms.insert(form);
      kept.push_back(e);
    }
  }
  return Dataset(std::move(kept));
}

}  // namespace ldl::synthetic

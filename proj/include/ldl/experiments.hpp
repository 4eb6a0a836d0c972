#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <istream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "ldl/comprehension.hpp"
#include "ldl/cues.hpp"
#include "ldl/error.hpp"
#include "ldl/lexicon.hpp"
#include "ldl/mappings.hpp"
#include "ldl/production.hpp"
#include "ldl/semantics.hpp"
#include "ldl/stats.hpp"
#include "ldl/synthetic.hpp"

namespace ldl::experiments {

using json = nlohmann::json;

// ---------------------------------------------------------------------------
// Configuration

inline const std::map<std::string, std::string>& config_defaults() {
  static const std::map<std::string, std::string> defaults = {
      {"data.path", ""},
      {"data.synthetic.lemmas", "100"},
      {"data.synthetic.seed", "1"},
      {"data.synthetic.zipf_exponent", "1"},
      {"data.synthetic.max_frequency", "1000"},
      {"data.subsample_lemmas", "0"},
      {"data.articles", "none"},
      {"cues.unit", "phone"},
      {"cues.n", "3"},
      {"cues.form", "auto"},
      {"semantics.mode", "simulate"},
      {"semantics.dim", "auto"},
      {"semantics.sd_lexeme", "4"},
      {"semantics.sd_feature", "4"},
      {"semantics.sd_noise", "1"},
      {"semantics.feature_scale", "1"},
      {"semantics.scheme", "case"},
      {"semantics.number", "equipollent"},
      {"semantics.definiteness", "false"},
      {"semantics.embeddings", ""},
      {"semantics.center_features", "false"},
      {"split.mode", "random"},
      {"split.fraction", "0.9"},
      {"seeds.split", "1"},
      {"seeds.semantics", "2"},
      {"seeds.stream", "3"},
      {"learning.eta", "0.001"},
      {"learning.checkpoints", "10"},
      {"comprehension.pool", "all"},
      {"roles.simulate", "false"},
      {"roles.rounding", "largest_remainder"},
      {"production.enabled", "true"},
      {"production.k", "10"},
      {"production.theta", "auto"},
      {"production.tolerance", "false"},
      {"production.max_tolerated", "2"},
      {"production.tolerance_floor", "-inf"},
      {"production.max_paths", "20000"},
      {"production.margin", "2"},
      {"production.input", "predicted_cues"},
      {"analyses.frequency_effect", "true"},
      {"analyses.error_analysis", "true"},
      {"analyses.trajectory", "true"},
      {"prune.thresholds", ""},
      {"prune.fractions", "0,0.1,0.2,0.3,0.4,0.5,0.6,0.7,0.8,0.9,1"},
      {"wug.min_candidates", "5"},
      {"wug.relax_steps", "8"},
      {"wug.top", "5"},
      {"output.dir", "out"},
  };
  return defaults;
}

inline std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

/// Flat dotted key=value settings over a fixed table of defaults.
class Config {
 public:
  Config() : values_(config_defaults()) {}

  static Config parse(std::istream& is, std::string_view origin = "config") {
    Config c;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(is, line)) {
      ++line_no;
      const auto t = trim(line);
      if (t.empty() || t.front() == '#') continue;
      const auto eq = t.find('=');
      if (eq == std::string::npos)
        throw ConfigError(std::string(origin) + ":" + std::to_string(line_no) + ": expected key=value");
      c.set(trim(std::string_view(t).substr(0, eq)), trim(std::string_view(t).substr(eq + 1)));
    }
    return c;
  }

  static Config load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config '" + path + "'");
    return parse(in, path);
  }

  void set(const std::string& key, const std::string& value) {
    auto it = values_.find(key);
    if (it == values_.end()) throw ConfigError("unknown config key '" + key + "'");
    it->second = value;
  }

  /// "key=value" as given to --set.
  void apply_override(std::string_view kv) {
    const auto eq = kv.find('=');
    if (eq == std::string_view::npos) throw ConfigError("override '" + std::string(kv) + "' is not key=value");
    set(trim(kv.substr(0, eq)), trim(kv.substr(eq + 1)));
  }

  const std::string& str(const std::string& key) const {
    auto it = values_.find(key);
    if (it == values_.end()) throw ConfigError("unknown config key '" + key + "'");
    return it->second;
  }

  double real(const std::string& key) const { return to_real(key, str(key)); }

  std::uint64_t count(const std::string& key) const {
    const auto& v = str(key);
    std::uint64_t out = 0;
    const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || p != v.data() + v.size() || v.empty())
      throw ConfigError(key + ": expected a non-negative integer, got '" + v + "'");
    return out;
  }

  bool flag(const std::string& key) const {
    const auto& v = str(key);
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw ConfigError(key + ": expected true or false, got '" + v + "'");
  }

  std::vector<double> reals(const std::string& key) const {
    std::vector<double> out;
    std::stringstream ss(str(key));
    std::string item;
    while (std::getline(ss, item, ',')) {
      const auto t = trim(item);
      if (!t.empty()) out.push_back(to_real(key, t));
    }
    return out;
  }

  /// Every key in sorted order, one key=value per line.
  std::string resolved() const {
    std::string out;
    for (const auto& [k, v] : values_) out += k + "=" + v + "\n";
    return out;
  }

  json to_json() const { return json(values_); }

 private:
  static double to_real(const std::string& key, const std::string& v) {
    char* end = nullptr;
    const double d = std::strtod(v.c_str(), &end);
    if (v.empty() || end != v.c_str() + v.size()) throw ConfigError(key + ": expected a number, got '" + v + "'");
    return d;
  }

  std::map<std::string, std::string> values_;
};

enum class SemanticsMode { simulate, embeddings, analytical };
enum class PoolMode { all, train };

/// Default support threshold per cue type: biphones 0.05, triphones 0.008,
/// quadraphones 0.005, bisyllables 0.005, letter trigrams 0.008.
inline double default_theta(const CueConfig& cues) {
  switch (cues.unit) {
    case CueUnit::phone:
      if (cues.n == 2) return 0.05;
      if (cues.n == 3) return 0.008;
      return 0.005;
    case CueUnit::syllable: return 0.005;
    case CueUnit::letter: return cues.n == 2 ? 0.05 : 0.008;
  }
  return 0.008;
}
enum class SplitMode { random, no_novel_cues, none };

/// Typed, validated view of a Config.
struct Settings {
  std::string data_path;
  synthetic::LexiconParams synthetic;
  std::size_t subsample_lemmas = 0;
  ArticleMode articles = ArticleMode::none;

  CueConfig cues;
  FormSource form = FormSource::pronunciation;

  SemanticsMode semantics = SemanticsMode::simulate;
  SimulationParams sim;
  bool dim_auto = true;  // dimension = number of cues over the whole dataset
  std::string embeddings_path;
  AnalyticalOptions analytical;

  SplitMode split = SplitMode::random;
  double split_fraction = 0.9;
  PoolMode pool = PoolMode::all;

  std::uint64_t seed_split = 1;
  std::uint64_t seed_semantics = 2;
  std::uint64_t seed_stream = 3;

  double eta = 0.001;
  std::size_t checkpoints = 10;

  bool simulate_roles = false;
  RoleRounding rounding = RoleRounding::largest_remainder;

  bool production = true;
  PathParams path;
  std::size_t margin = 2;
  PositionalInput positional_input = PositionalInput::predicted_cues;

  bool frequency_effect = true;
  bool error_analysis = true;
  bool trajectory = true;

  std::vector<double> prune_thresholds;
  std::vector<double> prune_fractions;

  std::size_t wug_min_candidates = 5;
  std::size_t wug_relax_steps = 8;
  std::size_t wug_top = 5;

  std::string output_dir;
};

inline Settings resolve(const Config& c) {
  Settings s;
  s.data_path = c.str("data.path");
  s.synthetic.lemmas = c.count("data.synthetic.lemmas");
  s.synthetic.seed = c.count("data.synthetic.seed");
  s.synthetic.zipf_exponent = c.real("data.synthetic.zipf_exponent");
  s.synthetic.max_frequency = c.count("data.synthetic.max_frequency");
  s.subsample_lemmas = c.count("data.subsample_lemmas");
  s.articles = parse_article_mode(c.str("data.articles"));

  s.cues.unit = parse_cue_unit(c.str("cues.unit"));
  s.cues.n = c.count("cues.n");
  s.cues.validate();
  s.form = c.str("cues.form") == "auto" ? default_form_source(s.cues.unit) : parse_form_source(c.str("cues.form"));

  const auto& mode = c.str("semantics.mode");
  if (mode == "simulate")
    s.semantics = SemanticsMode::simulate;
  else if (mode == "embeddings")
    s.semantics = SemanticsMode::embeddings;
  else if (mode == "analytical")
    s.semantics = SemanticsMode::analytical;
  else
    throw ConfigError("semantics.mode: unknown mode '" + mode + "'");
  s.dim_auto = c.str("semantics.dim") == "auto";
  if (!s.dim_auto) s.sim.dim = static_cast<Eigen::Index>(c.count("semantics.dim"));
  s.sim.sd_lexeme = c.real("semantics.sd_lexeme");
  s.sim.sd_feature = c.real("semantics.sd_feature");
  s.sim.sd_noise = c.real("semantics.sd_noise");
  s.sim.feature_scale = c.real("semantics.feature_scale");
  const auto& scheme = c.str("semantics.scheme");
  if (scheme == "case")
    s.sim.scheme = InflectionScheme::case_labels;
  else if (scheme == "role")
    s.sim.scheme = InflectionScheme::semantic_roles;
  else
    throw ConfigError("semantics.scheme: expected case or role, got '" + scheme + "'");
  const auto& number = c.str("semantics.number");
  if (number == "equipollent")
    s.sim.number = NumberCoding::equipollent;
  else if (number == "privative")
    s.sim.number = NumberCoding::privative;
  else
    throw ConfigError("semantics.number: expected equipollent or privative, got '" + number + "'");
  s.sim.definiteness = c.flag("semantics.definiteness");
  s.embeddings_path = c.str("semantics.embeddings");
  s.analytical.center_features = c.flag("semantics.center_features");

  const auto& split = c.str("split.mode");
  if (split == "random")
    s.split = SplitMode::random;
  else if (split == "no_novel_cues")
    s.split = SplitMode::no_novel_cues;
  else if (split == "none")
    s.split = SplitMode::none;
  else
    throw ConfigError("split.mode: expected random, no_novel_cues or none, got '" + split + "'");
  s.split_fraction = c.real("split.fraction");
  const auto& pool = c.str("comprehension.pool");
  if (pool == "all")
    s.pool = PoolMode::all;
  else if (pool == "train")
    s.pool = PoolMode::train;
  else
    throw ConfigError("comprehension.pool: expected all or train, got '" + pool + "'");

  s.seed_split = c.count("seeds.split");
  s.seed_semantics = c.count("seeds.semantics");
  s.seed_stream = c.count("seeds.stream");

  s.eta = c.real("learning.eta");
  s.checkpoints = c.count("learning.checkpoints");
  s.simulate_roles = c.flag("roles.simulate");
  s.rounding = parse_role_rounding(c.str("roles.rounding"));

  s.production = c.flag("production.enabled");
  s.path.k = c.count("production.k");
  s.path.theta = c.str("production.theta") == "auto" ? default_theta(s.cues) : c.real("production.theta");
  s.path.tolerance = c.flag("production.tolerance");
  s.path.max_tolerated = c.count("production.max_tolerated");
  s.path.tolerance_floor = c.real("production.tolerance_floor");
  s.path.max_paths = c.count("production.max_paths");
  s.margin = c.count("production.margin");
  const auto& input = c.str("production.input");
  if (input == "predicted_cues")
    s.positional_input = PositionalInput::predicted_cues;
  else if (input == "semantics")
    s.positional_input = PositionalInput::semantics;
  else
    throw ConfigError("production.input: expected predicted_cues or semantics, got '" + input + "'");

  s.frequency_effect = c.flag("analyses.frequency_effect");
  s.error_analysis = c.flag("analyses.error_analysis");
  s.trajectory = c.flag("analyses.trajectory");
  s.prune_thresholds = c.reals("prune.thresholds");
  s.prune_fractions = c.reals("prune.fractions");
  s.wug_min_candidates = c.count("wug.min_candidates");
  s.wug_relax_steps = c.count("wug.relax_steps");
  s.wug_top = c.count("wug.top");
  s.output_dir = c.str("output.dir");

  if (s.semantics == SemanticsMode::simulate && !s.dim_auto && s.sim.dim < 1) throw ConfigError("semantics.dim must be >= 1");
  if (s.semantics != SemanticsMode::simulate && s.embeddings_path.empty())
    throw ConfigError("semantics.mode=" + mode + " requires semantics.embeddings");
  if (s.semantics == SemanticsMode::analytical && s.sim.scheme == InflectionScheme::semantic_roles)
    throw ConfigError("analytical semantics supports only the case scheme");
  if (s.sim.definiteness && s.articles != ArticleMode::definite_and_indefinite)
    throw ConfigError("semantics.definiteness requires data.articles=definite_and_indefinite");
  if (s.split != SplitMode::none && !(s.split_fraction > 0.0 && s.split_fraction < 1.0))
    throw ConfigError("split.fraction must lie strictly between 0 and 1");
  if (!(s.eta > 0.0)) throw ConfigError("learning.eta must be positive");
  if (s.checkpoints < 1) throw ConfigError("learning.checkpoints must be >= 1");
  if (s.production && s.cues.n < 2) throw ConfigError("production requires cues.n >= 2");
  if (s.path.k < 1) throw ConfigError("production.k must be >= 1");
  if (s.output_dir.empty()) throw ConfigError("output.dir must not be empty");
  for (double f : s.prune_fractions)
    if (f < 0.0 || f > 1.0) throw ConfigError("prune.fractions must lie in [0, 1]");
  return s;
}

inline json seeds_json(const Settings& s) {
  return {{"split", s.seed_split}, {"semantics", s.seed_semantics}, {"stream", s.seed_stream}};
}

// ---------------------------------------------------------------------------
// Data preparation

inline Dataset load_corpus(const Settings& s) {
  Dataset d = s.data_path.empty() ? synthetic::generate_lexicon(s.synthetic) : load_dataset(s.data_path);
  if (d.empty()) throw InvalidArgument("dataset is empty");
  if (s.subsample_lemmas > 0) d = subsample_lemmas(d, s.subsample_lemmas, s.seed_split);
  d = attach_articles(d, s.articles);
  if (s.simulate_roles) d = simulate_role_frequencies(d, default_role_table(), s.seed_stream, s.rounding);
  if (s.sim.scheme == InflectionScheme::semantic_roles)
    for (const auto& e : d)
      if (!e.role) throw ConfigError("semantics.scheme=role requires a role column or roles.simulate=true");
  return d;
}

struct Semantics {
  Dataset data;  // entries that received a semantic row
  SemanticSpace space;
  std::vector<std::string> missing;  // word forms without an embedding
};

inline Semantics build_semantics(const Settings& s, Dataset d) {
  Semantics out;
  if (s.semantics == SemanticsMode::simulate) {
    SimulationParams sim = s.sim;
    if (s.dim_auto) {
      const auto forms = d.cue_strings(s.form);
      sim.dim = static_cast<Eigen::Index>(build_inventory(forms, s.cues).size());
    }
    out.space = simulate_vectors(d, sim, s.seed_semantics);
    out.data = std::move(d);
    return out;
  }
  auto emb = load_embeddings(s.embeddings_path, d);
  if (emb.kept.empty()) throw InvalidArgument("no entry has an embedding");
  out.missing = std::move(emb.missing);
  out.data = std::move(emb.kept);
  if (s.semantics == SemanticsMode::analytical)
    out.space = reconstruct_analytical(emb.space, out.data, s.analytical).space;
  else
    out.space = std::move(emb.space);
  return out;
}

inline SplitResult make_split(const Settings& s, const Dataset& d) {
  switch (s.split) {
    case SplitMode::random: return split_random(d, s.split_fraction, s.seed_split, s.form);
    case SplitMode::no_novel_cues: return split_no_novel_cues(d, s.split_fraction, s.seed_split, s.cues, s.form);
    case SplitMode::none: {
      std::vector<std::size_t> all(d.size());
      std::iota(all.begin(), all.end(), std::size_t{0});
      return detail::finish_split(d, std::move(all), {}, s.form, 1.0);
    }
  }
  throw ConfigError("unknown split mode");
}

/// Everything a run needs: data, semantics, split, and a cue matrix for all
/// entries over the training inventory.
struct Experiment {
  Settings settings;
  Dataset data;
  SemanticSpace space;
  std::vector<std::string> missing_embeddings;
  std::vector<std::string> forms;
  SplitResult split;
  CueInventory inventory;
  CueMatrix C;
  std::vector<std::size_t> all_ids;
  std::unique_ptr<GoldPool> pool;

  Matrix train_cues() const { return C.select(split.train_ids).to_dense(); }
  Matrix train_semantics() const {
    Matrix S(static_cast<Eigen::Index>(split.train_ids.size()), space.S.cols());
    for (std::size_t k = 0; k < split.train_ids.size(); ++k)
      S.row(static_cast<Eigen::Index>(k)) = space.S.row(static_cast<Eigen::Index>(split.train_ids[k]));
    return S;
  }
};

inline Experiment prepare(const Settings& s) {
  Experiment x;
  x.settings = s;
  auto sem = build_semantics(s, load_corpus(s));
  x.data = std::move(sem.data);
  x.space = std::move(sem.space);
  x.missing_embeddings = std::move(sem.missing);
  x.forms = x.data.cue_strings(s.form);
  x.split = make_split(s, x.data);
  if (x.split.train_ids.empty()) throw InvalidArgument("training set is empty");
  std::vector<std::string> train_forms;
  for (auto id : x.split.train_ids) train_forms.push_back(x.forms[id]);
  x.inventory = build_inventory(train_forms, s.cues);
  x.C = build_cue_matrix(x.forms, x.inventory, s.cues, EmptyRows::allow);
  x.all_ids.resize(x.data.size());
  std::iota(x.all_ids.begin(), x.all_ids.end(), std::size_t{0});
  x.pool = std::make_unique<GoldPool>(x.space.S, s.pool == PoolMode::all ? x.all_ids : x.split.train_ids);
  return x;
}

// ---------------------------------------------------------------------------
// Models and evaluation

inline Mapping train_comprehension(const Experiment& x) {
  return solve_endstate(x.train_cues(), x.train_semantics(), MappingKind::comprehension);
}

inline Mapping train_production(const Experiment& x) {
  return solve_endstate(x.train_semantics(), x.train_cues(), MappingKind::production);
}

struct ComprehensionEval {
  std::vector<ComprehensionResult> items;  // indexed by entry id
  std::map<Scheme, Accuracy> accuracy;
};

inline ComprehensionEval evaluate_comprehension(const Experiment& x, const Mapping& F) {
  ComprehensionEval ev;
  ev.items = comprehend(predict_semantics(x.C, F), x.all_ids, x.space.S, *x.pool, x.forms);
  for (auto sc : kSchemes) ev.accuracy[sc] = evaluate(ev.items, x.split, sc);
  return ev;
}

struct ProductionItem {
  std::string produced;
  double score = std::numeric_limits<double>::quiet_NaN();
  std::size_t candidates = 0;
  bool correct = false;
};

struct ProductionEval {
  std::vector<ProductionItem> items;  // indexed by entry id
  std::map<Scheme, Accuracy> accuracy;
};

struct ProductionRoute {
  Mapping G;
  PositionalSupportModel positional;
  GramGraph graph;
};

inline ProductionRoute train_production_route(const Experiment& x) {
  const Matrix S = x.train_semantics();
  Mapping G = solve_endstate(S, x.train_cues(), MappingKind::production);
  std::vector<std::string> train_forms;
  for (auto id : x.split.train_ids) train_forms.push_back(x.forms[id]);
  const auto targets = positional_targets(train_forms, x.inventory, x.settings.cues);
  const Matrix inputs = x.settings.positional_input == PositionalInput::predicted_cues ? Matrix(S * G.W) : S;
  auto positional =
      train_positional(inputs, targets, x.inventory.size(), x.settings.margin, x.settings.positional_input);
  return {std::move(G), std::move(positional), GramGraph(x.inventory, x.settings.cues)};
}

/// A form is produced correctly when the best-ranked candidate equals it.
inline ProductionEval evaluate_production(const Experiment& x, const Mapping& F, const ProductionRoute& route) {
  ProductionEval ev;
  const ProductionModel pm{route.G, F, route.positional, route.graph, x.inventory};
  ev.items.resize(x.data.size());
  for (auto id : x.all_ids) {
    const auto res = produce(x.space.S.row(static_cast<Eigen::Index>(id)), pm, x.settings.path);
    auto& item = ev.items[id];
    item.candidates = res.ranked.size();
    if (const auto* best = res.best()) {
      item.produced = best->surface;
      item.score = best->score;
      item.correct = best->surface == x.forms[id];
    }
  }
  for (auto sc : kSchemes) {
    const auto [ids, lenient] = scheme_items(x.split, sc);
    Accuracy acc;
    for (auto id : ids) {
      ++acc.total;
      if (ev.items[id].correct) ++acc.correct;
    }
    ev.accuracy[sc] = acc;
  }
  return ev;
}

inline json accuracy_json(const std::map<Scheme, Accuracy>& acc) {
  json out = json::object();
  for (const auto& [sc, a] : acc) {
    json cell = {{"correct", a.correct}, {"total", a.total}};
    cell["accuracy"] = a.total == 0 ? json(nullptr) : json(a.value());
    out[std::string(to_string(sc))] = cell;
  }
  return out;
}

inline json dataset_json(const Experiment& x) {
  std::unordered_set<std::string> lemmas;
  for (const auto& e : x.data) lemmas.insert(e.lemma);
  return {{"entries", x.data.size()},
          {"lemmas", lemmas.size()},
          {"train", x.split.train_ids.size()},
          {"validation", x.split.val_ids.size()},
          {"validation_homophones", x.split.homophone_val_ids.size()},
          {"validation_newforms", x.split.newform_val_ids.size()},
          {"validation_novel_lemmas", x.split.novel_lemma_ids.size()},
          {"achieved_train_fraction", x.split.achieved_fraction},
          {"cues", x.inventory.size()},
          {"dropped_validation_cues", x.C.total_dropped()},
          {"semantic_dimension", x.space.dimension()},
          {"missing_embeddings", x.missing_embeddings.size()}};
}

// ---------------------------------------------------------------------------
// Output

inline std::string format_number(double v) {
  if (std::isnan(v)) return "NA";
  char buf[64];
  const auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, p);
}

inline std::string format_number(const std::optional<double>& v) { return v ? format_number(*v) : "NA"; }

inline std::string csv_field(std::string_view s) {
  if (s.find_first_of(",\"\n") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

inline std::string csv_row(const std::vector<std::string>& fields) {
  std::string out;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out += ',';
    out += csv_field(fields[i]);
  }
  return out + "\n";
}

class OutputDir {
 public:
  explicit OutputDir(std::filesystem::path dir) : dir_(std::move(dir)) { std::filesystem::create_directories(dir_); }

  void write(const std::string& name, const std::string& body) const {
    std::ofstream out(dir_ / name, std::ios::binary);
    if (!out) throw Error("io", "cannot write " + (dir_ / name).string());
    out << body;
  }

  const std::filesystem::path& path() const { return dir_; }

 private:
  std::filesystem::path dir_;
};

/// config.resolved plus the reproducibility header shared by all reports.
inline json report_header(const std::string& command, const Config& cfg, const Settings& s) {
  return {{"command", command}, {"config", cfg.to_json()}, {"seeds", seeds_json(s)}};
}

inline std::string subset_of(const SplitResult& split, std::size_t id) {
  if (std::binary_search(split.train_ids.begin(), split.train_ids.end(), id)) return "train";
  if (std::binary_search(split.homophone_val_ids.begin(), split.homophone_val_ids.end(), id)) return "val_homophone";
  return "val_newform";
}

inline std::vector<std::string> entry_fields(const Experiment& x, std::size_t id) {
  const auto& e = x.data[id];
  return {std::to_string(id),
          subset_of(x.split, id),
          e.wordform,
          x.forms[id],
          e.lemma,
          std::string(to_string(e.gram_case)),
          std::string(to_string(e.number)),
          e.role ? std::string(to_string(*e.role)) : "",
          std::to_string(e.token_count())};
}

inline const std::vector<std::string> kEntryColumns = {"id",   "subset", "wordform", "form",     "lemma",
                                                       "case", "number", "role",     "frequency"};

// ---------------------------------------------------------------------------
// End-state

struct EndstateResult {
  json report;
  std::string items_csv;
  ComprehensionEval comprehension;
  std::optional<ProductionEval> production;
};

inline EndstateResult run_endstate(const Experiment& x, const Config& cfg) {
  EndstateResult r;
  const Mapping F = train_comprehension(x);
  r.comprehension = evaluate_comprehension(x, F);
  if (x.settings.production) {
    const auto route = train_production_route(x);
    r.production = evaluate_production(x, F, route);
  }

  r.report = report_header("endstate", cfg, x.settings);
  r.report["dataset"] = dataset_json(x);
  r.report["comprehension"] = accuracy_json(r.comprehension.accuracy);
  r.report["production"] = r.production ? accuracy_json(r.production->accuracy) : json(nullptr);

  auto cols = kEntryColumns;
  for (const char* c : {"r_target", "r_max", "best_id", "comp_strict", "comp_lenient", "produced", "prod_score",
                        "prod_candidates", "prod_correct"})
    cols.emplace_back(c);
  r.items_csv = csv_row(cols);
  for (auto id : x.all_ids) {
    auto row = entry_fields(x, id);
    const auto& c = r.comprehension.items[id];
    row.push_back(format_number(c.r_target));
    row.push_back(format_number(c.r_max));
    row.push_back(c.best_id ? std::to_string(*c.best_id) : "NA");
    row.push_back(c.correct_strict ? "1" : "0");
    row.push_back(c.correct_lenient ? "1" : "0");
    if (r.production) {
      const auto& p = r.production->items[id];
      row.push_back(p.produced);
      row.push_back(format_number(p.score));
      row.push_back(std::to_string(p.candidates));
      row.push_back(p.correct ? "1" : "0");
    } else {
      row.insert(row.end(), {"", "NA", "0", "NA"});
    }
    r.items_csv += csv_row(row);
  }
  return r;
}

// ---------------------------------------------------------------------------
// Incremental learning

/// Checkpoints 0, T/K, 2T/K, ..., T (rounded, duplicates removed).
inline std::vector<std::size_t> checkpoint_schedule(std::size_t tokens, std::size_t k) {
  std::vector<std::size_t> out;
  for (std::size_t j = 0; j <= k; ++j)
    out.push_back(static_cast<std::size_t>(
        std::llround(static_cast<double>(tokens) * static_cast<double>(j) / static_cast<double>(k))));
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

struct FrequencyEffect {
  std::size_t items = 0;
  std::optional<double> spearman;
  std::optional<double> pearson;
};

/// Correlation of log token frequency with r_target over training items
/// that have tokens and a defined r_target.
inline FrequencyEffect frequency_effect(const Experiment& x, const std::vector<ComprehensionResult>& items) {
  std::vector<double> lf, rt;
  for (auto id : x.split.train_ids) {
    const auto f = x.data[id].token_count();
    if (f == 0 || !items[id].r_target) continue;
    lf.push_back(std::log(static_cast<double>(f)));
    rt.push_back(*items[id].r_target);
  }
  return {lf.size(), stats::spearman(lf, rt), stats::pearson(lf, rt)};
}

inline json frequency_json(const FrequencyEffect& f) {
  return {{"items", f.items},
          {"spearman", f.spearman ? json(*f.spearman) : json(nullptr)},
          {"pearson", f.pearson ? json(*f.pearson) : json(nullptr)}};
}

/// Items whose lemma, number and case were recognized but whose role was
/// not: how often each role was chosen in error, next to that role's token
/// frequency.
inline json overgeneralization(const Experiment& x, const std::vector<ComprehensionResult>& items,
                               std::span<const std::size_t> ids) {
  std::map<Role, std::uint64_t> errors, frequency;
  for (auto r : kRoles) errors[r] = frequency[r] = 0;
  bool any_role = false;
  for (auto id : ids) {
    const auto& e = x.data[id];
    if (!e.role) continue;
    any_role = true;
    frequency[*e.role] += e.token_count();
    const auto& res = items[id];
    if (res.correct_strict || !res.best_id) continue;
    const auto& p = x.data[*res.best_id];
    if (p.lemma == e.lemma && p.number == e.number && p.gram_case == e.gram_case && p.role && *p.role != *e.role)
      ++errors[*p.role];
  }
  if (!any_role) return nullptr;
  json out = json::array();
  for (auto r : kRoles)
    out.push_back({{"role", to_string(r)}, {"misidentified_as", errors[r]}, {"role_frequency", frequency[r]}});
  return out;
}

struct IncrementalRun {
  json report;
  std::string items_csv;
  std::string curve_csv;
  ComprehensionEval incremental;
  ComprehensionEval endstate;
  FrequencyEffect incremental_effect;
  FrequencyEffect endstate_effect;
};

inline IncrementalRun run_incremental(const Experiment& x, const Config& cfg) {
  const auto& s = x.settings;
  IncrementalRun r;
  const auto local = sample_token_stream(x.split.train, s.seed_stream);
  std::vector<std::size_t> stream;
  stream.reserve(local.size());
  for (auto i : local) stream.push_back(x.split.train_ids[i]);
  const auto cps = s.trajectory ? checkpoint_schedule(stream.size(), s.checkpoints)
                                : std::vector<std::size_t>{stream.size()};
  const auto trained = train_incremental(stream, x.C, x.space.S, s.eta, cps);

  std::string curve = "tokens";
  for (auto sc : kSchemes) curve += "," + std::string(to_string(sc));
  curve += "\n";
  for (const auto& snap : trained.checkpoints) {
    const auto ev = evaluate_comprehension(x, snap);
    std::vector<std::string> row = {std::to_string(snap.trained_tokens)};
    for (auto sc : kSchemes) row.push_back(format_number(ev.accuracy.at(sc).value()));
    curve += csv_row(row);
  }
  r.curve_csv = s.trajectory ? curve : "";

  r.incremental = evaluate_comprehension(x, trained.mapping);
  r.endstate = evaluate_comprehension(x, train_comprehension(x));
  r.incremental_effect = frequency_effect(x, r.incremental.items);
  r.endstate_effect = frequency_effect(x, r.endstate.items);

  r.report = report_header("incremental", cfg, s);
  r.report["dataset"] = dataset_json(x);
  r.report["tokens"] = stream.size();
  r.report["eta"] = s.eta;
  r.report["checkpoints"] = cps;
  r.report["comprehension"] = {{"incremental", accuracy_json(r.incremental.accuracy)},
                               {"endstate", accuracy_json(r.endstate.accuracy)}};
  if (s.frequency_effect)
    r.report["frequency_effect"] = {{"incremental", frequency_json(r.incremental_effect)},
                                    {"endstate", frequency_json(r.endstate_effect)}};
  if (s.error_analysis) {
    json og = json::object();
    for (const auto* ev : {&r.incremental, &r.endstate})
      og[ev == &r.incremental ? "incremental" : "endstate"] = {
          {"train", overgeneralization(x, ev->items, x.split.train_ids)},
          {"validation", overgeneralization(x, ev->items, x.split.val_ids)}};
    r.report["overgeneralization"] = og;
  }

  auto cols = kEntryColumns;
  for (const char* c : {"r_target_incremental", "r_target_endstate", "comp_lenient_incremental",
                        "comp_lenient_endstate"})
    cols.emplace_back(c);
  r.items_csv = csv_row(cols);
  for (auto id : x.all_ids) {
    auto row = entry_fields(x, id);
    row.push_back(format_number(r.incremental.items[id].r_target));
    row.push_back(format_number(r.endstate.items[id].r_target));
    row.push_back(r.incremental.items[id].correct_lenient ? "1" : "0");
    row.push_back(r.endstate.items[id].correct_lenient ? "1" : "0");
    r.items_csv += csv_row(row);
  }
  return r;
}

// ---------------------------------------------------------------------------
// Pruning

struct PruningPoint {
  double threshold = 0.0;
  std::optional<double> requested_fraction;
  double pruned_fraction = 0.0;
  std::map<Scheme, Accuracy> accuracy;
};

struct PruningRun {
  json report;
  std::string curve_csv;
  std::vector<PruningPoint> curve;
};

/// Train comprehension of the pruned end-state F at each threshold. With no
/// explicit thresholds, thresholds come from magnitude fractions.
inline PruningRun run_pruning(const Experiment& x, const Config& cfg) {
  const auto& s = x.settings;
  PruningRun r;
  const Mapping F = train_comprehension(x);
  std::vector<std::pair<double, std::optional<double>>> points;
  if (!s.prune_thresholds.empty()) {
    for (double t : s.prune_thresholds) {
      if (t < 0.0) throw ConfigError("prune.thresholds must be >= 0");
      points.emplace_back(t, std::nullopt);
    }
  } else {
    for (double f : s.prune_fractions) points.emplace_back(magnitude_threshold(F, f), f);
  }
  for (const auto& [t, f] : points) {
    const auto pruned = prune(F, t);
    const auto ev = evaluate_comprehension(x, pruned.mapping);
    r.curve.push_back({t, f, pruned.pruned_fraction, ev.accuracy});
  }

  r.curve_csv = "threshold,requested_fraction,pruned_fraction";
  for (auto sc : kSchemes) r.curve_csv += "," + std::string(to_string(sc));
  r.curve_csv += "\n";
  json curve = json::array();
  for (const auto& p : r.curve) {
    std::vector<std::string> row = {format_number(p.threshold), format_number(p.requested_fraction),
                                    format_number(p.pruned_fraction)};
    for (auto sc : kSchemes) row.push_back(format_number(p.accuracy.at(sc).value()));
    r.curve_csv += csv_row(row);
    json point = {{"threshold", std::isfinite(p.threshold) ? json(p.threshold) : json("inf")},
                  {"pruned_fraction", p.pruned_fraction},
                  {"accuracy", accuracy_json(p.accuracy)}};
    point["requested_fraction"] = p.requested_fraction ? json(*p.requested_fraction) : json(nullptr);
    curve.push_back(point);
  }
  r.report = report_header("prune", cfg, s);
  r.report["dataset"] = dataset_json(x);
  r.report["curve"] = curve;
  return r;
}

// ---------------------------------------------------------------------------
// Wug task

inline const std::vector<std::string> kMarkers = {"-(e)n", "-e", "-er", "-0", "-s", "other"};

/// Stem variants with the last stem vowel fronted, in spelling and in DISC.
inline std::vector<std::string> umlaut_variants(const std::string& stem) {
  static const std::vector<std::pair<std::string, std::string>> subs = {
      {"au", "äu"}, {"a", "ä"}, {"o", "ö"}, {"u", "ü"}, {"W", "X"}, {"o:", "|:"}, {"U", "Y"}};
  std::vector<std::string> out;
  for (const auto& [from, to] : subs) {
    const auto pos = stem.rfind(from);
    if (pos == std::string::npos) continue;
    std::string v = stem;
    v.replace(pos, from.size(), to);
    out.push_back(std::move(v));
  }
  return out;
}

/// Plural marker of `candidate` relative to the nonce singular.
inline std::string classify_plural_marker(const std::string& nonce, const std::string& candidate) {
  std::vector<std::string> stems = {nonce};
  for (auto& v : umlaut_variants(nonce)) stems.push_back(std::move(v));
  for (const auto& stem : stems) {
    if (!candidate.starts_with(stem)) continue;
    const auto suffix = candidate.substr(stem.size());
    if (suffix.empty()) return "-0";
    if (suffix == "en" || suffix == "n" || suffix == "@n") return "-(e)n";
    if (suffix == "e" || suffix == "@") return "-e";
    if (suffix == "er" || suffix == "6" || suffix == "@r") return "-er";
    if (suffix == "s") return "-s";
  }
  return "other";
}

inline std::vector<std::string> parse_nonce_words(std::istream& is) {
  std::vector<std::string> out;
  std::string line;
  while (std::getline(is, line)) {
    auto t = trim(line);
    if (!t.empty()) out.push_back(std::move(t));
  }
  if (out.empty()) throw InvalidArgument("nonce list is empty");
  return out;
}

inline std::vector<std::string> load_nonce_words(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open nonce list '" + path + "'");
  return parse_nonce_words(in);
}

struct WugItem {
  std::string nonce;
  std::vector<std::string> novel_grams;
  std::vector<CandidatePath> candidates;  // ranked
  std::vector<std::string> markers;       // per candidate
  double theta_used = 0.0;
  bool tolerance_used = false;
  std::optional<double> nom_sg_r;  // r between predicted nom.sg semantics and its nearest real word
};

struct WugRun {
  json report;
  std::string candidates_csv;
  std::vector<WugItem> items;
  std::map<std::string, std::size_t> marker_counts;
};

inline WugRun run_wug(const Experiment& x, const Config& cfg, const std::vector<std::string>& nonces) {
  const auto& s = x.settings;
  if (nonces.empty()) throw InvalidArgument("wug: no nonce words");
  if (s.cues.n < 2) throw ConfigError("wug requires cues.n >= 2");

  FeatureRegistry registry =
      x.space.registry ? *x.space.registry : reconstruct_analytical(x.space, x.data).registry;

  // 1. comprehension on all real words
  std::vector<std::size_t> real_ids = x.all_ids;
  std::vector<std::string> real_forms = x.forms;
  const CueInventory real_inv = build_inventory(real_forms, s.cues);
  const CueMatrix C_real = build_cue_matrix(real_forms, real_inv, s.cues);
  const Mapping F_real = solve_endstate(C_real.to_dense(), x.space.S, MappingKind::comprehension);

  // 2. nonce nom.sg semantics; grams unseen in the lexicon get zero weights
  CueInventory inv = real_inv;
  extend_inventory(inv, nonces, s.cues);
  Mapping F = F_real;
  F.W = Matrix::Zero(static_cast<Eigen::Index>(inv.size()), F_real.W.cols());
  F.W.topRows(F_real.W.rows()) = F_real.W;
  const CueMatrix C_nonce = build_cue_matrix(nonces, inv, s.cues);
  const Matrix S_nonce = predict_semantics(C_nonce, F);

  // 3. production retrained on real words plus nonce nom.sg items
  const auto n_real = static_cast<Eigen::Index>(x.data.size());
  const auto n_all = n_real + static_cast<Eigen::Index>(nonces.size());
  Matrix S_all(n_all, x.space.S.cols());
  S_all.topRows(n_real) = x.space.S;
  S_all.bottomRows(S_nonce.rows()) = S_nonce;
  Matrix C_all = Matrix::Zero(n_all, static_cast<Eigen::Index>(inv.size()));
  C_all.topLeftCorner(n_real, static_cast<Eigen::Index>(real_inv.size())) = C_real.to_dense();
  C_all.bottomRows(static_cast<Eigen::Index>(nonces.size())) = C_nonce.to_dense();
  const Mapping G = solve_endstate(S_all, C_all, MappingKind::production);
  std::vector<std::string> all_forms = real_forms;
  all_forms.insert(all_forms.end(), nonces.begin(), nonces.end());
  const auto targets = positional_targets(all_forms, inv, s.cues);
  const Matrix inputs = s.positional_input == PositionalInput::predicted_cues ? Matrix(S_all * G.W) : S_all;
  const auto positional = train_positional(inputs, targets, inv.size(), s.margin, s.positional_input);
  const GramGraph graph(inv, s.cues);
  const ProductionModel pm{G, F, positional, graph, inv};

  WugRun r;
  for (const auto& m : kMarkers) r.marker_counts[m] = 0;
  std::map<std::string, std::size_t> top1_counts;
  for (const auto& m : kMarkers) top1_counts[m] = 0;

  for (std::size_t k = 0; k < nonces.size(); ++k) {
    WugItem item;
    item.nonce = nonces[k];
    item.novel_grams = novel_cues(std::span<const std::string>(&nonces[k], 1), real_inv, s.cues);
    const Vector s_sg = S_nonce.row(static_cast<Eigen::Index>(k)).transpose();
    if (auto match = nearest_gold(s_sg.transpose(), *x.pool)) item.nom_sg_r = match->r;

    // 4. nominative plural meaning
    const Vector s_pl = wug_plural_vector(s_sg, registry);

    // 5. candidates; relax the search when it yields too few
    PathParams params = s.path;
    auto res = produce(s_pl.transpose(), pm, params);
    for (std::size_t step = 0; res.ranked.size() < s.wug_min_candidates && step <= s.wug_relax_steps; ++step) {
      if (!params.tolerance)
        params.tolerance = true;
      else
        params.theta /= 2.0;
      res = produce(s_pl.transpose(), pm, params);
    }
    item.theta_used = params.theta;
    item.tolerance_used = params.tolerance;
    item.candidates = std::move(res.ranked);
    for (const auto& c : item.candidates) {
      item.markers.push_back(classify_plural_marker(item.nonce, c.surface));
      ++r.marker_counts[item.markers.back()];
    }
    if (!item.markers.empty()) ++top1_counts[item.markers.front()];
    r.items.push_back(std::move(item));
  }

  r.candidates_csv = csv_row({"nonce", "rank", "candidate", "score", "marker", "tolerated", "valid"});
  json items = json::array();
  std::size_t total = 0;
  for (const auto& it : r.items) {
    json top = json::array();
    for (std::size_t j = 0; j < it.candidates.size(); ++j) {
      const auto& c = it.candidates[j];
      const bool valid = path_is_valid(c, s.cues);
      r.candidates_csv += csv_row({it.nonce, std::to_string(j + 1), c.surface, format_number(c.score), it.markers[j],
                                   std::to_string(c.tolerated_count), valid ? "1" : "0"});
      if (j < s.wug_top)
        top.push_back({{"candidate", c.surface},
                       {"score", c.scored ? json(c.score) : json(nullptr)},
                       {"marker", it.markers[j]}});
    }
    total += it.candidates.size();
    items.push_back({{"nonce", it.nonce},
                     {"novel_grams", it.novel_grams},
                     {"nom_sg_best_r", it.nom_sg_r ? json(*it.nom_sg_r) : json(nullptr)},
                     {"theta_used", it.theta_used},
                     {"tolerance_used", it.tolerance_used},
                     {"candidates", it.candidates.size()},
                     {"top", top}});
  }
  r.report = report_header("wug", cfg, s);
  r.report["lexicon_entries"] = x.data.size();
  r.report["cues"] = inv.size();
  r.report["nonces"] = items;
  r.report["markers"] = {{"all_candidates", r.marker_counts}, {"top1", top1_counts}, {"candidates", total}};
  return r;
}

// ---------------------------------------------------------------------------
// Split and inspect

inline json run_split_report(const Experiment& x, const Config& cfg) {
  json report = report_header("split", cfg, x.settings);
  report["dataset"] = dataset_json(x);
  std::vector<std::string> val_forms;
  for (auto id : x.split.val_ids) val_forms.push_back(x.forms[id]);
  report["validation_novel_cues"] = novel_cues(val_forms, x.inventory, x.settings.cues);
  report["split"] = split_sidecar(x.split);
  return report;
}

inline json inspect_dataset(const Dataset& d, const Settings& s) {
  const auto forms = d.cue_strings(s.form);
  const auto inv = build_inventory(forms, s.cues);
  std::unordered_set<std::string> lemmas, distinct;
  std::uint64_t tokens = 0;
  std::size_t with_role = 0, with_article = 0;
  double grams = 0.0;
  for (std::size_t i = 0; i < d.size(); ++i) {
    lemmas.insert(d[i].lemma);
    distinct.insert(forms[i]);
    tokens += d[i].token_count();
    with_role += d[i].role ? 1 : 0;
    with_article += d[i].article.empty() ? 0 : 1;
    grams += static_cast<double>(extract_grams(forms[i], s.cues).size());
  }
  std::size_t homophone_groups = 0, homophone_entries = 0;
  for (const auto& g : d.homophone_groups(s.form))
    if (g.size() > 1) {
      ++homophone_groups;
      homophone_entries += g.size();
    }
  return {{"entries", d.size()},
          {"lemmas", lemmas.size()},
          {"distinct_forms", distinct.size()},
          {"homophone_groups", homophone_groups},
          {"entries_in_homophone_groups", homophone_entries},
          {"tokens", tokens},
          {"entries_with_role", with_role},
          {"entries_with_article", with_article},
          {"cue_unit", to_string(s.cues.unit)},
          {"cue_n", s.cues.n},
          {"form_source", to_string(s.form)},
          {"cues", inv.size()},
          {"mean_grams_per_entry", d.empty() ? 0.0 : grams / static_cast<double>(d.size())}};
}

}  // namespace ldl::experiments

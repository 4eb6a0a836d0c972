#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "ldl/experiments.hpp"
#include "support/fixtures.hpp"

using namespace ldl;
using namespace ldl::experiments;

namespace {

Config small_config(std::size_t lemmas = 12) {
  Config c;
  c.set("data.synthetic.lemmas", std::to_string(lemmas));
  c.set("split.fraction", "0.8");
  return c;
}

}  // namespace

TEST(Config, ParseCommentsAndOverrides) {
  std::istringstream in("# comment\n\ncues.n = 2\nlearning.eta=0.01\n");
  auto c = Config::parse(in);
  EXPECT_EQ(c.count("cues.n"), 2u);
  EXPECT_DOUBLE_EQ(c.real("learning.eta"), 0.01);
  c.apply_override("cues.unit=letter");
  EXPECT_EQ(c.str("cues.unit"), "letter");
  EXPECT_EQ(c.str("split.mode"), "random");
}

TEST(Config, Errors) {
  std::istringstream unknown("cues.m=2\n");
  EXPECT_THROW(Config::parse(unknown), ConfigError);
  std::istringstream bare("cues.n\n");
  EXPECT_THROW(Config::parse(bare), ConfigError);
  Config c;
  EXPECT_THROW(c.apply_override("novalue"), ConfigError);
  c.set("cues.n", "two");
  EXPECT_THROW(c.count("cues.n"), ConfigError);
  c.set("production.enabled", "maybe");
  EXPECT_THROW(c.flag("production.enabled"), ConfigError);
  EXPECT_THROW(Config::load("/nonexistent/ldl.cfg"), ConfigError);
}

TEST(Config, ResolvedIsSortedKeyValueLines) {
  const auto text = Config().resolved();
  std::istringstream in(text);
  std::string line, prev;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    EXPECT_NE(line.find('='), std::string::npos);
    EXPECT_LT(prev, line);
    prev = line;
    ++n;
  }
  EXPECT_EQ(n, config_defaults().size());
  std::istringstream again(text);
  EXPECT_EQ(Config::parse(again).resolved(), text);
}

TEST(Resolve, Validation) {
  auto expect_bad = [](const std::string& kv) {
    Config c;
    c.apply_override(kv);
    EXPECT_THROW(resolve(c), ConfigError) << kv;
  };
  expect_bad("split.fraction=1");
  expect_bad("learning.eta=0");
  expect_bad("semantics.mode=embeddings");
  expect_bad("semantics.mode=telepathy");
  expect_bad("semantics.definiteness=true");
  expect_bad("prune.fractions=0.5,1.5");
  expect_bad("production.k=0");
  expect_bad("cues.n=1");
  expect_bad("comprehension.pool=some");
  Config ok;
  ok.apply_override("cues.n=1");
  ok.apply_override("production.enabled=false");
  EXPECT_NO_THROW(resolve(ok));
}

TEST(Resolve, DefaultThetas) {
  CueConfig c;
  c.n = 2;
  EXPECT_DOUBLE_EQ(default_theta(c), 0.05);
  c.n = 3;
  EXPECT_DOUBLE_EQ(default_theta(c), 0.008);
  c.n = 4;
  EXPECT_DOUBLE_EQ(default_theta(c), 0.005);
  c.unit = CueUnit::syllable;
  c.n = 2;
  EXPECT_DOUBLE_EQ(default_theta(c), 0.005);
  c.unit = CueUnit::letter;
  c.n = 3;
  EXPECT_DOUBLE_EQ(default_theta(c), 0.008);
  Config cfg;
  cfg.set("production.theta", "0.2");
  EXPECT_DOUBLE_EQ(resolve(cfg).path.theta, 0.2);
}

TEST(Output, Formatting) {
  EXPECT_EQ(format_number(0.5), "0.5");
  EXPECT_EQ(format_number(std::numeric_limits<double>::quiet_NaN()), "NA");
  EXPECT_EQ(format_number(std::optional<double>{}), "NA");
  EXPECT_EQ(csv_field("a,b"), "\"a,b\"");
  EXPECT_EQ(csv_field("say \"x\""), "\"say \"\"x\"\"\"");
  EXPECT_EQ(csv_row({"a", "b"}), "a,b\n");
}

TEST(Schedule, EvenlySpacedCheckpoints) {
  EXPECT_EQ(checkpoint_schedule(100, 4), (std::vector<std::size_t>{0, 25, 50, 75, 100}));
  EXPECT_EQ(checkpoint_schedule(2, 4), (std::vector<std::size_t>{0, 1, 2}));
}

TEST(Wug, MarkerClassification) {
  EXPECT_EQ(classify_plural_marker("Pund", "Punden"), "-(e)n");
  EXPECT_EQ(classify_plural_marker("Raun", "Raunen"), "-(e)n");
  EXPECT_EQ(classify_plural_marker("Klot", "Klöte"), "-e");
  EXPECT_EQ(classify_plural_marker("Vag", "Väger"), "-er");
  EXPECT_EQ(classify_plural_marker("Mur", "Mur"), "-0");
  EXPECT_EQ(classify_plural_marker("Bral", "Brals"), "-s");
  EXPECT_EQ(classify_plural_marker("Bral", "Krals"), "other");
  EXPECT_EQ(classify_plural_marker("kax", "kax@n"), "-(e)n");
  std::istringstream in("Bral\n\n Kach \n");
  EXPECT_EQ(parse_nonce_words(in), (std::vector<std::string>{"Bral", "Kach"}));
  std::istringstream empty("\n");
  EXPECT_THROW(parse_nonce_words(empty), InvalidArgument);
}

TEST(Prepare, SplitAndPoolShapes) {
  const auto s = resolve(small_config());
  const auto x = prepare(s);
  EXPECT_EQ(x.data.size(), 96u);
  EXPECT_EQ(x.C.rows(), x.data.size());
  EXPECT_EQ(x.C.cols(), x.inventory.size());
  EXPECT_EQ(x.split.train_ids.size() + x.split.val_ids.size(), x.data.size());
  EXPECT_EQ(x.space.rows(), x.data.size());

  auto c = small_config();
  c.set("comprehension.pool", "train");
  const auto y = prepare(resolve(c));
  EXPECT_LE(y.pool->size(), x.pool->size());
}

TEST(Prepare, SplitNoneTrainsOnEverything) {
  auto c = small_config(4);
  c.set("split.mode", "none");
  const auto x = prepare(resolve(c));
  EXPECT_EQ(x.split.train_ids.size(), x.data.size());
  EXPECT_TRUE(x.split.val_ids.empty());
}

TEST(Endstate, ReportsAndReruns) {
  const auto cfg = small_config();
  const auto s = resolve(cfg);
  const auto a = run_endstate(prepare(s), cfg);
  const auto b = run_endstate(prepare(s), cfg);
  EXPECT_EQ(a.report.dump(), b.report.dump());
  EXPECT_EQ(a.items_csv, b.items_csv);
  const auto& train = a.report.at("comprehension").at("train_lenient");
  EXPECT_GT(train.at("accuracy").get<double>(), 0.5);
  EXPECT_FALSE(a.report.at("production").is_null());
  EXPECT_EQ(a.report.at("seeds").at("split"), 1);
  // header plus one row per entry
  EXPECT_EQ(static_cast<std::size_t>(std::count(a.items_csv.begin(), a.items_csv.end(), '\n')), 97u);
}

TEST(Endstate, SeedsChangeResults) {
  auto c1 = small_config();
  auto c2 = small_config();
  c2.set("seeds.split", "9");
  EXPECT_NE(run_endstate(prepare(resolve(c1)), c1).items_csv, run_endstate(prepare(resolve(c2)), c2).items_csv);
}

TEST(Incremental, EndstateBaselineMatchesEndstateRun) {
  auto cfg = small_config();
  cfg.set("production.enabled", "false");
  cfg.set("learning.checkpoints", "4");
  cfg.set("roles.simulate", "true");
  const auto x = prepare(resolve(cfg));
  const auto inc = run_incremental(x, cfg);
  const auto end = run_endstate(x, cfg);
  EXPECT_EQ(inc.report.at("comprehension").at("endstate").dump(), end.report.at("comprehension").dump());
  EXPECT_EQ(inc.report.at("checkpoints").size(), 5u);
  EXPECT_EQ(static_cast<std::size_t>(std::count(inc.curve_csv.begin(), inc.curve_csv.end(), '\n')), 6u);
  EXPECT_TRUE(inc.report.contains("frequency_effect"));
  EXPECT_TRUE(inc.report.at("overgeneralization").at("endstate").contains("validation"));
  EXPECT_EQ(inc.report.at("tokens").get<std::uint64_t>(), [&] {
    std::uint64_t t = 0;
    for (auto id : x.split.train_ids) t += x.data[id].token_count();
    return t;
  }());
}

TEST(Pruning, ZeroFractionEqualsUnpruned) {
  auto cfg = small_config();
  cfg.set("production.enabled", "false");
  cfg.set("prune.fractions", "0,0.5,1");
  const auto x = prepare(resolve(cfg));
  const auto r = run_pruning(x, cfg);
  ASSERT_EQ(r.curve.size(), 3u);
  const auto end = run_endstate(x, cfg);
  EXPECT_EQ(accuracy_json(r.curve[0].accuracy).dump(), end.report.at("comprehension").dump());
  EXPECT_NEAR(r.curve[1].pruned_fraction, 0.5, 0.01);
  EXPECT_EQ(r.curve[2].pruned_fraction, 1.0);
  EXPECT_EQ(r.curve[2].accuracy.at(Scheme::train).correct, 0u);

  cfg.set("prune.thresholds", "0,0.01");
  const auto t = run_pruning(prepare(resolve(cfg)), cfg);
  ASSERT_EQ(t.curve.size(), 2u);
  EXPECT_FALSE(t.curve[0].requested_fraction);
}

TEST(WugRun, ProducesClassifiedCandidates) {
  auto cfg = small_config(30);
  cfg.set("split.mode", "none");
  cfg.set("cues.unit", "letter");
  cfg.set("cues.n", "2");
  cfg.set("semantics.feature_scale", "0.1");
  const auto x = prepare(resolve(cfg));
  const std::vector<std::string> nonces = {"Bral", "Pund"};
  const auto r = run_wug(x, cfg, nonces);
  ASSERT_EQ(r.items.size(), 2u);
  std::size_t total = 0, counted = 0;
  for (const auto& it : r.items) {
    EXPECT_EQ(it.markers.size(), it.candidates.size());
    total += it.candidates.size();
    for (const auto& c : it.candidates) EXPECT_TRUE(path_is_valid(c, x.settings.cues));
  }
  for (const auto& [m, n] : r.marker_counts) counted += n;
  EXPECT_EQ(counted, total);
}

TEST(Inspect, CountsDataset) {
  auto c = small_config(5);
  const auto s = resolve(c);
  const auto j = inspect_dataset(load_corpus(s), s);
  EXPECT_EQ(j.at("entries"), 40);
  EXPECT_EQ(j.at("lemmas"), 5);
  EXPECT_LE(j.at("distinct_forms").get<std::size_t>(), 40u);
}

TEST(OutputDir, WritesFiles) {
  const auto dir = fixtures::scratch_dir("outdir");
  const OutputDir out(dir / "nested");
  out.write("a.txt", "hello\n");
  std::ifstream in(dir / "nested" / "a.txt");
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "hello");
}

TEST(LoadCorpus, ReadsTsvFile) {
  const auto dir = fixtures::scratch_dir("corpus");
  synthetic::LexiconParams p;
  p.lemmas = 3;
  {
    std::ofstream os(dir / "lex.tsv");
    write_dataset(os, synthetic::generate_lexicon(p));
  }
  Config c;
  c.set("data.path", (dir / "lex.tsv").string());
  EXPECT_EQ(load_corpus(resolve(c)).size(), 24u);
  c.set("data.path", (dir / "missing.tsv").string());
  EXPECT_THROW(load_corpus(resolve(c)), Error);
}

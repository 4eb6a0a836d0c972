#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "ldl/ldl.hpp"

namespace ex = ldl::experiments;
using nlohmann::json;

namespace {

struct Common {
  std::string config;
  std::vector<std::string> overrides;
  std::string out;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("-c,--config", c.config, "flat key=value config file");
  cmd->add_option("-s,--set", c.overrides, "override a config key (key=value), repeatable");
  cmd->add_option("-o,--out", c.out, "output directory (overrides output.dir)");
}

ex::Config load_config(const Common& c) {
  ex::Config cfg = c.config.empty() ? ex::Config() : ex::Config::load(c.config);
  for (const auto& kv : c.overrides) cfg.apply_override(kv);
  if (!c.out.empty()) cfg.set("output.dir", c.out);
  return cfg;
}

void print_accuracy(const std::string& label, const json& acc) {
  std::printf("%-14s", label.c_str());
  for (const char* sc : {"train", "train_lenient", "val_all", "val_lenient", "val_newform"}) {
    const auto& cell = acc.at(sc);
    if (cell.at("accuracy").is_null())
      std::printf("  %s=NA", sc);
    else
      std::printf("  %s=%.3f", sc, cell.at("accuracy").get<double>());
  }
  std::printf("\n");
}

void write_common(const ex::OutputDir& out, const ex::Config& cfg, const json& report) {
  out.write("config.resolved", cfg.resolved());
  out.write("report.json", report.dump(2) + "\n");
}

int cmd_endstate(const Common& c) {
  const auto cfg = load_config(c);
  const auto s = ex::resolve(cfg);
  const auto x = ex::prepare(s);
  const auto r = ex::run_endstate(x, cfg);
  const ex::OutputDir out(s.output_dir);
  write_common(out, cfg, r.report);
  out.write("items.csv", r.items_csv);
  print_accuracy("comprehension", r.report.at("comprehension"));
  if (!r.report.at("production").is_null()) print_accuracy("production", r.report.at("production"));
  return 0;
}

int cmd_incremental(const Common& c) {
  const auto cfg = load_config(c);
  const auto s = ex::resolve(cfg);
  const auto x = ex::prepare(s);
  const auto r = ex::run_incremental(x, cfg);
  const ex::OutputDir out(s.output_dir);
  write_common(out, cfg, r.report);
  out.write("items.csv", r.items_csv);
  if (!r.curve_csv.empty()) out.write("curve.csv", r.curve_csv);
  print_accuracy("incremental", r.report.at("comprehension").at("incremental"));
  print_accuracy("endstate", r.report.at("comprehension").at("endstate"));
  if (r.report.contains("frequency_effect")) {
    const auto& fe = r.report.at("frequency_effect");
    std::cout << "frequency effect (spearman): incremental=" << fe.at("incremental").at("spearman").dump()
              << " endstate=" << fe.at("endstate").at("spearman").dump() << "\n";
  }
  return 0;
}

int cmd_prune(const Common& c) {
  const auto cfg = load_config(c);
  const auto s = ex::resolve(cfg);
  const auto x = ex::prepare(s);
  const auto r = ex::run_pruning(x, cfg);
  const ex::OutputDir out(s.output_dir);
  write_common(out, cfg, r.report);
  out.write("curve.csv", r.curve_csv);
  std::cout << r.curve_csv;
  return 0;
}

int cmd_wug(const Common& c, const std::string& nonce_path) {
  auto cfg = load_config(c);
  cfg.set("split.mode", "none");
  const auto s = ex::resolve(cfg);
  const auto nonces = ex::load_nonce_words(nonce_path);
  const auto x = ex::prepare(s);
  const auto r = ex::run_wug(x, cfg, nonces);
  const ex::OutputDir out(s.output_dir);
  write_common(out, cfg, r.report);
  out.write("candidates.csv", r.candidates_csv);
  for (const auto& it : r.items) {
    std::cout << it.nonce << ":";
    for (std::size_t j = 0; j < it.candidates.size() && j < s.wug_top; ++j)
      std::cout << " " << it.candidates[j].surface << "(" << it.markers[j] << ")";
    std::cout << "\n";
  }
  std::cout << "markers: " << json(r.marker_counts).dump() << "\n";
  return 0;
}

int cmd_split(const Common& c) {
  auto cfg = load_config(c);
  cfg.set("production.enabled", "false");
  const auto s = ex::resolve(cfg);
  const auto x = ex::prepare(s);
  const auto report = ex::run_split_report(x, cfg);
  const ex::OutputDir out(s.output_dir);
  write_common(out, cfg, report);
  std::ostringstream train, val;
  ldl::write_dataset(train, x.split.train);
  ldl::write_dataset(val, x.split.validation);
  out.write("train.tsv", train.str());
  out.write("validation.tsv", val.str());
  std::cout << report.at("dataset").dump(2) << "\n";
  return 0;
}

int cmd_inspect(const Common& c) {
  const auto cfg = load_config(c);
  const auto s = ex::resolve(cfg);
  const auto d = ex::load_corpus(s);
  json report = ex::report_header("inspect", cfg, s);
  report["dataset"] = ex::inspect_dataset(d, s);
  const ex::OutputDir out(s.output_dir);
  write_common(out, cfg, report);
  std::cout << report.at("dataset").dump(2) << "\n";
  return 0;
}

void error_line(const std::string& kind, const std::string& message) {
  std::cerr << json{{"error", {{"kind", kind}, {"message", message}}}}.dump() << std::endl;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Linear discriminative learning of inflected word forms"};
  app.require_subcommand(1);

  Common common;
  std::string nonce_path;
  auto* endstate = app.add_subcommand("endstate", "end-state comprehension and production");
  auto* incremental = app.add_subcommand("incremental", "single-pass Widrow-Hoff learning over a token stream");
  auto* wug = app.add_subcommand("wug", "plural production for nonce words");
  auto* prune = app.add_subcommand("prune", "accuracy of the pruned comprehension mapping");
  auto* split = app.add_subcommand("split", "write a train/validation split");
  auto* inspect = app.add_subcommand("inspect", "dataset and cue inventory statistics");
  for (auto* cmd : {endstate, incremental, wug, prune, split, inspect}) add_common(cmd, common);
  wug->add_option("-n,--nonce", nonce_path, "nonce words, one per line")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    error_line("usage", e.what());
    return 2;
  }

  try {
    if (*endstate) return cmd_endstate(common);
    if (*incremental) return cmd_incremental(common);
    if (*wug) return cmd_wug(common, nonce_path);
    if (*prune) return cmd_prune(common);
    if (*split) return cmd_split(common);
    if (*inspect) return cmd_inspect(common);
  } catch (const ldl::Error& e) {
    error_line(e.kind(), e.what());
    return 1;
  } catch (const nlohmann::json::exception& e) {
    error_line("parse", e.what());
    return 1;
  } catch (const std::filesystem::filesystem_error& e) {
    error_line("io", e.what());
    return 1;
  } catch (const std::exception& e) {
    error_line("internal", e.what());
    return 1;
  }
  return 0;
}

// Writes a synthetic German-like noun lexicon in the dataset TSV format.

#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "ldl/lexicon.hpp"
#include "ldl/synthetic.hpp"

int main(int argc, char** argv) {
  CLI::App app{"synthetic noun paradigms"};
  ldl::synthetic::LexiconParams p;
  std::string out;
  app.add_option("--lemmas", p.lemmas, "number of lexemes (8 paradigm cells each)");
  app.add_option("--seed", p.seed, "generator seed");
  app.add_option("--zipf", p.zipf_exponent, "Zipf exponent of form frequencies");
  app.add_option("--max-frequency", p.max_frequency, "frequency of the top-ranked form");
  app.add_option("-o,--out", out, "output TSV (stdout if omitted)");
  CLI11_PARSE(app, argc, argv);

  try {
    const auto d = ldl::synthetic::generate_lexicon(p);
    if (out.empty()) {
      ldl::write_dataset(std::cout, d);
    } else {
      std::ofstream os(out);
      if (!os) throw ldl::Error("io", "cannot write " + out);
      ldl::write_dataset(os, d);
    }
  } catch (const std::exception& e) {
    std::cerr << nlohmann::json{{"error", {{"kind", "internal"}, {"message", e.what()}}}}.dump() << "\n";
    return 1;
  }
  return 0;
}

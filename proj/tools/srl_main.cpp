#include <cstdint>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "srl/commands.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Biaffine dependency semantic role labeler"};
  app.require_subcommand(1);

  std::string config;
  std::optional<std::uint64_t> seed;
  auto* train = app.add_subcommand("train", "train a model from a config file");
  train->add_option("--config", config, "run configuration")->required();
  train->add_option("--seed", seed, "override the configured seed");

  std::string model, input, output, mode = "conll2009", format;
  auto* predict = app.add_subcommand("predict", "label a CoNLL file");
  predict->add_option("--model", model, "checkpoint")->required();
  predict->add_option("--input", input, "input CoNLL file")->required();
  predict->add_option("--output", output, "output CoNLL file")->required();
  predict->add_option("--mode", mode, "conll2009 or conll2008");
  predict->add_option("--format", format, "file layout (defaults to the mode's)");

  std::string gold, pred;
  bool tsv = false;
  auto* evaluate = app.add_subcommand("evaluate", "score predictions against gold");
  evaluate->add_option("--gold", gold, "gold CoNLL file")->required();
  evaluate->add_option("--pred", pred, "predicted CoNLL file")->required();
  evaluate->add_option("--mode", mode, "conll2009 or conll2008");
  evaluate->add_option("--format", format, "file layout (defaults to the mode's)");
  evaluate->add_flag("--tsv", tsv, "tab-separated key/value output");

  int k_max = 10;
  std::string stats_format = "conll2009", heads = "pred";
  auto* stats = app.add_subcommand("stats", "pruning coverage and reduction per order k");
  stats->add_option("--input", input, "CoNLL file")->required();
  stats->add_option("--k-max", k_max, "largest pruning order");
  stats->add_option("--format", stats_format, "conll2009 or conll2008");
  stats->add_option("--heads", heads, "gold or pred");

  std::vector<std::string> variants;
  auto* ablate = app.add_subcommand("ablate", "train and compare model variants");
  ablate->add_option("--config", config, "base run configuration")->required();
  ablate->add_option("--variants", variants, "comma-separated variant names")
      ->required()
      ->delimiter(',');

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : srl::kExitUsage;
  }

  if (*train) return srl::cmd_train(config, seed, std::cout, std::cerr);
  if (*predict) return srl::cmd_predict(model, input, output, mode, std::cerr, format);
  if (*evaluate) return srl::cmd_evaluate(gold, pred, mode, tsv, std::cout, std::cerr, format);
  if (*stats) return srl::cmd_stats(input, k_max, stats_format, heads, std::cout, std::cerr);
  if (*ablate) return srl::cmd_ablate(config, variants, std::cout, std::cerr);
  return srl::kExitUsage;
}

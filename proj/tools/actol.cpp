#include <iostream>

#include <CLI11.hpp>

#include "actol/cli.hpp"

int main(int argc, char** argv) {
  using namespace actol::cli;

  CLI::App app{"Temporal-ordering objectives for vision-language embeddings"};
  app.require_subcommand(1);

  CommandOptions opts;
  opts.threads = threads_from_env();
  std::uint64_t seed = 0;

  auto add = [&](const char* name, const char* help) {
    auto* sub = app.add_subcommand(name, help);
    sub->add_option("--config", opts.config, "JSON config file")->required();
    sub->add_option("--out", opts.out_dir, "Output directory")->capture_default_str();
    sub->add_option("--seed", seed, "Override the config seed");
    return sub;
  };
  auto* train = add("train", "Optimize a clip's embeddings and log the loss history");
  auto* verify = add("verify", "Run numerical checks of the objective's properties");
  auto* reward = add("reward", "Compare reward curves of trained objectives");
  auto* gradcheck = add("gradcheck", "Compare analytic gradients with finite differences");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitBadConfig;
  }

  for (auto* sub : {train, verify, reward, gradcheck}) {
    if (sub->parsed() && sub->count("--seed") > 0) opts.seed = seed;
  }

  if (train->parsed()) return cmd_train(opts, std::cerr);
  if (verify->parsed()) return cmd_verify(opts, std::cerr);
  if (reward->parsed()) return cmd_reward(opts, std::cerr);
  return cmd_gradcheck(opts, std::cerr);
}

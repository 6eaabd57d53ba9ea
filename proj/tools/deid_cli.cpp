// Command-line front end. Talks to the toolkit only through the C API.
#include <CLI11.hpp>

#include <cstdint>
#include <cstdio>
#include <optional>
#include <string>

#include "deid/deid.h"

namespace {

constexpr int kExitConfig = 1;
constexpr int kExitInternal = 3;

int report_failure(deid_status status, const std::string& context) {
  std::fprintf(stderr, "deid: %s: %s\n", context.c_str(), deid_last_error());
  switch (status) {
    case DEID_ERR_CONFIG:
    case DEID_ERR_DATA:
    case DEID_ERR_INTERNAL:
      return static_cast<int>(status);
    default:
      return kExitInternal;
  }
}

struct Flags {
  std::optional<std::string> config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> mode;
  bool select_largest = false;
  std::optional<std::string> out;
};

int run(const std::string& command, const Flags& flags) {
  deid_pipeline* pipeline = nullptr;
  deid_status st = deid_pipeline_create(flags.config ? flags.config->c_str() : nullptr, &pipeline);
  if (st != DEID_OK) return report_failure(st, "loading config");

  auto set = [&](deid_status s) {
    if (st == DEID_OK) st = s;
  };
  if (flags.out) set(deid_pipeline_set_output(pipeline, flags.out->c_str()));
  if (flags.seed) set(deid_pipeline_set_seed(pipeline, *flags.seed));
  if (flags.mode)
    set(deid_pipeline_set_mode(pipeline, *flags.mode == "ranked" ? DEID_AP_RANKED : DEID_AP_FRACTION));
  if (flags.select_largest) set(deid_pipeline_set_select_largest(pipeline, 1));
  if (st == DEID_OK) st = deid_pipeline_run(pipeline, command.c_str());

  int code = 0;
  if (st == DEID_OK)
    std::fputs(deid_pipeline_summary(pipeline), stdout);
  else
    code = report_failure(st, command);
  deid_pipeline_destroy(pipeline);
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Video de-identification toolkit: face masking, blurring and toy swapping,\n"
               "keypoint-preservation and identity-verification metrics."};
  app.set_version_flag("--version", std::string(deid_version()));
  app.require_subcommand(1, 1);
  app.fallthrough();

  Flags flags;
  app.add_option("--config", flags.config, "INI pipeline configuration")->check(CLI::ExistingFile);
  app.add_option("--seed", flags.seed, "seed overriding [run] seed");
  app.add_option("--mode", flags.mode, "AP mode")->check(CLI::IsMember({"fraction", "ranked"}));
  app.add_flag("--select-largest", flags.select_largest,
               "pick the largest person when a pose file holds several");
  app.add_option("--out", flags.out, "output directory");

  const std::pair<const char*, const char*> commands[] = {
      {"deid-mask", "black out the face box of every frame"},
      {"deid-blur", "box-blur the face box of every frame"},
      {"swap-train", "train the toy two-decoder face-swap model"},
      {"swap-apply", "swap faces with a trained toy model"},
      {"eval-keypoints", "OKS-based AP/AR of each method against the original poses"},
      {"eval-identity", "descriptor distance table, ROC and verification"},
      {"synth", "write the synthetic dataset and its pipeline.ini"},
      {"report", "evaluate everything configured and write report, tables and plots"},
      {"run-all", "run every configured stage in order"}};
  for (const auto& [name, help] : commands) app.add_subcommand(name, help);

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }
  const std::string command = app.get_subcommands().front()->get_name();
  if (command != "synth" && !flags.config) {
    std::fprintf(stderr, "deid: %s: --config is required\n", command.c_str());
    return kExitConfig;
  }
  return run(command, flags);
}

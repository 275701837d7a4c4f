// Command-line front end. Links only the C API.
//
// Exit codes: 0 success, 1 validation failure, 2 resource failure,
// 3 anything else.

#include <cstdio>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "sawchan.h"

namespace {

constexpr const char* kScenarios[] = {"entropy-scan",   "rate-vs-eta",    "classical-autocorr",
                                      "forgetfulness", "regular-growth", "capacity-transition"};

int exit_code(sawchan_status s) {
  switch (s) {
    case SAWCHAN_OK: return 0;
    case SAWCHAN_INVALID: return 1;
    case SAWCHAN_RESOURCE: return 2;
    default: return 3;
  }
}

int report(sawchan_status s) {
  if (s != SAWCHAN_OK) std::fprintf(stderr, "error: %s\n", sawchan_last_error());
  return exit_code(s);
}

struct RunOptions {
  std::string config;
  std::string out;
  std::string seeds;
  int threads = 1;
};

int run_scenario(const std::string& name, const RunOptions& o) {
  sawchan_experiment* exp = nullptr;
  sawchan_status s = sawchan_experiment_create(name.c_str(), &exp);
  if (s == SAWCHAN_OK && !o.config.empty()) s = sawchan_experiment_load_file(exp, o.config.c_str());
  if (s == SAWCHAN_OK && !o.seeds.empty()) s = sawchan_experiment_set_seeds(exp, o.seeds.c_str());
  if (s == SAWCHAN_OK && !o.out.empty()) s = sawchan_experiment_set_output(exp, o.out.c_str());
  if (s == SAWCHAN_OK) s = sawchan_experiment_run(exp, o.threads);
  if (s == SAWCHAN_OK) std::printf("%s\n", sawchan_experiment_csv_path(exp));
  sawchan_experiment_destroy(exp);
  return report(s);
}

int summarize(const std::string& csv, const std::string& out_path) {
  char* json = nullptr;
  const sawchan_status s = sawchan_summarize(csv.c_str(), &json);
  if (s != SAWCHAN_OK) return report(s);
  int code = 0;
  if (out_path.empty()) {
    std::printf("%s\n", json);
  } else if (std::FILE* f = std::fopen(out_path.c_str(), "wb")) {
    std::fprintf(f, "%s\n", json);
    std::fclose(f);
  } else {
    std::fprintf(stderr, "error: cannot write %s\n", out_path.c_str());
    code = 2;
  }
  sawchan_free_string(json);
  return code;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sawtooth-map dephasing channel experiments"};
  app.set_version_flag("--version", std::string(sawchan_version()));
  app.require_subcommand(1);

  std::vector<RunOptions> options(std::size(kScenarios));
  std::vector<CLI::App*> runs;
  for (std::size_t i = 0; i < std::size(kScenarios); ++i) {
    auto* sub = app.add_subcommand(kScenarios[i], std::string("Run the ") + kScenarios[i] + " scenario");
    auto& o = options[i];
    sub->add_option("--config", o.config, "key = value config file")->check(CLI::ExistingFile);
    sub->add_option("--out", o.out, "output directory (overrides config)");
    sub->add_option("--seeds", o.seeds, "seed list, e.g. 1,2,5..9 (overrides config)");
    sub->add_option("--threads", o.threads, "worker threads")
        ->default_val(1)
        ->check(CLI::PositiveNumber);
    runs.push_back(sub);
  }

  std::string csv, summary_out;
  auto* summ = app.add_subcommand("summarize", "Per-parameter means, standard errors and fits of a scenario CSV");
  summ->add_option("csv", csv, "scenario CSV")->required();
  summ->add_option("--out", summary_out, "write JSON here instead of stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  for (std::size_t i = 0; i < runs.size(); ++i) {
    if (runs[i]->parsed()) return run_scenario(kScenarios[i], options[i]);
  }
  if (summ->parsed()) return summarize(csv, summary_out);
  return 1;
}

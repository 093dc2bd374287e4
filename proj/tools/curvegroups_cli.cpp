// Command-line front end; talks to the library only through the C API.

#include <CLI11.hpp>

#include <cstdio>
#include <map>
#include <string>
#include <vector>

#include "curvegroups/curvegroups.h"

namespace {

struct Failure {
  cg_status status;
};

void check(cg_status s) {
  if (s != CG_OK) throw Failure{s};
}

struct Collection {
  cg_collection* handle = nullptr;
  ~Collection() { cg_collection_destroy(handle); }
};

struct Result {
  cg_result* handle = nullptr;
  ~Result() { cg_result_destroy(handle); }
};

const std::map<std::string, cg_kernel> kKernels{{"epanechnikov", CG_KERNEL_EPANECHNIKOV},
                                                {"gaussian", CG_KERNEL_GAUSSIAN}};
const std::map<std::string, cg_norm> kNorms{{"cm", CG_NORM_CM}, {"ks", CG_NORM_KS}};
const std::map<std::string, cg_tunnel_format> kFormats{{"cartesian", CG_TUNNEL_CARTESIAN},
                                                       {"polar", CG_TUNNEL_POLAR}};
const std::map<std::string, int> kMetrics{{"auto", -1}, {"reject", 0}, {"select", 1}};

void add_test_options(CLI::App* cmd, cg_test_options& o, std::string& input, std::string& output,
                      bool needs_input = true) {
  if (needs_input) cmd->add_option("--input", input, "CSV file")->required()->check(CLI::ExistingFile);
  cmd->add_option("--output", output, "JSON result file")->required();
  cmd->add_option("--norm", o.norm, "cm (L2) or ks (L1)")
      ->transform(CLI::CheckedTransformer(kNorms, CLI::ignore_case));
  cmd->add_option("--boot", o.boot, "bootstrap replicates B")->check(CLI::PositiveNumber);
  cmd->add_option("--alpha", o.alpha, "significance level")->check(CLI::Range(0.0, 1.0));
  cmd->add_option("--seed", o.seed, "master seed")->required();
  cmd->add_option("--kernel", o.fit.kernel, "epanechnikov or gaussian")
      ->transform(CLI::CheckedTransformer(kKernels, CLI::ignore_case));
  cmd->add_option("--grid-size", o.fit.grid_size, "grid points Q")->check(CLI::PositiveNumber);
  cmd->add_option("--restarts", o.restarts, "clustering restarts")->check(CLI::PositiveNumber);
  cmd->add_option("--threads", o.threads, "worker threads")->check(CLI::PositiveNumber);
  cmd->add_flag("!--fixed-bandwidth", o.reselect_bandwidth,
                "keep the original bandwidths inside bootstrap replicates");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Testing and selecting groups of regression curves"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(cg_version()));

  std::string input, output, csv, profile, labels;

  cg_fit_options fit_opt;
  cg_fit_options_init(&fit_opt);
  auto* fit = app.add_subcommand("fit", "per-curve local linear estimates");
  fit->add_option("--input", input, "CSV with curve_id,x,y")->required()->check(CLI::ExistingFile);
  fit->add_option("--grid-size", fit_opt.grid_size, "grid points Q")->check(CLI::PositiveNumber);
  fit->add_option("--kernel", fit_opt.kernel, "epanechnikov or gaussian")
      ->transform(CLI::CheckedTransformer(kKernels, CLI::ignore_case));
  fit->add_option("--output", output, "JSON result file")->required();

  cg_test_options test_opt;
  cg_test_options_init(&test_opt);
  std::size_t k = 1;
  auto* test = app.add_subcommand("test", "test H0(K)");
  add_test_options(test, test_opt, input, output);
  test->add_option("--k", k, "number of groups K")->required()->check(CLI::PositiveNumber);

  std::size_t kmax = 0;
  auto* autok = app.add_subcommand("autok", "select K by sequential testing");
  add_test_options(autok, test_opt, input, output);
  autok->add_option("--kmax", kmax, "largest K tried (default J)");

  cg_simulate_options sim_opt;
  cg_simulate_options_init(&sim_opt);
  std::string scenario = "three:R1:V1";
  std::vector<std::size_t> sizes;
  auto* simulate = app.add_subcommand("simulate", "Monte Carlo level, power and selection");
  simulate->add_option("--scenario", scenario, "three:R#:V#, thirty or onetwenty")->required();
  simulate->add_option("--a", sim_opt.a, "thirty-curve shift a");
  simulate->add_option("--n", sizes,
                       "sizes: one per curve, a common size, or the thirty-curve total");
  simulate->add_option("--runs", sim_opt.runs, "simulation runs")->check(CLI::PositiveNumber);
  simulate->add_option("--seed", sim_opt.test.seed, "master seed")->required();
  simulate->add_option("--output", output, "JSON report")->required();
  simulate->add_option("--csv", csv, "table CSV");
  simulate->add_option("--norm", sim_opt.test.norm, "cm or ks")
      ->transform(CLI::CheckedTransformer(kNorms, CLI::ignore_case));
  simulate->add_option("--boot", sim_opt.test.boot, "bootstrap replicates B")
      ->check(CLI::PositiveNumber);
  simulate->add_option("--alpha", sim_opt.test.alpha, "significance level")
      ->check(CLI::Range(0.0, 1.0));
  simulate->add_flag("--heteroscedastic", sim_opt.heteroscedastic, "thirty-curve variance");
  simulate->add_option("--metric", sim_opt.select_k, "auto, reject or select")
      ->transform(CLI::CheckedTransformer(kMetrics, CLI::ignore_case));
  simulate->add_option("--k", sim_opt.k, "tested K");
  simulate->add_option("--kmax", sim_opt.k_max, "largest K when selecting");
  simulate->add_flag("--noise-sd", sim_opt.noise_as_sd, "120-curve noise sd 1.3");
  simulate->add_option("--threads", sim_opt.test.threads, "concurrent runs")
      ->check(CLI::PositiveNumber);

  cg_tunnel_format format = CG_TUNNEL_CARTESIAN;
  auto* tunnel = app.add_subcommand("tunnel", "group tunnel cross-sections");
  add_test_options(tunnel, test_opt, input, output);
  tunnel->add_option("--format", format, "cartesian or polar")
      ->required()
      ->transform(CLI::CheckedTransformer(kFormats, CLI::ignore_case));
  tunnel->add_option("--kmax", kmax, "largest K tried (default J)");
  tunnel->add_option("--labels", labels, "section_id,group CSV");
  tunnel->add_option("--profile", profile, "angle,radius,group CSV");

  CLI11_PARSE(app, argc, argv);

  try {
    Collection coll;
    Result res;
    if (fit->parsed()) {
      check(cg_collection_read_csv(input.c_str(), &coll.handle));
      check(cg_fit(coll.handle, &fit_opt, &res.handle));
    } else if (test->parsed()) {
      check(cg_collection_read_csv(input.c_str(), &coll.handle));
      check(cg_test(coll.handle, k, &test_opt, &res.handle));
    } else if (autok->parsed()) {
      check(cg_collection_read_csv(input.c_str(), &coll.handle));
      check(cg_autok(coll.handle, kmax, &test_opt, &res.handle));
    } else if (simulate->parsed()) {
      sim_opt.scenario = scenario.c_str();
      sim_opt.n = sizes.empty() ? nullptr : sizes.data();
      sim_opt.n_count = sizes.size();
      check(cg_simulate(&sim_opt, &res.handle));
      if (!csv.empty()) check(cg_result_write_csv(res.handle, csv.c_str()));
    } else if (tunnel->parsed()) {
      // The full angular range is needed for a closed profile.
      test_opt.fit.grid_trim = 0.0;
      check(cg_collection_read_tunnel(input.c_str(), format, &coll.handle));
      check(cg_autok(coll.handle, kmax, &test_opt, &res.handle));
      if (!labels.empty()) check(cg_result_write_csv(res.handle, labels.c_str()));
      if (!profile.empty()) check(cg_result_write_profile(res.handle, profile.c_str()));
    }
    check(cg_result_write_json(res.handle, output.c_str()));
  } catch (const Failure& f) {
    std::fprintf(stderr, "error (%s): %s\n", cg_status_name(f.status), cg_last_error());
    return 1;
  }
  return 0;
}

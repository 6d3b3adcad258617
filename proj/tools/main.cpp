// htmmiow command line: the mediation test on count/metadata files,
// synthetic data generation, the power/type-I sweep harness, and debug
// exports of the transform/reduce stages.
//
// Exit codes: 0 success, 1 usage error, 2 data error, 3 numerical failure.

#include <CLI11.hpp>
#include <fstream>
#include <functional>
#include <iostream>
#include <string>
#include <vector>

#include "htmmiow/harness.hpp"
#include "htmmiow/io.hpp"
#include "htmmiow/rng.hpp"
#include "htmmiow/util.hpp"

using namespace htmmiow;

namespace {

int run_guarded(const std::function<void()>& body) {
  try {
    body();
    return 0;
  } catch (const NumericalError& err) {
    std::cerr << "numerical failure: " << err.what() << '\n';
    return 3;
  } catch (const Error& err) {
    std::cerr << "data error: " << err.what() << '\n';
    return 2;
  }
}

struct TestOptions {
  std::string counts_path, metadata_path, exposure_column, outcome_column, family;
  std::vector<std::string> covariate_columns;
  std::string strategy = "umap";
  int n_components = 2;
  double pseudocount = 0.5;
  int n_permutations = 1000;
  std::uint64_t seed = 0;
  int workers = 1;
  bool smoothed_p = false;
  std::string output_path = "htmmiow_result.csv";
};

struct SimulateOptions {
  int n = 100, p = 100, t = 5;
  double effect = 1.0;
  std::string family = "continuous";
  double frac_assoc = 0.5, exposure_mediator_effect = 3.0, exposure_outcome_effect = 5.0;
  bool null_scenario = false;
  std::uint64_t seed = 0;
  std::string counts_path = "counts.csv", metadata_path = "metadata.csv",
              truth_path = "truth.csv";
};

struct SweepOptions {
  std::vector<int> n_grid{50, 70, 100, 150, 300, 500};
  std::string p_rule = "equal_n";
  std::vector<double> effect_grid{0.5, 1, 5};
  std::vector<int> t_grid{1, 5, 10};
  std::vector<std::string> families{"continuous", "dichotomous"};
  std::vector<std::string> strategies{"umap"};
  int n_sims = 200;
  int n_permutations = 200;
  std::vector<double> alphas{0.05, 0.01};
  int n_components = 2;
  double pseudocount = 0.5;
  double frac_assoc = 0.5, exposure_mediator_effect = 3.0, exposure_outcome_effect = 5.0;
  std::uint64_t seed = 0;
  int workers = 1;
  std::string output_path;
};

struct StageOptions {
  std::string counts_path;
  double pseudocount = 0.5;
  std::string strategy = "umap";
  int n_components = 2;
  std::uint64_t seed = 0;
  std::string output_path;
};

struct SobelOptions {
  std::string data_path, exposure_column, mediator_column, outcome_column;
  std::string output_path;  // empty: stdout
};

IlrMatrix ilr_from_counts(const CountMatrix& counts, double pseudocount) {
  CountMatrix imputed = impute_pseudocount(counts, pseudocount);
  CompositionMatrix comp = close_composition(imputed.values);
  return ilr_transform(comp, default_partition(static_cast<int>(counts.n_taxa())));
}

void run_test(const TestOptions& opt) {
  CountMatrix counts = read_count_table_file(opt.counts_path);
  MetadataTable metadata = join_metadata(counts, read_metadata_file(opt.metadata_path));

  MediationInput input;
  input.exposure = metadata.binary_column(opt.exposure_column);
  input.family = parse_family(opt.family);
  input.outcome = input.family == OutcomeFamily::Dichotomous
                      ? metadata.binary_column(opt.outcome_column)
                      : metadata.column(opt.outcome_column);
  if (!opt.covariate_columns.empty()) {
    input.covariates.resize(counts.n_samples(),
                            static_cast<Eigen::Index>(opt.covariate_columns.size()));
    for (std::size_t j = 0; j < opt.covariate_columns.size(); ++j) {
      input.covariates.col(static_cast<Eigen::Index>(j)) =
          metadata.column(opt.covariate_columns[j]);
    }
  }

  IlrMatrix ilr = ilr_from_counts(counts, opt.pseudocount);
  EmbeddingMatrix mediators =
      reduce(ilr, parse_strategy(opt.strategy), opt.n_components, derive_seed(opt.seed, 1));
  input.mediators = mediators.values;

  PermutationOptions permutation;
  permutation.n_permutations = opt.n_permutations;
  permutation.seed = derive_seed(opt.seed, 2);
  permutation.smoothed_p = opt.smoothed_p;
  permutation.n_workers = opt.workers;
  MediationResult result = permutation_test(input, permutation);
  result.seed = opt.seed;

  write_result_record_file(result, opt.output_path);
  write_null_stats_file(result.null_stats, opt.output_path + ".null_stats");
  std::cerr << "p_value=" << format_real(result.p_value) << " t_obs=" << format_real(result.t_obs)
            << " (" << result.null_stats.size() << " of " << result.n_permutations
            << " permutations kept)\n";
}

void run_simulate(const SimulateOptions& opt) {
  SimScenario scenario;
  scenario.n_samples = opt.n;
  scenario.n_taxa = opt.p;
  scenario.n_true_mediators = opt.t;
  scenario.frac_associated = opt.frac_assoc;
  scenario.exposure_mediator_effect = opt.exposure_mediator_effect;
  scenario.exposure_outcome_effect = opt.exposure_outcome_effect;
  scenario.mediator_outcome_effect = opt.effect;
  scenario.family = parse_family(opt.family);
  scenario.null_scenario = opt.null_scenario;
  scenario.seed = opt.seed;

  SyntheticDataset data = generate(scenario);
  write_count_table_file(data.counts, opt.counts_path);

  Eigen::MatrixXd meta(opt.n, 2);
  meta.col(0) = data.exposure;
  meta.col(1) = data.outcome;
  write_labeled_matrix_file(data.counts.sample_ids, {"exposure", "outcome"}, meta,
                            opt.metadata_path);

  std::ofstream truth(opt.truth_path, std::ios::binary);
  if (!truth) throw Error("cannot open '" + opt.truth_path + "' for writing");
  truth << "taxon_id,role\n";
  for (int j : data.associated_ids) {
    bool is_true = std::find(data.true_mediator_ids.begin(), data.true_mediator_ids.end(), j) !=
                   data.true_mediator_ids.end();
    truth << data.counts.taxa_ids[static_cast<std::size_t>(j)] << ','
          << (is_true ? "true_mediator" : "associated") << '\n';
  }
}

SweepConfig to_config(const SweepOptions& opt) {
  SweepConfig config;
  config.n_grid = opt.n_grid;
  config.p_rule = parse_taxa_rule(opt.p_rule);
  config.effect_grid = opt.effect_grid;
  config.t_grid = opt.t_grid;
  config.families.clear();
  for (const auto& f : opt.families) config.families.push_back(parse_family(f));
  config.strategies.clear();
  for (const auto& s : opt.strategies) config.strategies.push_back(parse_strategy(s));
  config.n_sims = opt.n_sims;
  config.n_permutations = opt.n_permutations;
  config.alpha_grid = opt.alphas;
  config.n_components = opt.n_components;
  config.pseudocount = opt.pseudocount;
  config.frac_associated = opt.frac_assoc;
  config.exposure_mediator_effect = opt.exposure_mediator_effect;
  config.exposure_outcome_effect = opt.exposure_outcome_effect;
  config.master_seed = opt.seed;
  config.n_workers = opt.workers;
  return config;
}

void run_sweep_command(const SweepOptions& opt, bool type1) {
  SweepConfig config = to_config(opt);
  PowerTable table =
      type1 ? run_type1_sweep(config, &std::cerr) : run_power_sweep(config, &std::cerr);
  std::ofstream out(opt.output_path, std::ios::binary);
  if (!out) throw Error("cannot open '" + opt.output_path + "' for writing");
  emit_results(table, out);
}

void run_transform(const StageOptions& opt) {
  CountMatrix counts = read_count_table_file(opt.counts_path);
  IlrMatrix ilr = ilr_from_counts(counts, opt.pseudocount);
  std::vector<std::string> columns;
  for (Eigen::Index k = 0; k < ilr.values.cols(); ++k) {
    columns.push_back("ilr" + std::to_string(k + 1));
  }
  write_labeled_matrix_file(counts.sample_ids, columns, ilr.values, opt.output_path);
}

void run_reduce(const StageOptions& opt) {
  CountMatrix counts = read_count_table_file(opt.counts_path);
  IlrMatrix ilr = ilr_from_counts(counts, opt.pseudocount);
  EmbeddingMatrix embedding =
      reduce(ilr, parse_strategy(opt.strategy), opt.n_components, derive_seed(opt.seed, 1));
  std::vector<std::string> columns;
  for (Eigen::Index k = 0; k < embedding.values.cols(); ++k) {
    columns.push_back("u" + std::to_string(k + 1));
  }
  write_labeled_matrix_file(counts.sample_ids, columns, embedding.values, opt.output_path);
}

void run_sobel(const SobelOptions& opt) {
  MetadataTable data = read_metadata_file(opt.data_path);
  SobelResult result =
      sobel_test(data.binary_column(opt.exposure_column), data.column(opt.mediator_column),
                 data.column(opt.outcome_column));
  auto emit = [&](std::ostream& out) {
    out << "statistic," << format_real(result.statistic) << '\n';
    out << "p_value," << format_real(result.p_value) << '\n';
    out << "b1," << format_real(result.b1) << '\n';
    out << "c2," << format_real(result.c2) << '\n';
    out << "se_b1," << format_real(result.se_b1) << '\n';
    out << "se_c2," << format_real(result.se_c2) << '\n';
  };
  if (opt.output_path.empty()) {
    emit(std::cout);
  } else {
    std::ofstream out(opt.output_path, std::ios::binary);
    if (!out) throw Error("cannot open '" + opt.output_path + "' for writing");
    emit(out);
  }
}

void add_sweep_options(CLI::App* sub, SweepOptions& opt) {
  sub->set_config("--config", "", "Sweep configuration file (key = value lines, # comments)");
  sub->add_option("--n-grid", opt.n_grid, "Sample sizes")->delimiter(',');
  sub->add_option("--p-rule", opt.p_rule, "Taxa count rule")
      ->check(CLI::IsMember({"equal_n", "double_n"}));
  sub->add_option("--effect-grid", opt.effect_grid, "Mediator-outcome effect sizes")
      ->delimiter(',');
  sub->add_option("--t-grid", opt.t_grid, "True mediator counts")->delimiter(',');
  sub->add_option("--families", opt.families, "Outcome families")
      ->delimiter(',')
      ->check(CLI::IsMember({"continuous", "dichotomous"}));
  sub->add_option("--strategies", opt.strategies, "Reduction strategies")
      ->delimiter(',')
      ->check(CLI::IsMember({"umap", "pca_umap", "pca_full", "pca80"}));
  sub->add_option("--n-sims", opt.n_sims, "Replicates per cell");
  sub->add_option("--b", opt.n_permutations, "Permutations per test");
  sub->add_option("--alphas", opt.alphas, "Rejection thresholds")->delimiter(',');
  sub->add_option("--components", opt.n_components, "UMAP component count");
  sub->add_option("--pseudocount", opt.pseudocount, "Zero-replacement pseudocount");
  sub->add_option("--frac-assoc", opt.frac_assoc, "Fraction of exposure-associated taxa");
  sub->add_option("--exposure-mediator-effect", opt.exposure_mediator_effect,
                  "Log-scale exposure effect on associated taxa");
  sub->add_option("--exposure-outcome-effect", opt.exposure_outcome_effect,
                  "Direct exposure effect on the outcome");
  sub->add_option("--seed", opt.seed, "Master seed");
  sub->add_option("--workers", opt.workers, "Worker threads");
  sub->add_option("--output", opt.output_path, "Result table path")->required();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"HT-MMIOW: hypothesis test for microbiome mediation with inverse odds weighting"};
  app.require_subcommand(1);
  app.failure_message(CLI::FailureMessage::help);

  TestOptions test_opt;
  CLI::App* test_cmd =
      app.add_subcommand("test", "Run the mediation test on count/metadata files");
  test_cmd->add_option("--counts", test_opt.counts_path, "Count table")->required();
  test_cmd->add_option("--metadata", test_opt.metadata_path, "Metadata table")->required();
  test_cmd->add_option("--exposure", test_opt.exposure_column, "Binary exposure column")
      ->required();
  test_cmd->add_option("--outcome", test_opt.outcome_column, "Outcome column")->required();
  test_cmd->add_option("--family", test_opt.family, "Outcome family")
      ->required()
      ->check(CLI::IsMember({"continuous", "dichotomous"}));
  test_cmd->add_option("--covariates", test_opt.covariate_columns, "Covariate columns")
      ->delimiter(',');
  test_cmd->add_option("--strategy", test_opt.strategy, "Reduction strategy")
      ->check(CLI::IsMember({"umap", "pca_umap", "pca_full", "pca80"}));
  test_cmd->add_option("--components", test_opt.n_components, "Mediator component count");
  test_cmd->add_option("--pseudocount", test_opt.pseudocount, "Zero-replacement pseudocount");
  test_cmd->add_option("--b", test_opt.n_permutations, "Permutation count");
  test_cmd->add_option("--seed", test_opt.seed, "Seed");
  test_cmd->add_option("--workers", test_opt.workers, "Worker threads");
  test_cmd->add_flag("--smoothed-p", test_opt.smoothed_p,
                     "Use (1+count)/(1+B) instead of the strict count/B");
  test_cmd->add_option("--output", test_opt.output_path, "Result record path");

  SimulateOptions sim_opt;
  CLI::App* sim_cmd = app.add_subcommand("simulate", "Write a synthetic dataset");
  sim_cmd->add_option("--n", sim_opt.n, "Sample count");
  sim_cmd->add_option("--p", sim_opt.p, "Taxa count");
  sim_cmd->add_option("--t", sim_opt.t, "True mediator count");
  sim_cmd->add_option("--effect", sim_opt.effect, "Mediator-outcome effect size");
  sim_cmd->add_option("--family", sim_opt.family, "Outcome family")
      ->check(CLI::IsMember({"continuous", "dichotomous"}));
  sim_cmd->add_option("--frac-assoc", sim_opt.frac_assoc, "Fraction of associated taxa");
  sim_cmd->add_option("--exposure-mediator-effect", sim_opt.exposure_mediator_effect,
                      "Log-scale exposure effect on associated taxa");
  sim_cmd->add_option("--exposure-outcome-effect", sim_opt.exposure_outcome_effect,
                      "Direct exposure effect on the outcome");
  sim_cmd->add_flag("--null", sim_opt.null_scenario, "Global null scenario (all effects zero)");
  sim_cmd->add_option("--seed", sim_opt.seed, "Seed");
  sim_cmd->add_option("--out-counts", sim_opt.counts_path, "Count table output");
  sim_cmd->add_option("--out-metadata", sim_opt.metadata_path, "Metadata output");
  sim_cmd->add_option("--out-truth", sim_opt.truth_path, "Truth sidecar output");

  SweepOptions power_opt;
  CLI::App* power_cmd = app.add_subcommand("power", "Run the power sweep grid");
  add_sweep_options(power_cmd, power_opt);

  SweepOptions type1_opt;
  CLI::App* type1_cmd = app.add_subcommand("type1", "Run the type-I-error sweep (global null)");
  add_sweep_options(type1_cmd, type1_opt);

  StageOptions transform_opt;
  CLI::App* transform_cmd =
      app.add_subcommand("transform", "Export the ilr coordinates of a count table");
  transform_cmd->add_option("--counts", transform_opt.counts_path, "Count table")->required();
  transform_cmd->add_option("--pseudocount", transform_opt.pseudocount, "Pseudocount");
  transform_cmd->add_option("--output", transform_opt.output_path, "Output path")->required();

  StageOptions reduce_opt;
  CLI::App* reduce_cmd = app.add_subcommand("reduce", "Export the reduced mediator components");
  reduce_cmd->add_option("--counts", reduce_opt.counts_path, "Count table")->required();
  reduce_cmd->add_option("--pseudocount", reduce_opt.pseudocount, "Pseudocount");
  reduce_cmd->add_option("--strategy", reduce_opt.strategy, "Reduction strategy")
      ->check(CLI::IsMember({"umap", "pca_umap", "pca_full", "pca80"}));
  reduce_cmd->add_option("--components", reduce_opt.n_components, "Component count");
  reduce_cmd->add_option("--seed", reduce_opt.seed, "Seed");
  reduce_cmd->add_option("--output", reduce_opt.output_path, "Output path")->required();

  SobelOptions sobel_opt;
  CLI::App* sobel_cmd =
      app.add_subcommand("sobel", "Classical single-mediator Sobel test on a metadata table");
  sobel_cmd->add_option("--data", sobel_opt.data_path, "Metadata-format table")->required();
  sobel_cmd->add_option("--exposure", sobel_opt.exposure_column, "Binary exposure column")
      ->required();
  sobel_cmd->add_option("--mediator", sobel_opt.mediator_column, "Continuous mediator column")
      ->required();
  sobel_cmd->add_option("--outcome", sobel_opt.outcome_column, "Continuous outcome column")
      ->required();
  sobel_cmd->add_option("--output", sobel_opt.output_path, "Result path (default: stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  if (test_cmd->parsed()) return run_guarded([&] { run_test(test_opt); });
  if (sim_cmd->parsed()) return run_guarded([&] { run_simulate(sim_opt); });
  if (power_cmd->parsed()) return run_guarded([&] { run_sweep_command(power_opt, false); });
  if (type1_cmd->parsed()) return run_guarded([&] { run_sweep_command(type1_opt, true); });
  if (transform_cmd->parsed()) return run_guarded([&] { run_transform(transform_opt); });
  if (reduce_cmd->parsed()) return run_guarded([&] { run_reduce(reduce_opt); });
  if (sobel_cmd->parsed()) return run_guarded([&] { run_sobel(sobel_opt); });
  return 1;
}

#include "htmmiow/harness.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <mutex>
#include <ostream>
#include <sstream>
#include <tuple>

#include "htmmiow/rng.hpp"
#include "htmmiow/util.hpp"

namespace htmmiow {

std::string to_string(TaxaRule rule) {
  return rule == TaxaRule::EqualN ? "equal_n" : "double_n";
}

TaxaRule parse_taxa_rule(const std::string& name) {
  if (name == "equal_n") return TaxaRule::EqualN;
  if (name == "double_n") return TaxaRule::DoubleN;
  throw InvalidArgument("unknown taxa rule: " + name);
}

void SweepConfig::validate() const {
  if (n_grid.empty() || effect_grid.empty() || t_grid.empty() || families.empty() ||
      strategies.empty() || alpha_grid.empty()) {
    throw InvalidArgument("sweep grids must be non-empty");
  }
  if (n_sims < 1) throw InvalidArgument("n_sims must be >= 1");
  if (n_permutations < 1) throw InvalidArgument("permutation count must be >= 1");
  for (double a : alpha_grid) {
    if (!(a > 0) || !(a < 1)) throw InvalidArgument("alpha values must lie in (0, 1)");
  }
  if (n_workers < 1) throw InvalidArgument("worker count must be >= 1");
  if (!(pseudocount > 0)) throw InvalidArgument("pseudocount must be positive");
}

namespace {

struct Cell {
  int n;
  int p;
  int t;
  double effect;
  OutcomeFamily family;
  ReductionStrategy strategy;
  bool null_scenario;
};

struct CellOutcome {
  std::vector<double> p_values;
  int n_failures = 0;
};

double run_replicate(const Cell& cell, const SweepConfig& config, std::uint64_t seed) {
  SimScenario scenario;
  scenario.n_samples = cell.n;
  scenario.n_taxa = cell.p;
  scenario.n_true_mediators = cell.t;
  scenario.frac_associated = config.frac_associated;
  scenario.exposure_mediator_effect = config.exposure_mediator_effect;
  scenario.exposure_outcome_effect = config.exposure_outcome_effect;
  scenario.mediator_outcome_effect = cell.effect;
  scenario.family = cell.family;
  scenario.null_scenario = cell.null_scenario;
  scenario.seed = derive_seed(seed, 1);

  SyntheticDataset data = generate(scenario);
  CountMatrix imputed = impute_pseudocount(data.counts, config.pseudocount);
  CompositionMatrix comp = close_composition(imputed.values);
  IlrMatrix ilr = ilr_transform(comp, default_partition(cell.p));
  EmbeddingMatrix mediators =
      reduce(ilr, cell.strategy, config.n_components, derive_seed(seed, 2));

  MediationInput input;
  input.exposure = data.exposure;
  input.outcome = data.outcome;
  input.family = cell.family;
  input.mediators = mediators.values;

  PermutationOptions options;
  options.n_permutations = config.n_permutations;
  options.seed = derive_seed(seed, 3);
  return permutation_test(input, options).p_value;
}

PowerTable run_sweep(const SweepConfig& config, bool null_scenario, std::ostream* progress) {
  config.validate();

  std::vector<Cell> cells;
  for (int n : config.n_grid) {
    int p = config.p_rule == TaxaRule::EqualN ? n : 2 * n;
    std::vector<double> effects = null_scenario ? std::vector<double>{0.0} : config.effect_grid;
    std::vector<int> ts = null_scenario ? std::vector<int>{0} : config.t_grid;
    for (double effect : effects) {
      for (int t : ts) {
        for (OutcomeFamily family : config.families) {
          for (ReductionStrategy strategy : config.strategies) {
            cells.push_back({n, p, t, effect, family, strategy, null_scenario});
          }
        }
      }
    }
  }

  const auto n_cells = cells.size();
  const auto n_sims = static_cast<std::size_t>(config.n_sims);
  std::vector<std::vector<double>> p_values(n_cells,
                                            std::vector<double>(n_sims, std::numeric_limits<double>::quiet_NaN()));

  std::mutex progress_mutex;
  std::vector<std::size_t> cell_done(n_cells, 0);

  parallel_for(n_cells * n_sims, config.n_workers, [&](std::size_t task) {
    std::size_t cell_idx = task / n_sims;
    std::size_t rep_idx = task % n_sims;
    std::uint64_t seed = derive_seed(config.master_seed, cell_idx + 1, rep_idx + 1);
    try {
      p_values[cell_idx][rep_idx] = run_replicate(cells[cell_idx], config, seed);
    } catch (const NumericalError&) {
      // replicate failed; counted per cell below
    }
    if (progress) {
      std::lock_guard<std::mutex> lock(progress_mutex);
      if (++cell_done[cell_idx] == n_sims) {
        const Cell& c = cells[cell_idx];
        (*progress) << "cell n=" << c.n << " p=" << c.p << " t=" << c.t
                    << " effect=" << format_real(c.effect) << " family=" << to_string(c.family)
                    << " strategy=" << to_string(c.strategy) << " done\n";
      }
    }
  });

  PowerTable table;
  table.reserve(n_cells * config.alpha_grid.size());
  for (std::size_t ci = 0; ci < n_cells; ++ci) {
    const Cell& cell = cells[ci];
    int completed = 0, failures = 0;
    for (double p : p_values[ci]) {
      if (std::isnan(p)) {
        ++failures;
      } else {
        ++completed;
      }
    }
    if (progress && failures > 0 &&
        failures * 5 > config.n_sims) {  // > 20% failed
      std::lock_guard<std::mutex> lock(progress_mutex);
      (*progress) << "warning: unreliable cell n=" << cell.n << " p=" << cell.p
                  << " t=" << cell.t << " effect=" << format_real(cell.effect)
                  << " family=" << to_string(cell.family)
                  << " strategy=" << to_string(cell.strategy) << " (" << failures << "/"
                  << config.n_sims << " replicates failed)\n";
    }
    for (double alpha : config.alpha_grid) {
      PowerRow row;
      row.n = cell.n;
      row.p = cell.p;
      row.t = cell.t;
      row.effect = cell.effect;
      row.family = cell.family;
      row.strategy = cell.strategy;
      row.alpha = alpha;
      int rejections = 0;
      for (double p : p_values[ci]) {
        if (!std::isnan(p) && p <= alpha) ++rejections;
      }
      row.n_sims_completed = completed;
      row.n_failures = failures;
      row.rejection_rate =
          completed > 0 ? static_cast<double>(rejections) / static_cast<double>(completed) : 0.0;
      table.push_back(row);
    }
  }
  return table;
}

std::vector<std::string> row_descriptors(const PowerRow& row) {
  return {std::to_string(row.n),      std::to_string(row.p),    std::to_string(row.t),
          format_real(row.effect),    to_string(row.family),    to_string(row.strategy),
          format_real(row.alpha)};
}

}  // namespace

PowerTable run_power_sweep(const SweepConfig& config, std::ostream* progress) {
  return run_sweep(config, false, progress);
}

PowerTable run_type1_sweep(const SweepConfig& config, std::ostream* progress) {
  return run_sweep(config, true, progress);
}

void emit_results(const PowerTable& table, std::ostream& out) {
  if (table.empty()) throw InvalidArgument("cannot emit an empty result table");
  PowerTable sorted = table;
  std::sort(sorted.begin(), sorted.end(), [](const PowerRow& a, const PowerRow& b) {
    return row_descriptors(a) < row_descriptors(b);
  });
  out << "n,p,t,effect,family,strategy,alpha,rejection_rate,n_sims_completed,n_failures\n";
  for (const PowerRow& row : sorted) {
    out << row.n << ',' << row.p << ',' << row.t << ',' << format_real(row.effect) << ','
        << to_string(row.family) << ',' << to_string(row.strategy) << ','
        << format_real(row.alpha) << ',' << format_real(row.rejection_rate) << ','
        << row.n_sims_completed << ',' << row.n_failures << '\n';
  }
}

PowerTable parse_results(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ParseError("result table is empty");
  if (line != "n,p,t,effect,family,strategy,alpha,rejection_rate,n_sims_completed,n_failures") {
    throw ParseError("unexpected result table header: " + line);
  }
  PowerTable table;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string field;
    std::vector<std::string> fields;
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (fields.size() != 10) {
      throw ParseError("line " + std::to_string(line_no) + ": expected 10 fields");
    }
    PowerRow row;
    try {
      row.n = std::stoi(fields[0]);
      row.p = std::stoi(fields[1]);
      row.t = std::stoi(fields[2]);
      row.effect = std::stod(fields[3]);
      row.family = parse_family(fields[4]);
      row.strategy = parse_strategy(fields[5]);
      row.alpha = std::stod(fields[6]);
      row.rejection_rate = std::stod(fields[7]);
      row.n_sims_completed = std::stoi(fields[8]);
      row.n_failures = std::stoi(fields[9]);
    } catch (const std::exception& err) {
      throw ParseError("line " + std::to_string(line_no) + ": " + err.what());
    }
    table.push_back(row);
  }
  return table;
}

}  // namespace htmmiow

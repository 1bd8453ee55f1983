#include "odtmip/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>

#include "internal/parallel.hpp"
#include "odtmip/cart.hpp"
#include "odtmip/error.hpp"
#include "odtmip/milp/backend.hpp"

namespace odtmip {
namespace {

using internal::parallel_for;

std::size_t nonempty_classes(const Dataset& data) {
  return static_cast<std::size_t>(
      std::count_if(data.class_sizes.begin(), data.class_sizes.end(),
                    [](std::size_t s) { return s > 0; }));
}

RunReport base_report(const Dataset& train, const Dataset& test, const RunConfig& config,
                      Method method) {
  RunReport r;
  r.method = method;
  r.dataset = config.data_path;
  r.params = config.params;
  r.train_rows = train.rows;
  r.test_rows = test.rows;
  r.mip_rows = train.rows;
  r.label_names = train.label_names;
  r.features = train.features;
  return r;
}

void fill_cart(RunReport& r, const ObliqueTree& cart, const Dataset& train, const Dataset& test) {
  r.cart_train_accuracy = accuracy(cart, train);
  r.cart_test_accuracy = test.rows == 0 ? 0.0 : accuracy(cart, test);
}

void fill_outcome(RunReport& r, const SolveOutcome& o) {
  r.status = o.status;
  r.solve_seconds = o.seconds;
  r.mip_train_accuracy = o.mip_accuracy;
  r.objective = o.solution.objective;
  r.best_bound = o.solution.best_bound;
  r.gap = o.solution.gap();
  r.incumbent_is_warm_start = o.solution.from_warm_start;
  r.kept_warm_start_tree = o.kept_warm;
}

void finish(RunReport& r, ObliqueTree tree, const Dataset& train, const Dataset& test) {
  r.tree = std::move(tree);
  r.train_accuracy = accuracy(r.tree, train);
  r.test_accuracy = test.rows == 0 ? 0.0 : accuracy(r.tree, test);
}

RunConfig with_point(RunConfig config, const GridPoint& p) {
  config.params.epsilon = p.epsilon;
  config.params.alpha1 = p.alpha1;
  config.params.alpha2 = p.alpha2;
  config.selection.beta1 = p.beta1;
  config.selection.beta2 = p.beta2;
  return config;
}

SolveOutcome solve_impl(const Dataset& data, const ObliqueTree& warm,
                        const Svm1OdtParams& params, const RunConfig& config,
                        std::span<const double> point_weights, bool guard) {
  SolveOutcome out;
  out.tree = warm;
  Svm1OdtParams p = params;
  if (data.has_categorical()) p.categorical_mode = true;
  auto built = build_model(data, p, point_weights);
  if (!built.map.categorical_features.empty()) add_categorical(built.model, built.map, data);
  const auto warm_values = embed_warm_start(warm, data, built.map, built.model.num_variables());

  const auto start = std::chrono::steady_clock::now();
  try {
    out.solution = milp::backend_solve(built.model, config.solver_config(), warm_values,
                                       config.backend);
    out.status = milp::to_string(out.solution.status);
    if (out.solution.has_incumbent() && !out.solution.from_warm_start) {
      out.tree = extract_tree(out.solution.values, built.map, data);
    }
  } catch (const Error& e) {
    if (e.code() != ErrorCode::BackendFailure && e.code() != ErrorCode::SolverFailure) throw;
    out.status = std::string("error: ") + e.what();
    out.tree = warm;
    out.solution.values = warm_values;
    out.solution.objective = built.model.evaluate_objective(warm_values);
    out.solution.from_warm_start = true;
  }
  out.seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  if (!out.solution.values.empty()) {
    double missed = 0.0;
    for (const auto c : built.map.c) missed += out.solution.values[c.pos()];
    out.mip_accuracy = data.rows == 0 ? 0.0 : 1.0 - missed / static_cast<double>(data.rows);
  }
  if (guard && misclassified_count(out.tree, data) > misclassified_count(warm, data)) {
    out.tree = warm;
    out.kept_warm = true;
  }
  return out;
}

}  // namespace

const char* to_string(Method method) {
  switch (method) {
    case Method::Cart: return "cart";
    case Method::S1O: return "s1o";
    case Method::S1ODS: return "s1o-ds";
    case Method::Iterative: return "iterate";
  }
  return "?";
}

Method parse_method(const std::string& name) {
  for (const Method m : {Method::Cart, Method::S1O, Method::S1ODS, Method::Iterative}) {
    if (name == to_string(m)) return m;
  }
  throw Error(ErrorCode::InvalidArgument, "unknown method '" + name + "'");
}

std::vector<GridPoint> default_grid(const GridPoint& base) {
  std::vector<GridPoint> grid;
  for (const double eps : {0.005, 0.01, 0.05}) {
    for (const double a1 : {30.0, 1000.0, 1e6}) {
      for (const double a2 : {0.01, 0.1}) {
        GridPoint p = base;
        p.epsilon = eps;
        p.alpha1 = a1;
        p.alpha2 = a2;
        grid.push_back(p);
      }
    }
  }
  return grid;
}

void RunConfig::validate() const {
  if (!(time_limit_seconds > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "time limit must be positive");
  }
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "train fraction must lie in (0, 1)");
  }
  if (folds == 0) throw Error(ErrorCode::InvalidArgument, "need at least one fold");
  if (rounds == 0) throw Error(ErrorCode::InvalidArgument, "need at least one round");
  params.validate();
}

milp::SolverConfig RunConfig::solver_config() const {
  milp::SolverConfig c;
  c.time_limit_seconds = time_limit_seconds;
  c.seed = seed;
  return c;
}

PreparedData prepare(const Dataset& raw, const RunConfig& config) {
  config.validate();
  PreparedData out;
  out.split = stratified_split(raw, config.train_fraction, config.folds, config.seed);
  const Dataset train = raw.subset(out.split.train);
  out.scaler = MinMaxScaler::fit(train);
  out.train = out.scaler.apply(train);
  out.test = out.scaler.apply(raw.subset(out.split.test));
  return out;
}

PreparedData prepare(const RunConfig& config) {
  return prepare(load_csv(config.data_path, config.csv), config);
}

ObliqueTree cart_tree(const Dataset& train, int depth) {
  CartParams cp;
  cp.max_depth = depth;
  return axis_to_oblique(train_cart(train, cp), depth);
}

SolveOutcome solve_tree(const Dataset& data, const ObliqueTree& warm, const Svm1OdtParams& params,
                        const RunConfig& config, std::span<const double> point_weights) {
  return solve_impl(data, warm, params, config, point_weights, true);
}

RunReport train_cart_baseline(const Dataset& train, const Dataset& test,
                              const RunConfig& config) {
  RunReport r = base_report(train, test, config, Method::Cart);
  r.mip_rows = 0;
  const auto cart = cart_tree(train, config.params.depth);
  fill_cart(r, cart, train, test);
  finish(r, cart, train, test);
  return r;
}

RunReport train_s1o(const Dataset& train, const Dataset& test, const RunConfig& config) {
  config.validate();
  RunReport r = base_report(train, test, config, Method::S1O);
  const auto cart = cart_tree(train, config.params.depth);
  fill_cart(r, cart, train, test);
  const auto o = solve_tree(train, cart, config.params, config);
  fill_outcome(r, o);
  r.objective_trace.push_back(o.solution.objective);
  finish(r, o.tree, train, test);
  r.accuracy_trace.push_back(r.train_accuracy);
  return r;
}

RunReport train_s1o_ds(const Dataset& train, const Dataset& test, const RunConfig& config) {
  config.validate();
  RunReport r = base_report(train, test, config, Method::S1ODS);
  r.selection = config.selection;
  const auto cart = cart_tree(train, config.params.depth);
  fill_cart(r, cart, train, test);

  const auto sel = select_all(train, cart, config.selection);
  r.selection_fraction = sel.fraction(train.rows);
  r.mip_rows = sel.rows.size();
  const Dataset reduced = train.subset(sel.rows);
  ObliqueTree tree = cart;
  if (nonempty_classes(reduced) >= 2) {
    const auto o = solve_tree(reduced, cart, config.params, config);
    fill_outcome(r, o);
    r.objective_trace.push_back(o.solution.objective);
    tree = o.tree;
    // The reduced set can prefer a tree that is worse on the full set.
    if (misclassified_count(tree, train) > misclassified_count(cart, train)) {
      tree = cart;
      r.kept_warm_start_tree = true;
    }
  } else {
    r.status = "skipped";
  }
  finish(r, std::move(tree), train, test);
  r.accuracy_trace.push_back(r.train_accuracy);
  return r;
}

RunReport iterative_train(const Dataset& train, const Dataset& test, const RunConfig& config) {
  config.validate();
  RunReport r = base_report(train, test, config, Method::Iterative);
  r.selection = config.selection;
  const auto cart = cart_tree(train, config.params.depth);
  fill_cart(r, cart, train, test);

  ObliqueTree tree = cart;
  r.accuracy_trace.push_back(accuracy(tree, train));
  for (std::size_t round = 0; round < config.rounds; ++round) {
    const auto clusters = cluster_by_leaf(train, tree);
    const auto& missed = clusters.misclassified;
    std::vector<std::size_t> heavy;
    std::vector<std::size_t> rows = missed;
    for (const auto& c : clusters.clusters) {
      auto s = selection_lp_cluster(train, c.members, config.selection.eps_prime,
                                    config.selection.threads);
      partition_sets(s, train.dims, true);
      for (const std::size_t p : s.heavy) heavy.push_back(s.members[p]);
      for (const std::size_t p : s.heavy) rows.push_back(s.members[p]);
      for (const std::size_t p : s.rest) rows.push_back(s.members[p]);
    }
    std::sort(rows.begin(), rows.end());
    std::sort(heavy.begin(), heavy.end());
    const Dataset subset = train.subset(rows);
    r.mip_rows = rows.size();
    r.selection_fraction =
        train.rows == 0 ? 0.0 : static_cast<double>(rows.size()) / static_cast<double>(train.rows);

    if (nonempty_classes(subset) < 2) {
      r.status = "skipped";
      r.objective_trace.push_back(0.0);
      r.accuracy_trace.push_back(accuracy(tree, train));
      continue;
    }
    std::vector<double> weights(rows.size(), 1.0);
    const double heavy_weight = static_cast<double>(missed.size()) + 1.0;
    for (std::size_t k = 0; k < rows.size(); ++k) {
      if (std::binary_search(heavy.begin(), heavy.end(), rows[k])) weights[k] = heavy_weight;
    }
    const auto o = solve_impl(subset, tree, config.params, config, weights, false);
    const double elapsed = r.solve_seconds;
    fill_outcome(r, o);
    r.solve_seconds += elapsed;
    const auto status = o.solution.status;
    if (o.status.rfind("error", 0) != 0 &&
        (status == milp::SolveStatus::Optimal || status == milp::SolveStatus::Feasible)) {
      tree = o.tree;
    }
    r.objective_trace.push_back(o.solution.objective);
    r.accuracy_trace.push_back(accuracy(tree, train));
  }
  finish(r, std::move(tree), train, test);
  return r;
}

RunReport run(const Dataset& train, const Dataset& test, const RunConfig& config) {
  switch (config.method) {
    case Method::Cart: return train_cart_baseline(train, test, config);
    case Method::S1O: return train_s1o(train, test, config);
    case Method::S1ODS: return train_s1o_ds(train, test, config);
    case Method::Iterative: return iterative_train(train, test, config);
  }
  throw Error(ErrorCode::InvalidArgument, "unknown method");
}

RunReport cross_validate(const Dataset& train, const Dataset& test, const RunConfig& config) {
  config.validate();
  const auto grid = config.grid.empty()
                        ? default_grid(GridPoint{config.params.epsilon, config.params.alpha1,
                                                 config.params.alpha2, config.selection.beta1,
                                                 config.selection.beta2})
                        : config.grid;
  std::vector<std::size_t> all(train.rows);
  std::iota(all.begin(), all.end(), std::size_t{0});
  const auto folds = stratified_folds(train, all, config.folds, config.seed);

  const std::size_t jobs = grid.size() * folds.size();
  std::vector<FoldResult> results(jobs);
  parallel_for(jobs, config.threads, [&](std::size_t job) {
    const std::size_t g = job / folds.size();
    const std::size_t f = job % folds.size();
    std::vector<std::size_t> fit_rows;
    for (std::size_t k = 0; k < folds.size(); ++k) {
      if (k != f || folds.size() == 1) {
        fit_rows.insert(fit_rows.end(), folds[k].begin(), folds[k].end());
      }
    }
    std::sort(fit_rows.begin(), fit_rows.end());
    const Dataset fit = train.subset(fit_rows);
    const Dataset validation = train.subset(folds[f]);
    const auto report = run(fit, validation, with_point(config, grid[g]));
    results[job] = FoldResult{grid[g], f, report.test_accuracy};
  });

  std::size_t best = 0;
  double best_mean = -1.0;
  for (std::size_t g = 0; g < grid.size(); ++g) {
    double sum = 0.0;
    for (std::size_t f = 0; f < folds.size(); ++f) {
      sum += results[g * folds.size() + f].validation_accuracy;
    }
    const double mean = sum / static_cast<double>(folds.size());
    if (mean > best_mean) {
      best_mean = mean;
      best = g;
    }
  }
  RunReport r = run(train, test, with_point(config, grid[best]));
  r.folds = std::move(results);
  r.chosen = grid[best];
  return r;
}

RunReport run(const RunConfig& config) {
  const auto data = prepare(config);
  RunReport r = run(data.train, data.test, config);
  r.scaler = data.scaler;
  return r;
}

std::vector<RunReport> benchmark(const Dataset& raw, const std::vector<RunConfig>& configs,
                                 std::size_t threads) {
  if (configs.empty()) throw Error(ErrorCode::InvalidArgument, "no configurations to run");
  std::vector<RunReport> out(configs.size());
  parallel_for(configs.size(), threads, [&](std::size_t k) {
    const auto data = prepare(raw, configs[k]);
    out[k] = run(data.train, data.test, configs[k]);
    out[k].scaler = data.scaler;
  });
  return out;
}

}  // namespace odtmip

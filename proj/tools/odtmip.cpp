#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "odtmip/error.hpp"
#include "odtmip/pipeline.hpp"
#include "odtmip/report.hpp"
#include "odtmip/selection.hpp"

namespace fs = std::filesystem;
using namespace odtmip;

namespace {

struct Options {
  std::string data;
  std::string out;
  std::string label = "class";
  std::vector<std::string> categorical;
  int depth = 2;
  double time_limit = 900.0;
  double eps = 0.01;
  double alpha1 = 1000.0;
  double alpha2 = 0.1;
  double big_m = 1.0;
  double eps_prime = 0.0;
  double beta1 = 0.9;
  double beta2 = 0.1;
  std::uint64_t seed = 0;
  std::string backend = "builtin";
  std::size_t threads = 0;
  std::size_t rounds = 3;
  std::size_t folds = 5;
  double train_fraction = 0.75;
  bool no_cuts = false;
  bool relax_u = false;
  bool no_timing = false;
  std::string cv_method = "s1o";
  std::vector<std::string> methods{"cart", "s1o", "s1o-ds"};
  std::string model;
};

void add_common(CLI::App* app, Options& o) {
  app->add_option("data", o.data, "CSV file with a header row")->required();
  app->add_option("--out", o.out, "Output directory");
  app->add_option("--label", o.label, "Label column")->capture_default_str();
  app->add_option("--categorical", o.categorical, "Categorical columns")->delimiter(',');
  app->add_option("--depth", o.depth, "Tree depth D")->capture_default_str();
  app->add_option("--time-limit", o.time_limit, "Solver time limit in seconds")
      ->capture_default_str();
  app->add_option("--eps", o.eps, "Margin epsilon")->capture_default_str();
  app->add_option("--alpha1", o.alpha1, "Weight on margin slacks")->capture_default_str();
  app->add_option("--alpha2", o.alpha2, "Weight on the 1-norm of the hyperplanes")
      ->capture_default_str();
  app->add_option("--big-m", o.big_m, "Big-M constant before rescaling")->capture_default_str();
  app->add_option("--eps-prime", o.eps_prime, "Selection LP tolerance")->capture_default_str();
  app->add_option("--beta1", o.beta1, "Interior share threshold")->capture_default_str();
  app->add_option("--beta2", o.beta2, "Selected share threshold")->capture_default_str();
  app->add_option("--seed", o.seed, "Random seed")->capture_default_str();
  app->add_option("--backend", o.backend, "MILP backend")
      ->check(CLI::IsMember({"builtin", "external"}))
      ->capture_default_str();
  app->add_option("--threads", o.threads, "Worker threads, 0 for all cores")
      ->capture_default_str();
  app->add_option("--train-fraction", o.train_fraction, "Share of rows used for training")
      ->capture_default_str();
  app->add_option("--folds", o.folds, "Cross-validation folds")->capture_default_str();
  app->add_flag("--no-cuts", o.no_cuts, "Leave the cutting planes out");
  app->add_flag("--relax-u", o.relax_u, "Continuous leaf labels");
  app->add_flag("--no-timing", o.no_timing, "Omit wall-clock fields from reports");
}

RunConfig make_config(const Options& o, Method method) {
  RunConfig c;
  c.data_path = o.data;
  c.csv.label_column = o.label;
  c.csv.categorical_columns = o.categorical;
  c.method = method;
  c.params.depth = o.depth;
  c.params.epsilon = o.eps;
  c.params.alpha1 = o.alpha1;
  c.params.alpha2 = o.alpha2;
  c.params.big_m = o.big_m;
  c.params.add_cuts = !o.no_cuts;
  c.params.relax_u = o.relax_u;
  c.params.categorical_mode = !o.categorical.empty();
  c.params.seed = o.seed;
  c.selection.eps_prime = o.eps_prime;
  c.selection.beta1 = o.beta1;
  c.selection.beta2 = o.beta2;
  c.selection.seed = o.seed;
  c.selection.threads = o.threads;
  c.time_limit_seconds = o.time_limit;
  c.train_fraction = o.train_fraction;
  c.folds = o.folds;
  c.rounds = o.rounds;
  c.seed = o.seed;
  c.backend = o.backend;
  c.output_dir = o.out;
  c.threads = o.threads == 0 ? 1 : o.threads;
  return c;
}

void print_summary(const RunReport& r) {
  std::printf("method           %s\n", to_string(r.method));
  std::printf("status           %s\n", r.status.c_str());
  std::printf("train accuracy   %.4f (CART %.4f)\n", r.train_accuracy, r.cart_train_accuracy);
  std::printf("test accuracy    %.4f (CART %.4f)\n", r.test_accuracy, r.cart_test_accuracy);
  if (r.selection_fraction) std::printf("selected         %.4f%%\n", 100.0 * *r.selection_fraction);
  std::printf("solve time       %.2f s\n", r.solve_seconds);
}

void save_run(const RunReport& r, const Options& o) {
  if (o.out.empty()) return;
  fs::create_directories(o.out);
  const fs::path dir(o.out);
  write_text((dir / "report.json").string(), report_json(r, !o.no_timing));
  write_text((dir / "report.csv").string(), reports_csv({r}, !o.no_timing));
  write_text((dir / "tree.json").string(), tree_to_json(r.tree) + "\n");
  write_text((dir / "model.json").string(), model_json(trained_model(r, o.label)));
}

int run_method(const Options& o, Method method) {
  const auto report = run(make_config(o, method));
  print_summary(report);
  save_run(report, o);
  return 0;
}

int run_cv(const Options& o) {
  const auto config = make_config(o, parse_method(o.cv_method));
  const auto data = prepare(config);
  auto report = cross_validate(data.train, data.test, config);
  report.scaler = data.scaler;
  if (report.chosen) {
    std::printf("chosen           eps=%g alpha1=%g alpha2=%g beta1=%g beta2=%g\n",
                report.chosen->epsilon, report.chosen->alpha1, report.chosen->alpha2,
                report.chosen->beta1, report.chosen->beta2);
  }
  print_summary(report);
  save_run(report, o);
  return 0;
}

int run_select(const Options& o) {
  CsvOptions csv{o.label, o.categorical};
  const Dataset raw = load_csv(o.data, csv);
  const Dataset data = normalize(raw);
  const auto config = make_config(o, Method::S1ODS);
  const auto tree = cart_tree(data, o.depth);
  const auto sel = select_all(data, tree, config.selection);
  std::printf("selected %zu of %zu rows (%.4f%%)\n", sel.rows.size(), data.rows,
              100.0 * sel.fraction(data.rows));
  if (!o.out.empty()) {
    fs::create_directories(o.out);
    const fs::path dir(o.out);
    write_csv((dir / "selected.csv").string(), raw.subset(sel.rows), o.label);
    write_text((dir / "selection.json").string(), selection_json(data, sel));
  }
  return 0;
}

int run_benchmark(const Options& o) {
  const Dataset raw = load_csv(o.data, CsvOptions{o.label, o.categorical});
  std::vector<RunConfig> configs;
  for (const auto& m : o.methods) configs.push_back(make_config(o, parse_method(m)));
  const auto reports = benchmark(raw, configs, configs.front().threads);
  std::fputs(benchmark_text(reports, o.methods).c_str(), stdout);
  if (!o.out.empty()) {
    fs::create_directories(o.out);
    const fs::path dir(o.out);
    write_text((dir / "benchmark.txt").string(), benchmark_text(reports, o.methods));
    write_text((dir / "benchmark.csv").string(), benchmark_csv(reports, o.methods));
    write_text((dir / "reports.csv").string(), reports_csv(reports, !o.no_timing));
  }
  return 0;
}

int run_predict(const Options& o) {
  const auto model = model_from_json(read_text(o.model));
  const auto prediction = predict_csv(model, read_text(o.data));
  std::string csv = model.label_column + "\n";
  for (const auto& label : prediction.labels) csv += label + "\n";
  if (o.out.empty()) {
    std::fputs(csv.c_str(), stdout);
  } else {
    fs::create_directories(o.out);
    write_text((fs::path(o.out) / "predictions.csv").string(), csv);
  }
  if (prediction.accuracy) std::fprintf(stderr, "accuracy %.4f\n", *prediction.accuracy);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Optimal oblique classification trees from the SVM1-ODT mixed-integer program"};
  app.require_subcommand(1);
  Options o;

  auto* train = app.add_subcommand("train", "Solve the MIP on the full training split");
  auto* train_ds = app.add_subcommand("train-ds", "Select data per leaf, then solve the MIP");
  auto* iterate = app.add_subcommand("iterate", "Iterative retraining on selected data");
  auto* select = app.add_subcommand("select", "Run data selection and write the subset");
  auto* cv = app.add_subcommand("cv", "Grid search by stratified k-fold validation");
  auto* bench = app.add_subcommand("benchmark", "Compare methods on a shared protocol");
  auto* predict = app.add_subcommand("predict", "Label rows with a saved model");

  for (auto* sub : {train, train_ds, iterate, select, cv, bench}) add_common(sub, o);
  iterate->add_option("--rounds", o.rounds, "Rounds")->capture_default_str();
  cv->add_option("--method", o.cv_method, "Method to tune")
      ->check(CLI::IsMember({"s1o", "s1o-ds", "iterate"}))
      ->capture_default_str();
  bench->add_option("--methods", o.methods, "Methods, one column each")
      ->delimiter(',')
      ->check(CLI::IsMember({"cart", "s1o", "s1o-ds", "iterate"}));
  predict->add_option("model", o.model, "model.json written by a training command")->required();
  predict->add_option("data", o.data, "CSV file with the training columns")->required();
  predict->add_option("--out", o.out, "Output directory");

  CLI11_PARSE(app, argc, argv);
  try {
    if (train->parsed()) return run_method(o, Method::S1O);
    if (train_ds->parsed()) return run_method(o, Method::S1ODS);
    if (iterate->parsed()) return run_method(o, Method::Iterative);
    if (select->parsed()) return run_select(o);
    if (cv->parsed()) return run_cv(o);
    if (bench->parsed()) return run_benchmark(o);
    if (predict->parsed()) return run_predict(o);
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 1;
}

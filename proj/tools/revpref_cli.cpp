#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "revpref/serialization.hpp"

namespace {

using namespace revpref;

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  return json::parse(in);
}

TrialConfig load_config(const std::string& path) {
  TrialConfig c = config_from_json(read_json_file(path));
  if (const char* env = std::getenv("REVPREF_SEED"); env && *env) c.seed = std::stoull(env);
  return c;
}

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Revealed-preference learners: agent oracle, training, prediction and experiments"};
  app.require_subcommand(1);

  // oracle
  auto* oracle = app.add_subcommand("oracle", "Solve one agent instance and print the optimal bundle");
  std::vector<double> values, curv_a, curv_b, prices;
  double budget = 0.0;
  oracle->add_option("--values", values, "Linear per-unit values")->delimiter(',');
  oracle->add_option("--a", curv_a, "Separable linear coefficients a_i")->delimiter(',');
  oracle->add_option("--b", curv_b, "Separable curvature coefficients b_i")->delimiter(',');
  oracle->add_option("--prices", prices, "Prices")->delimiter(',')->required();
  oracle->add_option("--budget", budget, "Budget")->required();

  // train
  auto* train = app.add_subcommand("train", "Train a learner from a config and write the model JSON");
  std::string config_path, out_path = "-", log_path;
  train->add_option("--config", config_path, "Config JSON")->required()->check(CLI::ExistingFile);
  train->add_option("--out", out_path, "Model output (default stdout)");
  train->add_option("--log", log_path, "Polytope training log CSV");

  // predict
  auto* predict = app.add_subcommand("predict", "Predict a bundle from a model JSON");
  std::string model_path, example_path;
  std::uint64_t predict_seed = 0;
  predict->add_option("--model", model_path, "Model JSON")->required()->check(CLI::ExistingFile);
  predict->add_option("--example", example_path, "Example JSON {prices, budget}")->check(CLI::ExistingFile);
  predict->add_option("--prices", prices, "Prices")->delimiter(',');
  predict->add_option("--budget", budget, "Budget");
  predict->add_option("--seed", predict_seed, "Seed for sampling learners");

  // trial
  auto* trial = app.add_subcommand("trial", "Run one train/evaluate trial and print the result JSON");
  bool no_timing = false;
  trial->add_option("--config", config_path, "Config JSON")->required()->check(CLI::ExistingFile);
  trial->add_flag("--no-timing", no_timing, "Report 0 seconds for byte-stable output");

  // sweep
  auto* sweep_cmd = app.add_subcommand("sweep", "Run trials over training-set sizes and write CSV");
  std::vector<std::uint64_t> m_values;
  std::size_t trials = 30;
  sweep_cmd->add_option("--config", config_path, "Config JSON")->required()->check(CLI::ExistingFile);
  sweep_cmd->add_option("--m", m_values, "Training sizes, comma separated")->delimiter(',')->required();
  sweep_cmd->add_option("--trials", trials, "Trials per size");
  sweep_cmd->add_option("--out", out_path, "CSV output (default stdout)");
  sweep_cmd->add_flag("--no-timing", no_timing, "Report 0 seconds for byte-stable output");

  CLI11_PARSE(app, argc, argv);

  try {
    if (oracle->parsed()) {
      const PriceVector p(prices);
      json out;
      if (!values.empty()) {
        const LinearValuation v(values);
        const Bundle x = solve_linear(v, p, budget);
        out = bundle_to_json(x);
        out["value"] = bundle_value(v, x);
      } else if (!curv_a.empty()) {
        if (curv_b.empty()) curv_b.assign(curv_a.size(), 0.0);
        require_same_size(curv_a.size(), curv_b.size(), "oracle --a/--b");
        std::vector<QuadraticUtility> goods;
        for (std::size_t i = 0; i < curv_a.size(); ++i) goods.push_back({curv_a[i], curv_b[i]});
        const SeparableConcaveValuation v(std::move(goods));
        const Bundle x = solve_separable(v, p, budget);
        out = bundle_to_json(x);
        out["value"] = bundle_value(v, x);
      } else {
        throw std::invalid_argument("oracle: give --values or --a/--b");
      }
      std::cout << out.dump() << '\n';
    } else if (train->parsed()) {
      const TrialConfig c = load_config(config_path);
      Rng instance_rng = fork_rng(c.seed, kInstanceStream);
      const Instance instance = generate_instance(c, instance_rng);
      const TrainingOutcome trained = train_model(c, instance);
      json model = model_to_json(trained.model);
      model["m"] = trained.m;
      write_text(out_path, model.dump(2) + "\n");
      if (!log_path.empty()) {
        PolytopeTraining log_view;
        log_view.log = trained.log;
        std::ostringstream csv;
        log_view.write_log_csv(csv);
        write_text(log_path, csv.str());
      }
    } else if (predict->parsed()) {
      json mj = read_json_file(model_path);
      mj.erase("m");
      const TrainedModel model = model_from_json(mj);
      const Example ex = !example_path.empty() ? example_from_json(read_json_file(example_path))
                                               : Example(PriceVector(prices), budget);
      Rng rng = fork_rng(predict_seed, kLearnerStream);
      bool fell_back = false;
      const Bundle x = predict_with(model, ex, rng, &fell_back);
      json out = bundle_to_json(x);
      if (std::holds_alternative<DerivativeGrid>(model)) out["thresholds_found"] = !fell_back;
      std::cout << out.dump() << '\n';
    } else if (trial->parsed()) {
      const TrialConfig c = load_config(config_path);
      std::cout << result_to_json(run_trial(c), !no_timing).dump(2) << '\n';
    } else if (sweep_cmd->parsed()) {
      const TrialConfig c = load_config(config_path);
      std::ostringstream csv;
      write_sweep_csv(csv, sweep(c, m_values, trials), !no_timing);
      write_text(out_path, csv.str());
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

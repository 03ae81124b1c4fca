#include <cstdio>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <map>
#include <sstream>

#include <CLI11.hpp>

#include "styleaug/adain/style_model.hpp"
#include "styleaug/data/image_folder.hpp"
#include "styleaug/harness/classifier.hpp"
#include "styleaug/harness/config.hpp"
#include "styleaug/harness/experiment.hpp"
#include "styleaug/runtime.hpp"

namespace fs = std::filesystem;
using namespace styleaug;

namespace {

/// Flags that override fields of the config file.
struct Overrides {
  std::string config_path;
  std::string dataset;
  std::string method;
  std::string augmentation;
  std::string style_checkpoint;
  std::vector<std::string> targets;
  std::optional<double> alpha, p, gamma, eta, lambda;
  std::optional<std::uint64_t> seed;
  std::optional<int> runs, iterations, style_epochs;
  bool per_run_style = false;

  void attach(CLI::App* cmd) {
    cmd->add_option("--config", config_path, "Experiment config (JSON)")->check(CLI::ExistingFile);
    cmd->add_option("--dataset", dataset, "Image-folder root (default: synthetic data)");
    cmd->add_option("--method", method, "baseline | rotation | mixup-pixel | mixup-feature");
    cmd->add_option("--augmentation", augmentation, "original | stylized");
    cmd->add_option("--alpha", alpha, "Stylization strength in [0, 1]");
    cmd->add_option("--p", p, "Replacement probability in [0, 1]");
    cmd->add_option("--gamma", gamma, "Mixup Beta parameter");
    cmd->add_option("--eta", eta, "Rotation loss weight");
    cmd->add_option("--lambda", lambda, "Style loss weight");
    cmd->add_option("--target", targets, "Held-out domain (repeatable; default: all)");
    cmd->add_option("--seed", seed, "Base seed; run r uses seed + r");
    cmd->add_option("--runs", runs, "Runs per target");
    cmd->add_option("--iterations", iterations, "Classifier iterations");
    cmd->add_option("--style-epochs", style_epochs, "Style model epochs");
    cmd->add_option("--style-checkpoint", style_checkpoint, "Load style models from here ({target} is substituted)");
    cmd->add_flag("--per-run-style", per_run_style, "Retrain the style model for every run");
  }

  harness::ExperimentConfig resolve() const {
    harness::ExperimentConfig c = config_path.empty() ? harness::ExperimentConfig{} : harness::load_config(config_path);
    if (!dataset.empty()) c.dataset.path = dataset;
    if (!method.empty()) c.method = harness::method_from_string(method);
    if (!augmentation.empty()) c.augmentation = harness::augmentation_from_string(augmentation);
    if (!style_checkpoint.empty()) c.style.checkpoint = style_checkpoint;
    if (!targets.empty()) c.protocol.targets = targets;
    if (alpha) c.alpha = *alpha;
    if (p) c.p = *p;
    if (gamma) c.gamma = *gamma;
    if (eta) c.eta = *eta;
    if (lambda) c.lambda_style = *lambda;
    if (seed) c.protocol.base_seed = *seed;
    if (runs) c.protocol.n_runs = *runs;
    if (iterations) c.classifier.iterations = *iterations;
    if (style_epochs) c.style.epochs = *style_epochs;
    if (per_run_style) c.style.per_run = true;
    c.validate();
    return c;
  }
};

void log_line(const std::string& msg) { std::cerr << msg << '\n'; }

std::string target_file(const fs::path& dir, const std::string& target, const std::string& suffix) {
  return (dir / (target + suffix)).string();
}

int cmd_gen_data(const Overrides& o, const fs::path& out) {
  const auto config = o.resolve();
  const auto ds = harness::load_dataset(config, log_line);
  data::export_image_folder(ds, out);
  std::cout << "wrote " << ds.total_images() << " images (" << ds.num_domains() << " domains, " << ds.num_classes()
            << " classes) to " << out.string() << '\n';
  return 0;
}

int cmd_train_style(const Overrides& o, const fs::path& out_dir) {
  const auto config = o.resolve();
  const auto ds = harness::load_dataset(config, log_line);
  fs::create_directories(out_dir);
  for (const auto& target : harness::resolve_targets(config, ds)) {
    const auto loo = data::leave_one_out_split(ds, target, config.dataset.target_mode, config.dataset.seed);
    harness::StyleModelCache cache;
    const auto& result = cache.get(config, loo, ds.num_classes(), config.protocol.base_seed, log_line);
    const std::string path = target_file(out_dir, target, ".style.ckpt");
    nn::save_checkpoint(adain::to_checkpoint(result.model), path);
    std::cout << "target " << target << ": L_A " << result.curve.front().total << " -> " << result.curve.back().total
              << ", saved " << path << '\n';
  }
  return 0;
}

int cmd_train_cls(const Overrides& o, const fs::path& results, const std::string& save_dir) {
  const auto config = o.resolve();
  const auto ds = harness::load_dataset(config, log_line);
  harness::StyleModelCache cache;
  std::vector<harness::ResultRow> rows;
  for (const auto& target : harness::resolve_targets(config, ds)) {
    auto outcome = harness::run_experiment(config, ds, target, &cache, log_line);
    if (!save_dir.empty()) {
      fs::create_directories(save_dir);
      for (const auto& run : outcome.runs) {
        const std::string path = target_file(save_dir, target + ".seed" + std::to_string(run.seed), ".cls.ckpt");
        nn::save_checkpoint(harness::to_checkpoint(run.model, ds.class_names), path);
      }
    }
    std::cout << target << ": " << std::fixed << std::setprecision(2) << outcome.row.mean << " +- " << outcome.row.std
              << std::defaultfloat << '\n';
    rows.push_back(std::move(outcome.row));
  }
  if (!results.empty()) harness::emit_results(rows, results);
  return 0;
}

int cmd_eval(const Overrides& o, const fs::path& checkpoint) {
  const auto config = o.resolve();
  if (config.protocol.targets.size() != 1) throw std::invalid_argument("eval needs exactly one --target");
  const auto ds = harness::load_dataset(config, log_line);
  const auto model = harness::classifier_from_checkpoint(nn::load_checkpoint(checkpoint));
  const auto& target = config.protocol.targets.front();
  const auto loo = data::leave_one_out_split(ds, target, config.dataset.target_mode, config.dataset.seed);
  std::cout << target << " accuracy " << std::fixed << std::setprecision(2)
            << 100.0 * harness::accuracy(model, loo.target_test) << " (" << loo.target_test.size() << " images)\n";
  return 0;
}

int cmd_sweep(const Overrides& o, const std::vector<double>& alphas, const std::vector<double>& ps,
              const fs::path& results) {
  const auto config = o.resolve();
  const auto ds = harness::load_dataset(config, log_line);
  harness::StyleModelCache cache;
  const auto table = harness::sweep(config, ds, alphas, ps, &cache, log_line);
  std::cout << "alpha,p,mean,pooled_std\n";
  for (const auto& c : table.cells) std::cout << c.alpha << ',' << c.p << ',' << c.mean << ',' << c.pooled_std << '\n';
  if (!results.empty()) harness::emit_results(table, results);
  return 0;
}

int cmd_report(const fs::path& results) {
  const auto rows = harness::read_results(results);
  std::map<std::string, std::vector<double>> by_setting;
  std::cout << std::left << std::setw(12) << "target" << std::setw(15) << "method" << std::setw(11) << "augment"
            << std::setw(7) << "alpha" << std::setw(7) << "p" << "accuracy\n";
  for (const auto& r : rows) {
    std::ostringstream acc;
    acc << std::fixed << std::setprecision(2) << r.mean << " +- " << r.std;
    std::cout << std::setw(12) << r.target << std::setw(15) << r.method << std::setw(11) << r.augmentation
              << std::setw(7) << r.alpha << std::setw(7) << r.p << acc.str() << '\n';
    std::ostringstream key;
    key << r.method << ' ' << r.augmentation << " alpha=" << r.alpha << " p=" << r.p;
    by_setting[key.str()].push_back(r.mean);
  }
  std::cout << "\naverage over targets\n";
  for (const auto& [key, means] : by_setting)
    std::cout << "  " << key << ": " << std::fixed << std::setprecision(2) << harness::average_runs(means).mean << " ("
              << means.size() << " targets)\n"
              << std::defaultfloat;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  tune_allocator();
  CLI::App app{"Style-transfer source augmentation for domain generalization"};
  app.require_subcommand(1);

  Overrides gen_o, style_o, cls_o, eval_o, sweep_o;
  std::string gen_out, style_out = "style_models", cls_results, cls_save, eval_ckpt, sweep_results, report_path;
  std::vector<double> alphas{0.1, 0.5, 1.0}, ps{0.75};

  auto* gen = app.add_subcommand("gen-data", "Export the synthetic dataset as an image folder");
  gen_o.attach(gen);
  gen->add_option("--out", gen_out, "Output directory")->required();

  auto* style = app.add_subcommand("train-style", "Train one style model per target on its source domains");
  style_o.attach(style);
  style->add_option("--out", style_out, "Checkpoint directory")->capture_default_str();

  auto* cls = app.add_subcommand("train-cls", "Run the leave-one-domain-out protocol for the selected targets");
  cls_o.attach(cls);
  cls->add_option("--results", cls_results, "Write result rows as CSV (plus a .json sidecar)");
  cls->add_option("--save", cls_save, "Directory for the selected classifier checkpoints");

  auto* eval = app.add_subcommand("eval", "Evaluate a classifier checkpoint on a target domain");
  eval_o.attach(eval);
  eval->add_option("--checkpoint", eval_ckpt, "Classifier checkpoint")->required()->check(CLI::ExistingFile);

  auto* sw = app.add_subcommand("sweep", "Stylized runs over an alpha x p grid, averaged over targets");
  sweep_o.attach(sw);
  sw->add_option("--alphas", alphas, "Alpha grid")->capture_default_str()->delimiter(',');
  sw->add_option("--ps", ps, "p grid")->capture_default_str()->delimiter(',');
  sw->add_option("--results", sweep_results, "Write result rows as CSV (plus a .json sidecar)");

  auto* report = app.add_subcommand("report", "Summarize a results file");
  report->add_option("results", report_path, "Results CSV")->required();

  CLI11_PARSE(app, argc, argv);
  try {
    if (gen->parsed()) return cmd_gen_data(gen_o, gen_out);
    if (style->parsed()) return cmd_train_style(style_o, style_out);
    if (cls->parsed()) return cmd_train_cls(cls_o, cls_results, cls_save);
    if (eval->parsed()) return cmd_eval(eval_o, eval_ckpt);
    if (sw->parsed()) return cmd_sweep(sweep_o, alphas, ps, sweep_results);
    if (report->parsed()) return cmd_report(report_path);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}

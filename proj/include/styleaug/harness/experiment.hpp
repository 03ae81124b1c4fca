#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "styleaug/adain/style_model.hpp"
#include "styleaug/augment/stylize_augment.hpp"
#include "styleaug/data/dataset.hpp"
#include "styleaug/harness/classifier.hpp"
#include "styleaug/harness/config.hpp"

namespace styleaug::harness {

/// Synthetic data when config.dataset.path is empty, otherwise the image folder.
data::MultiDomainDataset load_dataset(const ExperimentConfig& config, const Logger& log = {});

/// Trained style models keyed by (target, seed, style settings), so one model
/// serves every run and sweep cell that shares a source set.
class StyleModelCache {
 public:
  const adain::StyleTrainingResult& get(const ExperimentConfig& config, const data::LeaveOneOut& loo, int num_classes,
                                        std::uint64_t seed, const Logger& log = {});
  std::size_t size() const { return models_.size(); }

 private:
  std::map<std::string, adain::StyleTrainingResult> models_;
};

/// The style model a run uses: loaded from config.style.checkpoint
/// ("{target}" is replaced by the target name) or trained on all source images.
adain::StyleTransferModel obtain_style_model(const ExperimentConfig& config, const data::LeaveOneOut& loo,
                                             int num_classes, std::uint64_t seed, StyleModelCache* cache,
                                             const Logger& log = {});

struct RunRecord {
  std::uint64_t seed = 0;
  double target_accuracy = 0.0;  // percent
  std::vector<int> val_iterations;
  std::vector<double> val_curve;
  std::size_t selected = 0;
  std::uint64_t parameter_hash = 0;
  augment::AugmentationReport augmentation;
  Classifier model;  // the selected checkpoint
};

struct ResultRow {
  std::string target;
  std::string method;
  std::string augmentation;
  double alpha = 0.0;
  double p = 0.0;
  std::vector<std::uint64_t> run_seeds;
  std::vector<double> accuracies;  // percent, one per run
  double mean = 0.0;
  double std = 0.0;
};

struct ExperimentOutcome {
  ResultRow row;
  std::vector<RunRecord> runs;
};

/// Runs config.protocol.n_runs trainings for one held-out domain. Run r uses
/// seed base_seed + r for its split, initialization, batches and augmentation.
ExperimentOutcome run_experiment(const ExperimentConfig& config, const data::MultiDomainDataset& dataset,
                                 const std::string& target, StyleModelCache* cache = nullptr, const Logger& log = {});

/// Index of the best validation accuracy, earliest on ties.
std::size_t select_model(std::span<const double> val_curve);

struct RunSummary {
  double mean = 0.0;
  double std = 0.0;  // sample standard deviation; 0 for a single run
};
RunSummary average_runs(std::span<const double> values);

/// sqrt(sum_i (n_i - 1) s_i^2 / sum_i (n_i - 1)); groups of one value contribute nothing.
double pooled_std(const std::vector<std::vector<double>>& groups);

struct SweepCell {
  double alpha = 0.0;
  double p = 0.0;
  std::vector<ResultRow> rows;  // one per target
  double mean = 0.0;            // mean over targets of the row means
  double pooled_std = 0.0;      // pooled over the per-target run groups
};

struct SweepTable {
  std::vector<double> alphas;
  std::vector<double> ps;
  std::vector<SweepCell> cells;  // alpha-major

  const SweepCell& at(double alpha, double p) const;
};

/// Every (alpha, p) cell runs every target with augmentation forced to Stylized.
SweepTable sweep(const ExperimentConfig& config, const data::MultiDomainDataset& dataset,
                 const std::vector<double>& alphas, const std::vector<double>& ps, StyleModelCache* cache = nullptr,
                 const Logger& log = {});

/// Fills mean and pooled_std from the rows.
void summarize_cell(SweepCell& cell);

/// Writes the CSV (accuracies with two decimals) and `<path>.json` holding the
/// same rows at full precision.
void emit_results(std::span<const ResultRow> rows, const std::filesystem::path& path);
void emit_results(const SweepTable& table, const std::filesystem::path& path);
std::filesystem::path sidecar_path(const std::filesystem::path& csv_path);

/// Reads the full-precision sidecar written next to `csv_path`.
std::vector<ResultRow> read_results(const std::filesystem::path& csv_path);

/// Targets named in the config, or every domain.
std::vector<std::string> resolve_targets(const ExperimentConfig& config, const data::MultiDomainDataset& dataset);

}  // namespace styleaug::harness

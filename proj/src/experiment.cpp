#include "styleaug/harness/experiment.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "styleaug/data/image_folder.hpp"
#include "styleaug/data/synthetic.hpp"

namespace styleaug::harness {

using nlohmann::json;

data::MultiDomainDataset load_dataset(const ExperimentConfig& config, const Logger& log) {
  if (config.dataset.path.empty()) {
    data::SyntheticSpec spec = config.dataset.synthetic;
    spec.resolution = config.dataset.resolution;
    return data::generate_synthetic_domains(spec, config.dataset.seed);
  }
  data::ImageFolderOptions opts;
  opts.resolution = config.dataset.resolution;
  opts.warn = log;
  return data::load_image_folder(config.dataset.path, opts);
}

namespace {

std::vector<data::LabeledImage> source_images(const data::LeaveOneOut& loo) {
  std::vector<data::LabeledImage> out;
  for (const auto& s : loo.sources) out.insert(out.end(), s.images.begin(), s.images.end());
  return out;
}

std::string cache_key(const ExperimentConfig& config, const data::LeaveOneOut& loo, std::uint64_t seed) {
  const json j = to_json(config);
  std::ostringstream os;
  os << j["dataset"].dump() << '|' << loo.target_name << '|' << seed << '|' << j["style"].dump() << '|'
     << std::setprecision(17) << config.lambda_style;
  return os.str();
}

}  // namespace

const adain::StyleTrainingResult& StyleModelCache::get(const ExperimentConfig& config, const data::LeaveOneOut& loo,
                                                      int num_classes, std::uint64_t seed, const Logger& log) {
  const std::string key = cache_key(config, loo, seed);
  auto it = models_.find(key);
  if (it != models_.end()) return it->second;
  if (log) log("training style model for target " + loo.target_name + " (seed " + std::to_string(seed) + ")");
  auto result = adain::train_style_model(source_images(loo), num_classes, style_training_config(config, seed), log);
  return models_.emplace(key, std::move(result)).first->second;
}

adain::StyleTransferModel obtain_style_model(const ExperimentConfig& config, const data::LeaveOneOut& loo,
                                             int num_classes, std::uint64_t seed, StyleModelCache* cache,
                                             const Logger& log) {
  if (!config.style.checkpoint.empty()) {
    std::string path = config.style.checkpoint;
    for (auto pos = path.find("{target}"); pos != std::string::npos; pos = path.find("{target}"))
      path.replace(pos, 8, loo.target_name);
    if (!std::filesystem::exists(path)) throw std::runtime_error("style checkpoint " + path + " does not exist");
    auto model = adain::style_model_from_checkpoint(nn::load_checkpoint(path));
    if (!model.trained) throw adain::UntrainedModelError("style checkpoint " + path + " holds an untrained model");
    return model;
  }
  if (cache) return cache->get(config, loo, num_classes, seed, log).model;
  StyleModelCache local;
  return local.get(config, loo, num_classes, seed, log).model;
}

std::size_t select_model(std::span<const double> val_curve) {
  if (val_curve.empty()) throw std::invalid_argument("select_model needs at least one validation result");
  std::size_t best = 0;
  for (std::size_t i = 1; i < val_curve.size(); ++i)
    if (val_curve[i] > val_curve[best]) best = i;
  return best;
}

RunSummary average_runs(std::span<const double> values) {
  if (values.empty()) throw std::invalid_argument("average_runs needs at least one run");
  RunSummary s;
  s.mean = std::accumulate(values.begin(), values.end(), 0.0) / values.size();
  if (values.size() < 2) return s;
  double ss = 0.0;
  for (double v : values) ss += (v - s.mean) * (v - s.mean);
  s.std = std::sqrt(ss / (values.size() - 1));
  return s;
}

double pooled_std(const std::vector<std::vector<double>>& groups) {
  double ss = 0.0;
  std::size_t dof = 0;
  for (const auto& g : groups) {
    if (g.size() < 2) continue;
    const double sd = average_runs(g).std;
    ss += (g.size() - 1) * sd * sd;
    dof += g.size() - 1;
  }
  return dof ? std::sqrt(ss / dof) : 0.0;
}

ExperimentOutcome run_experiment(const ExperimentConfig& config, const data::MultiDomainDataset& dataset,
                                 const std::string& target, StyleModelCache* cache, const Logger& log) {
  config.validate();
  const data::LeaveOneOut loo =
      data::leave_one_out_split(dataset, target, config.dataset.target_mode, config.dataset.seed);
  const bool stylized = config.augmentation == Augmentation::Stylized;
  ExperimentOutcome out;
  ResultRow& row = out.row;
  row.target = target;
  row.method = to_string(config.method);
  row.augmentation = to_string(config.augmentation);
  row.alpha = config.alpha;
  row.p = config.p;

  StyleModelCache local_cache;
  StyleModelCache* models = cache ? cache : &local_cache;
  adain::StyleTransferModel shared;
  if (stylized && !config.style.per_run)
    shared = obtain_style_model(config, loo, dataset.num_classes(), config.protocol.base_seed, models, log);

  for (int r = 0; r < config.protocol.n_runs; ++r) {
    const std::uint64_t seed = config.protocol.base_seed + r;
    if (log) log("target " + target + " run " + std::to_string(r + 1) + "/" + std::to_string(config.protocol.n_runs) +
                 " seed " + std::to_string(seed));
    Rng split_rng = make_stream(seed, Stream::Split);
    const data::ProtocolSplit split = data::make_protocol_split(loo, config.protocol.train_ratio, split_rng);
    adain::StyleTransferModel per_run;
    if (stylized && config.style.per_run)
      per_run = obtain_style_model(config, loo, dataset.num_classes(), seed, models, log);
    const adain::StyleTransferModel* style = stylized ? (config.style.per_run ? &per_run : &shared) : nullptr;

    ClassifierRun trained = train_classifier(config, split, dataset.num_classes(), style, seed, log);
    RunRecord rec;
    rec.seed = seed;
    rec.target_accuracy = 100.0 * accuracy(trained.model, split.target_test);
    rec.val_iterations = trained.val_iterations;
    rec.val_curve = trained.val_curve;
    rec.selected = trained.selected;
    rec.parameter_hash = parameter_hash(trained.model);
    rec.augmentation = trained.augmentation;
    rec.model = std::move(trained.model);
    if (log) {
      std::ostringstream os;
      os << "target " << target << " seed " << seed << " selected iteration " << rec.val_iterations[rec.selected]
         << " target accuracy " << std::fixed << std::setprecision(2) << rec.target_accuracy;
      log(os.str());
    }
    row.run_seeds.push_back(seed);
    row.accuracies.push_back(rec.target_accuracy);
    out.runs.push_back(std::move(rec));
  }
  const RunSummary s = average_runs(row.accuracies);
  row.mean = s.mean;
  row.std = s.std;
  return out;
}

std::vector<std::string> resolve_targets(const ExperimentConfig& config, const data::MultiDomainDataset& dataset) {
  if (config.protocol.targets.empty()) return dataset.domain_names;
  for (const auto& t : config.protocol.targets) dataset.domain_index(t);
  return config.protocol.targets;
}

void summarize_cell(SweepCell& cell) {
  if (cell.rows.empty()) throw std::invalid_argument("sweep cell has no result rows");
  std::vector<double> means;
  std::vector<std::vector<double>> groups;
  for (const auto& r : cell.rows) {
    means.push_back(r.mean);
    groups.push_back(r.accuracies);
  }
  cell.mean = average_runs(means).mean;
  cell.pooled_std = pooled_std(groups);
}

const SweepCell& SweepTable::at(double alpha, double p) const {
  for (const auto& c : cells)
    if (c.alpha == alpha && c.p == p) return c;
  throw std::out_of_range("sweep table has no cell for the requested alpha/p");
}

SweepTable sweep(const ExperimentConfig& config, const data::MultiDomainDataset& dataset,
                 const std::vector<double>& alphas, const std::vector<double>& ps, StyleModelCache* cache,
                 const Logger& log) {
  if (alphas.empty() || ps.empty()) throw std::invalid_argument("sweep needs non-empty alpha and p grids");
  SweepTable table{alphas, ps, {}};
  const auto targets = resolve_targets(config, dataset);
  StyleModelCache local_cache;
  StyleModelCache* models = cache ? cache : &local_cache;
  for (double alpha : alphas)
    for (double p : ps) {
      ExperimentConfig cell_config = config;
      cell_config.augmentation = Augmentation::Stylized;
      cell_config.alpha = alpha;
      cell_config.p = p;
      cell_config.validate();
      SweepCell cell{alpha, p, {}, 0.0, 0.0};
      for (const auto& t : targets) cell.rows.push_back(run_experiment(cell_config, dataset, t, models, log).row);
      summarize_cell(cell);
      if (log) {
        std::ostringstream os;
        os << "sweep cell alpha=" << alpha << " p=" << p << " mean " << cell.mean << " pooled_std " << cell.pooled_std;
        log(os.str());
      }
      table.cells.push_back(std::move(cell));
    }
  return table;
}

std::filesystem::path sidecar_path(const std::filesystem::path& csv_path) {
  return std::filesystem::path(csv_path.string() + ".json");
}

namespace {

template <typename T>
std::string join(const std::vector<T>& values, int decimals) {
  std::ostringstream os;
  if (decimals >= 0) os << std::fixed << std::setprecision(decimals);
  for (std::size_t i = 0; i < values.size(); ++i) os << (i ? ";" : "") << values[i];
  return os.str();
}

}  // namespace

void emit_results(std::span<const ResultRow> rows, const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream csv(path);
  if (!csv) throw std::runtime_error("cannot write results to " + path.string());
  csv << "target,method,augmentation,alpha,p,run_seeds,accuracies,mean,std\n";
  json side = json::array();
  for (const auto& r : rows) {
    csv << r.target << ',' << r.method << ',' << r.augmentation << ',' << r.alpha << ',' << r.p << ','
        << join(r.run_seeds, -1) << ',' << join(r.accuracies, 2) << ',' << std::fixed << std::setprecision(2) << r.mean
        << ',' << r.std << '\n'
        << std::defaultfloat;
    side.push_back({{"target", r.target},
                    {"method", r.method},
                    {"augmentation", r.augmentation},
                    {"alpha", r.alpha},
                    {"p", r.p},
                    {"run_seeds", r.run_seeds},
                    {"accuracies", r.accuracies},
                    {"mean", r.mean},
                    {"std", r.std}});
  }
  if (!csv) throw std::runtime_error("failed writing " + path.string());
  std::ofstream out(sidecar_path(path));
  if (!out) throw std::runtime_error("cannot write " + sidecar_path(path).string());
  out << side.dump(2) << '\n';
}

void emit_results(const SweepTable& table, const std::filesystem::path& path) {
  std::vector<ResultRow> rows;
  for (const auto& c : table.cells) rows.insert(rows.end(), c.rows.begin(), c.rows.end());
  emit_results(rows, path);
}

std::vector<ResultRow> read_results(const std::filesystem::path& csv_path) {
  std::ifstream in(sidecar_path(csv_path));
  if (!in) throw std::runtime_error("cannot open " + sidecar_path(csv_path).string());
  const json side = json::parse(in);
  std::vector<ResultRow> rows;
  for (const auto& j : side) {
    ResultRow r;
    r.target = j.at("target").get<std::string>();
    r.method = j.at("method").get<std::string>();
    r.augmentation = j.at("augmentation").get<std::string>();
    r.alpha = j.at("alpha").get<double>();
    r.p = j.at("p").get<double>();
    r.run_seeds = j.at("run_seeds").get<std::vector<std::uint64_t>>();
    r.accuracies = j.at("accuracies").get<std::vector<double>>();
    r.mean = j.at("mean").get<double>();
    r.std = j.at("std").get<double>();
    rows.push_back(std::move(r));
  }
  return rows;
}

}  // namespace styleaug::harness

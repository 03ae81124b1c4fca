#include "styleaug/harness/config.hpp"

#include <fstream>
#include <set>
#include <stdexcept>

namespace styleaug::harness {

using nlohmann::json;

namespace {

const std::vector<std::pair<Method, std::string>> kMethods = {
    {Method::Baseline, "baseline"},
    {Method::Rotation, "rotation"},
    {Method::MixupPixel, "mixup-pixel"},
    {Method::MixupFeature, "mixup-feature"}};

void require(bool ok, const std::string& field, const std::string& why) {
  if (!ok) throw std::invalid_argument("config field '" + field + "' " + why);
}

void reject_unknown(const json& j, const std::set<std::string>& known, const std::string& where) {
  if (!j.is_object()) throw std::invalid_argument("config section '" + where + "' must be an object");
  for (const auto& [key, _] : j.items())
    if (!known.count(key)) throw std::invalid_argument("unknown config key '" + where + key + "'");
}

template <typename T>
void read(const json& j, const char* key, T& out) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("config key '") + key + "': " + e.what());
  }
}

}  // namespace

std::string to_string(Method m) {
  for (const auto& [v, name] : kMethods)
    if (v == m) return name;
  throw std::invalid_argument("unknown method");
}

std::string to_string(Augmentation a) { return a == Augmentation::Original ? "original" : "stylized"; }

Method method_from_string(const std::string& name) {
  for (const auto& [v, n] : kMethods)
    if (n == name) return v;
  throw std::invalid_argument("unknown method '" + name + "' (expected baseline, rotation, mixup-pixel or mixup-feature)");
}

Augmentation augmentation_from_string(const std::string& name) {
  if (name == "original") return Augmentation::Original;
  if (name == "stylized") return Augmentation::Stylized;
  throw std::invalid_argument("unknown augmentation '" + name + "' (expected original or stylized)");
}

void ExperimentConfig::validate() const {
  require(alpha >= 0.0 && alpha <= 1.0, "alpha", "must lie in [0, 1]");
  require(p >= 0.0 && p <= 1.0, "p", "must lie in [0, 1]");
  require(lambda_style >= 0.0, "lambda_style", "must be non-negative");
  require(eta >= 0.0, "eta", "must be non-negative");
  require(gamma >= 0.0, "gamma", "must be non-negative");

  const auto& syn = dataset.synthetic;
  require(syn.num_classes >= 2, "dataset.synthetic.num_classes", "must be at least 2");
  require(syn.num_domains >= 2, "dataset.synthetic.num_domains", "must be at least 2");
  require(syn.images_per_class >= 2, "dataset.synthetic.images_per_class", "must be at least 2");
  require(dataset.resolution >= 8, "dataset.resolution", "must be at least 8");

  require(style.epochs > 0, "style.epochs", "must be positive");
  require(style.learning_rate > 0.0, "style.learning_rate", "must be positive");
  require(style.batch_size > 0, "style.batch_size", "must be positive");
  require(style.encoder_pretrain_iterations >= 0, "style.encoder_pretrain_iterations", "must be non-negative");
  require(style.encoder_pretrain_lr > 0.0, "style.encoder_pretrain_lr", "must be positive");
  require(!style.widths.empty(), "style.widths", "must not be empty");
  for (int w : style.widths) require(w > 0, "style.widths", "entries must be positive");
  require(style.pooling_stages >= 0 && style.pooling_stages < static_cast<int>(style.widths.size()),
          "style.pooling_stages", "must be below the number of blocks");

  require(classifier.iterations > 0, "classifier.iterations", "must be positive");
  require(classifier.learning_rate > 0.0, "classifier.learning_rate", "must be positive");
  require(classifier.momentum >= 0.0 && classifier.momentum < 1.0, "classifier.momentum", "must lie in [0, 1)");
  require(classifier.weight_decay >= 0.0, "classifier.weight_decay", "must be non-negative");
  require(classifier.per_domain > 0, "classifier.per_domain", "must be positive");
  require(classifier.val_every > 0, "classifier.val_every", "must be positive");
  require(!classifier.widths.empty(), "classifier.widths", "must not be empty");
  for (int w : classifier.widths) require(w > 0, "classifier.widths", "entries must be positive");

  require(protocol.train_ratio > 0.0 && protocol.train_ratio < 1.0, "protocol.train_ratio", "must lie in (0, 1)");
  require(protocol.n_runs > 0, "protocol.n_runs", "must be positive");
}

json to_json(const ExperimentConfig& c) {
  json j;
  j["dataset"] = {{"path", c.dataset.path},
                  {"seed", c.dataset.seed},
                  {"target_mode", data::to_string(c.dataset.target_mode)},
                  {"resolution", c.dataset.resolution},
                  {"synthetic",
                   {{"num_classes", c.dataset.synthetic.num_classes},
                    {"num_domains", c.dataset.synthetic.num_domains},
                    {"images_per_class", c.dataset.synthetic.images_per_class}}}};
  j["method"] = to_string(c.method);
  j["augmentation"] = to_string(c.augmentation);
  j["alpha"] = c.alpha;
  j["p"] = c.p;
  j["lambda_style"] = c.lambda_style;
  j["eta"] = c.eta;
  j["gamma"] = c.gamma;
  j["style"] = {{"epochs", c.style.epochs},
                {"learning_rate", c.style.learning_rate},
                {"batch_size", c.style.batch_size},
                {"encoder_pretrain_iterations", c.style.encoder_pretrain_iterations},
                {"encoder_pretrain_lr", c.style.encoder_pretrain_lr},
                {"widths", c.style.widths},
                {"pooling_stages", c.style.pooling_stages},
                {"per_run", c.style.per_run},
                {"checkpoint", c.style.checkpoint}};
  j["classifier"] = {{"iterations", c.classifier.iterations},
                     {"learning_rate", c.classifier.learning_rate},
                     {"momentum", c.classifier.momentum},
                     {"weight_decay", c.classifier.weight_decay},
                     {"per_domain", c.classifier.per_domain},
                     {"val_every", c.classifier.val_every},
                     {"widths", c.classifier.widths}};
  j["protocol"] = {{"train_ratio", c.protocol.train_ratio},
                   {"n_runs", c.protocol.n_runs},
                   {"base_seed", c.protocol.base_seed},
                   {"targets", c.protocol.targets}};
  return j;
}

ExperimentConfig config_from_json(const json& j) {
  ExperimentConfig c;
  reject_unknown(j, {"dataset", "method", "augmentation", "alpha", "p", "lambda_style", "eta", "gamma", "style",
                     "classifier", "protocol"},
                 "");
  if (j.contains("dataset")) {
    const json& d = j["dataset"];
    reject_unknown(d, {"path", "seed", "target_mode", "resolution", "synthetic"}, "dataset.");
    read(d, "resolution", c.dataset.resolution);
    read(d, "path", c.dataset.path);
    read(d, "seed", c.dataset.seed);
    if (d.contains("target_mode")) c.dataset.target_mode = data::target_mode_from_string(d["target_mode"].get<std::string>());
    if (d.contains("synthetic")) {
      const json& s = d["synthetic"];
      reject_unknown(s, {"num_classes", "num_domains", "images_per_class"}, "dataset.synthetic.");
      read(s, "num_classes", c.dataset.synthetic.num_classes);
      read(s, "num_domains", c.dataset.synthetic.num_domains);
      read(s, "images_per_class", c.dataset.synthetic.images_per_class);
    }
  }
  if (j.contains("method")) c.method = method_from_string(j["method"].get<std::string>());
  if (j.contains("augmentation")) c.augmentation = augmentation_from_string(j["augmentation"].get<std::string>());
  read(j, "alpha", c.alpha);
  read(j, "p", c.p);
  read(j, "lambda_style", c.lambda_style);
  read(j, "eta", c.eta);
  read(j, "gamma", c.gamma);
  if (j.contains("style")) {
    const json& s = j["style"];
    reject_unknown(s, {"epochs", "learning_rate", "batch_size", "encoder_pretrain_iterations", "encoder_pretrain_lr",
                       "widths", "pooling_stages", "per_run", "checkpoint"},
                   "style.");
    read(s, "epochs", c.style.epochs);
    read(s, "learning_rate", c.style.learning_rate);
    read(s, "batch_size", c.style.batch_size);
    read(s, "encoder_pretrain_iterations", c.style.encoder_pretrain_iterations);
    read(s, "encoder_pretrain_lr", c.style.encoder_pretrain_lr);
    read(s, "widths", c.style.widths);
    read(s, "pooling_stages", c.style.pooling_stages);
    read(s, "per_run", c.style.per_run);
    read(s, "checkpoint", c.style.checkpoint);
  }
  if (j.contains("classifier")) {
    const json& s = j["classifier"];
    reject_unknown(s, {"iterations", "learning_rate", "momentum", "weight_decay", "per_domain", "val_every", "widths"},
                   "classifier.");
    read(s, "iterations", c.classifier.iterations);
    read(s, "learning_rate", c.classifier.learning_rate);
    read(s, "momentum", c.classifier.momentum);
    read(s, "weight_decay", c.classifier.weight_decay);
    read(s, "per_domain", c.classifier.per_domain);
    read(s, "val_every", c.classifier.val_every);
    read(s, "widths", c.classifier.widths);
  }
  if (j.contains("protocol")) {
    const json& s = j["protocol"];
    reject_unknown(s, {"train_ratio", "n_runs", "base_seed", "targets"}, "protocol.");
    read(s, "train_ratio", c.protocol.train_ratio);
    read(s, "n_runs", c.protocol.n_runs);
    read(s, "base_seed", c.protocol.base_seed);
    read(s, "targets", c.protocol.targets);
  }
  c.validate();
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument("config " + path.string() + " is not valid JSON: " + e.what());
  }
  return config_from_json(j);
}

void save_config(const ExperimentConfig& config, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write config " + path.string());
  out << to_json(config).dump(2) << '\n';
}

adain::StyleTrainingConfig style_training_config(const ExperimentConfig& config, std::uint64_t seed) {
  adain::StyleTrainingConfig s;
  s.epochs = config.style.epochs;
  s.learning_rate = config.style.learning_rate;
  s.batch_size = config.style.batch_size;
  s.lambda_style = config.lambda_style;
  s.encoder_pretrain_iterations = config.style.encoder_pretrain_iterations;
  s.encoder_pretrain_lr = config.style.encoder_pretrain_lr;
  s.seed = seed;
  s.architecture.resolution = config.dataset.resolution;
  s.architecture.widths = config.style.widths;
  s.architecture.pooling_stages = config.style.pooling_stages;
  return s;
}

}  // namespace styleaug::harness

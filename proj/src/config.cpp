#include "gvae/config.hpp"

#include "gvae/error.hpp"
#include "gvae/io_util.hpp"

namespace gvae {

std::string loss_mode_to_string(LossMode mode) {
  return mode == LossMode::kMaskedSoftmaxCe ? "masked-softmax-ce" : "literal-bce";
}

LossMode loss_mode_from_string(const std::string& name) {
  if (name == "masked-softmax-ce") return LossMode::kMaskedSoftmaxCe;
  if (name == "literal-bce") return LossMode::kLiteralBce;
  throw UsageError("unknown loss mode '" + name +
                   "' (expected masked-softmax-ce or literal-bce)");
}

const std::vector<ConfigKey>& config_keys() {
  static const std::vector<ConfigKey> keys = {
      {"seed", "root random seed, split per purpose downstream", "42"},
      {"data.path", "grade CSV to load; empty generates synthetic data", "\"\""},
      {"synth.students", "synthetic student count", "369"},
      {"synth.courses", "synthetic course count", "142"},
      {"synth.student_clusters", "synthetic student cluster count", "4"},
      {"synth.course_clusters", "synthetic course cluster count", "3"},
      {"synth.noise", "std-dev of pre-rounding level noise", "0.7"},
      {"synth.density", "observation probability per pair", "0.15"},
      {"split.train", "train fraction of edges", "0.75"},
      {"split.test", "test fraction of edges", "0.1"},
      {"split.valid", "validation fraction of edges", "0.05"},
      {"model.dims.k", "trainable node feature width", "64"},
      {"model.dims.e1", "conv layer width", "64"},
      {"model.dims.e", "latent embedding width", "32"},
      {"model.depth", "stacked conv layers", "1"},
      {"train.epochs", "full-graph training steps", "200"},
      {"train.lr", "Adam learning rate", "0.1"},
      {"train.dropout", "node dropout rate on the conv output", "0.1"},
      {"train.kl_weight", "weight of the KL term in the loss", "1"},
      {"train.loss", "masked-softmax-ce or literal-bce", "\"masked-softmax-ce\""},
      {"train.eval_every", "epochs between RMSE evaluations", "10"},
      {"baseline.knn_k", "neighbor count for the kNN baselines", "20"},
      {"baseline.knn_shrinkage", "co-rating shrinkage for kNN similarity", "10"},
      {"baseline.mf_rank", "biased MF factor rank", "16"},
      {"baseline.mf_lr", "biased MF SGD learning rate", "0.005"},
      {"baseline.mf_reg", "biased MF L2 regularization", "0.02"},
      {"baseline.mf_epochs", "biased MF SGD epochs", "100"},
      {"output.stable_timings", "write 0 for all timing fields", "false"},
  };
  return keys;
}

namespace {

double as_number(const nlohmann::json& v, const std::string& key) {
  if (!v.is_number()) throw UsageError("config key '" + key + "' expects a number");
  return v.get<double>();
}

int as_int(const nlohmann::json& v, const std::string& key) {
  if (!v.is_number_integer()) throw UsageError("config key '" + key + "' expects an integer");
  return v.get<int>();
}

std::size_t as_size(const nlohmann::json& v, const std::string& key) {
  const int n = as_int(v, key);
  if (n < 0) throw UsageError("config key '" + key + "' must be nonnegative");
  return static_cast<std::size_t>(n);
}

std::string as_string(const nlohmann::json& v, const std::string& key) {
  if (!v.is_string()) throw UsageError("config key '" + key + "' expects a string");
  return v.get<std::string>();
}

bool as_bool(const nlohmann::json& v, const std::string& key) {
  if (!v.is_boolean()) throw UsageError("config key '" + key + "' expects a boolean");
  return v.get<bool>();
}

}  // namespace

void apply_config_key(AppConfig& c, const std::string& key, const nlohmann::json& v) {
  if (key == "seed") {
    if (!v.is_number_integer()) throw UsageError("config key 'seed' expects an integer");
    c.seed = v.get<std::uint64_t>();
  } else if (key == "data.path") {
    c.data_path = as_string(v, key);
  } else if (key == "synth.students") {
    c.synth.num_students = as_size(v, key);
  } else if (key == "synth.courses") {
    c.synth.num_courses = as_size(v, key);
  } else if (key == "synth.student_clusters") {
    c.synth.student_clusters = as_size(v, key);
  } else if (key == "synth.course_clusters") {
    c.synth.course_clusters = as_size(v, key);
  } else if (key == "synth.noise") {
    c.synth.noise_sigma = as_number(v, key);
  } else if (key == "synth.density") {
    c.synth.density = as_number(v, key);
  } else if (key == "split.train") {
    c.split.train = as_number(v, key);
  } else if (key == "split.test") {
    c.split.test = as_number(v, key);
  } else if (key == "split.valid") {
    c.split.valid = as_number(v, key);
  } else if (key == "model.dims.k") {
    c.train.feature_dim = as_size(v, key);
  } else if (key == "model.dims.e1") {
    c.train.hidden_dim = as_size(v, key);
  } else if (key == "model.dims.e") {
    c.train.latent_dim = as_size(v, key);
  } else if (key == "model.depth") {
    c.train.depth = as_int(v, key);
  } else if (key == "train.epochs") {
    c.train.epochs = as_int(v, key);
  } else if (key == "train.lr") {
    c.train.learning_rate = as_number(v, key);
  } else if (key == "train.dropout") {
    c.train.dropout = as_number(v, key);
  } else if (key == "train.kl_weight") {
    c.train.kl_weight = as_number(v, key);
  } else if (key == "train.loss") {
    c.train.loss_mode = loss_mode_from_string(as_string(v, key));
  } else if (key == "train.eval_every") {
    c.train.eval_every = as_int(v, key);
  } else if (key == "baseline.knn_k") {
    c.baseline.knn_k = as_int(v, key);
  } else if (key == "baseline.knn_shrinkage") {
    c.baseline.knn_shrinkage = as_number(v, key);
  } else if (key == "baseline.mf_rank") {
    c.baseline.mf_rank = as_int(v, key);
  } else if (key == "baseline.mf_lr") {
    c.baseline.mf_learning_rate = as_number(v, key);
  } else if (key == "baseline.mf_reg") {
    c.baseline.mf_reg = as_number(v, key);
  } else if (key == "baseline.mf_epochs") {
    c.baseline.mf_epochs = as_int(v, key);
  } else if (key == "output.stable_timings") {
    c.stable_timings = as_bool(v, key);
  } else {
    throw UsageError("unknown config key '" + key + "'");
  }
}

void sync_seeds(AppConfig& config) {
  config.synth.seed = config.seed;
  config.train.seed = config.seed;
  config.baseline.seed = config.seed;
}

AppConfig config_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw UsageError("config must be a JSON object of dotted keys");
  AppConfig config;
  for (const auto& [key, value] : j.items()) {
    apply_config_key(config, key, value);
  }
  sync_seeds(config);
  return config;
}

AppConfig load_config_file(const std::filesystem::path& path) {
  const std::string raw = read_file(path);
  const auto parsed = nlohmann::json::parse(raw, nullptr, /*allow_exceptions=*/false);
  if (parsed.is_discarded()) {
    throw DataError("'" + path.string() + "' is not valid JSON");
  }
  return config_from_json(parsed);
}

nlohmann::json config_to_json(const AppConfig& c) {
  nlohmann::json j;
  j["seed"] = c.seed;
  j["data.path"] = c.data_path;
  j["synth.students"] = c.synth.num_students;
  j["synth.courses"] = c.synth.num_courses;
  j["synth.student_clusters"] = c.synth.student_clusters;
  j["synth.course_clusters"] = c.synth.course_clusters;
  j["synth.noise"] = c.synth.noise_sigma;
  j["synth.density"] = c.synth.density;
  j["split.train"] = c.split.train;
  j["split.test"] = c.split.test;
  j["split.valid"] = c.split.valid;
  j["model.dims.k"] = c.train.feature_dim;
  j["model.dims.e1"] = c.train.hidden_dim;
  j["model.dims.e"] = c.train.latent_dim;
  j["model.depth"] = c.train.depth;
  j["train.epochs"] = c.train.epochs;
  j["train.lr"] = c.train.learning_rate;
  j["train.dropout"] = c.train.dropout;
  j["train.kl_weight"] = c.train.kl_weight;
  j["train.loss"] = loss_mode_to_string(c.train.loss_mode);
  j["train.eval_every"] = c.train.eval_every;
  j["baseline.knn_k"] = c.baseline.knn_k;
  j["baseline.knn_shrinkage"] = c.baseline.knn_shrinkage;
  j["baseline.mf_rank"] = c.baseline.mf_rank;
  j["baseline.mf_lr"] = c.baseline.mf_learning_rate;
  j["baseline.mf_reg"] = c.baseline.mf_reg;
  j["baseline.mf_epochs"] = c.baseline.mf_epochs;
  j["output.stable_timings"] = c.stable_timings;
  return j;
}

}  // namespace gvae

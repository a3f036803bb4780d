#include "icscream/study.hpp"

#include <charconv>
#include <fstream>
#include <initializer_list>
#include <iterator>
#include <set>
#include <sstream>

#include <openssl/evp.h>

#include "icscream/error.hpp"

namespace icscream {

using nlohmann::json;

namespace {

void check_keys(const json& obj, std::initializer_list<const char*> allowed, const std::string& where) {
  if (!obj.is_object()) throw Error(ErrorKind::config, where + " must be an object");
  const std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [key, value] : obj.items()) {
    if (!ok.count(key)) throw Error(ErrorKind::config, "unknown key '" + key + "' in " + where);
  }
}

template <typename T>
T get_or(const json& obj, const char* key, T fallback, const std::string& where) {
  if (!obj.contains(key)) return fallback;
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception& e) {
    throw Error(ErrorKind::config, where + "." + key + ": " + e.what());
  }
}

template <typename T>
T require_key(const json& obj, const char* key, const std::string& where) {
  if (!obj.contains(key)) throw Error(ErrorKind::config, "missing key '" + std::string(key) + "' in " + where);
  return get_or<T>(obj, key, T{}, where);
}

std::string hex(const unsigned char* digest, unsigned int len) {
  static const char* digits = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(digits[digest[i] >> 4]);
    out.push_back(digits[digest[i] & 0xf]);
  }
  return out;
}

std::vector<double> to_vector(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

Eigen::VectorXd to_eigen(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

}  // namespace

std::string format_number(double v) {
  char buf[32];
  const auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return {buf, end};
}

json distribution_to_json(const Distribution& d) {
  json j;
  j["family"] = std::string(to_string(d.family()));
  switch (d.family()) {
    case Family::uniform:
    case Family::log_uniform:
      j["a"] = d.first();
      j["b"] = d.second();
      break;
    case Family::normal:
      j["mean"] = d.first();
      j["sd"] = d.second();
      break;
    case Family::log_normal:
      j["meanlog"] = d.first();
      j["sdlog"] = d.second();
      break;
    case Family::truncated_normal:
      j["mean"] = d.first();
      j["sd"] = d.second();
      j["lower"] = d.lower();
      j["upper"] = d.upper();
      break;
  }
  return j;
}

Distribution distribution_from_json(const json& j) {
  const std::string where = "distribution";
  const auto family = parse_family(require_key<std::string>(j, "family", where));
  switch (family) {
    case Family::uniform:
      check_keys(j, {"family", "a", "b"}, where);
      return Distribution::uniform(require_key<double>(j, "a", where), require_key<double>(j, "b", where));
    case Family::log_uniform:
      check_keys(j, {"family", "a", "b"}, where);
      return Distribution::log_uniform(require_key<double>(j, "a", where), require_key<double>(j, "b", where));
    case Family::normal:
      check_keys(j, {"family", "mean", "sd"}, where);
      return Distribution::normal(require_key<double>(j, "mean", where), require_key<double>(j, "sd", where));
    case Family::log_normal:
      check_keys(j, {"family", "meanlog", "sdlog"}, where);
      return Distribution::log_normal(require_key<double>(j, "meanlog", where),
                                      require_key<double>(j, "sdlog", where));
    case Family::truncated_normal:
      check_keys(j, {"family", "mean", "sd", "lower", "upper"}, where);
      return Distribution::truncated_normal(
          require_key<double>(j, "mean", where), require_key<double>(j, "sd", where),
          require_key<double>(j, "lower", where), require_key<double>(j, "upper", where));
  }
  throw Error(ErrorKind::config, "unsupported distribution");
}

StudyConfig parse_config(const json& j, const std::filesystem::path& base_dir) {
  check_keys(j, {"sample", "output_column", "seed", "variables", "screening", "metamodel", "validation", "map"},
             "config");
  StudyConfig c;
  std::filesystem::path sample = require_key<std::string>(j, "sample", "config");
  c.sample_path = sample.is_absolute() ? sample : base_dir / sample;
  c.output_column = get_or<std::string>(j, "output_column", c.output_column, "config");
  c.seed = get_or<std::uint64_t>(j, "seed", c.seed, "config");

  if (!j.contains("variables") || !j.at("variables").is_array()) {
    throw Error(ErrorKind::config, "config needs a 'variables' array");
  }
  std::size_t index = 0;
  for (const auto& v : j.at("variables")) {
    const std::string where = "variables[" + std::to_string(index) + "]";
    check_keys(v, {"name", "role", "distribution"}, where);
    VariableSpec spec;
    spec.name = require_key<std::string>(v, "name", where);
    spec.index = index++;
    spec.role = parse_role(get_or<std::string>(v, "role", "candidate", where));
    if (!v.contains("distribution")) throw Error(ErrorKind::config, where + " needs a distribution");
    try {
      spec.distribution = distribution_from_json(v.at("distribution"));
    } catch (const Error& e) {
      throw Error(ErrorKind::config, where + ": " + e.what());
    }
    c.variables.push_back(std::move(spec));
  }
  try {
    validate_schema(c.variables);
  } catch (const Error& e) {
    throw Error(ErrorKind::config, e.what());
  }

  if (j.contains("screening")) {
    const auto& s = j.at("screening");
    check_keys(s, {"quantile_level", "alpha", "permutations", "kernel", "target"}, "screening");
    c.quantile_level = get_or<double>(s, "quantile_level", c.quantile_level, "screening");
    c.alpha = get_or<double>(s, "alpha", c.alpha, "screening");
    c.permutations = get_or<int>(s, "permutations", c.permutations, "screening");
    if (s.contains("kernel")) {
      const auto& k = s.at("kernel");
      check_keys(k, {"bandwidth_rule", "bandwidth"}, "screening.kernel");
      c.kernel.rule = parse_bandwidth_rule(get_or<std::string>(k, "bandwidth_rule", "empirical-std", "screening.kernel"));
      if (k.contains("bandwidth") && !k.at("bandwidth").is_null()) {
        c.kernel.bandwidth_override = get_or<double>(k, "bandwidth", 0.0, "screening.kernel");
      }
    }
    if (s.contains("target")) {
      const auto& t = s.at("target");
      check_keys(t, {"relaxation", "scale"}, "screening.target");
      c.relaxation = parse_relaxation(get_or<std::string>(t, "relaxation", "hard", "screening.target"));
      if (t.contains("scale") && !t.at("scale").is_null()) {
        c.relaxation_scale = get_or<double>(t, "scale", 0.0, "screening.target");
      }
    }
  }
  if (j.contains("metamodel")) {
    const auto& m = j.at("metamodel");
    check_keys(m, {"nu", "folds", "starts", "max_evaluations", "cv_evaluations", "estimate_nugget", "tie_tolerance"},
               "metamodel");
    c.nu = parse_matern_nu(get_or<std::string>(m, "nu", "5/2", "metamodel"));
    c.folds = get_or<std::size_t>(m, "folds", c.folds, "metamodel");
    c.starts = get_or<int>(m, "starts", c.starts, "metamodel");
    c.max_evaluations = get_or<int>(m, "max_evaluations", c.max_evaluations, "metamodel");
    c.cv_evaluations = get_or<int>(m, "cv_evaluations", c.cv_evaluations, "metamodel");
    c.estimate_nugget = get_or<bool>(m, "estimate_nugget", c.estimate_nugget, "metamodel");
    c.tie_tolerance = get_or<double>(m, "tie_tolerance", c.tie_tolerance, "metamodel");
  }
  if (j.contains("validation")) {
    const auto& v = j.at("validation");
    check_keys(v, {"calibration_levels", "bootstrap"}, "validation");
    c.calibration_levels = get_or<std::vector<double>>(v, "calibration_levels", {}, "validation");
    if (v.contains("bootstrap") && !v.at("bootstrap").is_null()) {
      const auto& b = v.at("bootstrap");
      check_keys(b, {"resamples", "sizes"}, "validation.bootstrap");
      BootstrapConfig bc;
      bc.resamples = get_or<int>(b, "resamples", bc.resamples, "validation.bootstrap");
      bc.sizes = get_or<std::vector<std::size_t>>(b, "sizes", {}, "validation.bootstrap");
      c.bootstrap = bc;
    }
  }
  if (j.contains("map")) {
    const auto& m = j.at("map");
    check_keys(m, {"grid", "mc_samples"}, "map");
    if (m.contains("grid")) {
      const auto g = get_or<std::vector<std::size_t>>(m, "grid", {}, "map");
      if (g.size() != 2) throw Error(ErrorKind::config, "map.grid must list two resolutions");
      c.grid1 = g[0];
      c.grid2 = g[1];
    }
    c.mc_samples = get_or<std::size_t>(m, "mc_samples", c.mc_samples, "map");
  }

  if (!(c.quantile_level > 0.0 && c.quantile_level < 1.0)) throw Error(ErrorKind::config, "quantile_level must lie in (0, 1)");
  if (!(c.alpha > 0.0 && c.alpha < 1.0)) throw Error(ErrorKind::config, "alpha must lie in (0, 1)");
  if (c.permutations < 1) throw Error(ErrorKind::config, "permutations must be >= 1");
  if (c.folds < 2) throw Error(ErrorKind::config, "folds must be >= 2");
  if (c.starts < 1 || c.max_evaluations < 1 || c.cv_evaluations < 1) {
    throw Error(ErrorKind::config, "optimizer budgets must be positive");
  }
  if (c.grid1 < 1 || c.grid2 < 1 || c.mc_samples < 1) throw Error(ErrorKind::config, "map sizes must be positive");
  if (c.kernel.bandwidth_override && !(*c.kernel.bandwidth_override > 0.0)) {
    throw Error(ErrorKind::config, "kernel bandwidth must be positive");
  }
  if (c.relaxation_scale && !(*c.relaxation_scale > 0.0)) {
    throw Error(ErrorKind::config, "relaxation scale must be positive");
  }
  return c;
}

StudyConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::io, "cannot open config file '" + path.string() + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::config, "config file '" + path.string() + "' is not valid JSON: " + e.what());
  }
  return parse_config(j, path.parent_path());
}

json to_json(const StudyConfig& c) {
  json j;
  j["sample"] = c.sample_path.string();
  j["output_column"] = c.output_column;
  j["seed"] = c.seed;
  j["variables"] = json::array();
  for (const auto& v : c.variables) {
    j["variables"].push_back({{"name", v.name},
                              {"role", std::string(to_string(v.role))},
                              {"distribution", distribution_to_json(v.distribution)}});
  }
  json kernel = {{"bandwidth_rule", std::string(to_string(c.kernel.rule))}};
  if (c.kernel.bandwidth_override) kernel["bandwidth"] = *c.kernel.bandwidth_override;
  json target = {{"relaxation", std::string(to_string(c.relaxation))}};
  if (c.relaxation_scale) target["scale"] = *c.relaxation_scale;
  j["screening"] = {{"quantile_level", c.quantile_level},
                    {"alpha", c.alpha},
                    {"permutations", c.permutations},
                    {"kernel", kernel},
                    {"target", target}};
  j["metamodel"] = {{"nu", std::string(to_string(c.nu))},
                    {"folds", c.folds},
                    {"starts", c.starts},
                    {"max_evaluations", c.max_evaluations},
                    {"cv_evaluations", c.cv_evaluations},
                    {"estimate_nugget", c.estimate_nugget},
                    {"tie_tolerance", c.tie_tolerance}};
  json validation = json::object();
  if (!c.calibration_levels.empty()) validation["calibration_levels"] = c.calibration_levels;
  if (c.bootstrap) validation["bootstrap"] = {{"resamples", c.bootstrap->resamples}, {"sizes", c.bootstrap->sizes}};
  j["validation"] = validation;
  j["map"] = {{"grid", {c.grid1, c.grid2}}, {"mc_samples", c.mc_samples}};
  return j;
}

std::string sha256_string(const std::string& content) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(content.data(), content.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw Error(ErrorKind::io, "SHA-256 computation failed");
  }
  return hex(digest, len);
}

std::string sha256_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::io, "cannot open '" + path.string() + "' for hashing");
  const std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return sha256_string(content);
}

json model_to_json(const GpModel& model, const LearningSample& sample, const std::filesystem::path& sample_path,
                   const std::string& sample_hash) {
  const auto& hp = model.hyperparams();
  std::vector<std::string> names;
  for (std::size_t idx : model.input_indices()) names.push_back(sample.variables().at(idx).name);
  json j;
  j["nu"] = std::string(to_string(hp.nu));
  j["input_indices"] = model.input_indices();
  j["input_names"] = names;
  j["lengths"] = to_vector(hp.lengths);
  j["process_variance"] = hp.process_variance;
  j["nugget"] = hp.nugget;
  j["nugget_floor"] = model.nugget_floor();
  j["trend"] = hp.trend;
  j["standardization"] = {{"mean", to_vector(model.standardization().mean)},
                          {"scale", to_vector(model.standardization().scale)}};
  j["training_data"] = {{"path", sample_path.string()},
                        {"sha256", sample_hash},
                        {"output_column", sample.output_name()},
                        {"n", sample.size()}};
  return j;
}

GpModel model_from_json(const json& j, const LearningSample& sample, const std::string& sample_hash) {
  try {
    const std::string stored = j.at("training_data").at("sha256").get<std::string>();
    if (stored != sample_hash) {
      throw Error(ErrorKind::config, "model was trained on different data (sha256 " + stored + ", sample has " +
                                         sample_hash + ")");
    }
    GpHyperparams hp;
    hp.nu = parse_matern_nu(j.at("nu").get<std::string>());
    hp.lengths = to_eigen(j.at("lengths").get<std::vector<double>>());
    hp.process_variance = j.at("process_variance").get<double>();
    hp.nugget = j.at("nugget").get<double>();
    hp.trend = j.at("trend").get<double>();
    Standardization st;
    st.mean = to_eigen(j.at("standardization").at("mean").get<std::vector<double>>());
    st.scale = to_eigen(j.at("standardization").at("scale").get<std::vector<double>>());
    auto indices = j.at("input_indices").get<std::vector<std::size_t>>();
    const double floor = j.at("nugget_floor").get<double>();
    const Eigen::MatrixXd x = sample.columns(indices);
    return GpModel::condition(x, sample.output(), hp, std::move(st), std::move(indices), floor);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::config, std::string("malformed model document: ") + e.what());
  }
}

}  // namespace icscream

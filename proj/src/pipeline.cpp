#include "icscream/pipeline.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "icscream/error.hpp"
#include "icscream/exceedance.hpp"
#include "icscream/random.hpp"
#include "icscream/screening.hpp"
#include "icscream/sequential.hpp"
#include "icscream/study.hpp"
#include "icscream/validation.hpp"

namespace icscream {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct Study {
  StudyConfig config;
  std::string config_hash;
  LearningSample sample;
  std::string sample_hash;
};

Study open_study(const RunOptions& options) {
  StudyConfig config = load_config(options.config);
  if (options.seed) config.seed = *options.seed;
  const std::string config_hash = sha256_file(options.config);
  if (!fs::exists(config.sample_path)) {
    throw Error(ErrorKind::io, "sample file '" + config.sample_path.string() + "' does not exist");
  }
  LearningSample sample = load_sample(config.sample_path, config.variables, config.output_column);
  const std::string sample_hash = sha256_file(config.sample_path);
  fs::create_directories(options.out);
  return {std::move(config), config_hash, std::move(sample), sample_hash};
}

void write_text(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::io, "cannot write '" + path.string() + "'");
  out << content;
  if (!out) throw Error(ErrorKind::io, "write to '" + path.string() + "' failed");
}

void write_json(const fs::path& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::io, "cannot open '" + path.string() + "'");
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::parse, "'" + path.string() + "' is not valid JSON: " + e.what());
  }
}

std::string num(double v) { return format_number(v); }

class Manifest {
 public:
  Manifest(const Study& study, const RunOptions& options, std::string stage, std::uint64_t seed)
      : out_(options.out) {
    entry_["stage"] = std::move(stage);
    entry_["seed"] = study.config.seed;
    entry_["stage_seed"] = seed;
    entry_["config"] = {{"path", options.config.string()}, {"sha256", study.config_hash}};
    entry_["inputs"] = json::array();
    entry_["outputs"] = json::array();
    add_input(study.config.sample_path.string(), study.sample_hash);
  }

  void add_input(const std::string& name, const std::string& hash) {
    entry_["inputs"].push_back({{"file", name}, {"sha256", hash}});
  }
  void add_output(const std::string& name) {
    entry_["outputs"].push_back({{"file", name}, {"sha256", sha256_file(out_ / name)}});
  }

  void commit() {
    const fs::path path = out_ / "manifest.json";
    json doc = fs::exists(path) ? read_json(path) : json{{"entries", json::array()}};
    doc["entries"].push_back(entry_);
    write_json(path, doc);
  }

 private:
  fs::path out_;
  json entry_;
};

std::vector<std::size_t> penalize_indices(const StudyConfig& c) {
  return indices_with_role(c.variables, Role::penalize);
}

json threshold_json(const Threshold& t) { return {{"level", t.level}, {"value", t.value}}; }

}  // namespace

void cmd_screen(const RunOptions& options) {
  const Study study = open_study(options);
  const auto& c = study.config;
  const std::uint64_t seed = derive_seed(c.seed, "screen");
  const Threshold threshold = critical_threshold(study.sample, c.quantile_level);

  ScreeningOptions so;
  so.kernel = c.kernel;
  so.target.threshold = threshold.value;
  so.target.relaxation = c.relaxation;
  if (c.relaxation_scale) {
    so.target.relaxation_scale = *c.relaxation_scale;
  } else {
    const auto& y = study.sample.output();
    const double mean = y.mean();
    const double sd = std::sqrt((y.array() - mean).square().sum() / static_cast<double>(y.size() - 1));
    so.target.relaxation_scale = sd > 0.0 ? sd / 5.0 : 1.0;
  }
  so.alpha = c.alpha;
  so.permutations = c.permutations;
  so.seed = seed;
  const ScreeningResult result = screen(study.sample, so);

  std::vector<std::size_t> rank_of(study.sample.dimension(), 0);
  for (std::size_t r = 0; r < result.selected.size(); ++r) rank_of[result.selected[r]] = r + 1;

  json inputs = json::array();
  std::ostringstream csv;
  csv << "name,index,role,hsic,pvalue_global_perm,pvalue_global_gamma,thsic,pvalue_target_perm,"
         "pvalue_target_gamma,selected,rank\n";
  for (std::size_t k = 0; k < result.global.size(); ++k) {
    const auto& g = result.global[k];
    const auto& t = result.target[k];
    const auto& v = c.variables[g.input_index];
    const bool selected = rank_of[g.input_index] > 0;
    inputs.push_back({{"name", v.name},
                      {"index", g.input_index},
                      {"role", std::string(to_string(v.role))},
                      {"hsic", g.statistic},
                      {"pvalue_global_perm", g.pvalue_permutation},
                      {"pvalue_global_gamma", g.pvalue_gamma},
                      {"thsic", t.statistic},
                      {"pvalue_target_perm", t.pvalue_permutation},
                      {"pvalue_target_gamma", t.pvalue_gamma},
                      {"selected", selected},
                      {"rank", rank_of[g.input_index]}});
    csv << v.name << ',' << g.input_index << ',' << to_string(v.role) << ',' << num(g.statistic) << ','
        << num(g.pvalue_permutation) << ',' << num(g.pvalue_gamma) << ',' << num(t.statistic) << ','
        << num(t.pvalue_permutation) << ',' << num(t.pvalue_gamma) << ',' << (selected ? 1 : 0) << ','
        << rank_of[g.input_index] << '\n';
  }
  std::vector<std::string> names;
  for (std::size_t idx : result.selected) names.push_back(c.variables[idx].name);

  json report = {{"threshold", threshold_json(threshold)},
                 {"alpha", c.alpha},
                 {"permutations", c.permutations},
                 {"seed", seed},
                 {"kernel", {{"bandwidth_rule", std::string(to_string(c.kernel.rule))}}},
                 {"target", {{"relaxation", std::string(to_string(so.target.relaxation))},
                             {"scale", so.target.relaxation_scale}}},
                 {"inputs", inputs},
                 {"selected", names},
                 {"selected_indices", result.selected},
                 {"forced_indices", result.forced}};
  write_json(options.out / "screening.json", report);
  write_text(options.out / "screening_pvalues.csv", csv.str());

  Manifest manifest(study, options, "screen", seed);
  manifest.add_output("screening.json");
  manifest.add_output("screening_pvalues.csv");
  manifest.commit();
}

void cmd_fit(const RunOptions& options) {
  const Study study = open_study(options);
  const auto& c = study.config;
  const std::uint64_t seed = derive_seed(c.seed, "fit");
  const fs::path screening_path = options.out / "screening.json";
  if (!fs::exists(screening_path)) {
    throw Error(ErrorKind::io, "screening report '" + screening_path.string() + "' not found; run screen first");
  }
  const json screening = read_json(screening_path);
  std::vector<std::size_t> ranking;
  try {
    ranking = screening.at("selected_indices").get<std::vector<std::size_t>>();
  } catch (const json::exception& e) {
    throw Error(ErrorKind::parse, std::string("malformed screening report: ") + e.what());
  }
  for (std::size_t idx : ranking) {
    if (idx >= study.sample.dimension()) throw Error(ErrorKind::parse, "screening report lists unknown input");
  }
  if (ranking.empty()) throw Error(ErrorKind::fit_failure, "screening selected no input to fit");

  SequentialOptions so;
  so.nu = c.nu;
  so.folds = c.folds;
  so.seed = seed;
  so.starts = c.starts;
  so.max_evaluations = c.max_evaluations;
  so.cv_evaluations = c.cv_evaluations;
  so.estimate_nugget = c.estimate_nugget;
  so.tie_tolerance = c.tie_tolerance;
  const SequentialResult result = build_sequential(study.sample, ranking, so);

  json doc = model_to_json(result.model, study.sample, c.sample_path, study.sample_hash);
  json steps = json::array();
  std::ostringstream csv;
  csv << "step,n_inputs,inputs,q2,failed\n";
  for (const auto& s : result.steps) {
    std::string joined;
    for (std::size_t idx : s.inputs) joined += (joined.empty() ? "" : ";") + c.variables[idx].name;
    json step = {{"step", s.step}, {"inputs", s.inputs}, {"q2", s.q2}, {"failed", s.failed}};
    if (s.failed) step["message"] = s.message;
    steps.push_back(step);
    csv << s.step << ',' << s.inputs.size() << ',' << joined << ',' << num(s.q2) << ',' << (s.failed ? 1 : 0)
        << '\n';
  }
  doc["steps"] = steps;
  doc["selected_step"] = result.steps[result.selected_step].step;
  doc["seed"] = seed;
  write_json(options.out / "model.json", doc);
  write_text(options.out / "fit_steps.csv", csv.str());

  Manifest manifest(study, options, "fit", seed);
  manifest.add_input("screening.json", sha256_file(screening_path));
  manifest.add_output("model.json");
  manifest.add_output("fit_steps.csv");
  manifest.commit();
}

namespace {

GpModel load_model(const Study& study, const fs::path& out, std::string& hash) {
  const fs::path path = out / "model.json";
  if (!fs::exists(path)) throw Error(ErrorKind::io, "model '" + path.string() + "' not found; run fit first");
  hash = sha256_file(path);
  return model_from_json(read_json(path), study.sample, study.sample_hash);
}

}  // namespace

void cmd_validate(const RunOptions& options) {
  const Study study = open_study(options);
  const auto& c = study.config;
  const std::uint64_t seed = derive_seed(c.seed, "validate");
  std::string model_hash;
  const GpModel model = load_model(study, options.out, model_hash);

  CvOptions cv;
  cv.folds = c.folds;
  cv.seed = seed;
  cv.max_evaluations = c.cv_evaluations;
  cv.estimate_nugget = c.estimate_nugget;
  const auto predictions = kfold_predict(study.sample, model, cv);

  std::vector<double> observed, predicted;
  for (const auto& p : predictions) {
    observed.push_back(p.observed);
    predicted.push_back(p.predicted_mean);
  }
  const Threshold threshold = critical_threshold(study.sample, c.quantile_level);
  const double q2_value = q2(predictions);
  const double rate = exceedance_classification_rate(observed, predicted, threshold.value);
  const auto levels = c.calibration_levels.empty() ? default_calibration_levels() : c.calibration_levels;
  const CalibrationCurve curve = calibration_curve(predictions, levels);

  json calibration = json::array();
  std::ostringstream cal_csv;
  cal_csv << "theoretical,observed\n";
  for (std::size_t i = 0; i < curve.levels.size(); ++i) {
    calibration.push_back({{"level", curve.levels[i]}, {"observed", curve.observed[i]}});
    cal_csv << num(curve.levels[i]) << ',' << num(curve.observed[i]) << '\n';
  }
  std::ostringstream cv_csv;
  cv_csv << "index,fold,observed,predicted_mean,predicted_mse\n";
  for (const auto& p : predictions) {
    cv_csv << p.index << ',' << p.fold << ',' << num(p.observed) << ',' << num(p.predicted_mean) << ','
           << num(p.predicted_mse) << '\n';
  }

  json report = {{"q2", q2_value},
                 {"classification_rate", rate},
                 {"threshold", threshold_json(threshold)},
                 {"folds", c.folds},
                 {"seed", seed},
                 {"calibration", calibration}};
  if (c.bootstrap) {
    std::vector<std::size_t> sizes = c.bootstrap->sizes;
    const std::size_t n = study.sample.size();
    if (sizes.empty()) {
      for (std::size_t k = 1; k <= 5; ++k) sizes.push_back(std::max<std::size_t>(c.folds * 2, n * k / 5));
    }
    CvOptions bcv = cv;
    bcv.seed = derive_seed(seed, "bootstrap");
    json points = json::array();
    for (const auto& b : bootstrap_convergence(study.sample, model, sizes, c.bootstrap->resamples, bcv)) {
      points.push_back({{"sample_size", b.sample_size},
                        {"resamples", b.resamples},
                        {"q2_mean", b.q2_mean},
                        {"q2_std", b.q2_std}});
    }
    report["bootstrap"] = points;
  }
  write_json(options.out / "validation.json", report);
  write_text(options.out / "calibration.csv", cal_csv.str());
  write_text(options.out / "cv_predictions.csv", cv_csv.str());

  Manifest manifest(study, options, "validate", seed);
  manifest.add_input("model.json", model_hash);
  manifest.add_output("validation.json");
  manifest.add_output("calibration.csv");
  manifest.add_output("cv_predictions.csv");
  manifest.commit();
}

void cmd_map(const RunOptions& options) {
  const Study study = open_study(options);
  const auto& c = study.config;
  const auto pen = penalize_indices(c);
  if (pen.size() != 2) {
    throw Error(ErrorKind::config, "map needs exactly two penalize variables, config declares " +
                                       std::to_string(pen.size()));
  }
  const std::uint64_t seed = derive_seed(c.seed, "map");
  std::string model_hash;
  const GpModel model = load_model(study, options.out, model_hash);
  const std::array<std::size_t, 2> pair{pen[0], pen[1]};
  const PenGrid grid =
      PenGrid::over_support(c.variables[pair[0]].distribution, c.variables[pair[1]].distribution, c.grid1, c.grid2);
  const Threshold threshold = critical_threshold(study.sample, c.quantile_level);
  const ExceedanceMap map = exceedance_map(model, grid, pair, c.variables, threshold, c.mc_samples, seed);

  std::ostringstream full, plugin;
  full << "axis1_value,axis2_value,probability,stderr\n";
  plugin << "axis1_value,axis2_value,probability\n";
  for (std::size_t i = 0; i < grid.axis1.size(); ++i) {
    for (std::size_t j = 0; j < grid.axis2.size(); ++j) {
      const auto r = static_cast<Eigen::Index>(i), s = static_cast<Eigen::Index>(j);
      full << num(grid.axis1[i]) << ',' << num(grid.axis2[j]) << ',' << num(map.probability(r, s)) << ','
           << num(map.std_error(r, s)) << '\n';
      plugin << num(grid.axis1[i]) << ',' << num(grid.axis2[j]) << ',' << num(map.plugin(r, s)) << '\n';
    }
  }
  const WorstCase worst = worst_case(map);
  Eigen::Index pr = 0, pc = 0;
  const double plugin_max = map.plugin.maxCoeff(&pr, &pc);
  const json names = {c.variables[pair[0]].name, c.variables[pair[1]].name};
  json report = {{"penalize", names},
                 {"grid", {grid.axis1.size(), grid.axis2.size()}},
                 {"threshold", threshold_json(threshold)},
                 {"M", map.mc_samples},
                 {"seed", seed},
                 {"out_of_range_events", map.out_of_range},
                 {"worst_case",
                  {{"row", worst.row},
                   {"col", worst.col},
                   {"location", {worst.location[0], worst.location[1]}},
                   {"probability", worst.probability},
                   {"stderr", map.std_error(static_cast<Eigen::Index>(worst.row), static_cast<Eigen::Index>(worst.col))}}},
                 {"plugin_worst_case",
                  {{"row", pr},
                   {"col", pc},
                   {"location", {grid.axis1[static_cast<std::size_t>(pr)], grid.axis2[static_cast<std::size_t>(pc)]}},
                   {"probability", plugin_max}}}};
  write_text(options.out / "exceedance.csv", full.str());
  write_text(options.out / "exceedance_plugin.csv", plugin.str());
  write_json(options.out / "exceedance.json", report);

  Manifest manifest(study, options, "map", seed);
  manifest.add_input("model.json", model_hash);
  manifest.add_output("exceedance.csv");
  manifest.add_output("exceedance_plugin.csv");
  manifest.add_output("exceedance.json");
  manifest.commit();
}

void run_all(const RunOptions& options) {
  cmd_screen(options);
  cmd_fit(options);
  cmd_validate(options);
  const StudyConfig config = load_config(options.config);
  if (penalize_indices(config).size() == 2) {
    cmd_map(options);
  } else {
    std::cerr << "map stage skipped: needs exactly two penalize variables\n";
  }
}

void cmd_synth(const SyntheticSpec& spec, const fs::path& out) {
  const SyntheticModel model(spec);
  fs::create_directories(out);
  const LearningSample sample = model.generate();
  write_sample(out / "sample.csv", sample);
  write_json(out / "truth.json", model.ground_truth());

  StudyConfig config;
  config.sample_path = "sample.csv";
  config.variables = model.variables();
  config.seed = spec.seed;
  config.grid1 = 25;
  config.grid2 = 25;
  config.mc_samples = 2000;
  json j = to_json(config);
  j["sample"] = "sample.csv";
  write_json(out / "study.json", j);
}

}  // namespace icscream

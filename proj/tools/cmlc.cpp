// cmlc: conformal rule-based multi-label classification.
//
// Subcommands: info, experiment, predict, dump-conformity. See README.md.

#include <cctype>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "cmlc/conformal.hpp"
#include "cmlc/dataset.hpp"
#include "cmlc/decision.hpp"
#include "cmlc/errors.hpp"
#include "cmlc/evaluation.hpp"
#include "cmlc/ingest.hpp"
#include "cmlc/parallel.hpp"
#include "cmlc/split.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitRuntime = 3;

struct LabelSource {
  std::string labels_xml;
  std::vector<std::string> label_names;
  std::size_t n_labels = 0;
};

struct DataOptions {
  std::string data_path;
  std::string test_data_path;  // optional second file, concatenated
  LabelSource labels;
};

struct ScheduleOptions {
  double min = 0.05;
  double max = 1.0;
  std::size_t steps = 20;

  cmlc::SearchSchedule build() const { return cmlc::SearchSchedule::linear(min, max, steps); }
};

// Flat key=value defaults: keys are long option names without the leading
// dashes; values already given on the command line win.
void apply_config_file(CLI::App* cmd, const std::string& path) {
  if (path.empty()) return;
  std::ifstream in(path);
  if (!in) throw cmlc::config_error("cannot open config file: " + path);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#' || line[first] == ';') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw cmlc::config_error("config file line " + std::to_string(line_no) +
                               ": expected key=value");
    auto trim = [](std::string s) {
      const auto b = s.find_first_not_of(" \t\r");
      const auto e = s.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key == "config") continue;
    CLI::Option* opt = cmd->get_option_no_throw("--" + key);
    if (opt == nullptr)
      throw cmlc::config_error("config file line " + std::to_string(line_no) +
                               ": unknown key '" + key + "'");
    if (opt->count() > 0) continue;
    try {
      opt->add_result(value);
      opt->run_callback();
    } catch (const CLI::Error& e) {
      throw cmlc::config_error("config file line " + std::to_string(line_no) + " (" + key +
                               "): " + e.what());
    }
  }
}

void add_data_options(CLI::App* cmd, DataOptions& opts) {
  cmd->add_option("--data", opts.data_path, "dataset file (.arff or .csv)")
      ->check(CLI::ExistingFile);
  cmd->add_option("--test-data", opts.test_data_path,
                  "second file of a pre-split dataset; rows are appended to --data")
      ->check(CLI::ExistingFile);
  auto* xml = cmd->add_option("--labels-xml", opts.labels.labels_xml,
                              "Mulan-style XML file listing the label names")
                  ->check(CLI::ExistingFile);
  auto* names = cmd->add_option("--labels", opts.labels.label_names,
                                "comma-separated label attribute names")
                    ->delimiter(',');
  auto* count = cmd->add_option("--n-labels", opts.labels.n_labels,
                                "number of trailing label columns (CSV only)");
  xml->excludes(names)->excludes(count);
  names->excludes(count);
}

void add_schedule_options(CLI::App* cmd, ScheduleOptions& opts) {
  cmd->add_option("--schedule-min", opts.min, "smallest window half-width");
  cmd->add_option("--schedule-max", opts.max, "largest window half-width (must be 1.0)");
  cmd->add_option("--schedule-steps", opts.steps, "number of half-widths");
}

bool has_extension(const std::string& path, const char* ext) {
  std::string e = fs::path(path).extension().string();
  for (auto& c : e) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return e == ext;
}

cmlc::MultiLabelDataset load_one(const std::string& path, const LabelSource& labels) {
  if (has_extension(path, ".arff")) {
    std::vector<std::string> names = labels.label_names;
    if (!labels.labels_xml.empty()) names = cmlc::parse_label_xml_file(labels.labels_xml);
    if (names.empty())
      throw cmlc::config_error("ARFF input needs --labels or --labels-xml");
    return cmlc::parse_arff_file(path, names);
  }
  if (has_extension(path, ".csv")) {
    if (!labels.labels_xml.empty() || !labels.label_names.empty())
      throw cmlc::config_error("CSV input identifies labels by count; use --n-labels");
    if (labels.n_labels == 0)
      throw cmlc::config_error("CSV input needs --n-labels");
    return cmlc::parse_csv_file(path, labels.n_labels);
  }
  throw cmlc::config_error("unrecognized dataset extension (expected .arff or .csv): " + path);
}

cmlc::MultiLabelDataset load_dataset(const DataOptions& opts) {
  if (opts.data_path.empty()) throw cmlc::config_error("--data is required");
  cmlc::MultiLabelDataset data = load_one(opts.data_path, opts.labels);
  if (!opts.test_data_path.empty())
    data = cmlc::concat(data, load_one(opts.test_data_path, opts.labels));
  return data;
}

std::uint64_t fnv1a64(const std::string& text) {
  std::uint64_t hash = 1469598103934665603ull;
  for (unsigned char c : text) {
    hash ^= c;
    hash *= 1099511628211ull;
  }
  return hash;
}

std::string hex64(std::uint64_t v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

// Removes files created by a failed command so interrupted runs are obvious.
class OutputTracker {
 public:
  void add(const fs::path& path) { created_.push_back(path); }

  void discard_all() {
    for (const auto& p : created_) {
      std::error_code ec;
      fs::remove(p, ec);
    }
    created_.clear();
  }

  void commit() { created_.clear(); }

 private:
  std::vector<fs::path> created_;
};

void write_file(const fs::path& path, const std::string& contents, OutputTracker& tracker) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  tracker.add(path);
  out << contents;
  if (!out.good()) throw std::runtime_error("write failed: " + path.string());
}

struct ExperimentOptions {
  DataOptions data;
  ScheduleOptions schedule;
  std::string config_path;
  std::size_t splits = 50;
  std::size_t train_size = 400;
  std::uint64_t seed = 0;
  std::vector<double> theta_grid = {0.25, 0.5, 0.75, 1.0, 1.5, 2.0, 3.0, 4.0};
  std::vector<double> abstain_grid = {0.0, 0.05, 0.1, 0.15, 0.2, 0.25,
                                      0.3, 0.35, 0.4, 0.45, 0.5};
  double theta = 1.0;  // ratio threshold on the rejection curve
  std::size_t dump_label = 0;
  unsigned jobs = 1;
  std::string out_dir = "cmlc_out";
};

json experiment_config_json(const ExperimentOptions& opts) {
  return json{{"splits", opts.splits},
              {"train_size", opts.train_size},
              {"seed", opts.seed},
              {"theta_grid", opts.theta_grid},
              {"abstain_grid", opts.abstain_grid},
              {"theta", opts.theta},
              {"dump_label", opts.dump_label},
              {"schedule", {{"min", opts.schedule.min},
                            {"max", opts.schedule.max},
                            {"steps", opts.schedule.steps}}}};
}

int cmd_experiment(const ExperimentOptions& opts) {
  const auto started = std::chrono::steady_clock::now();
  std::string stage = "configuration";
  OutputTracker tracker;
  try {
    cmlc::ExperimentConfig config;
    config.n_splits = opts.splits;
    config.n_train = opts.train_size;
    config.base_seed = opts.seed;
    config.theta_grid = opts.theta_grid;
    config.abstention_grid = opts.abstain_grid;
    config.rejection_theta = opts.theta;
    config.schedule = opts.schedule.build();
    config.jobs = opts.jobs;

    stage = "loading data";
    const cmlc::MultiLabelDataset data = load_dataset(opts.data);
    config.validate(data.n_rows());
    if (opts.dump_label >= data.n_labels())
      throw cmlc::config_error("--dump-label out of range (dataset has " +
                               std::to_string(data.n_labels()) + " labels)");

    stage = "preparing output directory";
    fs::create_directories(opts.out_dir);
    const fs::path dir(opts.out_dir);
    const json config_json = experiment_config_json(opts);

    json manifest;
    manifest["command"] = "experiment";
    manifest["data"] = opts.data.data_path;
    if (!opts.data.test_data_path.empty()) manifest["test_data"] = opts.data.test_data_path;
    manifest["config"] = config_json;
    manifest["config_hash"] = hex64(fnv1a64(config_json.dump()));
    manifest["prng"] = cmlc::kShuffleAlgorithm;
    manifest["jobs"] = opts.jobs;
    write_file(dir / "manifest.json.partial", manifest.dump(2) + "\n", tracker);

    stage = "running splits";
    const cmlc::ExperimentResult result = cmlc::run_experiment(data, config);

    stage = "conformity dump";
    const cmlc::TrainTestSplit first_split =
        cmlc::random_split(data.n_rows(), {opts.seed, opts.train_size, 0});
    const auto dump_rows = cmlc::dump_conformity_distributions(
        data, first_split.train, opts.dump_label, config.schedule, opts.jobs);

    stage = "writing results";
    {
      std::ostringstream s;
      cmlc::write_theta_curve_csv(result.theta_curve, s);
      write_file(dir / "theta_curve.csv", s.str(), tracker);
    }
    {
      std::ostringstream s;
      cmlc::write_rejection_curve_csv(result.rejection_curve, s);
      write_file(dir / "rejection_curve.csv", s.str(), tracker);
    }
    {
      std::ostringstream s;
      cmlc::write_conformity_dump_csv(dump_rows, s);
      write_file(dir / "conformity_dump.csv", s.str(), tracker);
    }

    stage = "finalizing manifest";
    manifest["dataset"] = {{"n", result.n_rows},
                           {"d", result.n_features},
                           {"k", result.n_labels},
                           {"label_names", data.label_names()}};
    manifest["outputs"] = {"theta_curve.csv", "rejection_curve.csv", "conformity_dump.csv"};
    const double wall =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    manifest["wall_time_seconds"] = wall;
    write_file(dir / "manifest.json.partial", manifest.dump(2) + "\n", tracker);
    fs::rename(dir / "manifest.json.partial", dir / "manifest.json");
    tracker.commit();

    std::cout << "experiment done: " << result.n_rows << " rows, " << config.n_splits
              << " splits, outputs in " << opts.out_dir << "\n";
    return kExitOk;
  } catch (...) {
    tracker.discard_all();
    std::cerr << "experiment failed during " << stage << ": ";
    throw;
  }
}

struct PredictOptions {
  DataOptions data;
  ScheduleOptions schedule;
  std::string config_path;
  std::string query_path;
  double theta = 1.0;
  double abstain_threshold = 0.1;
  std::string mode = "force";
  unsigned jobs = 1;
  std::string out_path;  // empty = stdout
};

int cmd_predict(const PredictOptions& opts) {
  if (opts.query_path.empty()) throw cmlc::config_error("--query is required");
  const cmlc::MultiLabelDataset data = load_dataset(opts.data);
  const auto queries = cmlc::parse_query_csv_file(opts.query_path);
  for (const auto& q : queries) {
    if (q.size() != data.n_features())
      throw cmlc::data_error("query has " + std::to_string(q.size()) +
                             " features but the training data has " +
                             std::to_string(data.n_features()));
  }

  cmlc::DecisionConfig decision_config;
  decision_config.theta = opts.theta;
  decision_config.abstention_threshold = opts.abstain_threshold;
  decision_config.mode =
      opts.mode == "abstain" ? cmlc::DecisionMode::abstain : cmlc::DecisionMode::force;
  decision_config.validate();

  std::vector<std::size_t> all_rows(data.n_rows());
  for (std::size_t i = 0; i < all_rows.size(); ++i) all_rows[i] = i;
  const cmlc::CalibratedModel model =
      cmlc::fit_model(data, all_rows, opts.schedule.build(), opts.jobs);

  std::ostringstream out;
  out << "instance_id,label,q0,q1,decision\n";
  for (std::size_t i = 0; i < queries.size(); ++i) {
    const auto decisions = cmlc::predict_instance(queries[i], model, decision_config);
    for (std::size_t k = 0; k < decisions.size(); ++k) {
      out << i << ',' << data.label_names()[k] << ','
          << cmlc::format_float(decisions[k].plausibility.q0) << ','
          << cmlc::format_float(decisions[k].plausibility.q1) << ','
          << cmlc::outcome_name(decisions[k].outcome) << '\n';
    }
  }

  if (opts.out_path.empty()) {
    std::cout << out.str();
  } else {
    std::ofstream file(opts.out_path, std::ios::binary);
    if (!file) throw std::runtime_error("cannot write " + opts.out_path);
    file << out.str();
  }
  return kExitOk;
}

struct DumpOptions {
  DataOptions data;
  ScheduleOptions schedule;
  std::string config_path;
  std::string label = "0";  // index or name
  std::uint64_t seed = 0;
  std::size_t train_size = 400;
  unsigned jobs = 1;
  std::string out_path;        // empty = stdout
  std::string table_out_path;  // optional calibration table CSV
};

std::size_t resolve_label(const std::string& label, const cmlc::MultiLabelDataset& data) {
  for (std::size_t k = 0; k < data.label_names().size(); ++k)
    if (data.label_names()[k] == label) return k;
  try {
    const std::size_t index = std::stoul(label);
    if (index < data.n_labels()) return index;
  } catch (...) {
  }
  std::string available;
  for (const auto& name : data.label_names())
    available += (available.empty() ? "" : ", ") + name;
  throw cmlc::config_error("unknown label '" + label + "'; available labels: " + available);
}

int cmd_dump_conformity(const DumpOptions& opts) {
  const cmlc::MultiLabelDataset data = load_dataset(opts.data);
  const std::size_t label_index = resolve_label(opts.label, data);
  const auto schedule = opts.schedule.build();

  const cmlc::TrainTestSplit split =
      cmlc::random_split(data.n_rows(), {opts.seed, opts.train_size, 0});
  const auto rows =
      cmlc::dump_conformity_distributions(data, split.train, label_index, schedule, opts.jobs);

  std::ostringstream out;
  cmlc::write_conformity_dump_csv(rows, out);
  if (opts.out_path.empty()) {
    std::cout << out.str();
  } else {
    std::ofstream file(opts.out_path, std::ios::binary);
    if (!file) throw std::runtime_error("cannot write " + opts.out_path);
    file << out.str();
  }

  if (!opts.table_out_path.empty()) {
    const auto normalizer = cmlc::NormalizationModel::fit(data, split.train);
    const auto train = normalizer.apply(data.subset(split.train));
    const auto table = cmlc::calibrate(train, label_index, schedule, opts.jobs);
    std::ofstream file(opts.table_out_path, std::ios::binary);
    if (!file) throw std::runtime_error("cannot write " + opts.table_out_path);
    cmlc::write_calibration_csv(table, file);
  }
  return kExitOk;
}

int cmd_info(const DataOptions& data_opts) {
  const cmlc::MultiLabelDataset data = load_dataset(data_opts);
  std::cout << "rows: " << data.n_rows() << "\nfeatures: " << data.n_features()
            << "\nlabels: " << data.n_labels() << "\n";
  for (std::size_t k = 0; k < data.n_labels(); ++k) {
    std::size_t positives = 0;
    for (std::size_t i = 0; i < data.n_rows(); ++i)
      positives += static_cast<std::size_t>(data.label(i, k));
    std::cout << "  " << data.label_names()[k] << ": " << positives << " positive ("
              << cmlc::format_float(100.0 * static_cast<double>(positives) /
                                    static_cast<double>(data.n_rows()))
              << "%)\n";
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"conformal rule-based multi-label classification"};
  app.require_subcommand(1);

  ExperimentOptions experiment;
  auto* exp = app.add_subcommand("experiment",
                                 "repeated random-split protocol; writes curve CSVs + manifest");
  exp->add_option("--config", experiment.config_path,
                  "flat key=value file supplying defaults; flags override")
      ->check(CLI::ExistingFile);
  add_data_options(exp, experiment.data);
  add_schedule_options(exp, experiment.schedule);
  exp->add_option("--splits", experiment.splits, "number of random splits")
      ->check(CLI::PositiveNumber);
  exp->add_option("--train-size", experiment.train_size, "training rows per split")
      ->check(CLI::PositiveNumber);
  exp->add_option("--seed", experiment.seed, "base PRNG seed");
  exp->add_option("--theta-grid", experiment.theta_grid, "thresholds for the theta sweep")
      ->delimiter(',');
  exp->add_option("--abstain-grid", experiment.abstain_grid,
                  "abstention thresholds for the rejection curve")
      ->delimiter(',');
  exp->add_option("--theta", experiment.theta,
                  "ratio threshold applied on the rejection curve's surviving labels");
  exp->add_option("--dump-label", experiment.dump_label,
                  "label index for conformity_dump.csv (first split's training set)");
  exp->add_option("--jobs", experiment.jobs, "worker threads (0 = all cores)");
  exp->add_option("--out", experiment.out_dir, "output directory");

  PredictOptions predict;
  auto* pred = app.add_subcommand("predict", "plausibilities and decisions for query rows");
  pred->add_option("--config", predict.config_path,
                   "flat key=value file supplying defaults; flags override")
      ->check(CLI::ExistingFile);
  add_data_options(pred, predict.data);
  add_schedule_options(pred, predict.schedule);
  pred->add_option("--query", predict.query_path, "CSV of query feature rows (header + rows)")
      ->check(CLI::ExistingFile);
  pred->add_option("--theta", predict.theta, "ratio threshold");
  pred->add_option("--mode", predict.mode, "force | abstain")
      ->check(CLI::IsMember({"force", "abstain"}));
  pred->add_option("--abstain-threshold", predict.abstain_threshold,
                   "abstain when max(q0,q1) <= this (abstain mode)");
  pred->add_option("--jobs", predict.jobs, "worker threads (0 = all cores)");
  pred->add_option("--out", predict.out_path, "output CSV (default: stdout)");

  DumpOptions dump;
  auto* dmp = app.add_subcommand("dump-conformity",
                                 "leave-one-out conformities and plausibilities for one label");
  dmp->add_option("--config", dump.config_path,
                  "flat key=value file supplying defaults; flags override")
      ->check(CLI::ExistingFile);
  add_data_options(dmp, dump.data);
  add_schedule_options(dmp, dump.schedule);
  dmp->add_option("--label", dump.label, "label name or index");
  dmp->add_option("--seed", dump.seed, "split seed");
  dmp->add_option("--train-size", dump.train_size, "training rows")->check(CLI::PositiveNumber);
  dmp->add_option("--jobs", dump.jobs, "worker threads (0 = all cores)");
  dmp->add_option("--out", dump.out_path, "output CSV (default: stdout)");
  dmp->add_option("--table-out", dump.table_out_path, "also write the calibration table CSV");

  DataOptions info;
  auto* inf = app.add_subcommand("info", "parse a dataset and print its shape");
  add_data_options(inf, info);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (exp->parsed()) {
      apply_config_file(exp, experiment.config_path);
      return cmd_experiment(experiment);
    }
    if (pred->parsed()) {
      apply_config_file(pred, predict.config_path);
      return cmd_predict(predict);
    }
    if (dmp->parsed()) {
      apply_config_file(dmp, dump.config_path);
      return cmd_dump_conformity(dump);
    }
    if (inf->parsed()) return cmd_info(info);
    return kExitUsage;
  } catch (const cmlc::config_error& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const cmlc::data_error& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
}

// Command-line front end: fit / predict / eval / experiment.
// Reports are line-oriented key=value records; data artifacts are CSV.

#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "elmpi/eval.hpp"
#include "elmpi/model_io.hpp"
#include "elmpi/pi_pipeline.hpp"
#include "elmpi/random.hpp"

namespace fs = std::filesystem;
using namespace elmpi;

namespace {

using Clock = std::chrono::steady_clock;

std::string format_g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string format_g6(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

// Removes every file it registered unless commit() ran; keeps failed runs
// from leaving partial outputs behind.
class OutputGuard {
 public:
  ~OutputGuard() {
    if (committed_) return;
    for (const fs::path& path : paths_) {
      std::error_code ec;
      fs::remove(path, ec);
    }
  }
  std::ofstream open(const fs::path& path) {
    paths_.push_back(path);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
    return out;
  }
  void track(const fs::path& path) { paths_.push_back(path); }
  void commit() { committed_ = true; }

 private:
  std::vector<fs::path> paths_;
  bool committed_ = false;
};

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> items;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) items.push_back(item);
  return items;
}

std::vector<NeuronSpec> parse_neurons(const std::string& text) {
  std::vector<NeuronSpec> specs;
  for (const std::string& item : split_list(text)) {
    std::size_t colon = item.find(':');
    if (colon == std::string::npos)
      throw ConfigError("neuron spec '" + item + "' is not kind:count");
    NeuronSpec spec;
    spec.kind = activation_from_string(item.substr(0, colon));
    spec.count = std::stol(item.substr(colon + 1));
    specs.push_back(spec);
  }
  if (specs.empty()) throw ConfigError("empty neuron spec list");
  return specs;
}

std::string neurons_to_string(const std::vector<NeuronSpec>& specs) {
  std::string out;
  for (const NeuronSpec& spec : specs) {
    if (!out.empty()) out += ',';
    out += std::string(to_string(spec.kind)) + ':' + std::to_string(spec.count);
  }
  return out;
}

std::vector<double> parse_doubles(const std::string& text) {
  std::vector<double> values;
  for (const std::string& item : split_list(text)) values.push_back(std::stod(item));
  return values;
}

std::vector<Index> parse_indices(const std::string& text) {
  std::vector<Index> values;
  for (const std::string& item : split_list(text))
    values.push_back(static_cast<Index>(std::stol(item)));
  return values;
}

// Minimal CSV table reader for the tool's own outputs (header + numeric rows).
struct Table {
  std::vector<std::string> header;
  Matrix values;

  Vector column(const std::string& name) const {
    for (std::size_t j = 0; j < header.size(); ++j)
      if (header[j] == name) return values.col(static_cast<Index>(j));
    throw ConfigError("column '" + name + "' not found");
  }
};

Table read_table(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "'");
  std::string line;
  if (!std::getline(in, line) || line.empty())
    throw DataError("'" + path + "' is empty");
  Table table;
  for (const std::string& name : split_list(line)) table.header.push_back(name);
  std::vector<double> cells;
  Index rows = 0;
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    std::vector<std::string> fields = split_list(line);
    if (fields.size() != table.header.size())
      throw ParseError("'" + path + "': row " + std::to_string(rows + 1) +
                       " has " + std::to_string(fields.size()) + " cells");
    for (const std::string& field : fields) cells.push_back(std::stod(field));
    ++rows;
  }
  if (rows == 0) throw DataError("'" + path + "' has no data rows");
  table.values.resize(rows, static_cast<Index>(table.header.size()));
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < table.values.cols(); ++j)
      table.values(i, j) = cells[static_cast<std::size_t>(i * table.values.cols() + j)];
  return table;
}

struct CommonOptions {
  std::string out_dir;
  std::uint64_t seed = 0;
  double alpha = 0.95;
  Index batch_rows = kDefaultBatchRows;
};

struct DataSource {
  std::string data_path;
  std::string synth_kind;  // "", hetero, homo, skinlike
  std::string target_column;
  bool no_header = false;
  Index n = 1000;
  double noise_level = 1.0;
  Index skin_features = 5;
  double skin_overlap = 1.0;
};

void add_source_flags(CLI::App* cmd, DataSource& source) {
  cmd->add_option("--data", source.data_path, "CSV input file");
  cmd->add_option("--synth", source.synth_kind,
                  "built-in generator: hetero, homo, or skinlike")
      ->check(CLI::IsMember({"hetero", "homo", "skinlike"}));
  cmd->add_option("--target", source.target_column,
                  "target column name or 0-based index (default: last)");
  cmd->add_flag("--no-header", source.no_header, "CSV has no header row");
  cmd->add_option("--n", source.n, "sample count for --synth");
  cmd->add_option("--noise-level", source.noise_level,
                  "sigma for the homoscedastic generator");
  cmd->add_option("--skin-features", source.skin_features,
                  "feature count for the skinlike generator");
  cmd->add_option("--skin-overlap", source.skin_overlap,
                  "class overlap for the skinlike generator (0 = separable)");
}

Dataset load_source(const DataSource& source) {
  if (!source.data_path.empty() && !source.synth_kind.empty())
    throw ConfigError("--data and --synth are mutually exclusive");
  if (!source.data_path.empty())
    return load_csv(source.data_path, source.target_column, !source.no_header);
  if (source.synth_kind == "skinlike")
    return synth_skinlike(source.n, source.skin_features, 0 /*seed set below*/,
                          source.skin_overlap);
  if (source.synth_kind == "hetero" || source.synth_kind == "homo") {
    GeneratorSpec spec;
    spec.noise = source.synth_kind == "homo" ? NoiseModel::constant
                                             : NoiseModel::quadratic_ramp;
    spec.noise_level = source.noise_level;
    spec.n = source.n;
    return synth(spec);
  }
  throw ConfigError("no data source: pass --data or --synth");
}

Dataset load_source_seeded(const DataSource& source, std::uint64_t seed) {
  if (!source.data_path.empty()) return load_source(source);
  if (source.synth_kind == "skinlike")
    return synth_skinlike(source.n, source.skin_features, seed, source.skin_overlap);
  GeneratorSpec spec;
  spec.noise = source.synth_kind == "homo" ? NoiseModel::constant
                                           : NoiseModel::quadratic_ramp;
  spec.noise_level = source.noise_level;
  spec.n = source.n;
  spec.seed = seed;
  return synth(spec);
}

void write_config(OutputGuard& guard, const fs::path& out_dir,
                  const std::map<std::string, std::string>& entries) {
  std::ofstream out = guard.open(out_dir / "config.txt");
  for (const auto& [key, value] : entries) out << key << '=' << value << '\n';
}

fs::path prepare_out_dir(const std::string& out_dir) {
  if (out_dir.empty()) throw ConfigError("--out is required");
  fs::path dir(out_dir);
  fs::create_directories(dir);
  return dir;
}

// ---------------------------------------------------------------------------
// fit

struct FitOptions {
  CommonOptions common;
  DataSource source;
  std::string neurons_data = "linear:1,tanh:10";
  std::string neurons_var = "linear:1,tanh:10";
  std::string gamma_grid = "1e-6,1e-4,1e-2,1,1e2";
  double val_fraction = 0.2;
};

int run_fit(const FitOptions& options) {
  fs::path out_dir = prepare_out_dir(options.common.out_dir);
  OutputGuard guard;

  Dataset data = load_source_seeded(options.source, options.common.seed);
  PiConfig config;
  config.specs_data = parse_neurons(options.neurons_data);
  config.specs_var = parse_neurons(options.neurons_var);
  config.gamma_grid = parse_doubles(options.gamma_grid);
  config.val_fraction = options.val_fraction;
  config.batch_rows = options.common.batch_rows;
  config.seed = options.common.seed;

  FitReport report;
  auto t0 = Clock::now();
  PiModel model = fit_pi(data.x, data.y, config, &report);
  double secs_total = std::chrono::duration<double>(Clock::now() - t0).count();

  fs::path model_path = out_dir / "model.elmpi";
  guard.track(model_path);
  save_model(model, model_path.string());

  {
    std::ofstream out = guard.open(out_dir / "fit_report.txt");
    out << "n_train=" << model.meta.n_train << '\n'
        << "d=" << model.m_data.layer.input_dim << '\n'
        << "neurons_data=" << neurons_to_string(config.specs_data) << '\n'
        << "neurons_var=" << neurons_to_string(config.specs_var) << '\n'
        << "L_data=" << model.m_data.layer.width() << '\n'
        << "L_var=" << model.m_var.layer.width() << '\n'
        << "gamma_data=" << format_g17(model.meta.gamma_data) << '\n'
        << "gamma_var=" << format_g17(model.meta.gamma_var) << '\n'
        << "leverage_clamps_data=" << model.sigma_data.leverage_clamp_count << '\n'
        << "leverage_clamps_var=" << model.sigma_var.leverage_clamp_count << '\n'
        << "secs_gamma_data=" << format_g6(report.secs_gamma_data) << '\n'
        << "secs_train_data=" << format_g6(report.secs_train_data) << '\n'
        << "secs_jackknife_data=" << format_g6(report.secs_jackknife_data) << '\n'
        << "secs_gamma_var=" << format_g6(report.secs_gamma_var) << '\n'
        << "secs_train_var=" << format_g6(report.secs_train_var) << '\n'
        << "secs_jackknife_var=" << format_g6(report.secs_jackknife_var) << '\n'
        << "secs_total=" << format_g6(secs_total) << '\n';
  }

  write_config(guard, out_dir,
               {{"subcommand", "fit"},
                {"data", options.source.data_path},
                {"synth", options.source.synth_kind},
                {"target", options.source.target_column},
                {"n", std::to_string(options.source.n)},
                {"noise_level", format_g17(options.source.noise_level)},
                {"neurons_data", options.neurons_data},
                {"neurons_var", options.neurons_var},
                {"gamma_grid", options.gamma_grid},
                {"val_fraction", format_g17(options.val_fraction)},
                {"seed", std::to_string(options.common.seed)},
                {"batch_rows", std::to_string(options.common.batch_rows)},
                {"out", options.common.out_dir}});
  guard.commit();
  std::cout << "ok model=" << model_path.string()
            << " gamma_data=" << format_g6(model.meta.gamma_data)
            << " gamma_var=" << format_g6(model.meta.gamma_var) << '\n';
  return 0;
}

// ---------------------------------------------------------------------------
// predict

struct PredictOptions {
  CommonOptions common;
  DataSource source;
  std::string model_path;
};

int run_predict(const PredictOptions& options) {
  fs::path out_dir = prepare_out_dir(options.common.out_dir);
  OutputGuard guard;

  PiModel model = load_model(options.model_path);
  Dataset data = load_source_seeded(options.source, options.common.seed);
  if (data.x.cols() != model.m_data.layer.input_dim)
    throw ShapeError("predict: data has " + std::to_string(data.x.cols()) +
                     " features, model expects " +
                     std::to_string(model.m_data.layer.input_dim));

  std::vector<IntervalPrediction> preds =
      predict_pi(model, data.x, options.common.alpha, options.common.batch_rows);

  {
    std::ofstream out = guard.open(out_dir / "intervals.csv");
    out << "y_hat,lower,upper,s,r2_raw,sigma2_r,sigma2_y\n";
    for (const IntervalPrediction& p : preds)
      out << format_g17(p.y_hat) << ',' << format_g17(p.lower) << ','
          << format_g17(p.upper) << ',' << format_g17(p.s) << ','
          << format_g17(p.r2_raw) << ',' << format_g17(p.sigma2_r) << ','
          << format_g17(p.sigma2_y) << '\n';
  }
  write_config(guard, out_dir,
               {{"subcommand", "predict"},
                {"model", options.model_path},
                {"data", options.source.data_path},
                {"synth", options.source.synth_kind},
                {"target", options.source.target_column},
                {"alpha", format_g17(options.common.alpha)},
                {"seed", std::to_string(options.common.seed)},
                {"batch_rows", std::to_string(options.common.batch_rows)},
                {"out", options.common.out_dir}});
  guard.commit();
  std::cout << "ok rows=" << preds.size() << '\n';
  return 0;
}

// ---------------------------------------------------------------------------
// eval

struct EvalOptions {
  CommonOptions common;
  std::string intervals_path;
  std::string truth_path;
  std::string target_column;
  bool no_header = false;
  bool boundary_curve = false;
  Index curve_points = 200;
};

int run_eval(const EvalOptions& options) {
  fs::path out_dir = prepare_out_dir(options.common.out_dir);
  OutputGuard guard;

  Table intervals = read_table(options.intervals_path);
  Vector y_hat = intervals.column("y_hat");
  Vector lower = intervals.column("lower");
  Vector upper = intervals.column("upper");
  Dataset truth = load_csv(options.truth_path, options.target_column,
                           !options.no_header);
  if (truth.y.size() != y_hat.size())
    throw ShapeError("eval: " + std::to_string(truth.y.size()) +
                     " truth rows vs " + std::to_string(y_hat.size()) +
                     " interval rows");

  double picp_value = picp(lower, upper, truth.y);
  double nmpiw_value = nmpiw(lower, upper, truth.y);
  {
    std::ofstream out = guard.open(out_dir / "report.txt");
    out << "picp=" << format_g17(picp_value) << '\n'
        << "nmpiw=" << format_g17(nmpiw_value) << '\n'
        << "alpha=" << format_g17(options.common.alpha) << '\n'
        << "n=" << truth.y.size() << '\n';
  }
  if (options.boundary_curve) {
    std::vector<UniformPiPoint> curve =
        uniform_pi_curve(y_hat, truth.y, options.curve_points);
    std::ofstream out = guard.open(out_dir / "boundary.csv");
    out << "half_width,nmpiw,picp\n";
    for (const UniformPiPoint& point : curve)
      out << format_g17(point.half_width) << ',' << format_g17(point.nmpiw) << ','
          << format_g17(point.picp) << '\n';
  }
  write_config(guard, out_dir,
               {{"subcommand", "eval"},
                {"intervals", options.intervals_path},
                {"truth", options.truth_path},
                {"target", options.target_column},
                {"alpha", format_g17(options.common.alpha)},
                {"boundary_curve", options.boundary_curve ? "1" : "0"},
                {"out", options.common.out_dir}});
  guard.commit();
  std::cout << "picp=" << format_g6(picp_value) << " nmpiw=" << format_g6(nmpiw_value)
            << " n=" << truth.y.size() << " alpha=" << format_g6(options.common.alpha)
            << '\n';
  return 0;
}

// ---------------------------------------------------------------------------
// experiment

struct ExperimentOptions {
  CommonOptions common;
  std::string name;
  std::string neurons_data = "linear:1,tanh:10";
  std::string neurons_var = "linear:1,tanh:10";
  std::string gamma_grid = "1e-6,1e-4,1e-2,1,1e2";
  std::string noise = "hetero";
  double noise_level = 1.0;
  Index n = 1000;
  std::string n_values = "100,200,400,800,1600,3200";
  int trials = 10;
  Index grid_points = 400;
  double train_fraction = 0.7;
  std::string coverages = "1.0,0.7,0.5,0.3,0.1,0.03,0.01";
  Index skin_features = 5;
  double skin_overlap = 1.0;
};

PiConfig experiment_config(const ExperimentOptions& options) {
  PiConfig config;
  config.specs_data = parse_neurons(options.neurons_data);
  config.specs_var = parse_neurons(options.neurons_var);
  config.gamma_grid = parse_doubles(options.gamma_grid);
  config.batch_rows = options.common.batch_rows;
  config.seed = options.common.seed;
  return config;
}

GeneratorSpec experiment_generator(const ExperimentOptions& options) {
  GeneratorSpec spec;
  spec.noise =
      options.noise == "homo" ? NoiseModel::constant : NoiseModel::quadratic_ramp;
  spec.noise_level = options.noise_level;
  spec.n = options.n;
  spec.seed = options.common.seed;
  return spec;
}

int run_experiment_artificial(const ExperimentOptions& options, OutputGuard& guard,
                              const fs::path& out_dir) {
  GeneratorSpec spec = experiment_generator(options);
  Dataset data = synth(spec);
  PiModel model = fit_pi(data.x, data.y, experiment_config(options));

  {
    std::ofstream out = guard.open(out_dir / "train.csv");
    out << "x,y\n";
    for (Index i = 0; i < data.x.rows(); ++i)
      out << format_g17(data.x(i, 0)) << ',' << format_g17(data.y(i)) << '\n';
  }

  Matrix grid(options.grid_points, 1);
  grid.col(0).setLinSpaced(options.grid_points, spec.x_lo, spec.x_hi);
  std::vector<IntervalPrediction> preds =
      predict_pi(model, grid, options.common.alpha, options.common.batch_rows);
  const double z = std_normal_quantile(options.common.alpha);

  std::ofstream out = guard.open(out_dir / "intervals_grid.csv");
  out << "x,f_true,sigma_true,true_lower,true_upper,y_hat,lower,upper,"
         "r2_raw,sigma2_r,sigma2_y\n";
  GeneratorSpec truth_spec = spec;
  for (Index i = 0; i < grid.rows(); ++i) {
    double x = grid(i, 0);
    double f = mean_value(spec.f, x);
    double sigma = noise_sigma(truth_spec, x);
    const IntervalPrediction& p = preds[static_cast<std::size_t>(i)];
    out << format_g17(x) << ',' << format_g17(f) << ',' << format_g17(sigma) << ','
        << format_g17(f - z * sigma) << ',' << format_g17(f + z * sigma) << ','
        << format_g17(p.y_hat) << ',' << format_g17(p.lower) << ','
        << format_g17(p.upper) << ',' << format_g17(p.r2_raw) << ','
        << format_g17(p.sigma2_r) << ',' << format_g17(p.sigma2_y) << '\n';
  }
  return 0;
}

int run_experiment_decay(const ExperimentOptions& options, OutputGuard& guard,
                         const fs::path& out_dir) {
  GeneratorSpec spec = experiment_generator(options);
  std::vector<Index> n_values = parse_indices(options.n_values);
  std::vector<DecayPoint> curve = uncertainty_decay_curve(
      spec, n_values, options.common.alpha, options.trials,
      experiment_config(options));
  std::ofstream out = guard.open(out_dir / "decay.csv");
  out << "n,mean_sigma2_y,mean_sigma2_r,mean_r2\n";
  for (const DecayPoint& point : curve)
    out << point.n_train << ',' << format_g17(point.mean_sigma2_y) << ','
        << format_g17(point.mean_sigma2_r) << ',' << format_g17(point.mean_r2)
        << '\n';
  return 0;
}

int run_experiment_boundary(const ExperimentOptions& options, OutputGuard& guard,
                            const fs::path& out_dir) {
  GeneratorSpec spec = experiment_generator(options);
  Dataset data = synth(spec);
  auto [train_set, test_set] = split(data, options.train_fraction,
                                     mix_seed(options.common.seed, 3));
  PiModel model = fit_pi(train_set.x, train_set.y, experiment_config(options));
  std::vector<IntervalPrediction> preds =
      predict_pi(model, test_set.x, options.common.alpha, options.common.batch_rows);

  Vector y_hat(test_set.y.size());
  for (Index i = 0; i < y_hat.size(); ++i)
    y_hat(i) = preds[static_cast<std::size_t>(i)].y_hat;
  IntervalReport report = interval_report(preds, test_set.y, options.common.alpha);
  std::vector<UniformPiPoint> curve =
      uniform_pi_curve(y_hat, test_set.y, options.grid_points);

  {
    std::ofstream out = guard.open(out_dir / "boundary.csv");
    out << "half_width,nmpiw,picp\n";
    for (const UniformPiPoint& point : curve)
      out << format_g17(point.half_width) << ',' << format_g17(point.nmpiw) << ','
          << format_g17(point.picp) << '\n';
  }
  std::ofstream out = guard.open(out_dir / "report.txt");
  out << "picp=" << format_g17(report.picp) << '\n'
      << "nmpiw=" << format_g17(report.nmpiw) << '\n'
      << "alpha=" << format_g17(report.alpha) << '\n'
      << "n=" << report.n << '\n';
  return 0;
}

int run_experiment_fp_coverage(const ExperimentOptions& options, OutputGuard& guard,
                               const fs::path& out_dir) {
  Dataset data = synth_skinlike(options.n, options.skin_features,
                                options.common.seed, options.skin_overlap);
  auto [train_set, test_set] = split(data, options.train_fraction,
                                     mix_seed(options.common.seed, 5));
  PiModel model = fit_pi(train_set.x, train_set.y, experiment_config(options));
  std::vector<IntervalPrediction> preds =
      predict_pi(model, test_set.x, options.common.alpha, options.common.batch_rows);

  Vector y_hat(test_set.y.size()), widths(test_set.y.size());
  for (Index i = 0; i < y_hat.size(); ++i) {
    y_hat(i) = preds[static_cast<std::size_t>(i)].y_hat;
    widths(i) = preds[static_cast<std::size_t>(i)].s;
  }
  std::vector<double> coverages = parse_doubles(options.coverages);

  std::ofstream out = guard.open(out_dir / "fp_coverage.csv");
  out << "mode,coverage,theta,tp_rate,fp_rate\n";
  for (ThresholdMode mode : {ThresholdMode::mse, ThresholdMode::per_sample}) {
    std::vector<CoveragePoint> points =
        confusion_at_coverage(y_hat, widths, test_set.y, coverages, mode);
    for (const CoveragePoint& point : points)
      out << (mode == ThresholdMode::mse ? "mse" : "per_sample") << ','
          << format_g17(point.coverage) << ',' << format_g17(point.theta) << ','
          << format_g17(point.tp_rate) << ',' << format_g17(point.fp_rate) << '\n';
  }
  return 0;
}

int run_experiment(const ExperimentOptions& options) {
  const std::vector<std::string> known{"artificial", "decay", "boundary",
                                       "fp-coverage"};
  if (std::find(known.begin(), known.end(), options.name) == known.end()) {
    std::string names;
    for (const std::string& name : known) names += (names.empty() ? "" : ", ") + name;
    throw ConfigError("unknown experiment '" + options.name + "'; valid names: " +
                      names);
  }
  fs::path out_dir = prepare_out_dir(options.common.out_dir);
  OutputGuard guard;
  int rc = 0;
  if (options.name == "artificial")
    rc = run_experiment_artificial(options, guard, out_dir);
  else if (options.name == "decay")
    rc = run_experiment_decay(options, guard, out_dir);
  else if (options.name == "boundary")
    rc = run_experiment_boundary(options, guard, out_dir);
  else
    rc = run_experiment_fp_coverage(options, guard, out_dir);

  write_config(guard, out_dir,
               {{"subcommand", "experiment"},
                {"name", options.name},
                {"alpha", format_g17(options.common.alpha)},
                {"seed", std::to_string(options.common.seed)},
                {"batch_rows", std::to_string(options.common.batch_rows)},
                {"n", std::to_string(options.n)},
                {"noise", options.noise},
                {"noise_level", format_g17(options.noise_level)},
                {"n_values", options.n_values},
                {"trials", std::to_string(options.trials)},
                {"train_fraction", format_g17(options.train_fraction)},
                {"coverages", options.coverages},
                {"neurons_data", options.neurons_data},
                {"neurons_var", options.neurons_var},
                {"gamma_grid", options.gamma_grid},
                {"out", options.common.out_dir}});
  guard.commit();
  std::cout << "ok experiment=" << options.name << " out=" << options.common.out_dir
            << '\n';
  return rc;
}

void add_common_flags(CLI::App* cmd, CommonOptions& common, bool with_alpha = true) {
  cmd->add_option("--out", common.out_dir, "output directory")->required();
  cmd->add_option("--seed", common.seed, "seed for all randomness");
  cmd->add_option("--batch-rows", common.batch_rows, "rows per streaming batch");
  if (with_alpha)
    cmd->add_option("--alpha", common.alpha, "target interval coverage in (0,1)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Extreme Learning Machine per-sample prediction intervals"};
  app.require_subcommand(1);

  FitOptions fit_options;
  CLI::App* fit_cmd = app.add_subcommand("fit", "train a PI model");
  add_common_flags(fit_cmd, fit_options.common, /*with_alpha=*/false);
  add_source_flags(fit_cmd, fit_options.source);
  fit_cmd->add_option("--neurons-data", fit_options.neurons_data,
                      "data-model neurons, e.g. linear:1,tanh:10");
  fit_cmd->add_option("--neurons-var", fit_options.neurons_var,
                      "variance-model neurons");
  fit_cmd->add_option("--gamma-grid", fit_options.gamma_grid,
                      "comma-separated ridge grid");
  fit_cmd->add_option("--val-fraction", fit_options.val_fraction,
                      "validation fraction for gamma selection");

  PredictOptions predict_options;
  CLI::App* predict_cmd = app.add_subcommand("predict", "emit intervals CSV");
  add_common_flags(predict_cmd, predict_options.common);
  add_source_flags(predict_cmd, predict_options.source);
  predict_cmd->add_option("--model", predict_options.model_path, "model file")
      ->required();

  EvalOptions eval_options;
  CLI::App* eval_cmd = app.add_subcommand("eval", "PICP/NMPIW report");
  add_common_flags(eval_cmd, eval_options.common);
  eval_cmd->add_option("--intervals", eval_options.intervals_path,
                       "intervals CSV from predict")
      ->required();
  eval_cmd->add_option("--truth", eval_options.truth_path, "CSV with true targets")
      ->required();
  eval_cmd->add_option("--target", eval_options.target_column,
                       "target column in the truth CSV (default: last)");
  eval_cmd->add_flag("--no-header", eval_options.no_header,
                     "truth CSV has no header row");
  eval_cmd->add_flag("--boundary-curve", eval_options.boundary_curve,
                     "also write the uniform-PI tradeoff curve");
  eval_cmd->add_option("--curve-points", eval_options.curve_points,
                       "points on the uniform-PI curve");

  ExperimentOptions experiment_options;
  CLI::App* experiment_cmd =
      app.add_subcommand("experiment", "seeded experiment bundles");
  experiment_cmd->add_option("name", experiment_options.name,
                             "artificial | decay | boundary | fp-coverage")
      ->required();
  add_common_flags(experiment_cmd, experiment_options.common);
  experiment_cmd->add_option("--neurons-data", experiment_options.neurons_data, "");
  experiment_cmd->add_option("--neurons-var", experiment_options.neurons_var, "");
  experiment_cmd->add_option("--gamma-grid", experiment_options.gamma_grid, "");
  experiment_cmd->add_option("--noise", experiment_options.noise,
                             "hetero or homo generator")
      ->check(CLI::IsMember({"hetero", "homo"}));
  experiment_cmd->add_option("--noise-level", experiment_options.noise_level, "");
  experiment_cmd->add_option("--n", experiment_options.n, "");
  experiment_cmd->add_option("--n-values", experiment_options.n_values,
                             "training sizes for decay");
  experiment_cmd->add_option("--trials", experiment_options.trials, "");
  experiment_cmd->add_option("--grid-points", experiment_options.grid_points, "");
  experiment_cmd->add_option("--train-fraction", experiment_options.train_fraction,
                             "");
  experiment_cmd->add_option("--coverages", experiment_options.coverages, "");
  experiment_cmd->add_option("--skin-features", experiment_options.skin_features, "");
  experiment_cmd->add_option("--skin-overlap", experiment_options.skin_overlap, "");

  try {
    app.parse(argc, argv);
    if (*fit_cmd) return run_fit(fit_options);
    if (*predict_cmd) return run_predict(predict_options);
    if (*eval_cmd) return run_eval(eval_options);
    return run_experiment(experiment_options);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error code=2 kind=usage msg=\"" << e.what() << "\"\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error code=2 kind=runtime msg=\"" << e.what() << "\"\n";
    return 2;
  }
}

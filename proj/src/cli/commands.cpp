#include "metscale/chart_calculus.hpp"
#include "metscale/cli.hpp"
#include "metscale/core_geometry.hpp"
#include "metscale/errors.hpp"
#include "metscale/optimizer.hpp"
#include "metscale/scaled_metric.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <sstream>

#ifndef METSCALE_VERSION
#define METSCALE_VERSION "0.0.0"
#endif

namespace metscale::cli {

using nlohmann::json;

namespace {

constexpr int kDefaultOptimizerIters = 200;
constexpr const char* kOutputDirEnv = "METSCALE_OUTPUT_DIR";

std::string g17(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// Compact form for human-readable summaries.
std::string g10(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

json coordinates_json(const Eigen::MatrixXd& m) {
  json out = json::array();
  for (Eigen::Index i = 0; i < m.size(); ++i) out.push_back(m.data()[i]);
  return out;
}

json vector_json(const Eigen::VectorXd& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

json trace_json(const OptimizerTrace& trace) {
  json rows = json::array();
  for (std::size_t k = 0; k < trace.size(); ++k)
    rows.push_back({{"iter", k},
                    {"f_value", trace.values[k]},
                    {"grad_norm", trace.grad_norms[k]},
                    {"coordinates", coordinates_json(trace.iterates[k].coordinates())}});
  return rows;
}

json path_json(const GeodesicPath& path) {
  json rows = json::array();
  for (std::size_t i = 0; i < path.size(); ++i)
    rows.push_back({{"t", path.times[i]},
                    {"x", vector_json(path.positions[i])},
                    {"v", vector_json(path.velocities[i])}});
  return rows;
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

Eigen::VectorXd to_vector(const std::vector<double>& values) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(values.size()));
  for (std::size_t i = 0; i < values.size(); ++i) v(static_cast<Eigen::Index>(i)) = values[i];
  return v;
}

struct GeodesicStart {
  Eigen::VectorXd x0;
  Eigen::VectorXd v0;
};

GeodesicStart default_start(const Chart& chart) {
  Eigen::VectorXd x0 = Eigen::VectorXd::Zero(chart.dimension());
  Eigen::VectorXd v0 = Eigen::VectorXd::Zero(chart.dimension());
  if (chart.name() == "polar") {
    x0 << 1.0, 0.0;
    v0 << 1.0, 0.0;
  } else if (chart.name() == "sphere-chart") {
    x0 << std::numbers::pi / 2, 0.0;
    v0 << 0.0, 1.0;
  } else {
    v0(0) = 1.0;
  }
  return {x0, v0};
}

}  // namespace

std::string version() { return METSCALE_VERSION; }

std::optional<Command> parse_command(std::string_view name) {
  if (name == "verify") return Command::kVerify;
  if (name == "frechet") return Command::kFrechet;
  if (name == "scale-table") return Command::kScaleTable;
  if (name == "calibrate") return Command::kCalibrate;
  if (name == "geodesic") return Command::kGeodesic;
  return std::nullopt;
}

std::string to_string(Command command) {
  switch (command) {
    case Command::kVerify:
      return "verify";
    case Command::kFrechet:
      return "frechet";
    case Command::kScaleTable:
      return "scale-table";
    case Command::kCalibrate:
      return "calibrate";
    case Command::kGeodesic:
      return "geodesic";
  }
  return "unknown";
}

void RunConfig::validate() const {
  ScaleFactor checked(lambda);
  (void)checked;
  if (!std::isfinite(eta) || !(eta > 0.0)) throw ContractViolation("--eta must be positive");
  if (iters && *iters < 1) throw ContractViolation("--iters must be >= 1");
  if (n_points < 1) throw ContractViolation("--points must be >= 1");
  if (!std::isfinite(scale_target) || !(scale_target > 0.0))
    throw ContractViolation("--scale-target must be positive");
  (void)ManifoldDescriptor::parse(manifold);
  const Chart c = charts::by_name(chart);
  if (x0 && static_cast<int>(x0->size()) != c.dimension())
    throw ContractViolation("--x0 must have " + std::to_string(c.dimension()) + " entries");
  if (v0 && static_cast<int>(v0->size()) != c.dimension())
    throw ContractViolation("--v0 must have " + std::to_string(c.dimension()) + " entries");
}

// ---------------------------------------------------------------------------

std::string render_json(const VerificationReport& report) {
  json records = json::array();
  for (const auto& r : report.records)
    records.push_back({{"id", r.id},
                       {"category", r.category},
                       {"subject", r.subject},
                       {"lambda", r.lambda},
                       {"factor", r.factor},
                       {"max_deviation", r.max_deviation},
                       {"tolerance", r.tolerance},
                       {"bound", r.bound},
                       {"pass", r.pass},
                       {"note", r.note}});
  json doc = {{"schema_version", report.schema_version},
              {"tool", "metscale"},
              {"version", report.version},
              {"seed", report.seed},
              {"lambda", report.lambda},
              {"total", report.total},
              {"passed", report.passed},
              {"failed", report.failed},
              {"records", records}};
  return dump(doc);
}

std::string render_csv(const VerificationReport& report) {
  std::ostringstream out;
  out << "id,category,subject,lambda,factor,max_deviation,tolerance,bound,pass,note\n";
  for (const auto& r : report.records)
    out << csv_field(r.id) << "," << csv_field(r.category) << "," << csv_field(r.subject) << ","
        << g17(r.lambda) << "," << g17(r.factor) << "," << g17(r.max_deviation) << ","
        << g17(r.tolerance) << "," << r.bound << "," << (r.pass ? "true" : "false") << ","
        << csv_field(r.note) << "\n";
  return out.str();
}

// ---------------------------------------------------------------------------

CommandResult cmd_scale_table(const RunConfig& config) {
  config.validate();
  const ScaleFactor lambda(config.lambda);
  const int n = ManifoldDescriptor::parse(config.manifold).intrinsic_dimension();
  struct Row {
    const char* quantity;
    const char* symbolic;
    double value;
  };
  const std::vector<Row> rows = {
      {"norm", "sqrt(lambda)", lambda.sqrt()},
      {"curve_length", "sqrt(lambda)", lambda.sqrt()},
      {"distance", "sqrt(lambda)", lambda.sqrt()},
      {"volume", "lambda^(n/2)", volume_scale_factor(lambda, n)},
      {"gradient", "1/lambda", 1.0 / lambda.value()},
      {"connection", "1", 1.0},
      {"geodesics", "1", 1.0},
      {"exp_map", "1", 1.0},
      {"log_map", "1", 1.0},
      {"parallel_transport", "1", 1.0},
  };

  CommandResult result;
  if (config.format == OutputFormat::kCsv) {
    std::ostringstream out;
    out << "quantity,symbolic,value,lambda,n\n";
    for (const Row& r : rows)
      out << r.quantity << "," << r.symbolic << "," << g17(r.value) << "," << g17(config.lambda)
          << "," << n << "\n";
    result.output = out.str();
  } else {
    json table = json::array();
    for (const Row& r : rows)
      table.push_back({{"quantity", r.quantity}, {"symbolic", r.symbolic}, {"value", r.value}});
    result.output = dump({{"command", "scale-table"},
                          {"lambda", config.lambda},
                          {"n", n},
                          {"manifold", config.manifold},
                          {"rows", table}});
  }
  result.summary = "scale table for lambda = " + g10(config.lambda) + ", n = " + std::to_string(n);
  return result;
}

CommandResult cmd_frechet(const RunConfig& config) {
  config.validate();
  const auto manifold = make_manifold(config.manifold);
  const int iters = config.iters.value_or(kDefaultOptimizerIters);
  const FrechetProblem problem = make_frechet_problem(*manifold, config.n_points, config.seed);
  const Objective objective = frechet_objective(manifold, problem.points);
  const ScaledManifold scaled(manifold, ScaleFactor(config.lambda));
  const OptimizerTrace trace = riemannian_gd(scaled, objective, problem.x0,
                                             {config.eta, iters, OptimizerConfig{}.grad_tol});

  CommandResult result;
  std::optional<double> deviation;
  std::string equivalence_error;
  if (config.check_equivalence) {
    try {
      deviation = equivalence_check(manifold, objective, problem.x0, config.eta,
                                    ScaleFactor(config.lambda), iters)
                      .max_deviation;
    } catch (const EquivalenceFailure& e) {
      deviation = e.partial_deviation();
      equivalence_error = e.what();
    }
  }

  std::ostringstream summary;
  summary << "frechet " << config.manifold << " points=" << config.n_points
          << " seed=" << config.seed << " lambda=" << g10(config.lambda)
          << " eta=" << g10(config.eta) << ": " << to_string(trace.stop_reason) << " after "
          << (trace.size() ? trace.size() - 1 : 0) << " updates";
  if (!trace.values.empty()) summary << ", f = " << g17(trace.values.back());
  if (deviation) summary << "\nmax iterate deviation vs base run with eta/lambda: " << g17(*deviation);
  if (!trace.error.empty()) summary << "\nerror: " << trace.error;
  if (!equivalence_error.empty()) summary << "\nequivalence run failed: " << equivalence_error;
  result.summary = summary.str();

  if (config.format == OutputFormat::kCsv) {
    std::ostringstream out;
    write_csv(out, trace);
    result.output = out.str();
  } else {
    json doc = {{"command", "frechet"},
                {"manifold", config.manifold},
                {"lambda", config.lambda},
                {"eta", config.eta},
                {"iters", iters},
                {"seed", config.seed},
                {"n_points", config.n_points},
                {"stop_reason", to_string(trace.stop_reason)},
                {"updates", trace.size() ? trace.size() - 1 : 0}};
    if (!trace.values.empty()) {
      doc["final_value"] = trace.values.back();
      doc["final_grad_norm"] = trace.grad_norms.back();
      doc["final_point"] = coordinates_json(trace.final_point().coordinates());
    }
    if (deviation) doc["equivalence_deviation"] = *deviation;
    if (!trace.error.empty()) doc["error"] = trace.error;
    doc["trace"] = trace_json(trace);
    result.output = dump(doc);
  }
  result.exit_code =
      (trace.stop_reason == StopReason::kError || !equivalence_error.empty()) ? 1 : 0;
  return result;
}

CommandResult cmd_calibrate(const RunConfig& config) {
  config.validate();
  if (config.n_points < 2) throw ContractViolation("calibrate needs --points >= 2");
  const auto manifold = make_manifold(config.manifold);
  const int iters = config.iters.value_or(kDefaultOptimizerIters);
  const FrechetProblem problem = make_frechet_problem(*manifold, config.n_points, config.seed);
  const Eigen::MatrixXd targets =
      config.scale_target * pairwise_distances(*manifold, problem.points);
  const JointResult joint =
      joint_descent(manifold, problem.points, targets, frechet_objective(manifold, problem.points),
                    problem.x0, {config.eta, iters, OptimizerConfig{}.grad_tol});

  CommandResult result;
  const double lambda_star = joint.calibration.lambda_star.value();
  std::ostringstream summary;
  summary << "calibrate " << config.manifold << " points=" << config.n_points
          << " seed=" << config.seed << " c=" << g10(config.scale_target)
          << ": lambda* = " << g17(lambda_star) << ", residual = " << g17(joint.calibration.fit_residual)
          << ", path deviation vs eta/lambda* base run = " << g17(joint.equivalence_deviation);
  result.summary = summary.str();

  if (config.format == OutputFormat::kCsv) {
    std::ostringstream out;
    out << "lambda_star,fit_residual,equivalence_deviation,scale_target,seed,n_points\n"
        << g17(lambda_star) << "," << g17(joint.calibration.fit_residual) << ","
        << g17(joint.equivalence_deviation) << "," << g17(config.scale_target) << ","
        << config.seed << "," << config.n_points << "\n";
    result.output = out.str();
  } else {
    result.output = dump({{"command", "calibrate"},
                          {"manifold", config.manifold},
                          {"seed", config.seed},
                          {"n_points", config.n_points},
                          {"scale_target", config.scale_target},
                          {"lambda_star", lambda_star},
                          {"fit_residual", joint.calibration.fit_residual},
                          {"eta", config.eta},
                          {"stop_reason", to_string(joint.trace.stop_reason)},
                          {"updates", joint.trace.size() ? joint.trace.size() - 1 : 0},
                          {"equivalence_deviation", joint.equivalence_deviation}});
  }
  result.exit_code = joint.trace.stop_reason == StopReason::kError ? 1 : 0;
  return result;
}

CommandResult cmd_geodesic(const RunConfig& config) {
  config.validate();
  const Chart chart = charts::by_name(config.chart);
  const int steps = config.iters.value_or(kDefaultStepsPerUnitTime);
  GeodesicStart start = default_start(chart);
  if (config.x0) start.x0 = to_vector(*config.x0);
  if (config.v0) start.v0 = to_vector(*config.v0);

  CommandResult result;
  GeodesicPath base;
  std::optional<GeodesicPath> scaled;
  std::string failure;
  try {
    base = geodesic_integrate(chart, start.x0, start.v0, 1.0, steps);
    if (config.lambda != 1.0)
      scaled = geodesic_integrate(scale_chart_constant(chart, ScaleFactor(config.lambda)), start.x0,
                                  start.v0, 1.0, steps);
  } catch (const PartialPathError& e) {
    failure = e.what();
    if (base.size() == 0)
      base = e.partial_path();
    else
      scaled = e.partial_path();
  }
  double deviation = 0.0;
  if (scaled) {
    const std::size_t n = std::min(base.size(), scaled->size());
    for (std::size_t i = 0; i < n; ++i) {
      deviation = std::max(deviation, (base.positions[i] - scaled->positions[i]).cwiseAbs().maxCoeff());
      deviation = std::max(deviation, (base.velocities[i] - scaled->velocities[i]).cwiseAbs().maxCoeff());
    }
  }

  std::ostringstream summary;
  summary << "geodesic " << chart.name() << " lambda=" << g10(config.lambda) << " steps=" << steps
          << ": " << base.size() << " nodes";
  if (scaled) summary << ", max deviation base vs scaled = " << g17(deviation);
  if (!failure.empty()) summary << "\nerror: " << failure;
  result.summary = summary.str();

  if (config.format == OutputFormat::kCsv) {
    std::ostringstream out;
    write_csv(out, base);
    if (scaled) {
      out << "\n";
      write_csv(out, *scaled);
    }
    result.output = out.str();
  } else {
    json doc = {{"command", "geodesic"},
                {"chart", chart.name()},
                {"lambda", config.lambda},
                {"steps", steps},
                {"x0", vector_json(start.x0)},
                {"v0", vector_json(start.v0)},
                {"max_deviation", deviation},
                {"base", path_json(base)}};
    if (scaled) doc["scaled"] = path_json(*scaled);
    if (!failure.empty()) doc["error"] = failure;
    result.output = dump(doc);
  }
  result.exit_code = failure.empty() ? 0 : 1;
  return result;
}

CommandResult run_command(const RunConfig& config) {
  switch (config.command) {
    case Command::kVerify: {
      const VerificationReport report = cmd_verify(config);
      CommandResult result;
      result.output =
          config.format == OutputFormat::kCsv ? render_csv(report) : render_json(report);
      std::ostringstream summary;
      summary << "verify seed=" << report.seed << ": " << report.passed << "/" << report.total
              << " properties passed";
      for (const auto& r : report.records)
        if (!r.pass) summary << "\n  FAILED " << r.id << " deviation " << g17(r.max_deviation)
                             << " tolerance " << g17(r.tolerance) << " " << r.note;
      result.summary = summary.str();
      result.exit_code = report.all_passed() ? 0 : 1;
      return result;
    }
    case Command::kFrechet:
      return cmd_frechet(config);
    case Command::kScaleTable:
      return cmd_scale_table(config);
    case Command::kCalibrate:
      return cmd_calibrate(config);
    case Command::kGeodesic:
      return cmd_geodesic(config);
  }
  throw ContractViolation("unknown command");
}

// ---------------------------------------------------------------------------

int main_entry(int argc, char** argv) {
  CLI::App app{"Constant metric scaling: verification suite and demos", "metscale"};
  app.set_version_flag("--version", version());

  RunConfig config;
  std::string command = "verify";
  std::string format = "json";
  int iters = 0;
  std::vector<double> x0, v0;

  app.add_option("--command", command, "verify | frechet | scale-table | calibrate | geodesic")
      ->required();
  app.add_option("--manifold", config.manifold, "euclidean:<n> | sphere:<n> | spd:<side>")
      ->capture_default_str();
  app.add_option("--chart", config.chart, "euclidean:<n> | polar | sphere-chart")
      ->capture_default_str();
  app.add_option("--lambda", config.lambda, "constant metric scale")->capture_default_str();
  app.add_option("--eta", config.eta, "gradient-descent step size")->capture_default_str();
  auto* iters_opt = app.add_option("--iters", iters, "optimizer updates or RK4 steps");
  app.add_option("--seed", config.seed, "root random seed")->capture_default_str();
  app.add_option("--points", config.n_points, "number of sampled points")->capture_default_str();
  app.add_option("--scale-target", config.scale_target,
                 "calibrate: targets are this multiple of base distances")
      ->capture_default_str();
  app.add_flag("--check-equivalence", config.check_equivalence,
               "frechet: also run the base metric with eta/lambda");
  app.add_option("--format", format, "json | csv")->capture_default_str();
  app.add_option("--out", config.out, "output path (default: stdout or $METSCALE_OUTPUT_DIR)");
  auto* x0_opt = app.add_option("--x0", x0, "geodesic: initial coordinates")->delimiter(',');
  auto* v0_opt = app.add_option("--v0", v0, "geodesic: initial velocity")->delimiter(',');

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  const auto parsed = parse_command(command);
  if (!parsed) {
    std::cerr << "metscale: unknown command '" << command << "'\n";
    return 2;
  }
  config.command = *parsed;
  if (format == "json")
    config.format = OutputFormat::kJson;
  else if (format == "csv")
    config.format = OutputFormat::kCsv;
  else {
    std::cerr << "metscale: --format must be json or csv\n";
    return 2;
  }
  if (iters_opt->count()) config.iters = iters;
  if (x0_opt->count()) config.x0 = x0;
  if (v0_opt->count()) config.v0 = v0;

  try {
    config.validate();
  } catch (const std::exception& e) {
    std::cerr << "metscale: " << e.what() << "\n";
    return 2;
  }

  CommandResult result;
  try {
    result = run_command(config);
  } catch (const std::exception& e) {
    std::cerr << "metscale " << to_string(config.command) << ": " << e.what() << "\n";
    return 1;
  }

  std::string path = config.out;
  if (path.empty()) {
    if (const char* dir = std::getenv(kOutputDirEnv); dir && *dir)
      path = (std::filesystem::path(dir) /
              (to_string(config.command) + (config.format == OutputFormat::kCsv ? ".csv" : ".json")))
                 .string();
  }
  if (path.empty()) {
    std::cout << result.output << std::flush;
  } else {
    std::ofstream file(path, std::ios::binary);
    if (!file) {
      std::cerr << "metscale: cannot open '" << path << "' for writing\n";
      return 1;
    }
    file << result.output;
  }
  std::cerr << result.summary << "\n";
  return result.exit_code;
}

}  // namespace metscale::cli

#pragma once

// Verification suite, demo commands and report serialization behind the
// `metscale` executable.

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace metscale::cli {

enum class Command { kVerify, kFrechet, kScaleTable, kCalibrate, kGeodesic };
enum class OutputFormat { kJson, kCsv };

std::optional<Command> parse_command(std::string_view name);
std::string to_string(Command command);

struct RunConfig {
  Command command = Command::kVerify;
  std::string manifold = "sphere:2";
  std::string chart = "sphere-chart";
  double lambda = 1.0;
  double eta = 0.1;
  /// Per-command default when unset: 200 optimizer updates, 1000 RK4 steps.
  std::optional<int> iters;
  std::uint64_t seed = 20240601;
  int n_points = 5;
  double scale_target = 1.0;
  bool check_equivalence = false;
  OutputFormat format = OutputFormat::kJson;
  /// Empty: standard output (or the directory in METSCALE_OUTPUT_DIR).
  std::string out;
  /// Geodesic initial state; chart-specific defaults when unset.
  std::optional<std::vector<double>> x0;
  std::optional<std::vector<double>> v0;

  /// Rejects non-positive lambda/eta, bad counts and unknown manifold or chart
  /// names. Throws ContractViolation.
  void validate() const;
};

struct PropertyRecord {
  std::string id;
  /// Which scaling law the record checks, e.g. "variant/norm".
  std::string category;
  std::string subject;
  double lambda = 1.0;
  /// Scaling factor of the quantity at `lambda` (1 for invariants).
  double factor = 1.0;
  double max_deviation = 0.0;
  double tolerance = 0.0;
  /// "max": pass iff max_deviation <= tolerance. "min": pass iff
  /// max_deviation >= tolerance (negative checks).
  std::string bound = "max";
  bool pass = false;
  std::string note;
};

struct VerificationReport {
  int schema_version = 1;
  std::string version;
  std::uint64_t seed = 0;
  double lambda = 1.0;
  std::vector<PropertyRecord> records;
  int total = 0;
  int passed = 0;
  int failed = 0;

  bool all_passed() const { return failed == 0; }
};

/// Stream seed for one property: independent of every other property id.
std::uint64_t derive_seed(std::uint64_t root, std::string_view property_id);

/// Ids of every property the verify command runs, in report order.
const std::vector<std::string>& property_ids();

/// Evaluates a single property with its derived seed; never throws for
/// property failures (they become pass = false records).
PropertyRecord run_property(const std::string& id, const RunConfig& config);

VerificationReport cmd_verify(const RunConfig& config);

std::string render_json(const VerificationReport& report);
std::string render_csv(const VerificationReport& report);

struct CommandResult {
  /// Primary payload (JSON or CSV).
  std::string output;
  /// Human-readable summary for stderr.
  std::string summary;
  int exit_code = 0;
};

CommandResult cmd_scale_table(const RunConfig& config);
CommandResult cmd_frechet(const RunConfig& config);
CommandResult cmd_calibrate(const RunConfig& config);
CommandResult cmd_geodesic(const RunConfig& config);

/// Dispatch on config.command, including verify.
CommandResult run_command(const RunConfig& config);

/// Full entry point: parses flags, runs, writes output. Returns the process
/// exit status (0 ok, 1 check or run failure, 2 usage error).
int main_entry(int argc, char** argv);

std::string version();

}  // namespace metscale::cli

#ifndef PITCHBENCH_BENCH_HPP
#define PITCHBENCH_BENCH_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "pitchbench/extractors.hpp"
#include "pitchbench/indices.hpp"
#include "pitchbench/response.hpp"

namespace pitchbench {

struct GridSpec {
  double f_low_hz = 80.0;
  double f_high_hz = 400.0;
  int steps_per_octave = 48;
};

struct BenchConfig {
  std::uint64_t seed = 1;
  double fm_depth_cents = 100.0;
  GridSpec grid;
  double gaussian_sigma_s = 0.035;
  std::string vowel = "a";  // "a" | "flat"
  double validation_tau_s = 0.02;
  double f0_range_low_hz = 70.0;
  double f0_range_high_hz = 450.0;
  std::string out_dir = "results";
  int jobs = 0;  // 0 = hardware concurrency
  double eval_band_hz = 100.0;
  double duration_s = 20.0;
  double sweep_failure_quota = 0.25;
  std::string adapters_file;  // optional external-adapter registry
};

/// Reads a JSON config; keys present in the file override the passed-in
/// values, everything else is kept (so flag values survive unless the file
/// pins them).
BenchConfig load_config(const std::string& path,
                        const BenchConfig& defaults = {});
std::string config_to_json(const BenchConfig& config);

/// Everything that is shared across targets for one configuration: the
/// CAPRICEP set, the modulation trajectory, and the analysis of the
/// reference trajectory (which does not depend on the carrier).
struct BenchContext {
  BenchConfig config;
  CapricepSet set;
  ModulationTrajectory traj;
  ResponseSet ref_responses;
  AnalysisWindow window;
  std::vector<double> grid;
  std::vector<ExtractorAdapter> external_adapters;
};

BenchContext make_context(const BenchConfig& config);

inline const char* const kBuiltinExtractors[] = {
    "identity", "validation", "cepstrum-quantized", "cepstrum-interpolated",
    "acf"};

bool is_builtin_extractor(const std::string& id);

/// Runs one of the built-in extractors on a synthesized signal.
FoTrajectory run_builtin(const std::string& id, const TestSignal& sig,
                         const BenchConfig& config);

struct MeasureRecord {
  std::string adapter_id;
  int grid_index = -1;
  double f_tgt_hz = 0.0;
  double f_tgt_cents = 0.0;
  std::string status = "ok";  // "ok" | "failed"
  std::string error_category;
  std::string error_message;
  double bw_hz = 0.0;
  double f_hl_hz = 0.0;
  bool crossed = false;
  double snr_fm_db = 0.0;
  double mean_gain_db = 0.0;
  double sd_fd = 0.0;
  double missing_fraction = 0.0;
  double elapsed_s = 0.0;
  std::vector<double> freq_hz;  // response curves on the long grid
  std::vector<double> lti_db;
  std::vector<double> tv_db;
  std::vector<double> nlti_db;
  std::vector<double> td_db;
};

struct SweepSummary {
  std::string adapter_id;
  std::size_t targets_total = 0;
  std::size_t targets_ok = 0;
  std::size_t targets_failed = 0;
  std::size_t targets_reused = 0;  // loaded from a previous run
  double sd_td = 0.0;
  double bw_hz_median = 0.0;
  double snr_fm_db_median = 0.0;
  double sd_fd_median = 0.0;
};

/// Synthesizes one target and writes the WAV plus sidecar into
/// <out>/signals/. Returns the WAV path.
std::string cmd_generate(const BenchContext& ctx, double f_tgt_hz,
                         bool emit_reference = false);

/// Full measurement of one (adapter, target) pair; persists the result as
/// <out>/<adapter>/<cents>.json (atomically) and returns it. Measurement
/// failures are captured in the record, infrastructure failures throw.
MeasureRecord cmd_measure(const BenchContext& ctx,
                          const std::string& adapter_id, double f_tgt_hz,
                          int grid_index = -1);

/// Measures every grid target (in parallel up to the job limit), skipping
/// targets whose result files already exist, then writes sweep.csv and the
/// performance-map record. Throws when more than the failure quota of
/// targets fail.
SweepSummary cmd_sweep(const BenchContext& ctx, const std::string& adapter_id);

/// Scans per-target results under results_dir and emits plot-ready CSVs:
/// response curves per target and the two performance maps.
void cmd_report(const std::string& results_dir);

/// Helpers shared with the CLI and tests.
std::string target_file_stem(double f_tgt_cents);
std::optional<MeasureRecord> load_measure_record(const std::string& path);
double db10(double power);

}  // namespace pitchbench

#endif  // PITCHBENCH_BENCH_HPP

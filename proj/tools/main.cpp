#include <cstdio>
#include <exception>
#include <string>
#include <vector>

#include "pitchbench/bench.hpp"
#include "pitchbench/cents.hpp"
#include "pitchbench/errors.hpp"

#include <CLI11.hpp>
#include <json.hpp>

namespace {

using pitchbench::BenchConfig;

int exit_code_for(pitchbench::ErrorCategory c) {
  using EC = pitchbench::ErrorCategory;
  switch (c) {
    case EC::parameter: return 2;
    case EC::generation_failure: return 3;
    case EC::measurement_failed: return 4;
    case EC::external_failure: return 5;
    case EC::format: return 6;
    case EC::timeout: return 7;
    case EC::io: return 8;
    case EC::config: return 9;
    case EC::index_undefined: return 10;
    case EC::nothing_to_report: return 11;
  }
  return 1;
}

int exit_code_for_name(const std::string& category) {
  using EC = pitchbench::ErrorCategory;
  for (EC c : {EC::parameter, EC::generation_failure, EC::measurement_failed,
               EC::external_failure, EC::format, EC::timeout, EC::io,
               EC::config, EC::index_undefined, EC::nothing_to_report})
    if (category == pitchbench::category_name(c)) return exit_code_for(c);
  return 1;
}

void parse_grid_flag(const std::string& text, BenchConfig& config) {
  const auto c1 = text.find(':');
  const auto c2 = text.find(':', c1 + 1);
  if (c1 == std::string::npos || c2 == std::string::npos)
    throw pitchbench::ParameterError(
        "--grid expects LOW:HIGH:STEPS_PER_OCTAVE, e.g. 80:400:48");
  config.grid.f_low_hz = std::stod(text.substr(0, c1));
  config.grid.f_high_hz = std::stod(text.substr(c1 + 1, c2 - c1 - 1));
  config.grid.steps_per_octave = std::stoi(text.substr(c2 + 1));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "pitchbench - objective measurement of pitch extractors with "
      "frequency-modulated multi-component test signals"};
  app.require_subcommand(1);

  BenchConfig config;
  std::string config_file, grid_flag, adapter_id;
  double target_hz = 0.0;
  int grid_index = -1;
  bool emit_reference = false;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", config_file,
                    "JSON config file; its keys override flags");
    cmd->add_option("--seed", config.seed, "signal generation seed");
    cmd->add_option("--fm-depth", config.fm_depth_cents,
                    "modulation depth in cents");
    cmd->add_option("--grid", grid_flag,
                    "carrier grid LOW:HIGH:STEPS_PER_OCTAVE");
    cmd->add_option("--out", config.out_dir, "output directory");
    cmd->add_option("--jobs", config.jobs,
                    "parallel workers (0 = all cores)");
    cmd->add_option("--adapters", config.adapters_file,
                    "external adapter registry (JSON)");
    cmd->add_option("--vowel", config.vowel, "spectral shape: a | flat");
    cmd->add_option("--sigma", config.gaussian_sigma_s,
                    "modulation smoother sigma in seconds");
    cmd->add_option("--tau", config.validation_tau_s,
                    "validation smoother time constant in seconds");
    cmd->add_option("--duration", config.duration_s,
                    "test signal duration in seconds");
    cmd->add_option("--eval-band", config.eval_band_hz,
                    "crossing-search band cap in Hz");
  };

  CLI::App* cmd_gen = app.add_subcommand(
      "generate", "synthesize one test signal and export WAV + sidecar");
  add_common(cmd_gen);
  cmd_gen->add_option("--target", target_hz, "carrier frequency in Hz");
  cmd_gen->add_option("--index", grid_index, "grid index instead of --target");
  cmd_gen->add_flag("--emit-reference", emit_reference,
                    "also write the decimated reference trajectory CSV");

  CLI::App* cmd_meas = app.add_subcommand(
      "measure", "measure one adapter at one carrier target");
  add_common(cmd_meas);
  cmd_meas->add_option("--adapter", adapter_id, "extractor id")->required();
  cmd_meas->add_option("--target", target_hz, "carrier frequency in Hz");
  cmd_meas->add_option("--index", grid_index, "grid index instead of --target");

  CLI::App* cmd_sweep = app.add_subcommand(
      "sweep", "measure an adapter over the whole carrier grid");
  add_common(cmd_sweep);
  cmd_sweep->add_option("--adapter", adapter_id, "extractor id")->required();

  CLI::App* cmd_report = app.add_subcommand(
      "report", "emit plot-ready curve and performance-map CSVs");
  cmd_report->add_option("--out", config.out_dir, "results directory");

  CLI11_PARSE(app, argc, argv);

  try {
    if (!grid_flag.empty()) parse_grid_flag(grid_flag, config);
    if (!config_file.empty())
      config = pitchbench::load_config(config_file, config);

    if (cmd_report->parsed()) {
      pitchbench::cmd_report(config.out_dir);
      std::printf("report written under %s/report\n", config.out_dir.c_str());
      return 0;
    }

    pitchbench::BenchContext ctx = pitchbench::make_context(config);
    auto resolve_target = [&]() -> double {
      if (grid_index >= 0) {
        if (static_cast<std::size_t>(grid_index) >= ctx.grid.size())
          throw pitchbench::ParameterError("grid index out of range");
        return ctx.grid[grid_index];
      }
      if (target_hz > 0.0) return target_hz;
      throw pitchbench::ParameterError("need --target or --index");
    };

    if (cmd_gen->parsed()) {
      const std::string path =
          pitchbench::cmd_generate(ctx, resolve_target(), emit_reference);
      std::printf("wrote %s\n", path.c_str());
    } else if (cmd_meas->parsed()) {
      const double f = resolve_target();
      pitchbench::MeasureRecord rec =
          pitchbench::cmd_measure(ctx, adapter_id, f, grid_index);
      if (rec.status == "ok") {
        std::printf(
            "%s @ %.3f Hz: Bw=%.3f Hz fhL=%.3f Hz SNR=%.2f dB "
            "mean_gain=%.3f dB SDfd=%.4f dB/Hz missing=%.3f\n",
            rec.adapter_id.c_str(), rec.f_tgt_hz, rec.bw_hz, rec.f_hl_hz,
            rec.snr_fm_db, rec.mean_gain_db, rec.sd_fd, rec.missing_fraction);
      } else {
        std::fprintf(stderr, "error {\"category\":\"%s\",\"message\":%s}\n",
                     rec.error_category.c_str(),
                     nlohmann::json(rec.error_message).dump().c_str());
        return exit_code_for_name(rec.error_category);
      }
    } else if (cmd_sweep->parsed()) {
      pitchbench::SweepSummary s = pitchbench::cmd_sweep(ctx, adapter_id);
      std::printf(
          "%s: %zu/%zu targets ok (%zu reused), Bw median %.3f Hz, "
          "SNR median %.2f dB, SDfd median %.4f dB/Hz, SDtd %.6f "
          "dB/semitone\n",
          s.adapter_id.c_str(), s.targets_ok, s.targets_total,
          s.targets_reused, s.bw_hz_median, s.snr_fm_db_median,
          s.sd_fd_median, s.sd_td);
    }
  } catch (const pitchbench::BenchError& e) {
    std::fprintf(stderr, "error {\"category\":\"%s\",\"message\":%s}\n",
                 pitchbench::category_name(e.category()),
                 nlohmann::json(std::string(e.what())).dump().c_str());
    return exit_code_for(e.category());
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error {\"category\":\"internal\",\"message\":%s}\n",
                 nlohmann::json(std::string(e.what())).dump().c_str());
    return 1;
  }
  return 0;
}

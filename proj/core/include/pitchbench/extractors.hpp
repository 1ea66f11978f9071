#ifndef PITCHBENCH_EXTRACTORS_HPP
#define PITCHBENCH_EXTRACTORS_HPP

#include <string>
#include <utility>
#include <vector>

#include "pitchbench/signal.hpp"
#include "pitchbench/trajectory.hpp"

namespace pitchbench {

/// Upper-bound block: returns the reference trajectory at the audio rate.
FoTrajectory extract_identity(const TestSignal& sig);

/// Known-LTI probe: one-pole smoother with time constant tau applied to the
/// reference cent trajectory, at the audio rate.
FoTrajectory apply_validation_system(const TestSignal& sig, double tau_s);

enum class CepstrumMode { quantized, interpolated };

/// Frame-wise real-cepstrum peak picking (40 ms window, 5 ms hop).
/// Quantized mode returns fs/lag at integer lags, reproducing the
/// quantization distortion floor; interpolated mode refines the lag
/// parabolically. Frames without a usable peak come back unvoiced.
FoTrajectory extract_cepstrum(const TestSignal& sig, CepstrumMode mode,
                              std::pair<double, double> range_hz);

/// Frame-wise normalized autocorrelation with parabolic peak refinement and
/// an octave-cost candidate preference; same framing as the cepstrum.
FoTrajectory extract_acf(const TestSignal& sig,
                         std::pair<double, double> range_hz);

enum class AdapterOutputFormat { csv_time_f0, one_column_with_rate };

struct ExtractorAdapter {
  std::string id;
  std::string kind = "external";  // "builtin" | "external"
  std::string command_template;   // must contain {input} and {output}
  AdapterOutputFormat output_format = AdapterOutputFormat::csv_time_f0;
  double frame_rate_hz = 100.0;   // for one_column_with_rate
  double time_offset_s = 0.0;
  bool reentrant = true;
  double timeout_s = 300.0;
};

/// Exports the WAV, substitutes {input}/{output} in the command template,
/// runs it inside workdir, and parses the declared output format. Failures
/// surface as ExternalError, FormatError (with line number) or TimeoutError.
FoTrajectory run_external(const ExtractorAdapter& adapter,
                          const TestSignal& sig, const std::string& workdir,
                          const WavExportOptions& wav_options = {});

/// Parses an extractor output file in the given format. Exposed separately
/// so adapter output can be validated without running a process.
FoTrajectory parse_extractor_output(const std::string& path,
                                    AdapterOutputFormat format,
                                    double frame_rate_hz);

/// Loads the adapter registry: a JSON array of adapter objects. Schema is
/// documented in the README.
std::vector<ExtractorAdapter> load_adapter_registry(const std::string& path);

}  // namespace pitchbench

#endif  // PITCHBENCH_EXTRACTORS_HPP

#pragma once

// Command-line front end: flat JSON run configuration, command dispatch and
// deterministic CSV / JSON emission.

#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "ioncav/dynamics.hpp"
#include "ioncav/localization.hpp"
#include "ioncav/spectrum.hpp"

namespace ioncav {

/// Invalid or inconsistent configuration; maps to exit code 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class OutputFormat { csv, json };

struct RunConfig {
  SweepSpec sweep;  // holds the model parameters
  DetectionChain chain;
  LocalizationParams localization{.sigma_nm = 70.0};
  std::vector<double> displacements_nm;
  double visibility = 0.60;
  int quadrature_nodes = 16;
  /// Raman line the standing-wave drive is tuned to; empty keeps delta1.
  std::string tune_to_line = "B";
  int workers = 1;
  OutputFormat format = OutputFormat::csv;
  double steady_tolerance = 1e-10;

  ModelParams& params() { return sweep.params; }
  const ModelParams& params() const { return sweep.params; }
};

/// Builds a configuration from a flat JSON object. Unknown keys, wrong value
/// types and invalid values throw ConfigError; missing keys keep defaults.
RunConfig parse_config(const std::string& json_text);
RunConfig load_config(const std::string& path);

/// Every key parse_config accepts.
const std::vector<std::string>& config_keys();

/// Number with 9 significant digits; negative zero prints as 0.
std::string format_number(double v);

void write_lines(const RunConfig& config, std::ostream& out);
void write_spectrum(const RunConfig& config, std::ostream& out, std::ostream* log = nullptr);
void write_standing_wave(const RunConfig& config, std::ostream& out, std::ostream* log = nullptr);
void write_localization(const RunConfig& config, std::ostream& out);
void write_steady_state(const RunConfig& config, std::ostream& out, std::ostream* log = nullptr);

/// gnuplot script plotting a CSV written by write_spectrum or
/// write_standing_wave to data_path.
std::string plot_script(const std::string& command, const std::string& data_path, const RunConfig& config);

/// Entry point of the ioncav tool. args excludes the program name.
/// Returns 0 on success, 2 on configuration errors, 3 on solver failures.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace ioncav

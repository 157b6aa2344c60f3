#include "ioncav/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

namespace ioncav {

using nlohmann::json;

namespace {

double number_of(const json& v, const std::string& key) {
  if (!v.is_number()) throw ConfigError("key '" + key + "' must be a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) throw ConfigError("key '" + key + "' must be finite");
  return d;
}

int integer_of(const json& v, const std::string& key) {
  if (!v.is_number_integer()) throw ConfigError("key '" + key + "' must be an integer");
  return v.get<int>();
}

std::string string_of(const json& v, const std::string& key) {
  if (!v.is_string()) throw ConfigError("key '" + key + "' must be a string");
  return v.get<std::string>();
}

DriveConfig parse_drive_config(const std::string& s) {
  if (s == "pi") return DriveConfig::pi;
  if (s == "sigma") return DriveConfig::sigma;
  throw ConfigError("drive_config must be \"pi\" or \"sigma\", got \"" + s + "\"");
}

SweptParameter parse_swept(const std::string& s) {
  if (s == "drive_detuning") return SweptParameter::drive_detuning;
  if (s == "cavity_detuning") return SweptParameter::cavity_detuning;
  throw ConfigError("swept_parameter must be \"drive_detuning\" or \"cavity_detuning\", got \"" + s + "\"");
}

OutputFormat parse_format(const std::string& s) {
  if (s == "csv") return OutputFormat::csv;
  if (s == "json") return OutputFormat::json;
  throw ConfigError("format must be \"csv\" or \"json\", got \"" + s + "\"");
}

struct Grid {
  std::optional<double> start;
  std::optional<double> stop;
  std::optional<int> points;
};

std::vector<double> default_displacements(const Grid& g, double wavelength_nm) {
  const double start = g.start.value_or(0.0);
  const double stop = g.stop.value_or(wavelength_nm / 2.0);
  const int points = g.points.value_or(21);
  if (points < 2) throw ConfigError("displacement_points must be at least 2");
  if (!(stop > start)) throw ConfigError("displacement_stop_nm must exceed displacement_start_nm");
  std::vector<double> out(points);
  for (int i = 0; i < points; ++i) out[i] = start + (stop - start) * i / (points - 1);
  return out;
}

void validate_config(const RunConfig& c) {
  try {
    c.params().validate();
    c.sweep.validate();
    c.chain.validate();
    c.localization.validate();
  } catch (const DomainError& e) {
    throw ConfigError(e.what());
  }
  if (c.workers < 1) throw ConfigError("workers must be at least 1");
  if (c.quadrature_nodes < 15) throw ConfigError("quadrature_nodes must be at least 15");
  if (!(c.steady_tolerance > 0.0)) throw ConfigError("steady_tolerance must be positive");
  if (!c.tune_to_line.empty()) {
    if (c.tune_to_line.size() != 1) throw ConfigError("tune_to_line must be a single line label or empty");
    try {
      raman_line(c.tune_to_line[0]);
    } catch (const DomainError& e) {
      throw ConfigError(e.what());
    }
  }
}

SteadyStateOptions steady_options(const RunConfig& c) {
  SteadyStateOptions o;
  o.tolerance = c.steady_tolerance;
  return o;
}

std::ostream& csv_row(std::ostream& out, std::initializer_list<std::string> cells) {
  bool first = true;
  for (const auto& cell : cells) {
    if (!first) out << ',';
    out << cell;
    first = false;
  }
  return out << '\n';
}

ModelParams standing_wave_params(const RunConfig& c) {
  if (c.tune_to_line.empty()) return c.params();
  return tuned_to_line(c.params(), c.tune_to_line[0]);
}

}  // namespace

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys = {
      "omega1_mhz", "omega2_mhz", "delta1_mhz", "delta2_mhz", "delta_c_mhz", "g_max_mhz", "g_obs_mhz",
      "kappa_mhz", "gamma1_mhz", "gamma2_mhz", "b_field_mt", "linewidth_drive_mhz", "linewidth_repump_mhz",
      "linewidth_cavity_mhz", "drive_config", "n_max", "sweep_start_mhz", "sweep_stop_mhz", "sweep_points",
      "swept_parameter", "cavity_output_coupling", "fiber_efficiency", "filter_path_efficiency", "detector_qe",
      "background_cps", "sigma_nm", "wavelength_nm", "phase_offset_rad", "ground_state_size_nm",
      "displacements_nm", "displacement_start_nm", "displacement_stop_nm", "displacement_points", "visibility",
      "quadrature_nodes", "tune_to_line", "workers", "format", "steady_tolerance"};
  return keys;
}

RunConfig parse_config(const std::string& json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw ConfigError("config must be a JSON object");

  RunConfig c;
  ModelParams& p = c.params();
  Grid grid;
  bool explicit_displacements = false;
  const auto& known = config_keys();

  for (const auto& [key, v] : doc.items()) {
    if (std::find(known.begin(), known.end(), key) == known.end()) throw ConfigError("unknown config key '" + key + "'");

    if (key == "omega1_mhz") p.omega1_mhz = number_of(v, key);
    else if (key == "omega2_mhz") p.omega2_mhz = number_of(v, key);
    else if (key == "delta1_mhz") p.delta1_mhz = number_of(v, key);
    else if (key == "delta2_mhz") p.delta2_mhz = number_of(v, key);
    else if (key == "delta_c_mhz") p.delta_c_mhz = number_of(v, key);
    else if (key == "g_max_mhz") p.g_max_mhz = number_of(v, key);
    else if (key == "g_obs_mhz") p.g_obs_mhz = number_of(v, key);
    else if (key == "kappa_mhz") p.kappa_mhz = number_of(v, key);
    else if (key == "gamma1_mhz") p.gamma1_mhz = number_of(v, key);
    else if (key == "gamma2_mhz") p.gamma2_mhz = number_of(v, key);
    else if (key == "b_field_mt") p.b_field_mt = number_of(v, key);
    else if (key == "linewidth_drive_mhz") p.linewidth_drive_mhz = number_of(v, key);
    else if (key == "linewidth_repump_mhz") p.linewidth_repump_mhz = number_of(v, key);
    else if (key == "linewidth_cavity_mhz") p.linewidth_cavity_mhz = number_of(v, key);
    else if (key == "drive_config") p.drive_config = parse_drive_config(string_of(v, key));
    else if (key == "n_max") p.n_max = integer_of(v, key);
    else if (key == "sweep_start_mhz") c.sweep.start_mhz = number_of(v, key);
    else if (key == "sweep_stop_mhz") c.sweep.stop_mhz = number_of(v, key);
    else if (key == "sweep_points") c.sweep.points = integer_of(v, key);
    else if (key == "swept_parameter") c.sweep.swept = parse_swept(string_of(v, key));
    else if (key == "cavity_output_coupling") c.chain.cavity_output_coupling = number_of(v, key);
    else if (key == "fiber_efficiency") c.chain.fiber = number_of(v, key);
    else if (key == "filter_path_efficiency") c.chain.filter_path = number_of(v, key);
    else if (key == "detector_qe") c.chain.detector_qe = number_of(v, key);
    else if (key == "background_cps") c.chain.background_cps = number_of(v, key);
    else if (key == "sigma_nm") c.localization.sigma_nm = number_of(v, key);
    else if (key == "wavelength_nm") c.localization.wavelength_nm = number_of(v, key);
    else if (key == "phase_offset_rad") c.localization.phase_offset_rad = number_of(v, key);
    else if (key == "ground_state_size_nm") c.localization.ground_state_size_nm = number_of(v, key);
    else if (key == "displacements_nm") {
      if (!v.is_array() || v.empty()) throw ConfigError("displacements_nm must be a non-empty array of numbers");
      for (const auto& x : v) c.displacements_nm.push_back(number_of(x, key));
      explicit_displacements = true;
    }
    else if (key == "displacement_start_nm") grid.start = number_of(v, key);
    else if (key == "displacement_stop_nm") grid.stop = number_of(v, key);
    else if (key == "displacement_points") grid.points = integer_of(v, key);
    else if (key == "visibility") c.visibility = number_of(v, key);
    else if (key == "quadrature_nodes") c.quadrature_nodes = integer_of(v, key);
    else if (key == "tune_to_line") c.tune_to_line = string_of(v, key);
    else if (key == "workers") c.workers = integer_of(v, key);
    else if (key == "format") c.format = parse_format(string_of(v, key));
    else if (key == "steady_tolerance") c.steady_tolerance = number_of(v, key);
  }

  if (explicit_displacements && (grid.start || grid.stop || grid.points))
    throw ConfigError("give either displacements_nm or the displacement_start/stop/points grid, not both");
  if (!explicit_displacements) {
    if (!(c.localization.wavelength_nm > 0.0)) throw ConfigError("wavelength must be positive");
    c.displacements_nm = default_displacements(grid, c.localization.wavelength_nm);
  }
  validate_config(c);
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file '" + path + "'");
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config(text.str());
}

std::string format_number(double v) {
  if (v == 0.0) v = 0.0;  // drop the sign of negative zero
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

void write_lines(const RunConfig& config, std::ostream& out) {
  const ZeemanField field(config.params().b_field_mt);
  const auto lines = raman_lines(field);
  const auto effective = effective_lines(config.params().drive_config, field);

  if (config.format == OutputFormat::json) {
    json doc;
    doc["b_field_mt"] = config.params().b_field_mt;
    doc["drive_config"] = drive_config_name(config.params().drive_config);
    for (const auto& pl : lines) {
      const RamanLine& l = pl.line;
      doc["lines"].push_back({{"label", std::string(1, l.label)},
                              {"initial", l.initial.name()},
                              {"intermediate", l.intermediate.name()},
                              {"final", l.final.name()},
                              {"shift_factor", to_string(l.shift_factor)},
                              {"strength", to_string(l.strength)},
                              {"stokes_polarization", polarization_name(l.stokes_polarization)},
                              {"position_mhz", pl.position_mhz == 0.0 ? 0.0 : pl.position_mhz}});
    }
    for (const auto& e : effective)
      doc["effective_lines"].push_back({{"label", std::string(1, e.line.label)},
                                        {"cavity_polarization", cavity_polarization_name(e.cavity_polarization)},
                                        {"effective_strength", to_string(e.effective_strength)},
                                        {"position_mhz", e.position_mhz == 0.0 ? 0.0 : e.position_mhz}});
    out << doc.dump(2) << '\n';
    return;
  }

  out << "# b_field_mt=" << format_number(config.params().b_field_mt) << '\n';
  csv_row(out, {"label", "initial", "intermediate", "final", "shift_factor", "strength", "stokes_polarization",
                "position_mhz"});
  for (const auto& pl : lines) {
    const RamanLine& l = pl.line;
    csv_row(out, {std::string(1, l.label), l.initial.name(), l.intermediate.name(), l.final.name(),
                  to_string(l.shift_factor), to_string(l.strength), polarization_name(l.stokes_polarization),
                  format_number(pl.position_mhz)});
  }
  out << "# effective lines, drive_config=" << drive_config_name(config.params().drive_config) << '\n';
  csv_row(out, {"label", "cavity_polarization", "effective_strength", "position_mhz"});
  for (const auto& e : effective)
    csv_row(out, {std::string(1, e.line.label), cavity_polarization_name(e.cavity_polarization),
                  to_string(e.effective_strength), format_number(e.position_mhz)});
}

void write_spectrum(const RunConfig& config, std::ostream& out, std::ostream* log) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto records = sweep_spectrum(config.sweep, config.chain, config.workers, steady_options(config));
  if (log)
    *log << "spectrum: " << records.size() << " points, " << config.workers << " workers, "
         << std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count() << " s\n";

  if (config.format == OutputFormat::json) {
    json doc;
    doc["swept_parameter"] = swept_parameter_name(config.sweep.swept);
    doc["records"] = json::array();
    for (const auto& r : records)
      doc["records"].push_back({{"detuning_mhz", r.detuning_mhz},
                                {"n_h", r.n_h},
                                {"n_v", r.n_v},
                                {"rate_h_cps", r.rate_h_cps},
                                {"rate_v_cps", r.rate_v_cps},
                                {"rate_total_cps", r.rate_total_cps},
                                {"residual", r.residual},
                                {"top_fock_pop", r.top_fock_population}});
    out << doc.dump(2) << '\n';
    return;
  }
  csv_row(out, {"detuning_mhz", "n_h", "n_v", "rate_h_cps", "rate_v_cps", "rate_total_cps", "residual",
                "top_fock_pop"});
  for (const auto& r : records)
    csv_row(out, {format_number(r.detuning_mhz), format_number(r.n_h), format_number(r.n_v),
                  format_number(r.rate_h_cps), format_number(r.rate_v_cps), format_number(r.rate_total_cps),
                  format_number(r.residual), format_number(r.top_fock_population)});
}

void write_standing_wave(const RunConfig& config, std::ostream& out, std::ostream* log) {
  const auto t0 = std::chrono::steady_clock::now();
  StandingWaveOptions options;
  options.quadrature_nodes = config.quadrature_nodes;
  options.workers = config.workers;
  options.steady = steady_options(config);
  const ModelParams params = standing_wave_params(config);
  const auto points = standing_wave_scan(params, config.localization, config.displacements_nm, config.chain, options);
  if (log)
    *log << "standing-wave: " << points.size() << " displacements, delta1 " << params.delta1_mhz << " MHz, "
         << std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count() << " s\n";

  std::vector<double> x;
  std::vector<double> y;
  for (const auto& p : points) {
    x.push_back(p.displacement_nm);
    y.push_back(p.rate_cps);
  }
  std::optional<SinSquaredFit> fit;
  std::string fit_problem;
  try {
    fit = fit_sin_squared(x, y, config.localization.wavelength_nm, config.chain.background_cps);
  } catch (const DomainError& e) {
    fit_problem = e.what();
  }
  const double closed_form = visibility_from_sigma(config.localization);

  if (config.format == OutputFormat::json) {
    json doc;
    doc["points"] = json::array();
    for (const auto& p : points) doc["points"].push_back({{"displacement_nm", p.displacement_nm}, {"rate_cps", p.rate_cps}});
    if (fit)
      doc["fit"] = {{"amplitude_cps", fit->amplitude},
                    {"offset_cps", fit->offset},
                    {"phase_rad", fit->phase_rad},
                    {"visibility", fit->visibility}};
    else
      doc["fit"] = {{"error", fit_problem}};
    doc["closed_form_visibility"] = closed_form;
    doc["delta1_mhz"] = params.delta1_mhz;
    out << doc.dump(2) << '\n';
    return;
  }
  csv_row(out, {"displacement_nm", "rate_cps"});
  for (const auto& p : points) csv_row(out, {format_number(p.displacement_nm), format_number(p.rate_cps)});
  if (fit) {
    out << "# fit_amplitude_cps=" << format_number(fit->amplitude) << '\n';
    out << "# fit_offset_cps=" << format_number(fit->offset) << '\n';
    out << "# fit_phase_rad=" << format_number(fit->phase_rad) << '\n';
    out << "# fit_visibility=" << format_number(fit->visibility) << '\n';
  } else {
    out << "# fit_error=" << fit_problem << '\n';
  }
  out << "# closed_form_visibility=" << format_number(closed_form) << '\n';
  out << "# delta1_mhz=" << format_number(params.delta1_mhz) << '\n';
}

void write_localization(const RunConfig& config, std::ostream& out) {
  const LocalizationParams& loc = config.localization;
  const double g_max = config.params().g_max_mhz;
  double sigma_v = 0.0;
  try {
    sigma_v = sigma_from_visibility(config.visibility, loc.wavelength_nm);
  } catch (const DomainError& e) {
    throw ConfigError(e.what());
  }
  std::vector<double> sigmas;
  for (int s = 0; s <= 150; s += 10) sigmas.push_back(s);

  if (config.format == OutputFormat::json) {
    json doc;
    doc["wavelength_nm"] = loc.wavelength_nm;
    doc["visibility"] = config.visibility;
    doc["sigma_from_visibility_nm"] = sigma_v;
    doc["sigma_nm"] = loc.sigma_nm;
    doc["visibility_from_sigma"] = visibility_from_sigma(loc);
    doc["g_max_mhz"] = g_max;
    doc["g_effective_mhz"] = g_effective(g_max, loc);
    for (double s : sigmas) {
      LocalizationParams l = loc;
      l.sigma_nm = s;
      doc["table"].push_back({{"sigma_nm", s}, {"visibility", visibility_from_sigma(l)}, {"g_effective_mhz", g_effective(g_max, l)}});
    }
    out << doc.dump(2) << '\n';
    return;
  }
  csv_row(out, {"quantity", "value"});
  csv_row(out, {"wavelength_nm", format_number(loc.wavelength_nm)});
  csv_row(out, {"visibility", format_number(config.visibility)});
  csv_row(out, {"sigma_from_visibility_nm", format_number(sigma_v)});
  csv_row(out, {"sigma_nm", format_number(loc.sigma_nm)});
  csv_row(out, {"visibility_from_sigma", format_number(visibility_from_sigma(loc))});
  csv_row(out, {"g_max_mhz", format_number(g_max)});
  csv_row(out, {"g_effective_mhz", format_number(g_effective(g_max, loc))});
  out << "# conversion table\n";
  csv_row(out, {"sigma_nm", "visibility", "g_effective_mhz"});
  for (double s : sigmas) {
    LocalizationParams l = loc;
    l.sigma_nm = s;
    csv_row(out, {format_number(s), format_number(visibility_from_sigma(l)), format_number(g_effective(g_max, l))});
  }
}

void write_steady_state(const RunConfig& config, std::ostream& out, std::ostream* log) {
  const ModelParams& p = config.params();
  const SteadyStateSolution sol = solve_model(p, steady_options(config));
  if (log) *log << "steady-state: dimension " << sol.rho.dim() << ", " << sol.solve_time_s << " s\n";
  const HilbertSpace space = model_space(p);
  const DetectedRates rates = detected_rate(sol.rho, p, config.chain);
  const std::vector<std::pair<std::string, double>> rows = {
      {"delta1_mhz", p.delta1_mhz},
      {"delta_c_mhz", p.delta_c_mhz},
      {"n_h", mean_photon_number(sol.rho, space, kModeH)},
      {"n_v", mean_photon_number(sol.rho, space, kModeV)},
      {"population_s", manifold_population(sol.rho, space, Manifold::S12)},
      {"population_p", manifold_population(sol.rho, space, Manifold::P12)},
      {"population_d", manifold_population(sol.rho, space, Manifold::D32)},
      {"rate_h_cps", rates.h_cps},
      {"rate_v_cps", rates.v_cps},
      {"rate_total_cps", rates.total_cps},
      {"residual", sol.residual_norm},
      {"min_eigenvalue", sol.rho.min_eigenvalue()},
      {"top_fock_pop_h", sol.top_fock_population[kModeH]},
      {"top_fock_pop_v", sol.top_fock_population[kModeV]},
  };
  if (config.format == OutputFormat::json) {
    json doc = json::object();
    for (const auto& [k, v] : rows) doc[k] = v;
    out << doc.dump(2) << '\n';
    return;
  }
  csv_row(out, {"quantity", "value"});
  for (const auto& [k, v] : rows) csv_row(out, {k, format_number(v)});
}

std::string plot_script(const std::string& command, const std::string& data_path, const RunConfig& config) {
  std::ostringstream s;
  s << "set datafile separator ','\n"
    << "set key autotitle columnhead\n";
  if (command == "spectrum") {
    s << "set xlabel 'two-photon detuning (MHz)'\n"
      << "set ylabel 'detected rate (counts/s)'\n"
      << "plot '" << data_path << "' using 1:4 with lines title 'H', \\\n"
      << "     '" << data_path << "' using 1:5 with lines title 'V'\n";
  } else if (command == "standing-wave") {
    s << "set xlabel 'mirror displacement (nm)'\n"
      << "set ylabel 'detected rate (counts/s)'\n"
      << "k = 2*pi/" << format_number(config.localization.wavelength_nm) << "\n"
      << "f(x) = a*sin(k*x + phi)**2 + c\n"
      << "a = 1000; c = " << format_number(config.chain.background_cps) << "; phi = 0\n"
      << "fit f(x) '" << data_path << "' using 1:2 via a, c, phi\n"
      << "plot '" << data_path << "' using 1:2 with points title 'simulated', f(x) title 'sin^2 fit'\n";
  } else {
    throw ConfigError("no plot script for command '" + command + "'");
  }
  return s.str();
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Raman spectra of a cavity-coupled ion"};
  app.require_subcommand(1, 1);

  std::string config_path;
  std::string output_path;
  std::string format;
  std::string plot_path;
  int workers = 0;
  bool verbose = false;

  const std::vector<std::pair<std::string, std::string>> commands = {
      {"lines", "Raman line table and effective lines"},
      {"spectrum", "steady-state emission spectrum versus two-photon detuning"},
      {"standing-wave", "detected rate versus cavity standing-wave displacement"},
      {"localization", "wave-packet size, visibility and effective coupling"},
      {"steady-state", "single steady state at the configured detunings"},
  };
  for (const auto& [name, description] : commands) {
    CLI::App* sub = app.add_subcommand(name, description);
    sub->add_option("--config", config_path, "flat JSON configuration file")->required();
    sub->add_option("--output", output_path, "output file (default stdout)");
    sub->add_option("--format", format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
    sub->add_option("--workers", workers, "worker threads")->check(CLI::PositiveNumber);
    sub->add_flag("--verbose", verbose, "timing on stderr");
    sub->add_option("--plot-script", plot_path, "write a gnuplot script for the output");
  }

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return 2;
  }
  const std::string command = app.get_subcommands().front()->get_name();

  try {
    RunConfig config = load_config(config_path);
    if (!format.empty()) config.format = parse_format(format);
    if (workers > 0) config.workers = workers;
    if (!plot_path.empty()) {
      if (output_path.empty()) throw ConfigError("--plot-script needs --output");
      if (config.format != OutputFormat::csv) throw ConfigError("--plot-script needs csv output");
      if (command != "spectrum" && command != "standing-wave")
        throw ConfigError("--plot-script is available for spectrum and standing-wave only");
    }

    std::ostringstream buffer;
    std::ostream* log = verbose ? &err : nullptr;
    if (command == "lines") write_lines(config, buffer);
    else if (command == "spectrum") write_spectrum(config, buffer, log);
    else if (command == "standing-wave") write_standing_wave(config, buffer, log);
    else if (command == "localization") write_localization(config, buffer);
    else write_steady_state(config, buffer, log);

    if (output_path.empty()) {
      out << buffer.str();
    } else {
      std::ofstream file(output_path, std::ios::binary);
      if (!file) throw ConfigError("cannot write output file '" + output_path + "'");
      file << buffer.str();
    }
    if (!plot_path.empty()) {
      std::ofstream script(plot_path, std::ios::binary);
      if (!script) throw ConfigError("cannot write plot script '" + plot_path + "'");
      script << plot_script(command, output_path, config);
    }
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return 2;
  } catch (const DomainError& e) {
    err << "config error: " << e.what() << '\n';
    return 2;
  } catch (const SolverError& e) {
    err << "solver error: " << e.what() << '\n';
    return 3;
  }
  return 0;
}

}  // namespace ioncav

#pragma once

// Run configuration: JSON file schema, validation and the content hash that
// keys reproducible outputs. Precedence is flags > file > defaults; the CLI
// applies flags on top of load_config().
//
// Schema (every key optional; unknown keys are rejected):
//   crystal          { length_m, poling_period_m, temperature_C, pump_wavelength_m, poling_thermal_expansion }
//   dispersion_model "ktp_default" or a path to a model JSON file
//   quadrature       { base_nodes, max_refinements, rel_tolerance }
//   window           { omega_r_lo, omega_r_hi }
//   spectrum         { omega_r_lo, omega_r_hi, points, normalization: "global_max" | "raw" }
//   optimizer        { f_p_lo, f_p_hi, f_si_lo, f_si_hi, fsi_coarse_points, fp_coarse_points, rel_tolerance,
//                      surface_f_p_points, surface_f_si_points }
//   waist_surface    { ws_min_um, ws_max_um, wi_min_um, wi_max_um, points_s, points_i,
//                      fixed_w_p_um (null = optimize), wp_min_um, wp_max_um, refine }
//   output_dir       string

#include <string>

#include "lgspdc/amplitude.hpp"
#include "lgspdc/dispersion.hpp"
#include "lgspdc/optimizer.hpp"
#include "lgspdc/rates.hpp"
#include "lgspdc/serialize.hpp"

namespace lgspdc {

/// Environment variable naming a default config file.
inline constexpr const char* kConfigEnvVar = "LGSPDC_CONFIG";

struct RunConfig {
  CrystalSpec crystal;
  std::string dispersion_model = "ktp_default";
  QuadratureSettings quadrature;
  FrequencyWindow window;
  SpectrumGrid spectrum;
  Normalization normalization = Normalization::GlobalMax;
  OptimizerSettings optimizer;
  SurfaceGrid surface;
  WaistSurfaceSpec waist_surface;  // mode field unused here
  std::string output_dir = "out";

  /// Throws ConfigError naming the offending key. Temperature bounds come from `model`.
  void validate(const DispersionModel& model) const;
  bool operator==(const RunConfig& o) const;
};

Json config_to_json(const RunConfig& c);
/// Starts from `base` and overrides the keys present in j.
RunConfig config_from_json(const Json& j, const RunConfig& base = {});

/// Reads and parses a config file. Distinct ConfigError messages for a missing
/// file, malformed JSON, unknown keys and wrong types. Does not validate ranges.
RunConfig load_config(const std::string& path);

/// Config JSON without output_dir: the part that determines results.
Json config_identity_json(const RunConfig& c);

/// git-style blob hash of the canonical JSON of the config plus the request
/// (subcommand and its parameters). The output directory is not hashed.
std::string config_hash(const RunConfig& c, const Json& request);

struct OutputRecord {
  std::string file;
  bool converged = true;
};

struct RunManifest {
  std::string command;
  std::string config_hash;
  std::string tool_version;
  std::string model_name;
  std::string model_hash;
  double wall_time_s = 0.0;
  std::vector<OutputRecord> outputs;
  Json to_json() const;
};

const char* tool_version();

}  // namespace lgspdc

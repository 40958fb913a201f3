#include "lgspdc/config.hpp"

#include <set>

#include "lgspdc/errors.hpp"

#ifndef LGSPDC_VERSION
#define LGSPDC_VERSION "0.0.0"
#endif

namespace lgspdc {

const char* tool_version() { return LGSPDC_VERSION; }

namespace {

std::string num(double v) { return format_number(v); }

template <class F>
void section(const std::string& name, F&& check) {
  try {
    check();
  } catch (const ContractViolation& e) {
    throw ConfigError("config section '" + name + "': " + e.what());
  } catch (const DomainError& e) {
    throw ConfigError("config section '" + name + "': " + e.what());
  }
}

void positive(const std::string& key, double v) {
  if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError("key '" + key + "' must be a positive finite number, got " + num(v));
}

void reject_unknown(const Json& j, const std::set<std::string>& known, const std::string& where) {
  if (!j.is_object()) throw ConfigError("'" + where + "' must be a JSON object");
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!known.count(it.key()))
      throw ConfigError("unknown key '" + (where.empty() ? "" : where + ".") + it.key() + "'");
}

template <class T>
void read(const Json& j, const std::string& key, const std::string& where, T& dst) {
  if (!j.contains(key)) return;
  try {
    dst = j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ConfigError("key '" + where + "." + key + "' has the wrong type");
  }
}

void read_um(const Json& j, const std::string& key, const std::string& where, double& dst_m) {
  if (!j.contains(key)) return;
  double um = 0.0;
  read(j, key, where, um);
  dst_m = um / 1e6;
}

}  // namespace

void RunConfig::validate(const DispersionModel& model) const {
  positive("crystal.length_m", crystal.length_m);
  positive("crystal.poling_period_m", crystal.poling_period_m);
  positive("crystal.pump_wavelength_m", crystal.pump_wavelength_m);
  const auto [t_lo, t_hi] = model.temp_range_C();
  if (!(crystal.temperature_C >= t_lo && crystal.temperature_C <= t_hi))
    throw ConfigError("key 'crystal.temperature_C' = " + num(crystal.temperature_C) +
                      " is outside the validity range [" + num(t_lo) + ", " + num(t_hi) +
                      "] C of dispersion model '" + model.name() + "'");
  section("crystal", [&] { crystal.validate(); });
  section("quadrature", [&] { quadrature.validate(); });
  section("window", [&] { window.validate(); });
  section("spectrum", [&] { spectrum.validate(); });
  section("optimizer", [&] {
    optimizer.validate();
    surface.validate();
  });
  section("waist_surface", [&] {
    WaistSurfaceSpec w = waist_surface;
    w.mode = {};
    w.validate();
  });
  if (output_dir.empty()) throw ConfigError("key 'output_dir' must not be empty");
}

bool RunConfig::operator==(const RunConfig& o) const { return config_to_json(*this) == config_to_json(o); }

Json config_to_json(const RunConfig& c) {
  Json j;
  j["crystal"] = crystal_to_json(c.crystal);
  j["dispersion_model"] = c.dispersion_model;
  j["quadrature"] = {{"base_nodes", c.quadrature.base_nodes},
                     {"max_refinements", c.quadrature.max_refinements},
                     {"rel_tolerance", c.quadrature.rel_tolerance}};
  j["window"] = {{"omega_r_lo", c.window.omega_r_lo}, {"omega_r_hi", c.window.omega_r_hi}};
  j["spectrum"] = {{"omega_r_lo", c.spectrum.omega_r_lo},
                   {"omega_r_hi", c.spectrum.omega_r_hi},
                   {"points", c.spectrum.points},
                   {"normalization", c.normalization == Normalization::GlobalMax ? "global_max" : "raw"}};
  const auto& o = c.optimizer;
  j["optimizer"] = {{"f_p_lo", o.f_p.lo},
                    {"f_p_hi", o.f_p.hi},
                    {"f_si_lo", o.f_si.lo},
                    {"f_si_hi", o.f_si.hi},
                    {"fsi_coarse_points", o.fsi_coarse_points},
                    {"fp_coarse_points", o.fp_coarse_points},
                    {"rel_tolerance", o.rel_tolerance},
                    {"surface_f_p_points", c.surface.f_p_points},
                    {"surface_f_si_points", c.surface.f_si_points}};
  const auto& w = c.waist_surface;
  Json ws = {{"ws_min_um", w.ws_min * 1e6},
             {"ws_max_um", w.ws_max * 1e6},
             {"wi_min_um", w.wi_min * 1e6},
             {"wi_max_um", w.wi_max * 1e6},
             {"points_s", w.points_s},
             {"points_i", w.points_i},
             {"fixed_w_p_um", nullptr},
             {"wp_min_um", w.wp_min * 1e6},
             {"wp_max_um", w.wp_max * 1e6},
             {"refine", w.refine}};
  if (w.fixed_w_p) ws["fixed_w_p_um"] = *w.fixed_w_p * 1e6;
  j["waist_surface"] = ws;
  j["output_dir"] = c.output_dir;
  return j;
}

RunConfig config_from_json(const Json& j, const RunConfig& base) {
  reject_unknown(j,
                 {"crystal", "dispersion_model", "quadrature", "window", "spectrum", "optimizer", "waist_surface",
                  "output_dir"},
                 "");
  RunConfig c = base;
  if (j.contains("crystal")) {
    // Start from the base crystal so partial sections override field by field.
    Json merged = crystal_to_json(base.crystal);
    reject_unknown(j["crystal"], {"length_m", "poling_period_m", "temperature_C", "pump_wavelength_m",
                                  "poling_thermal_expansion"},
                   "crystal");
    merged.update(j["crystal"]);
    c.crystal = crystal_from_json(merged);
  }
  read(j, "dispersion_model", "", c.dispersion_model);
  read(j, "output_dir", "", c.output_dir);
  if (j.contains("quadrature")) {
    const Json& q = j["quadrature"];
    reject_unknown(q, {"base_nodes", "max_refinements", "rel_tolerance"}, "quadrature");
    read(q, "base_nodes", "quadrature", c.quadrature.base_nodes);
    read(q, "max_refinements", "quadrature", c.quadrature.max_refinements);
    read(q, "rel_tolerance", "quadrature", c.quadrature.rel_tolerance);
  }
  if (j.contains("window")) {
    const Json& w = j["window"];
    reject_unknown(w, {"omega_r_lo", "omega_r_hi"}, "window");
    read(w, "omega_r_lo", "window", c.window.omega_r_lo);
    read(w, "omega_r_hi", "window", c.window.omega_r_hi);
  }
  if (j.contains("spectrum")) {
    const Json& s = j["spectrum"];
    reject_unknown(s, {"omega_r_lo", "omega_r_hi", "points", "normalization"}, "spectrum");
    read(s, "omega_r_lo", "spectrum", c.spectrum.omega_r_lo);
    read(s, "omega_r_hi", "spectrum", c.spectrum.omega_r_hi);
    read(s, "points", "spectrum", c.spectrum.points);
    if (s.contains("normalization")) {
      std::string n;
      read(s, "normalization", "spectrum", n);
      if (n == "global_max") c.normalization = Normalization::GlobalMax;
      else if (n == "raw") c.normalization = Normalization::Raw;
      else throw ConfigError("key 'spectrum.normalization' must be \"global_max\" or \"raw\", got \"" + n + "\"");
    }
  }
  if (j.contains("optimizer")) {
    const Json& o = j["optimizer"];
    reject_unknown(o,
                   {"f_p_lo", "f_p_hi", "f_si_lo", "f_si_hi", "fsi_coarse_points", "fp_coarse_points",
                    "rel_tolerance", "surface_f_p_points", "surface_f_si_points"},
                   "optimizer");
    read(o, "f_p_lo", "optimizer", c.optimizer.f_p.lo);
    read(o, "f_p_hi", "optimizer", c.optimizer.f_p.hi);
    read(o, "f_si_lo", "optimizer", c.optimizer.f_si.lo);
    read(o, "f_si_hi", "optimizer", c.optimizer.f_si.hi);
    read(o, "fsi_coarse_points", "optimizer", c.optimizer.fsi_coarse_points);
    read(o, "fp_coarse_points", "optimizer", c.optimizer.fp_coarse_points);
    read(o, "rel_tolerance", "optimizer", c.optimizer.rel_tolerance);
    read(o, "surface_f_p_points", "optimizer", c.surface.f_p_points);
    read(o, "surface_f_si_points", "optimizer", c.surface.f_si_points);
  }
  if (j.contains("waist_surface")) {
    const Json& w = j["waist_surface"];
    const std::string k = "waist_surface";
    reject_unknown(w,
                   {"ws_min_um", "ws_max_um", "wi_min_um", "wi_max_um", "points_s", "points_i", "fixed_w_p_um",
                    "wp_min_um", "wp_max_um", "refine"},
                   k);
    auto& s = c.waist_surface;
    read_um(w, "ws_min_um", k, s.ws_min);
    read_um(w, "ws_max_um", k, s.ws_max);
    read_um(w, "wi_min_um", k, s.wi_min);
    read_um(w, "wi_max_um", k, s.wi_max);
    read(w, "points_s", k, s.points_s);
    read(w, "points_i", k, s.points_i);
    read_um(w, "wp_min_um", k, s.wp_min);
    read_um(w, "wp_max_um", k, s.wp_max);
    read(w, "refine", k, s.refine);
    if (w.contains("fixed_w_p_um")) {
      if (w["fixed_w_p_um"].is_null()) {
        s.fixed_w_p.reset();
      } else {
        double um = 0;
        read(w, "fixed_w_p_um", k, um);
        s.fixed_w_p = um / 1e6;
      }
    }
  }
  return c;
}

RunConfig load_config(const std::string& path) {
  const std::string text = read_file(path);
  Json j;
  try {
    j = Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("malformed JSON in config '" + path + "': " + e.what());
  }
  return config_from_json(j);
}

Json config_identity_json(const RunConfig& c) {
  Json j = config_to_json(c);
  j.erase("output_dir");
  return j;
}

std::string config_hash(const RunConfig& c, const Json& request) {
  Json j;
  j["config"] = config_identity_json(c);
  j["request"] = request;
  return git_blob_sha1(j.dump());
}

Json RunManifest::to_json() const {
  Json j;
  j["command"] = command;
  j["config_hash"] = config_hash;
  j["tool_version"] = tool_version;
  j["dispersion_model"] = {{"name", model_name}, {"hash", model_hash}};
  j["wall_time_s"] = wall_time_s;
  Json outs = Json::array();
  for (const auto& o : outputs) outs.push_back({{"file", o.file}, {"converged", o.converged}});
  j["outputs"] = outs;
  return j;
}

}  // namespace lgspdc

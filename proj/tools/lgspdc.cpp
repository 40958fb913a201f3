// lgspdc: command-line front end.
//
// Every subcommand writes <command>_<hash12>.csv, a JSON envelope with the same
// rows plus provenance, and a run manifest, all under the configured output
// directory. hash12 is the leading part of the config hash, so equal hashes
// name (and reproduce) the same files.
//
// Exit status: 0 success, 1 computational failure, 2 usage or config error.

#include <chrono>
#include <charconv>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "lgspdc/config.hpp"
#include "lgspdc/errors.hpp"
#include "lgspdc/optimizer.hpp"
#include "lgspdc/parallel.hpp"
#include "lgspdc/rates.hpp"
#include "lgspdc/serialize.hpp"

using namespace lgspdc;

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Output {
  std::string kind;
  CsvTable table;
  bool converged = true;
};

std::string n2s(double v) { return format_number(v); }
std::string n2s(int v) { return format_number(v); }

Json cell(const std::string& s) {
  double v = 0;
  const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  if (!s.empty() && r.ec == std::errc() && r.ptr == s.data() + s.size()) return v;
  if (s == "true") return true;
  if (s == "false") return false;
  return s;
}

// Re-parse the CSV text so the envelope carries exactly what the CSV says.
Json envelope(const std::string& command, const std::string& kind, const CsvTable& t, const std::string& hash,
              const RunConfig& cfg, const Json& request, const DispersionModel& model) {
  Json j;
  j["format"] = "lgspdc-result";
  j["tool_version"] = tool_version();
  j["command"] = command;
  j["kind"] = kind;
  j["provenance"] = {{"config_hash", hash},
                     {"config", config_identity_json(cfg)},
                     {"request", request},
                     {"dispersion_model", model_to_json(model)}};
  j["columns"] = t.header();
  Json rows = Json::array();
  std::istringstream in(t.str());
  std::string line;
  std::getline(in, line);  // header
  while (std::getline(in, line)) {
    Json row = Json::array();
    std::string field;
    std::istringstream ls(line);
    while (std::getline(ls, field, ',')) row.push_back(cell(field));
    if (!line.empty() && line.back() == ',') row.push_back("");
    rows.push_back(row);
  }
  j["rows"] = rows;
  return j;
}

std::string plot_script(const std::string& csv_name) {
  return "# Generic plot of " + csv_name +
         ": every numeric column against the first one, one figure per kind.\n"
         "import sys\n"
         "import pandas as pd\n"
         "import matplotlib.pyplot as plt\n\n"
         "df = pd.read_csv(sys.argv[1] if len(sys.argv) > 1 else \"" +
         csv_name +
         "\")\n"
         "groups = df.groupby(\"kind\") if \"kind\" in df.columns else [(\"data\", df)]\n"
         "for kind, part in groups:\n"
         "    num = part.select_dtypes(\"number\")\n"
         "    if num.shape[1] < 2:\n"
         "        continue\n"
         "    x = num.columns[0]\n"
         "    ax = num.plot(x=x, y=list(num.columns[1:]), marker=\".\", linestyle=\"none\")\n"
         "    ax.set_title(str(kind))\n"
         "    ax.figure.savefig(\"" +
         csv_name.substr(0, csv_name.size() - 4) +
         "_\" + str(kind) + \".png\", dpi=150)\n";
}

Method parse_method(const std::string& s) {
  if (s == "quadratic") return Method::QuadraticKz;
  try {
    return method_from_name(s);
  } catch (const std::exception&) {
    throw UsageError("unknown --method '" + s + "' (full, degenerate, quadratic, oracle)");
  }
}

std::vector<double> parse_list(const std::string& s, const std::string& flag) {
  std::vector<double> out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, ',')) {
    double v = 0;
    const auto r = std::from_chars(item.data(), item.data() + item.size(), v);
    if (item.empty() || r.ec != std::errc() || r.ptr != item.data() + item.size())
      throw UsageError("flag " + flag + ": cannot parse '" + item + "' as a number");
    out.push_back(v);
  }
  if (out.empty()) throw UsageError("flag " + flag + " needs at least one value");
  return out;
}

double k_degenerate(const DispersionModel& model, const CrystalSpec& c) {
  return wavenumber(model, c.pump_omega() / 2, c.temperature_C);
}

double k_pump(const DispersionModel& model, const CrystalSpec& c) {
  return wavenumber(model, c.pump_omega(), c.temperature_C);
}

double distance_linf(const std::vector<double>& a, const std::vector<double>& b) {
  double d = 0;
  for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
  return d;
}

// sqrt of the trapezoid integral of (a - b)^2 over omega_r.
double distance_l2(const std::vector<double>& x, const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0;
  for (std::size_t i = 0; i + 1 < x.size(); ++i) {
    const double d0 = a[i] - b[i], d1 = a[i + 1] - b[i + 1];
    s += 0.5 * (x[i + 1] - x[i]) * (d0 * d0 + d1 * d1);
  }
  return std::sqrt(s);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"LG-mode SPDC coincidence spectra, pair collection rates and focusing optimization"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_version_flag("--version", std::string(tool_version()));

  std::string config_path;
  int threads = default_thread_count();
  std::optional<double> temp;
  std::optional<std::string> out_dir, model_name;
  bool emit_plot = false;
  app.add_option("--config", config_path, "JSON config file (default: $" + std::string(kConfigEnvVar) + ")");
  app.add_option("--threads", threads, "Worker threads (default: machine parallelism)")->check(CLI::PositiveNumber);
  app.add_option("--temp", temp, "Crystal temperature in C (default 24.5)");
  app.add_option("--out", out_dir, "Output directory (default: out)");
  app.add_option("--model", model_name, "Dispersion model: ktp_default or a model JSON path");
  app.add_flag("--emit-plot-script", emit_plot, "Also write a matplotlib script that plots the CSV");

  // Shared mode / geometry flags.
  int l = 0, n = 0, lmax = 4, nmax = 4, points = 0;
  std::optional<int> ns, ni;
  double fp = 1.0, fsi = 1.0;
  std::optional<double> wp_um, ws_um, wi_um;
  std::string method = "degenerate", temps = "24.5,27.5,30.5";
  std::optional<double> wmin, wmax;
  bool no_refine = false;

  auto mode_flags = [&](CLI::App* s) {
    s->add_option("--l", l, "Azimuthal index l (signal carries l, idler -l)")->check(CLI::NonNegativeNumber);
    s->add_option("--n", n, "Radial index n_si (n_s = n_i)")->check(CLI::NonNegativeNumber);
  };
  auto focal_flags = [&](CLI::App* s) {
    s->add_option("--fp", fp, "Pump focal parameter f_p (default 1)");
    s->add_option("--fsi", fsi, "Degenerate signal/idler focal parameter f_si^d (default 1)");
  };
  auto grid_flags = [&](CLI::App* s) {
    s->add_option("--points", points, "Spectrum grid points (default from config: 2001)");
    s->add_option("--wmin", wmin, "Lowest omega_r (default 0.7)");
    s->add_option("--wmax", wmax, "Highest omega_r (default 1.3)");
  };

  auto* c_spec = app.add_subcommand("spectrum", "Coincidence probability P(omega_r)");
  mode_flags(c_spec);
  focal_flags(c_spec);
  grid_flags(c_spec);
  c_spec->add_option("--ns", ns, "Signal radial index (full / oracle methods)");
  c_spec->add_option("--ni", ni, "Idler radial index (full / oracle methods)");
  c_spec->add_option("--wp", wp_um, "Pump waist in um (full / oracle; default from --fp)");
  c_spec->add_option("--ws", ws_um, "Signal waist in um (full / oracle; default from --fsi)");
  c_spec->add_option("--wi", wi_um, "Idler waist in um (full / oracle; default from --fsi)");
  c_spec->add_option("--method", method, "full | degenerate | quadratic | oracle (default degenerate)");

  auto* c_surf = app.add_subcommand("surface", "R_c over (f_p, f_si^d) with ridge and summit");
  mode_flags(c_surf);
  auto* c_opt = app.add_subcommand("optimize", "Ridge f_si^opt(f_p) and summit (f_p^opt, R_c^max)");
  mode_flags(c_opt);
  auto* c_tab = app.add_subcommand("mode-table", "Summit for every (l, n_si) up to the given bounds");
  c_tab->add_option("--lmax", lmax, "Largest l (default 4)")->check(CLI::NonNegativeNumber);
  c_tab->add_option("--nmax", nmax, "Largest n_si (default 4)")->check(CLI::NonNegativeNumber);
  auto* c_ws = app.add_subcommand("waist-surface", "R_c over (w_s, w_i) with the full closed form");
  mode_flags(c_ws);
  c_ws->add_option("--ns", ns, "Signal radial index (default --n)");
  c_ws->add_option("--ni", ni, "Idler radial index (default --n)");
  c_ws->add_option("--wp", wp_um, "Fixed pump waist in um (default: optimized per grid point)");
  c_ws->add_option("--points", points, "Grid points per axis (default from config: 15)");
  c_ws->add_flag("--no-refine", no_refine, "Skip the joint refinement of the grid argmax");
  auto* c_temp = app.add_subcommand("temp-scan", "f_si^opt and R_c at fixed f_p over temperatures");
  mode_flags(c_temp);
  c_temp->add_option("--fp", fp, "Pump focal parameter f_p (default 1)");
  c_temp->add_option("--temps", temps, "Comma-separated temperatures in C (default 24.5,27.5,30.5)");
  auto* c_cmp = app.add_subcommand("compare", "Full, degenerate and quadratic-kz spectra side by side");
  mode_flags(c_cmp);
  focal_flags(c_cmp);
  grid_flags(c_cmp);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  const auto t0 = std::chrono::steady_clock::now();
  CLI::App* sub = app.get_subcommands().front();
  const std::string command = sub->get_name();

  RunConfig cfg;
  std::optional<DispersionModel> model;
  Json request;
  std::vector<Output> outputs;

  // Stage 1: configuration. Everything here is a usage error.
  try {
    if (config_path.empty())
      if (const char* env = std::getenv(kConfigEnvVar); env && *env) config_path = env;
    if (!config_path.empty()) cfg = load_config(config_path);
    if (temp) cfg.crystal.temperature_C = *temp;
    if (out_dir) cfg.output_dir = *out_dir;
    if (model_name) cfg.dispersion_model = *model_name;
    if (points > 0) {
      cfg.spectrum.points = points;
      cfg.waist_surface.points_s = cfg.waist_surface.points_i = points;
    } else if (const CLI::Option* o = sub->get_option_no_throw("--points"); o && o->count()) {
      throw UsageError("--points must be positive");
    }
    if (wmin) cfg.spectrum.omega_r_lo = *wmin;
    if (wmax) cfg.spectrum.omega_r_hi = *wmax;
    if (wp_um && command == "waist-surface") cfg.waist_surface.fixed_w_p = *wp_um * 1e-6;
    if (no_refine) cfg.waist_surface.refine = false;
    model = load_model(cfg.dispersion_model);
    cfg.validate(*model);

    request["command"] = command;
    if (command != "mode-table") request["l"] = l;
    if (command == "spectrum") {
      request["method"] = method_name(parse_method(method));
      request["n_s"] = ns.value_or(n);
      request["n_i"] = ni.value_or(n);
      request["f_p"] = fp;
      request["f_si"] = fsi;
      if (wp_um) request["w_p_um"] = *wp_um;
      if (ws_um) request["w_s_um"] = *ws_um;
      if (wi_um) request["w_i_um"] = *wi_um;
    } else if (command == "mode-table") {
      request["l_max"] = lmax;
      request["n_max"] = nmax;
    } else if (command == "waist-surface") {
      request["n_s"] = ns.value_or(n);
      request["n_i"] = ni.value_or(n);
    } else {
      request["n_si"] = n;
      if (command == "temp-scan") {
        request["f_p"] = fp;
        request["temperatures_C"] = parse_list(temps, "--temps");
        for (double T : request["temperatures_C"].get<std::vector<double>>()) {
          RunConfig probe = cfg;
          probe.crystal.temperature_C = T;
          probe.validate(*model);
        }
      }
      if (command == "compare") {
        request["f_p"] = fp;
        request["f_si"] = fsi;
      }
    }
    if (command == "spectrum" || command == "compare" || command == "temp-scan") {
      if (!(fp > 0.0) || !(fsi > 0.0)) throw UsageError("--fp and --fsi must be positive");
    }
  } catch (const ConfigError& e) {
    std::cerr << "lgspdc: config error: " << e.what() << '\n';
    return 2;
  } catch (const UsageError& e) {
    std::cerr << "lgspdc: usage error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "lgspdc: usage error: " << e.what() << '\n';
    return 2;
  }

  const std::string hash = config_hash(cfg, request);
  const std::string stem = command + "_" + hash.substr(0, 12);
  const DispersionModel& m = *model;
  const CrystalSpec& crystal = cfg.crystal;

  // Stage 2: computation. Contract violations from flag combinations are still usage errors.
  try {
    if (command == "spectrum") {
      const Method meth = parse_method(method);
      const ModeSpec mode{l, ns.value_or(n), ni.value_or(n)};
      mode.validate();
      std::variant<WaistConfig, FocalConfig> geom = FocalConfig{fp, fsi};
      if (meth == Method::FullClosedForm || meth == Method::NumericOracle) {
        WaistConfig w = waists_from_focal({fp, fsi}, crystal.length_m, k_pump(m, crystal), k_degenerate(m, crystal));
        if (wp_um) w.w_p = *wp_um * 1e-6;
        if (ws_um) w.w_s = *ws_um * 1e-6;
        if (wi_um) w.w_i = *wi_um * 1e-6;
        geom = w;
      } else if (wp_um || ws_um || wi_um) {
        throw UsageError("--wp/--ws/--wi apply to the full and oracle methods only");
      }
      const SpectrumResult r =
          spectrum(m, mode, geom, crystal, meth, cfg.spectrum, cfg.normalization, cfg.quadrature, threads);
      CsvTable t({"omega_r", cfg.normalization == Normalization::GlobalMax ? "P_normalized" : "P_raw", "method"});
      for (std::size_t i = 0; i < r.omega_r.size(); ++i)
        t.add_row({n2s(r.omega_r[i]), n2s(r.probability[i]), method_name(meth)});
      outputs.push_back({"spectrum", std::move(t), r.converged});
    } else if (command == "surface" || command == "optimize") {
      const QTable table(m, crystal, cfg.window);
      const ModeSpec mode{l, n, n};
      CsvTable t({"kind", "f_p", "f_si", "R_c"});
      Summit summit;
      if (command == "surface") {
        const RateSurface s = rate_surface(table, mode, cfg.surface, cfg.optimizer, threads);
        for (std::size_t i = 0; i < s.f_p_grid.size(); ++i)
          for (std::size_t j = 0; j < s.f_si_grid.size(); ++j)
            t.add_row({"grid", n2s(s.f_p_grid[i]), n2s(s.f_si_grid[j]), n2s(s.value(i, j))});
        for (const auto& r : s.ridge) t.add_row({"ridge", n2s(r.f_p), n2s(r.f_si_opt), n2s(r.rate_max)});
        summit = s.summit;
      } else {
        const std::vector<double> fps = log_grid(cfg.optimizer.f_p.lo, cfg.optimizer.f_p.hi, cfg.surface.f_p_points);
        std::vector<RidgePoint> ridge(fps.size());
        parallel_for(static_cast<int>(fps.size()), threads,
                     [&](int i) { ridge[i] = opt_fsi_given_fp(table, mode, fps[i], cfg.optimizer); });
        summit = find_summit(kernel_rate_fn(table, mode), cfg.optimizer);
        for (const auto& r : ridge) {
          t.add_row({"ridge", n2s(r.f_p), n2s(r.f_si_opt), n2s(r.rate_max)});
          if (r.rate_max > summit.rate_max) summit = {r.f_p, r.f_si_opt, r.rate_max};
        }
      }
      t.add_row({"summit", n2s(summit.f_p_opt), n2s(summit.f_si_opt), n2s(summit.rate_max)});
      outputs.push_back({command == "surface" ? "rate_surface" : "ridge", std::move(t), true});
    } else if (command == "mode-table") {
      const QTable table(m, crystal, cfg.window);
      const ModeTable mt = mode_table(table, lmax, nmax, cfg.optimizer, threads);
      CsvTable t({"kind", "l", "n_si", "f_p_opt", "f_si_opt", "R_c_max", "diagonal"});
      for (const auto& e : mt.entries)
        t.add_row({"summit", n2s(e.l), n2s(e.n_si), n2s(e.summit.f_p_opt), n2s(e.summit.f_si_opt),
                   n2s(e.summit.rate_max), e.diagonal() ? "true" : "false"});
      outputs.push_back({"mode_table", std::move(t), true});
    } else if (command == "waist-surface") {
      const FullRateEngine engine(m, crystal, cfg.window);
      WaistSurfaceSpec spec = cfg.waist_surface;
      spec.mode = {l, ns.value_or(n), ni.value_or(n)};
      const WaistSurfaceResult r = waist_surface(engine, spec, threads);
      CsvTable t({"kind", "w_s_um", "w_i_um", "w_p_um", "R_c", "R_c_normalized"});
      const std::size_t np = r.w_i.size();
      for (std::size_t a = 0; a < r.w_s.size(); ++a)
        for (std::size_t b = 0; b < np; ++b) {
          const std::size_t k = a * np + b;
          t.add_row({"grid", n2s(r.w_s[a] * 1e6), n2s(r.w_i[b] * 1e6), n2s(r.w_p[k] * 1e6), n2s(r.rate[k]),
                     n2s(r.normalized[k])});
        }
      t.add_row({"summit", n2s(r.ws_opt * 1e6), n2s(r.wi_opt * 1e6), n2s(r.wp_opt * 1e6), n2s(r.rate_max), "1"});
      outputs.push_back({"waist_surface", std::move(t), r.all_converged});
    } else if (command == "temp-scan") {
      const std::vector<double> Ts = request["temperatures_C"].get<std::vector<double>>();
      const auto rows = temp_scan(m, crystal, {l, n, n}, fp, Ts, cfg.window, cfg.optimizer, threads);
      CsvTable t({"T_C", "f_p", "f_si_opt", "R_c_max", "phi_half"});
      for (const auto& r : rows) {
        CrystalSpec c = crystal;
        c.temperature_C = r.temperature_C;
        t.add_row({n2s(r.temperature_C), n2s(fp), n2s(r.f_si_opt), n2s(r.rate_max),
                   n2s(phi_half(m, r.temperature_C, c))});
      }
      outputs.push_back({"temp_scan", std::move(t), true});
    } else if (command == "compare") {
      const ModeSpec mode{l, n, n};
      const FocalConfig focal{fp, fsi};
      const WaistConfig w = waists_from_focal(focal, crystal.length_m, k_pump(m, crystal), k_degenerate(m, crystal));
      const auto norm = Normalization::GlobalMax;
      const SpectrumResult full =
          spectrum(m, mode, w, crystal, Method::FullClosedForm, cfg.spectrum, norm, cfg.quadrature, threads);
      const SpectrumResult deg =
          spectrum(m, mode, focal, crystal, Method::DegenerateApprox, cfg.spectrum, norm, cfg.quadrature, threads);
      const SpectrumResult quad =
          spectrum(m, mode, focal, crystal, Method::QuadraticKz, cfg.spectrum, norm, cfg.quadrature, threads);
      CsvTable t({"kind", "omega_r", "full", "degenerate", "quadratic_kz"});
      for (std::size_t i = 0; i < full.omega_r.size(); ++i)
        t.add_row({"spectrum", n2s(full.omega_r[i]), n2s(full.probability[i]), n2s(deg.probability[i]),
                   n2s(quad.probability[i])});
      const auto& x = full.omega_r;
      t.add_row({"linf_vs_full", "", "0", n2s(distance_linf(deg.probability, full.probability)),
                 n2s(distance_linf(quad.probability, full.probability))});
      t.add_row({"l2_vs_full", "", "0", n2s(distance_l2(x, deg.probability, full.probability)),
                 n2s(distance_l2(x, quad.probability, full.probability))});
      outputs.push_back({"compare", std::move(t), full.converged && deg.converged && quad.converged});
    }
  } catch (const UsageError& e) {
    std::cerr << "lgspdc: usage error: " << e.what() << '\n';
    return 2;
  } catch (const ContractViolation& e) {
    std::cerr << "lgspdc: usage error: " << e.what() << '\n';
    return 2;
  } catch (const BoundaryHit& e) {
    std::cerr << "lgspdc: optimum on a search bound (" << e.bound() << " = " << e.value() << "): " << e.what()
              << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "lgspdc: computation failed: " << e.what() << '\n';
    return 1;
  }

  // Stage 3: files.
  try {
    const std::filesystem::path dir(cfg.output_dir);
    RunManifest man;
    man.command = command;
    man.config_hash = hash;
    man.tool_version = tool_version();
    man.model_name = m.name();
    man.model_hash = git_blob_sha1(model_to_json(m).dump());
    for (const Output& o : outputs) {
      const std::string csv = stem + ".csv", js = stem + ".json";
      write_file(dir / csv, o.table.str());
      write_file(dir / js, envelope(command, o.kind, o.table, hash, cfg, request, m).dump(2) + "\n");
      man.outputs.push_back({csv, o.converged});
      man.outputs.push_back({js, o.converged});
      if (emit_plot) {
        write_file(dir / (stem + ".plot.py"), plot_script(csv));
        man.outputs.push_back({stem + ".plot.py", true});
      }
      if (!o.converged) std::cerr << "lgspdc: warning: " << csv << " contains unconverged points\n";
    }
    man.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    write_file(dir / (stem + ".manifest.json"), man.to_json().dump(2) + "\n");
    for (const auto& o : man.outputs) std::cout << (dir / o.file).string() << '\n';
  } catch (const std::exception& e) {
    std::cerr << "lgspdc: cannot write outputs: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

#include "lgspdc/serialize.hpp"

#include <openssl/evp.h>

#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <memory>
#include <set>
#include <sstream>

#include "lgspdc/errors.hpp"

namespace lgspdc {

std::string format_number(double v) {
  if (!std::isfinite(v)) return std::isnan(v) ? "nan" : (v > 0 ? "inf" : "-inf");
  if (v == 0.0) return "0";
  std::array<char, 64> buf{};
  const auto r = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), r.ptr);
}

std::string format_number(int v) { return std::to_string(v); }

CsvTable::CsvTable(std::vector<std::string> header) : header_(std::move(header)) {
  if (header_.empty()) throw ContractViolation("CSV header must not be empty");
}

void CsvTable::add_row(std::vector<std::string> row) {
  if (row.size() != header_.size())
    throw ContractViolation("CSV row has " + std::to_string(row.size()) + " fields, header has " +
                            std::to_string(header_.size()));
  rows_.push_back(std::move(row));
}

namespace {

void append_line(std::string& out, const std::vector<std::string>& fields) {
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out += ',';
    const std::string& f = fields[i];
    if (f.find_first_of(",\"\n") == std::string::npos) {
      out += f;
    } else {
      out += '"';
      for (char c : f) {
        if (c == '"') out += '"';
        out += c;
      }
      out += '"';
    }
  }
  out += '\n';
}

}  // namespace

std::string CsvTable::str() const {
  std::string out;
  append_line(out, header_);
  for (const auto& r : rows_) append_line(out, r);
  return out;
}

std::string git_blob_sha1(const std::string& content) {
  const std::string head = "blob " + std::to_string(content.size()) + '\0';
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha1(), nullptr) != 1 ||
      EVP_DigestUpdate(ctx.get(), head.data(), head.size()) != 1 ||
      EVP_DigestUpdate(ctx.get(), content.data(), content.size()) != 1 ||
      EVP_DigestFinal_ex(ctx.get(), md, &len) != 1)
    throw std::runtime_error("SHA-1 digest failed");
  static const char* hex = "0123456789abcdef";
  std::string s;
  for (unsigned i = 0; i < len; ++i) {
    const unsigned char b = md[i];
    s += hex[b >> 4];
    s += hex[b & 15];
  }
  return s;
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw std::runtime_error("cannot write '" + path.string() + "'");
  f.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!f) throw std::runtime_error("write failed for '" + path.string() + "'");
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot open file '" + path.string() + "'");
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

namespace {

void reject_unknown(const Json& j, const std::set<std::string>& known, const std::string& where) {
  if (!j.is_object()) throw ConfigError("'" + where + "' must be a JSON object");
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!known.count(it.key())) throw ConfigError("unknown key '" + where + "." + it.key() + "'");
}

template <class T>
T get_as(const Json& j, const std::string& key, const std::string& where) {
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ConfigError("key '" + where + "." + key + "' has the wrong type");
  }
}

template <class T>
void read_opt(const Json& j, const std::string& key, const std::string& where, T& dst) {
  if (j.contains(key)) dst = get_as<T>(j, key, where);
}

}  // namespace

Json crystal_to_json(const CrystalSpec& c) {
  Json j;
  j["length_m"] = c.length_m;
  j["poling_period_m"] = c.poling_period_m;
  j["temperature_C"] = c.temperature_C;
  j["pump_wavelength_m"] = c.pump_wavelength_m;
  j["poling_thermal_expansion"] = c.poling_thermal_expansion;
  return j;
}

CrystalSpec crystal_from_json(const Json& j, const std::string& where) {
  reject_unknown(j, {"length_m", "poling_period_m", "temperature_C", "pump_wavelength_m", "poling_thermal_expansion"},
                 where);
  CrystalSpec c;
  read_opt(j, "length_m", where, c.length_m);
  read_opt(j, "poling_period_m", where, c.poling_period_m);
  read_opt(j, "temperature_C", where, c.temperature_C);
  read_opt(j, "pump_wavelength_m", where, c.pump_wavelength_m);
  read_opt(j, "poling_thermal_expansion", where, c.poling_thermal_expansion);
  return c;
}

Json model_to_json(const DispersionModel& m) {
  Json j;
  j["name"] = m.name();
  j["sellmeier"] = m.sellmeier();
  j["thermo_optic"] = m.thermo_optic();
  j["lambda_range_um"] = {m.lambda_range_um().first, m.lambda_range_um().second};
  j["temp_range_C"] = {m.temp_range_C().first, m.temp_range_C().second};
  return j;
}

DispersionModel model_from_json(const Json& j, const std::string& where) {
  reject_unknown(j, {"name", "sellmeier", "thermo_optic", "lambda_range_um", "temp_range_C"}, where);
  for (const char* k : {"name", "sellmeier", "thermo_optic", "lambda_range_um", "temp_range_C"})
    if (!j.contains(k)) throw ConfigError("missing key '" + where + "." + k + "'");
  const auto s = get_as<std::vector<double>>(j, "sellmeier", where);
  if (s.size() != 6) throw ConfigError("key '" + where + ".sellmeier' needs 6 coefficients");
  const auto lr = get_as<std::vector<double>>(j, "lambda_range_um", where);
  const auto tr = get_as<std::vector<double>>(j, "temp_range_C", where);
  if (lr.size() != 2 || tr.size() != 2) throw ConfigError("ranges in '" + where + "' need 2 entries");
  try {
    return DispersionModel(get_as<std::string>(j, "name", where), {s[0], s[1], s[2], s[3], s[4], s[5]},
                           get_as<std::vector<double>>(j, "thermo_optic", where), {lr[0], lr[1]}, {tr[0], tr[1]});
  } catch (const ContractViolation& e) {
    throw ConfigError("invalid dispersion model in '" + where + "': " + e.what());
  }
}

DispersionModel load_model(const std::string& name_or_path) {
  if (name_or_path == "ktp_default") return DispersionModel::ktp_default();
  Json j;
  try {
    j = Json::parse(read_file(name_or_path));
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("malformed JSON in '" + name_or_path + "': " + e.what());
  }
  return model_from_json(j, "model");
}

}  // namespace lgspdc

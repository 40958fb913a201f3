#pragma once

// Output conventions shared by the library and the CLI.
//
// CSV: long format, one header row, '.' decimal, LF line endings, numbers in
// shortest round-trip form (locale independent). JSON goes through
// nlohmann::json, whose number formatting is locale independent as well.

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "lgspdc/dispersion.hpp"

namespace lgspdc {

using Json = nlohmann::ordered_json;

/// Shortest decimal string that parses back to exactly v.
std::string format_number(double v);
std::string format_number(int v);

class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header);
  /// Row length must match the header.
  void add_row(std::vector<std::string> row);
  const std::vector<std::string>& header() const { return header_; }
  std::size_t rows() const { return rows_.size(); }
  std::string str() const;

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

/// Hex SHA-1 of "blob <size>\0<content>", i.e. the id git would give the content.
std::string git_blob_sha1(const std::string& content);

/// Writes bytes verbatim (binary mode), creating parent directories.
void write_file(const std::filesystem::path& path, const std::string& content);
std::string read_file(const std::filesystem::path& path);

Json crystal_to_json(const CrystalSpec& c);
/// Missing keys keep their defaults; unknown keys throw ConfigError naming `where`.
CrystalSpec crystal_from_json(const Json& j, const std::string& where = "crystal");

Json model_to_json(const DispersionModel& m);
DispersionModel model_from_json(const Json& j, const std::string& where = "model");
/// "ktp_default" selects the built-in model; anything else is a JSON file path.
DispersionModel load_model(const std::string& name_or_path);

}  // namespace lgspdc

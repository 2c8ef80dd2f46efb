#pragma once

#include <json.hpp>

#include <filesystem>
#include <string>
#include <vector>

namespace asip {

const char* version();

/// Limitation stated in every simulation report.
inline constexpr const char* kPathwiseCaveat =
    "The pathwise rate is an almost-sure statement about a coupling; finite samples can only "
    "show distributional proxies (KS, W1 scaling), which is what this report contains.";

/// Common report envelope: tool name and version, command, resolved config.
nlohmann::json report_header(const std::string& command, const nlohmann::json& config);

/// Rows of preformatted cells under a fixed header.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  void add(std::vector<std::string> row) { rows.push_back(std::move(row)); }
  std::string str() const;
};

/// Shortest decimal that reads back to the same double ("inf", "nan" spelled out).
std::string format_number(double v);

/// Doubles that JSON cannot hold (inf, nan) become strings.
nlohmann::json json_number(double v);

void write_text(const std::filesystem::path& path, const std::string& text);
void write_json(const std::filesystem::path& path, const nlohmann::json& doc);

}  // namespace asip

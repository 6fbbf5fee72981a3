#pragma once

#include <filesystem>
#include <json.hpp>
#include <string>
#include <vector>

#include "codim1/config.hpp"

namespace codim1 {

inline constexpr const char* kToolName = "codim1lab";
inline constexpr const char* kToolVersion = "1.0.0";

// 17 significant digits, round-trip exact, locale independent
std::string format_float(double v);
std::string format_int(long long v);

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};

void write_csv(const std::filesystem::path& path, const CsvTable& table);
void write_json(const std::filesystem::path& path, const nlohmann::ordered_json& j);

// config echo embedded in JSON reports; excludes the output directory so reruns
// into different directories stay byte-identical
nlohmann::ordered_json config_echo(const RunConfig& cfg);

nlohmann::ordered_json report_envelope(const std::string& subcommand, const RunConfig& cfg,
                                       const std::vector<std::string>& flags);

}  // namespace codim1

#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "json.hpp"
#include "spotvol/pathsim.hpp"

namespace spotvol {

/// How to interpret the value column of an input CSV.
enum class SeriesKind { automatic, price, increment };

/// Read (time, price), (time, increment) or single-column increments, with or
/// without a header. In automatic mode a header named "price" selects prices,
/// anything else (or no header) is read as increments. When a time column is
/// present delta_n is taken from it; otherwise `fallback_delta_n` is used.
ReturnSeries read_series_csv(const std::filesystem::path& file, SeriesKind kind,
                             double fallback_delta_n);
ReturnSeries parse_series_csv(std::istream& in, SeriesKind kind, double fallback_delta_n);

/// Columns time,increment; time is the right end of each return interval.
void write_returns_csv(const std::filesystem::path& file, const ReturnSeries& r);
/// Columns time,<value_name> on the given grid.
void write_column_csv(const std::filesystem::path& file, const std::vector<double>& times,
                      const std::vector<double>& values, const std::string& value_name);

/// Writes <prefix>_returns.csv, <prefix>_price.csv, <prefix>_sigma.csv and the
/// JSON sidecar <prefix>.json (config + seed) for exact reproduction.
void export_path(const std::filesystem::path& prefix, const SimulatedPath& path,
                 const ModelConfig& cfg);

/// Shortest decimal form that round-trips the double.
std::string format_double(double x);

}  // namespace spotvol

namespace nlohmann {
template <>
struct adl_serializer<spotvol::ModelConfig> {
  static void to_json(json& j, const spotvol::ModelConfig& cfg);
  static void from_json(const json& j, spotvol::ModelConfig& cfg);
};
}  // namespace nlohmann

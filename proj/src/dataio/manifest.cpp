#include "nightatlas/dataio/manifest.hpp"

#include <algorithm>
#include <charconv>
#include <sstream>
#include <unordered_set>

#include "nightatlas/core/error.hpp"

namespace nightatlas::dataio {

namespace {

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) fields.push_back(trim(field));
  if (!line.empty() && line.back() == ',') fields.push_back("");
  return fields;
}

double parse_double(const std::string& s, int line_no, const char* what) {
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw core::FormatError("line " + std::to_string(line_no) + ": invalid " + what + " '" + s +
                            "'");
  }
  return value;
}

}  // namespace

std::vector<ManifestEntry> parse_manifest(const std::string& csv_text) {
  std::istringstream in(csv_text);
  std::string line;
  int line_no = 0;
  std::vector<ManifestEntry> entries;
  std::unordered_set<std::string> seen;

  if (!std::getline(in, line)) throw core::FormatError("empty manifest");
  ++line_no;
  const auto header = split_csv_line(line);
  if (header.size() != 4 || header[0] != "id" || header[1] != "mission" ||
      header[2] != "lat" || header[3] != "lon") {
    throw core::FormatError("line 1: expected header 'id,mission,lat,lon'");
  }

  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split_csv_line(line);
    if (fields.size() != 4) {
      throw core::FormatError("line " + std::to_string(line_no) + ": expected 4 fields, got " +
                              std::to_string(fields.size()));
    }
    ManifestEntry entry;
    entry.id = fields[0];
    entry.mission = fields[1];
    entry.lat = parse_double(fields[2], line_no, "lat");
    entry.lon = parse_double(fields[3], line_no, "lon");
    if (entry.id.empty()) {
      throw core::FormatError("line " + std::to_string(line_no) + ": empty id");
    }
    if (entry.lat < -90.0 || entry.lat > 90.0) {
      throw core::FormatError("line " + std::to_string(line_no) + ": lat " + fields[2] +
                              " outside [-90,90]");
    }
    if (entry.lon < -180.0 || entry.lon > 180.0) {
      throw core::FormatError("line " + std::to_string(line_no) + ": lon " + fields[3] +
                              " outside [-180,180]");
    }
    if (!seen.insert(entry.id).second) {
      throw core::FormatError("line " + std::to_string(line_no) + ": duplicate id '" + entry.id +
                              "'");
    }
    entries.push_back(std::move(entry));
  }
  return entries;
}

std::string manifest_to_csv(const std::vector<ManifestEntry>& entries) {
  std::ostringstream out;
  out << "id,mission,lat,lon\n";
  out.precision(10);
  for (const auto& e : entries) {
    out << e.id << "," << e.mission << "," << e.lat << "," << e.lon << "\n";
  }
  return out.str();
}

std::vector<ManifestEntry> subset_by_bbox(const std::vector<ManifestEntry>& entries,
                                          const BBox& box,
                                          const std::vector<std::string>& exclusions) {
  if (box.lat_min > box.lat_max || box.lon_min > box.lon_max) {
    throw core::ConfigError("bbox min exceeds max");
  }
  const std::unordered_set<std::string> excluded(exclusions.begin(), exclusions.end());
  std::vector<ManifestEntry> out;
  for (const auto& e : entries) {
    if (e.lat < box.lat_min || e.lat > box.lat_max) continue;
    if (e.lon < box.lon_min || e.lon > box.lon_max) continue;
    if (excluded.count(e.id)) continue;
    out.push_back(e);
  }
  return out;
}

std::vector<std::string> parse_exclusion_list(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::vector<std::string> ids;
  while (std::getline(in, line)) {
    const std::string id = trim(line);
    if (id.empty() || id[0] == '#') continue;
    ids.push_back(id);
  }
  return ids;
}

}  // namespace nightatlas::dataio

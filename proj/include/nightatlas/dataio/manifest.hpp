#pragma once

#include <string>
#include <vector>

namespace nightatlas::dataio {

struct ManifestEntry {
  std::string id;
  std::string mission;
  double lat = 0.0;  // [-90, 90]
  double lon = 0.0;  // [-180, 180]
};

struct BBox {
  double lat_min = 0.0;
  double lat_max = 0.0;
  double lon_min = 0.0;
  double lon_max = 0.0;
};

// CSV with header id,mission,lat,lon. Malformed rows and out-of-range
// coordinates fail with the 1-based line number; duplicate ids fail naming
// the id.
std::vector<ManifestEntry> parse_manifest(const std::string& csv_text);

std::string manifest_to_csv(const std::vector<ManifestEntry>& entries);

// Inclusive containment filter followed by exclusion-list removal.
std::vector<ManifestEntry> subset_by_bbox(const std::vector<ManifestEntry>& entries,
                                          const BBox& box,
                                          const std::vector<std::string>& exclusions);

// One id per line; '#' comments and blank lines ignored.
std::vector<std::string> parse_exclusion_list(const std::string& text);

}  // namespace nightatlas::dataio

#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "nightatlas/dataio/manifest.hpp"

namespace nightatlas::dataio {

enum class FetchStatus { kCached, kDownloaded, kMissing };

std::string to_string(FetchStatus status);

struct FetchResult {
  std::string id;
  FetchStatus status = FetchStatus::kMissing;
  std::filesystem::path path;  // empty when missing
};

struct FetchOptions {
  bool force = false;     // re-download even when cached
  int max_retries = 2;    // attempts per entry after the first
  int parallelism = 4;    // in-flight requests
  int timeout_seconds = 30;
};

// Downloads every entry not already in the cache. url_template must contain
// "{id}"; cache files are named <id> plus the template's trailing extension.
// Per-entry failures are recorded as missing and never abort the run; an
// unusable cache directory does.
std::vector<FetchResult> fetch_images(const std::vector<ManifestEntry>& entries,
                                      const std::string& url_template,
                                      const std::filesystem::path& cache_dir,
                                      const FetchOptions& options = {});

}  // namespace nightatlas::dataio

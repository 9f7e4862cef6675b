#include "nightatlas/dataio/fetch.hpp"

#include <atomic>
#include <fstream>
#include <thread>

#include <httplib.h>

#include "nightatlas/core/error.hpp"

namespace nightatlas::dataio {

std::string to_string(FetchStatus status) {
  switch (status) {
    case FetchStatus::kCached: return "cached";
    case FetchStatus::kDownloaded: return "downloaded";
    case FetchStatus::kMissing: return "missing";
  }
  return "missing";
}

namespace {

struct UrlParts {
  std::string origin;         // scheme://host[:port]
  std::string path_template;  // /path/with/{id}
  std::string extension;      // trailing ".ext" after {id}, may be empty
};

UrlParts parse_template(const std::string& url_template) {
  const auto id_pos = url_template.find("{id}");
  if (id_pos == std::string::npos) {
    throw core::ConfigError("url template must contain {id}: " + url_template);
  }
  const auto scheme_end = url_template.find("://");
  if (scheme_end == std::string::npos) {
    throw core::ConfigError("url template must start with http:// or https://");
  }
  const auto path_start = url_template.find('/', scheme_end + 3);
  if (path_start == std::string::npos || path_start > id_pos) {
    throw core::ConfigError("url template has no path component: " + url_template);
  }
  UrlParts parts;
  parts.origin = url_template.substr(0, path_start);
  parts.path_template = url_template.substr(path_start);
  const std::string tail = url_template.substr(id_pos + 4);
  if (!tail.empty() && tail[0] == '.' && tail.find('/') == std::string::npos) {
    parts.extension = tail;
  }
  return parts;
}

std::string substitute_id(const std::string& path_template, const std::string& id) {
  std::string path = path_template;
  const auto pos = path.find("{id}");
  path.replace(pos, 4, id);
  return path;
}

// Atomic cache write: temp file in the same directory, then rename.
void write_cache_file(const std::filesystem::path& final_path, const std::string& body) {
  const std::filesystem::path tmp = final_path.string() + ".part";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw core::IoError("cannot write " + tmp.string());
    out.write(body.data(), static_cast<std::streamsize>(body.size()));
    if (!out) throw core::IoError("write failed: " + tmp.string());
  }
  std::filesystem::rename(tmp, final_path);
}

}  // namespace

std::vector<FetchResult> fetch_images(const std::vector<ManifestEntry>& entries,
                                      const std::string& url_template,
                                      const std::filesystem::path& cache_dir,
                                      const FetchOptions& options) {
  const UrlParts parts = parse_template(url_template);

  std::error_code ec;
  std::filesystem::create_directories(cache_dir, ec);
  if (ec || !std::filesystem::is_directory(cache_dir)) {
    throw core::IoError("cache directory unusable: " + cache_dir.string());
  }
  {  // fail fast when the cache is not writable
    const auto probe = cache_dir / ".write_probe";
    std::ofstream out(probe);
    if (!out) throw core::IoError("cache directory not writable: " + cache_dir.string());
    out.close();
    std::filesystem::remove(probe, ec);
  }

  std::vector<FetchResult> results(entries.size());
  std::atomic<std::size_t> next{0};

  const auto worker = [&] {
    httplib::Client client(parts.origin);
    client.set_connection_timeout(options.timeout_seconds);
    client.set_read_timeout(options.timeout_seconds);
    for (std::size_t i = next.fetch_add(1); i < entries.size(); i = next.fetch_add(1)) {
      const auto& entry = entries[i];
      FetchResult& result = results[i];
      result.id = entry.id;
      const std::filesystem::path cache_path = cache_dir / (entry.id + parts.extension);

      if (!options.force && std::filesystem::exists(cache_path)) {
        result.status = FetchStatus::kCached;
        result.path = cache_path;
        continue;
      }

      const std::string path = substitute_id(parts.path_template, entry.id);
      bool ok = false;
      for (int attempt = 0; attempt <= options.max_retries && !ok; ++attempt) {
        const auto res = client.Get(path);
        if (res && res->status == 200) {
          write_cache_file(cache_path, res->body);
          ok = true;
        } else if (res && res->status >= 400 && res->status < 500) {
          break;  // permanent; retrying cannot help
        }
      }
      if (ok) {
        result.status = FetchStatus::kDownloaded;
        result.path = cache_path;
      } else {
        result.status = FetchStatus::kMissing;
      }
    }
  };

  const int threads = std::max(1, std::min<int>(options.parallelism,
                                                static_cast<int>(entries.size())));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  return results;
}

}  // namespace nightatlas::dataio

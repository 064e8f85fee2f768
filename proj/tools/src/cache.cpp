#include "polaron_app/cache.hpp"

#include <fcntl.h>
#include <sys/file.h>
#include <unistd.h>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <system_error>

#include "polaron/hash.hpp"
#include "polaron_app/output.hpp"

namespace polaron::app {

namespace fs = std::filesystem;

namespace {

class DirectoryLock {
 public:
  explicit DirectoryLock(const fs::path& root) {
    fs::create_directories(root);
    const fs::path file = root / "lock";
    fd_ = ::open(file.c_str(), O_RDWR | O_CREAT | O_CLOEXEC, 0644);
    if (fd_ < 0 || ::flock(fd_, LOCK_EX) != 0) {
      if (fd_ >= 0) ::close(fd_);
      throw std::runtime_error("cannot lock cache at " + file.string());
    }
  }
  ~DirectoryLock() {
    ::flock(fd_, LOCK_UN);
    ::close(fd_);
  }
  DirectoryLock(const DirectoryLock&) = delete;
  DirectoryLock& operator=(const DirectoryLock&) = delete;

 private:
  int fd_ = -1;
};

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return text.str();
}

constexpr const char* kMetaName = "bundle.meta";

}  // namespace

std::string CacheKey::hex() const {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(value));
  return buf;
}

CacheKey make_cache_key(const std::string& command, const std::string& canonical_inputs) {
  Fnv1a h;
  h.add_bytes(kCodeVersion);
  h.add_bytes("\n");
  h.add_bytes(command);
  h.add_bytes("\n");
  h.add_bytes(canonical_inputs);
  return {h.value()};
}

fs::path default_cache_root() {
  if (const char* dir = std::getenv(kCacheEnv); dir != nullptr && *dir != '\0') return dir;
  if (const char* xdg = std::getenv("XDG_CACHE_HOME"); xdg != nullptr && *xdg != '\0') {
    return fs::path(xdg) / "polaronlab";
  }
  if (const char* home = std::getenv("HOME"); home != nullptr && *home != '\0') {
    return fs::path(home) / ".cache" / "polaronlab";
  }
  return fs::temp_directory_path() / "polaronlab-cache";
}

ResultCache::ResultCache(fs::path root) : root_(std::move(root)) {}

std::optional<Bundle> ResultCache::load(const CacheKey& key) const {
  const DirectoryLock lock(root_);
  const fs::path entry = root_ / key.hex();
  if (!fs::is_directory(entry) || !fs::exists(entry / kMetaName)) return std::nullopt;
  Bundle bundle;
  std::istringstream meta(slurp(entry / kMetaName));
  std::string line;
  std::getline(meta, line);
  bundle.exit_code = std::stoi(line);
  std::getline(meta, bundle.summary);
  while (std::getline(meta, line)) {
    if (!line.empty()) bundle.files[line] = slurp(entry / line);
  }
  return bundle;
}

void ResultCache::store(const CacheKey& key, const Bundle& bundle) const {
  const DirectoryLock lock(root_);
  const fs::path entry = root_ / key.hex();
  if (fs::exists(entry)) return;
  const fs::path staging = root_ / (".staging-" + key.hex() + "-" + std::to_string(::getpid()));
  std::error_code ec;
  fs::remove_all(staging, ec);
  fs::create_directories(staging);
  std::string meta = std::to_string(bundle.exit_code) + "\n" + bundle.summary + "\n";
  for (const auto& [name, content] : bundle.files) {
    atomic_write(staging / name, content);
    meta += name + "\n";
  }
  atomic_write(staging / kMetaName, meta);
  fs::rename(staging, entry, ec);
  if (ec) fs::remove_all(staging, ec);
}

std::size_t ResultCache::clear() const {
  const DirectoryLock lock(root_);
  std::size_t dropped = 0;
  for (const auto& item : fs::directory_iterator(root_)) {
    if (!item.is_directory()) continue;
    fs::remove_all(item.path());
    ++dropped;
  }
  return dropped;
}

}  // namespace polaron::app

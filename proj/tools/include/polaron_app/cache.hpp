#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>

namespace polaron::app {

inline constexpr const char* kCodeVersion = "polaronlab-0.3.0";
inline constexpr const char* kCacheEnv = "POLARON_CACHE_DIR";

struct CacheKey {
  std::uint64_t value = 0;

  std::string hex() const;  // 16 digits
  std::string short_hex() const { return hex().substr(0, 8); }
};

/// Hash of the command name, the canonical config inputs and the code version.
CacheKey make_cache_key(const std::string& command, const std::string& canonical_inputs);

/// Everything a command writes, keyed by output file name.
struct Bundle {
  std::map<std::string, std::string> files;
  std::string summary;
  int exit_code = 0;
};

/// $POLARON_CACHE_DIR, else $XDG_CACHE_HOME/polaronlab, else $HOME/.cache/polaronlab.
std::filesystem::path default_cache_root();

/// On-disk key -> Bundle store. Entries are written to a temporary directory and renamed into
/// place; all access holds an exclusive lock on <root>/lock.
class ResultCache {
 public:
  explicit ResultCache(std::filesystem::path root);

  std::optional<Bundle> load(const CacheKey& key) const;
  void store(const CacheKey& key, const Bundle& bundle) const;
  /// Removes every entry; returns how many were dropped.
  std::size_t clear() const;

  const std::filesystem::path& root() const { return root_; }

 private:
  std::filesystem::path root_;
};

}  // namespace polaron::app

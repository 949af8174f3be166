#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>

namespace n2 {

inline constexpr const char* kEngineVersion = "1.0.0";

// Content-addressed on-disk store: one file per entry, FNV checksum line,
// corruption treated as a miss.
class DiskCache {
  public:
    explicit DiskCache(std::filesystem::path dir);

    std::optional<std::string> get(const std::string& key) const;
    void put(const std::string& key, const std::string& value) const;

    static uint64_t fnv1a(const std::string& s);
    const std::filesystem::path& dir() const { return dir_; }

  private:
    std::filesystem::path dir_;
};

// Process-global cache used by weight-space computations when set.
void set_global_cache(std::shared_ptr<DiskCache> c);
std::shared_ptr<DiskCache> global_cache();

}  // namespace n2

#include "n2/cache.hpp"

#include <fstream>
#include <mutex>
#include <sstream>

namespace n2 {

namespace {
std::shared_ptr<DiskCache> g_cache;
std::mutex g_cache_mtx;
}  // namespace

void set_global_cache(std::shared_ptr<DiskCache> c) {
    std::lock_guard lk(g_cache_mtx);
    g_cache = std::move(c);
}

std::shared_ptr<DiskCache> global_cache() {
    std::lock_guard lk(g_cache_mtx);
    return g_cache;
}

DiskCache::DiskCache(std::filesystem::path dir) : dir_(std::move(dir)) {
    std::error_code ec;
    std::filesystem::create_directories(dir_, ec);
}

uint64_t DiskCache::fnv1a(const std::string& s) {
    uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

namespace {
std::string hex64(uint64_t v) {
    std::ostringstream os;
    os << std::hex << v;
    return os.str();
}
}  // namespace

std::optional<std::string> DiskCache::get(const std::string& key) const {
    const std::filesystem::path f = dir_ / (hex64(fnv1a(key)) + ".n2c");
    std::ifstream in(f, std::ios::binary);
    if (!in) return std::nullopt;
    std::string header, stored_key;
    if (!std::getline(in, header)) return std::nullopt;
    if (!std::getline(in, stored_key)) return std::nullopt;
    if (stored_key != key) return std::nullopt;  // hash collision: miss
    std::ostringstream body;
    body << in.rdbuf();
    std::string payload = body.str();
    // header: "n2c1 <checksum>"
    std::istringstream hs(header);
    std::string magic, sum;
    hs >> magic >> sum;
    if (magic != "n2c1") return std::nullopt;
    if (sum != hex64(fnv1a(payload))) return std::nullopt;  // corrupted: miss
    return payload;
}

void DiskCache::put(const std::string& key, const std::string& value) const {
    const std::filesystem::path f = dir_ / (hex64(fnv1a(key)) + ".n2c");
    const std::filesystem::path tmp = f.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) return;
        out << "n2c1 " << hex64(fnv1a(value)) << "\n" << key << "\n" << value;
    }
    std::error_code ec;
    std::filesystem::rename(tmp, f, ec);
}

}  // namespace n2

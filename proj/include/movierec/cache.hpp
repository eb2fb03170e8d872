#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <string>

#include "movierec/errors.hpp"
#include "movierec/svd.hpp"

namespace movierec {

/// FNV-1a 64 over a file's bytes.
inline std::uint64_t hash_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open " + path);
    std::uint64_t h = 0xcbf29ce484222325ull;
    char buf[1 << 16];
    while (in.read(buf, sizeof buf) || in.gcount() > 0) {
        const std::streamsize got = in.gcount();
        for (std::streamsize i = 0; i < got; ++i) {
            h ^= static_cast<unsigned char>(buf[i]);
            h *= 0x100000001b3ull;
        }
    }
    return h;
}

/// Content hash of the three dataset files; cache keys derive from it.
inline std::uint64_t dataset_hash(const std::string& data_dir) {
    namespace fs = std::filesystem;
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (const char* name : {"movies.csv", "ratings.csv", "tags.csv"}) {
        const std::uint64_t fh = hash_file((fs::path(data_dir) / name).string());
        h ^= fh;
        h *= 0x100000001b3ull;
    }
    return h;
}

inline std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

/// Loads the cached factors for (name, dataset hash, components, seed) or
/// computes and stores them. An empty cache_dir just computes.
inline SvdFactors cached_factors(const std::string& cache_dir,
                                 const std::string& name, std::uint64_t data_hash,
                                 std::size_t components, std::uint64_t seed,
                                 const std::function<SvdFactors()>& compute) {
    if (cache_dir.empty()) return compute();
    namespace fs = std::filesystem;
    fs::create_directories(cache_dir);
    const fs::path path = fs::path(cache_dir) /
                          (name + "-" + hex64(data_hash) + "-k" +
                           std::to_string(components) + "-s" + std::to_string(seed) +
                           ".mrsf");
    if (fs::exists(path)) return load_factors(path.string());
    SvdFactors factors = compute();
    save_factors(path.string(), factors);
    return factors;
}

}  // namespace movierec

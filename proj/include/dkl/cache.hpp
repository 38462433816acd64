#pragma once

// On-disk divisor tables.
//
// Layout (all integers little-endian):
//   "DKLB"            4 bytes magic
//   version           u16 (currently 1)
//   k                 u8
//   limit             u64
//   values            limit x u32, d_k(1) .. d_k(limit)
//   checksum          u64, FNV-1a over every preceding byte

#include <array>
#include <chrono>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <memory>
#include <string>
#include <thread>
#include <vector>

#include <fcntl.h>
#include <unistd.h>

#include "dkl/divisor_table.hpp"
#include "dkl/errors.hpp"

namespace dkl {

inline constexpr std::array<char, 4> kCacheMagic = {'D', 'K', 'L', 'B'};
inline constexpr std::uint16_t kCacheVersion = 1;
inline constexpr std::size_t kCacheHeaderBytes = 4 + 2 + 1 + 8;

namespace cache_detail {

class Fnv1a {
 public:
  void update(const unsigned char* data, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
      hash_ ^= data[i];
      hash_ *= 0x100000001b3ULL;
    }
  }
  std::uint64_t value() const { return hash_; }

 private:
  std::uint64_t hash_ = 0xcbf29ce484222325ULL;
};

template <typename T>
void put_le(std::vector<unsigned char>& out, T v) {
  for (std::size_t i = 0; i < sizeof(T); ++i) out.push_back(static_cast<unsigned char>(v >> (8 * i)));
}

template <typename T>
T get_le(const unsigned char* p) {
  T v = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) v |= static_cast<T>(p[i]) << (8 * i);
  return v;
}

}  // namespace cache_detail

/// Serializes a table to bytes in the DKLB layout.
inline std::vector<unsigned char> encode_table(const DivisorTable& table) {
  using namespace cache_detail;
  std::vector<unsigned char> out;
  out.reserve(kCacheHeaderBytes + 4 * table.limit() + 8);
  out.insert(out.end(), kCacheMagic.begin(), kCacheMagic.end());
  put_le<std::uint16_t>(out, kCacheVersion);
  put_le<std::uint8_t>(out, static_cast<std::uint8_t>(table.k()));
  put_le<std::uint64_t>(out, table.limit());
  const auto values = table.values();
  for (std::uint64_t n = 1; n <= table.limit(); ++n) put_le<std::uint32_t>(out, values[n]);
  Fnv1a h;
  h.update(out.data(), out.size());
  put_le<std::uint64_t>(out, h.value());
  return out;
}

inline DivisorTable decode_table(const std::vector<unsigned char>& bytes) {
  using namespace cache_detail;
  require(bytes.size() >= kCacheHeaderBytes, ErrorKind::corruption, "cache file shorter than its header");
  require(std::memcmp(bytes.data(), kCacheMagic.data(), 4) == 0, ErrorKind::corruption,
          "cache file has wrong magic (expected DKLB)");
  const auto version = get_le<std::uint16_t>(bytes.data() + 4);
  require(version == kCacheVersion, ErrorKind::corruption,
          "cache file format version " + std::to_string(version) + " is not supported");
  const int k = bytes[6];
  const auto limit = get_le<std::uint64_t>(bytes.data() + 7);
  require(limit >= 1 && limit < (1ULL << 40U), ErrorKind::corruption, "cache file has implausible limit");
  const std::uint64_t expected = kCacheHeaderBytes + 4 * limit + 8;
  require(bytes.size() == expected, ErrorKind::corruption,
          "cache file is " + std::to_string(bytes.size()) + " bytes, expected " + std::to_string(expected));
  Fnv1a h;
  h.update(bytes.data(), expected - 8);
  require(h.value() == get_le<std::uint64_t>(bytes.data() + expected - 8), ErrorKind::corruption,
          "cache file checksum mismatch");
  std::vector<std::uint32_t> values(limit + 1, 0);
  const unsigned char* p = bytes.data() + kCacheHeaderBytes;
  for (std::uint64_t n = 1; n <= limit; ++n, p += 4) values[n] = get_le<std::uint32_t>(p);
  return DivisorTable(k, std::move(values));
}

inline void write_table(const std::filesystem::path& path, const DivisorTable& table) {
  const auto bytes = encode_table(table);
  const auto tmp = std::filesystem::path(path.string() + ".tmp" + std::to_string(::getpid()));
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    require(static_cast<bool>(out), ErrorKind::resource, "cannot write cache file " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

inline DivisorTable read_table(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  require(static_cast<bool>(in), ErrorKind::resource, "cannot open cache file " + path.string());
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return decode_table(bytes);
}

inline std::filesystem::path cache_path(const std::filesystem::path& dir, int k, std::uint64_t limit) {
  return dir / ("dk" + std::to_string(k) + "_" + std::to_string(limit) + ".dklb");
}

struct CacheHandle {
  std::filesystem::path path;
  std::shared_ptr<const DivisorTable> table;
  bool built = false;  // false when loaded from an existing file
  std::uint64_t file_bytes = 0;
};

namespace cache_detail {

// Exclusive lock file, created with O_EXCL and removed on destruction.
class LockFile {
 public:
  explicit LockFile(std::filesystem::path path, std::chrono::seconds wait = std::chrono::seconds(600))
      : path_(std::move(path)) {
    const auto deadline = std::chrono::steady_clock::now() + wait;
    for (;;) {
      const int fd = ::open(path_.c_str(), O_CREAT | O_EXCL | O_WRONLY, 0644);
      if (fd >= 0) {
        ::close(fd);
        return;
      }
      require(errno == EEXIST, ErrorKind::resource, "cannot create lock file " + path_.string());
      require(std::chrono::steady_clock::now() < deadline, ErrorKind::resource,
              "timed out waiting for lock " + path_.string());
      std::this_thread::sleep_for(std::chrono::milliseconds(50));
    }
  }
  LockFile(const LockFile&) = delete;
  LockFile& operator=(const LockFile&) = delete;
  ~LockFile() {
    std::error_code ec;
    std::filesystem::remove(path_, ec);
  }

 private:
  std::filesystem::path path_;
};

}  // namespace cache_detail

/// Loads the (k, limit) table from dir, building and writing it if absent.
/// A corrupt file is an error unless rebuild_if_corrupt is set.
inline CacheHandle cache_table(int k, std::uint64_t limit, const std::filesystem::path& dir,
                               bool rebuild_if_corrupt = false) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  require(!ec, ErrorKind::resource, "cannot create cache directory " + dir.string());
  CacheHandle handle;
  handle.path = cache_path(dir, k, limit);

  auto try_load = [&]() -> bool {
    if (!std::filesystem::exists(handle.path)) return false;
    try {
      auto t = read_table(handle.path);
      require(t.k() == k && t.limit() == limit, ErrorKind::corruption, "cache file header does not match its name");
      handle.table = std::make_shared<DivisorTable>(std::move(t));
      handle.file_bytes = std::filesystem::file_size(handle.path);
      return true;
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::corruption || !rebuild_if_corrupt) throw;
      return false;
    }
  };

  if (try_load()) return handle;
  cache_detail::LockFile lock(std::filesystem::path(handle.path.string() + ".lock"));
  if (try_load()) return handle;  // another process built it meanwhile
  auto table = std::make_shared<DivisorTable>(sieve_dk(k, limit));
  write_table(handle.path, *table);
  handle.table = std::move(table);
  handle.built = true;
  handle.file_bytes = std::filesystem::file_size(handle.path);
  return handle;
}

}  // namespace dkl

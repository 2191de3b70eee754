#pragma once

#include <chrono>
#include <cstdint>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "readlevel/errors.hpp"
#include "readlevel/io.hpp"

namespace readlevel {

inline constexpr const char* kVersion = "0.1.0";

namespace detail {

inline std::uint64_t fnv1a64(const void* data, std::size_t size,
                             std::uint64_t hash = 0xcbf29ce484222325ull) {
  const auto* bytes = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < size; ++i) {
    hash ^= bytes[i];
    hash *= 0x100000001b3ull;
  }
  return hash;
}

inline std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(v));
  return buf;
}

}  // namespace detail

inline std::string hash_string(const std::string& s) {
  return detail::hex64(detail::fnv1a64(s.data(), s.size()));
}

inline std::string hash_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError(path.string(), 0, "cannot open file for hashing");
  std::uint64_t hash = 0xcbf29ce484222325ull;
  char buf[1 << 16];
  while (in.read(buf, sizeof(buf)) || in.gcount() > 0)
    hash = detail::fnv1a64(buf, static_cast<std::size_t>(in.gcount()), hash);
  return detail::hex64(hash);
}

// Reproducibility sidecar written next to every subcommand's primary output.
// The timestamp lives here and only here; all other outputs are byte-stable
// for a fixed seed and inputs.
struct RunManifest {
  std::string subcommand;
  nlohmann::json config = nlohmann::json::object();
  std::vector<std::filesystem::path> inputs;
  std::vector<std::filesystem::path> outputs;

  nlohmann::json to_json() const {
    nlohmann::json in_list = nlohmann::json::array();
    for (const auto& p : inputs)
      in_list.push_back({{"path", p.string()},
                         {"bytes", std::filesystem::file_size(p)},
                         {"fnv1a64", hash_file(p)}});
    nlohmann::json out_list = nlohmann::json::array();
    for (const auto& p : outputs) out_list.push_back(p.string());

    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    char stamp[32];
    std::tm tm_utc{};
    gmtime_r(&t, &tm_utc);
    std::strftime(stamp, sizeof(stamp), "%Y-%m-%dT%H:%M:%SZ", &tm_utc);

    return nlohmann::json{{"tool", "readlevel"},
                          {"version", kVersion},
                          {"subcommand", subcommand},
                          {"config", config},
                          {"config_hash", hash_string(config.dump())},
                          {"inputs", in_list},
                          {"outputs", out_list},
                          {"timestamp", stamp}};
  }
};

inline void write_manifest(const std::filesystem::path& path,
                           const RunManifest& manifest) {
  auto out = detail::open_output(path);
  out << manifest.to_json().dump(2) << '\n';
}

}  // namespace readlevel

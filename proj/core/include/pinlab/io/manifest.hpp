#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace pinlab::io {

/// 64-bit FNV-1a.
std::uint64_t fnv1a64(std::string_view bytes) noexcept;

struct CellEntry {
  std::string id;
  bool ok = true;
  std::string error;
  double seconds = 0.0;
};

struct OutputEntry {
  std::string file;
  std::uint64_t hash = 0;
  std::size_t bytes = 0;
};

struct RunManifest {
  std::string command;
  std::string version;
  std::string config_text;  // canonical serialization
  std::uint64_t seed = 0;
  int threads = 1;
  double wall_seconds = 0.0;
  int exit_status = 0;
  std::vector<CellEntry> cells;
  std::vector<OutputEntry> outputs;
  std::vector<std::string> failures;
};

std::string to_json(const RunManifest& manifest);

/// Version string compiled into the library.
std::string_view library_version() noexcept;

}  // namespace pinlab::io

#include "pinlab/io/manifest.hpp"

#include <fmt/format.h>
#include <json.hpp>

#ifndef PINLAB_VERSION
#define PINLAB_VERSION "unknown"
#endif

namespace pinlab::io {

std::uint64_t fnv1a64(std::string_view bytes) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string_view library_version() noexcept { return PINLAB_VERSION; }

std::string to_json(const RunManifest& m) {
  nlohmann::ordered_json doc;
  doc["tool"] = "pinlab";
  doc["version"] = m.version;
  doc["command"] = m.command;
  doc["seed"] = m.seed;
  doc["threads"] = m.threads;
  doc["config"] = m.config_text;
  doc["exit_status"] = m.exit_status;
  doc["wall_seconds"] = m.wall_seconds;
  auto cells = nlohmann::ordered_json::array();
  for (const auto& c : m.cells) {
    nlohmann::ordered_json cell;
    cell["id"] = c.id;
    cell["status"] = c.ok ? "ok" : "failed";
    if (!c.ok) cell["error"] = c.error;
    cell["seconds"] = c.seconds;
    cells.push_back(std::move(cell));
  }
  doc["cells"] = std::move(cells);
  auto outputs = nlohmann::ordered_json::array();
  for (const auto& o : m.outputs)
    outputs.push_back({{"file", o.file}, {"fnv1a64", fmt::format("{:016x}", o.hash)}, {"bytes", o.bytes}});
  doc["outputs"] = std::move(outputs);
  doc["failures"] = m.failures;
  return doc.dump(2) + "\n";
}

}  // namespace pinlab::io

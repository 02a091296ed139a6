#pragma once

#include <string>
#include <vector>

#include "pinlab/io/config.hpp"

namespace pinlab::io {

struct DispatchResult {
  /// 0 when every cell succeeded and every hard invariant held, else 1.
  int exit_code = 0;
  std::vector<std::string> failures;
  std::vector<std::string> files;  // written, relative to config.out
};

/// Runs one validated configuration and writes its CSV files plus
/// manifest.json into config.out.
DispatchResult dispatch(const RunConfig& config);

}  // namespace pinlab::io

// Built-in example checks, one group per module.
#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace chebcon {

struct SelftestModule {
  std::string module;
  std::size_t checks = 0;
  std::vector<std::string> failures;
};

std::vector<SelftestModule> run_selftest();

}  // namespace chebcon

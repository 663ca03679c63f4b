#pragma once

#include <string>
#include <utility>
#include <vector>

namespace volterra::detail {

/// (id, config text) for every file in configs/, generated at build time.
const std::vector<std::pair<std::string, std::string>>& canned_table();

}  // namespace volterra::detail

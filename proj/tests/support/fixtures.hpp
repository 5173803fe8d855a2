#pragma once

#include <string>

#include "wsc/io.hpp"

namespace wsc::test {

inline std::string fixture_path(const std::string& name) { return std::string(WSC_FIXTURE_DIR) + "/" + name; }

inline io::Json fixture(const std::string& name) { return io::read_json_file(fixture_path(name)); }

}  // namespace wsc::test

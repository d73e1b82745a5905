#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "fwt/model.hpp"

namespace fwt {

/// Flat `key = value` text, one field of SystemParams per line. `#` starts a
/// comment. mining_power is either `uniform` or a comma-separated list.
SystemParams read_config(std::istream& is);
SystemParams read_config_file(const std::string& path);
void write_config(std::ostream& os, const SystemParams& p);

/// Applies one `key=value` override. Throws std::invalid_argument on an
/// unknown key or a malformed value.
void apply_param(SystemParams& p, const std::string& assignment);
void apply_param(SystemParams& p, const std::string& key, const std::string& value);

const std::vector<std::string>& config_keys();

}  // namespace fwt

#pragma once

#include <string>
#include <vector>

#include "ggl/autodiff.hpp"

namespace ggl {

// Flat binary blob: "GGL1", u32 version, u32 record count, then per record
// u32 name length, name bytes, u32 rank, u64 dims, little-endian f64 values
// and the mask packed LSB-first into ceil(size/8) bytes.
std::string serialize_parameters(const std::vector<const Parameter*>& params);
std::vector<Parameter> deserialize_parameters(const std::string& blob);

void save_checkpoint(const std::string& path, const std::vector<const Parameter*>& params);
std::vector<Parameter> load_checkpoint(const std::string& path);

// "player{i}/t{k}/{param}"
std::string checkpoint_name(int player, int time_index, const std::string& param);

}  // namespace ggl

#pragma once

#include <string>

#include "velab/score_net.hpp"

namespace velab {

// Binary layout, little-endian: u32 data_dim, u32 width, u32 depth, u64 seed,
// then row-major float64 entries of input_layer, hidden[0..L-1], output_layer.
void save_checkpoint(const ScoreNet& net, const std::string& path);
ScoreNet load_checkpoint(const std::string& path);

}  // namespace velab

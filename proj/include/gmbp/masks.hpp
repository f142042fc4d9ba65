#ifndef GMBP_MASKS_HPP_
#define GMBP_MASKS_HPP_

#include <cstdint>
#include <string>

#include "gmbp/image.hpp"

namespace gmbp {

enum class MaskStyle { Scratch, Text, Blob };
const char* to_string(MaskStyle style);
MaskStyle parse_mask_style(const std::string& name);

// Deterministic synthetic mask with exactly round(coverage * width * height)
// unknown pixels, none on the outermost row or column.
//   scratch: 1-pixel-wide random walks with slowly drifting heading
//   text:    straight strokes inside a grid of character cells
//   blob:    filled disks around random seeds
InpaintMask make_mask(int width, int height, MaskStyle style, double coverage,
                      std::uint64_t seed);

}  // namespace gmbp

#endif  // GMBP_MASKS_HPP_

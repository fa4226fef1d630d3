#pragma once

#include <string>
#include <utility>
#include <vector>

#include "cdsa/types.hpp"

namespace cdsa {

enum class ImageFormat { pgm8, pgm16, f32raw };

// PGM samples are scaled to [0,1] by the format's max code value (255 or
// 65535); f32raw payloads are taken verbatim. Loading rejects non-finite
// values.
Image load_image(const std::string& path, ImageFormat format);

// Sniffs the format from the file header (P5 magic + maxval, or CDSAF32).
Image load_image(const std::string& path);

// PGM saves clamp to [0,1] and quantize; f32raw stores float32 verbatim.
void save_image(const std::string& path, const Image& img, ImageFormat format);

// .pgm -> pgm16, .f32 -> f32raw.
ImageFormat format_for_path(const std::string& path);

Mask load_mask(const std::string& path);  // any image format, then > 0.5
void save_mask(const std::string& path, const Mask& mask);  // 8-bit PGM {0,255}

// CDSAT4: "CDSAT4\0\0", four u32 dims (n,c,h,w), float32 payload.
Tensor4 load_tensor4(const std::string& path);
void save_tensor4(const std::string& path, const Tensor4& t);

// Flat key=value sidecar text.
void save_key_values(const std::string& path,
                     const std::vector<std::pair<std::string, std::string>>& kv);

}  // namespace cdsa

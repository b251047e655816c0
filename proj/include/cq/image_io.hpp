#pragma once

#include <string>
#include <vector>

#include "cq/types.hpp"

namespace cq {

/// Decodes an 8-bit PNG or TIFF (by file extension / magic) into RGB.
/// Grayscale expands to RGB; an alpha channel is discarded with a warning;
/// indexed PNGs expand through their palette. 16-bit files, unsupported
/// compression and truncated files raise std::runtime_error with the path
/// and reason. `warnings`, when given, collects non-fatal notes.
PixelImage decode_image(const std::string& path, std::vector<std::string>* warnings = nullptr);

/// Writes img losslessly; the extension picks the container
/// (.png, or .tif/.tiff for an uncompressed baseline TIFF).
void encode_image(const PixelImage& img, const std::string& path);

}  // namespace cq

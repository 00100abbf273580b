#pragma once

#include "dipl0/image.hpp"

#include <string>

namespace dipl0 {

struct LoadedImage {
    ImageTensor image; // reflect-padded to the requested alignment
    // Pre-padding dims, kept so outputs can be cropped back.
    int original_height = 0;
    int original_width = 0;
};

// Loads an 8-bit PNG or JPEG (sniffed from the file signature), divides by
// 255 and reflect-pads bottom/right to the next multiple of alignment.
// Grayscale stays 1 channel, color becomes 3, alpha is stripped, palettes
// are expanded. 16-bit PNGs are rejected as unsupported bit depth.
LoadedImage load_image(const std::string& path, int alignment = 1);

ImageTensor pad_to_alignment(const ImageTensor& img, int alignment);
ImageTensor crop(const ImageTensor& img, int height, int width);

// Clamps to [0,1], quantizes round-half-up to 8 bits and writes a PNG
// (always PNG, so outputs never pick up compression artifacts).
void save_image(const ImageTensor& img, const std::string& path);

// The exact 8-bit value save_image would emit.
unsigned char quantize_byte(double v);

// img as it would read back after save_image + load_image (clamped,
// quantized, divided by 255); used when a metric should see the artifact
// the user gets rather than the float tensor.
ImageTensor quantized_view(const ImageTensor& img);

} // namespace dipl0

#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace posterlab {

// 8-bit raster, row-major, interleaved samples. channels is 1 (gray) or 3 (RGB).
struct Image {
    int width = 0;
    int height = 0;
    int channels = 0;
    std::vector<std::uint8_t> data;

    std::uint8_t at(int x, int y, int c = 0) const {
        return data[(static_cast<std::size_t>(y) * width + x) * channels + c];
    }
    std::uint8_t& at(int x, int y, int c = 0) {
        return data[(static_cast<std::size_t>(y) * width + x) * channels + c];
    }
    bool empty() const { return data.empty(); }
};

// CIELAB planes, one double per pixel. L in [0,100], a/b roughly [-128,127].
struct LabImage {
    int width = 0;
    int height = 0;
    std::vector<double> l, a, b;
};

enum class OrientationMode { Unsigned, Signed }; // [0,pi) vs [0,2pi)

struct GradientField {
    int width = 0;
    int height = 0;
    OrientationMode mode = OrientationMode::Unsigned;
    std::vector<double> magnitude;
    std::vector<double> orientation;

    double mag(int x, int y) const { return magnitude[static_cast<std::size_t>(y) * width + x]; }
    double ori(int x, int y) const { return orientation[static_cast<std::size_t>(y) * width + x]; }
};

// Decode a PNG or JPEG file to 8-bit gray or RGB. Throws Error on unsupported
// or corrupt input.
Image decode_image(const std::string& path);

// (width, height) from the file header without decoding pixel data.
std::pair<int, int> image_dimensions(const std::string& path);

// Rec.601 luma, round(0.299 R + 0.587 G + 0.114 B). Identity on 1-channel input.
Image to_grayscale(const Image& img);

// sRGB (D65) -> CIELAB. Input must be 3-channel.
LabImage rgb_to_lab(const Image& img);

// Bilinear, center-aligned sampling. Identity dimensions reproduce the input
// byte for byte.
Image resize_bilinear(const Image& img, int out_w, int out_h);

Image crop(const Image& img, int x, int y, int w, int h);

// Central differences with replicated borders; magnitude = sqrt(gx^2 + gy^2),
// orientation folded to [0,pi) (unsigned) or [0,2pi) (signed). Needs a
// 1-channel image of at least 3x3.
GradientField gradients(const Image& gray, OrientationMode mode);

// Canonical analysis size for the descriptor stack (2:3 poster aspect).
inline constexpr int kCanonicalWidth = 256;
inline constexpr int kCanonicalHeight = 384;
// GIST works on its own square resize.
inline constexpr int kGistSize = 256;

} // namespace posterlab

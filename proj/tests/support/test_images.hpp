#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "posterlab/image.hpp"

namespace posterlab::testing {

// Encoders for building fixtures; the library itself only reads images.
void write_png(const std::string& path, const Image& img);
void write_jpeg(const std::string& path, const Image& img, int quality = 90);

Image solid_image(int w, int h, std::uint8_t r, std::uint8_t g, std::uint8_t b);
Image solid_gray(int w, int h, std::uint8_t v);
Image ramp_x(int w, int h); // pixel value = x (clamped at 255)

// Unique directory under the system temp dir, removed on destruction.
class TempDir {
public:
    TempDir();
    ~TempDir();
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;
    const std::filesystem::path& path() const { return path_; }
    std::string file(const std::string& name) const { return (path_ / name).string(); }

private:
    std::filesystem::path path_;
};

} // namespace posterlab::testing

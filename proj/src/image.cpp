#include "posterlab/image.hpp"

#include <algorithm>
#include <cmath>
#include <csetjmp>
#include <cstdio>
#include <cstring>
#include <memory>

#include <jpeglib.h>
#include <png.h>

#include "posterlab/error.hpp"

namespace posterlab {

namespace {

struct FileCloser {
    void operator()(std::FILE* f) const {
        if (f) std::fclose(f);
    }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

Image decode_png(std::FILE* fp, const std::string& path) {
    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!png) throw Error("png: out of memory");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_read_struct(&png, nullptr, nullptr);
        throw Error("png: out of memory");
    }

    Image img;
    std::vector<png_bytep> rows;
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw Error("corrupt PNG file: " + path);
    }

    png_init_io(png, fp);
    png_read_info(png, info);

    png_uint_32 w = 0, h = 0;
    int bit_depth = 0, color_type = 0;
    png_get_IHDR(png, info, &w, &h, &bit_depth, &color_type, nullptr, nullptr, nullptr);

    if (bit_depth == 16) png_set_strip_16(png);
    if (color_type == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
    if (color_type == PNG_COLOR_TYPE_GRAY && bit_depth < 8) png_set_expand_gray_1_2_4_to_8(png);
    if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
    png_set_strip_alpha(png);
    png_read_update_info(png, info);

    const int channels = png_get_channels(png, info);
    if (channels != 1 && channels != 3) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw Error("png: unsupported channel count in " + path);
    }

    img.width = static_cast<int>(w);
    img.height = static_cast<int>(h);
    img.channels = channels;
    img.data.resize(static_cast<std::size_t>(w) * h * channels);
    rows.resize(h);
    for (png_uint_32 y = 0; y < h; ++y)
        rows[y] = img.data.data() + static_cast<std::size_t>(y) * w * channels;

    png_read_image(png, rows.data());
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);
    return img;
}

struct JpegErrorMgr {
    jpeg_error_mgr pub;
    std::jmp_buf jump;
};

void jpeg_error_exit(j_common_ptr cinfo) {
    auto* mgr = reinterpret_cast<JpegErrorMgr*>(cinfo->err);
    std::longjmp(mgr->jump, 1);
}

Image decode_jpeg(std::FILE* fp, const std::string& path) {
    jpeg_decompress_struct cinfo;
    JpegErrorMgr err;
    cinfo.err = jpeg_std_error(&err.pub);
    err.pub.error_exit = jpeg_error_exit;

    if (setjmp(err.jump)) {
        jpeg_destroy_decompress(&cinfo);
        throw Error("corrupt JPEG file: " + path);
    }

    jpeg_create_decompress(&cinfo);
    jpeg_stdio_src(&cinfo, fp);
    jpeg_read_header(&cinfo, TRUE);
    cinfo.out_color_space = cinfo.num_components == 1 ? JCS_GRAYSCALE : JCS_RGB;
    jpeg_start_decompress(&cinfo);

    Image img;
    img.width = static_cast<int>(cinfo.output_width);
    img.height = static_cast<int>(cinfo.output_height);
    img.channels = cinfo.output_components;
    img.data.resize(static_cast<std::size_t>(img.width) * img.height * img.channels);

    const std::size_t stride = static_cast<std::size_t>(img.width) * img.channels;
    while (cinfo.output_scanline < cinfo.output_height) {
        JSAMPROW row = img.data.data() + cinfo.output_scanline * stride;
        jpeg_read_scanlines(&cinfo, &row, 1);
    }
    jpeg_finish_decompress(&cinfo);
    jpeg_destroy_decompress(&cinfo);
    return img;
}

} // namespace

Image decode_image(const std::string& path) {
    FilePtr fp(std::fopen(path.c_str(), "rb"));
    if (!fp) throw Error("cannot open image file: " + path);

    unsigned char magic[8] = {0};
    const std::size_t got = std::fread(magic, 1, sizeof magic, fp.get());
    std::rewind(fp.get());

    static const unsigned char png_sig[8] = {0x89, 'P', 'N', 'G', 0x0d, 0x0a, 0x1a, 0x0a};
    if (got >= 8 && std::memcmp(magic, png_sig, 8) == 0) return decode_png(fp.get(), path);
    if (got >= 2 && magic[0] == 0xff && magic[1] == 0xd8) return decode_jpeg(fp.get(), path);
    throw Error("unsupported image format (not PNG or JPEG): " + path);
}

std::pair<int, int> image_dimensions(const std::string& path) {
    FilePtr fp(std::fopen(path.c_str(), "rb"));
    if (!fp) throw Error("cannot open image file: " + path);

    unsigned char magic[8] = {0};
    const std::size_t got = std::fread(magic, 1, sizeof magic, fp.get());
    std::rewind(fp.get());

    static const unsigned char png_sig[8] = {0x89, 'P', 'N', 'G', 0x0d, 0x0a, 0x1a, 0x0a};
    if (got >= 8 && std::memcmp(magic, png_sig, 8) == 0) {
        png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
        png_infop info = png ? png_create_info_struct(png) : nullptr;
        if (!png || !info) {
            if (png) png_destroy_read_struct(&png, nullptr, nullptr);
            throw Error("png: out of memory");
        }
        if (setjmp(png_jmpbuf(png))) {
            png_destroy_read_struct(&png, &info, nullptr);
            throw Error("corrupt PNG file: " + path);
        }
        png_init_io(png, fp.get());
        png_read_info(png, info);
        const auto dims = std::pair<int, int>(static_cast<int>(png_get_image_width(png, info)),
                                              static_cast<int>(png_get_image_height(png, info)));
        png_destroy_read_struct(&png, &info, nullptr);
        return dims;
    }
    if (got >= 2 && magic[0] == 0xff && magic[1] == 0xd8) {
        jpeg_decompress_struct cinfo;
        JpegErrorMgr err;
        cinfo.err = jpeg_std_error(&err.pub);
        err.pub.error_exit = jpeg_error_exit;
        if (setjmp(err.jump)) {
            jpeg_destroy_decompress(&cinfo);
            throw Error("corrupt JPEG file: " + path);
        }
        jpeg_create_decompress(&cinfo);
        jpeg_stdio_src(&cinfo, fp.get());
        jpeg_read_header(&cinfo, TRUE);
        const auto dims = std::pair<int, int>(static_cast<int>(cinfo.image_width),
                                              static_cast<int>(cinfo.image_height));
        jpeg_destroy_decompress(&cinfo);
        return dims;
    }
    throw Error("unsupported image format (not PNG or JPEG): " + path);
}

Image to_grayscale(const Image& img) {
    if (img.channels == 1) return img;
    if (img.channels != 3) throw Error("to_grayscale: expected 1 or 3 channels");
    Image out;
    out.width = img.width;
    out.height = img.height;
    out.channels = 1;
    out.data.resize(static_cast<std::size_t>(img.width) * img.height);
    const std::size_t n = out.data.size();
    for (std::size_t i = 0; i < n; ++i) {
        const double r = img.data[i * 3 + 0];
        const double g = img.data[i * 3 + 1];
        const double b = img.data[i * 3 + 2];
        out.data[i] = static_cast<std::uint8_t>(std::lround(0.299 * r + 0.587 * g + 0.114 * b));
    }
    return out;
}

namespace {

inline double srgb_linearize(double c) {
    return c <= 0.04045 ? c / 12.92 : std::pow((c + 0.055) / 1.055, 2.4);
}

inline double lab_f(double t) {
    constexpr double kCube = (6.0 / 29.0) * (6.0 / 29.0) * (6.0 / 29.0);
    constexpr double kScale = (29.0 / 6.0) * (29.0 / 6.0) / 3.0;
    return t > kCube ? std::cbrt(t) : kScale * t + 4.0 / 29.0;
}

} // namespace

LabImage rgb_to_lab(const Image& img) {
    if (img.channels != 3) throw Error("rgb_to_lab: 3-channel sRGB input required");
    // D65 reference white.
    constexpr double xn = 0.95047, yn = 1.0, zn = 1.08883;

    LabImage out;
    out.width = img.width;
    out.height = img.height;
    const std::size_t n = static_cast<std::size_t>(img.width) * img.height;
    out.l.resize(n);
    out.a.resize(n);
    out.b.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const std::uint8_t r8 = img.data[i * 3 + 0], g8 = img.data[i * 3 + 1], b8 = img.data[i * 3 + 2];
        const double r = srgb_linearize(r8 / 255.0);
        const double g = srgb_linearize(g8 / 255.0);
        const double b = srgb_linearize(b8 / 255.0);
        const double y = 0.2126729 * r + 0.7151522 * g + 0.0721750 * b;
        const double fy = lab_f(y / yn);
        out.l[i] = 116.0 * fy - 16.0;
        if (r8 == g8 && g8 == b8) {
            // neutral input maps exactly to the white-point axis; the matrix
            // arithmetic would leave +-1e-14 residue on a and b
            out.a[i] = 0.0;
            out.b[i] = 0.0;
        } else {
            const double x = 0.4124564 * r + 0.3575761 * g + 0.1804375 * b;
            const double z = 0.0193339 * r + 0.1191920 * g + 0.9503041 * b;
            const double fx = lab_f(x / xn), fz = lab_f(z / zn);
            out.a[i] = 500.0 * (fx - fy);
            out.b[i] = 200.0 * (fy - fz);
        }
    }
    return out;
}

Image resize_bilinear(const Image& img, int out_w, int out_h) {
    if (out_w < 1 || out_h < 1) throw Error("resize: target dimensions must be >= 1");
    if (img.empty()) throw Error("resize: empty image");
    if (out_w == img.width && out_h == img.height) return img;

    Image out;
    out.width = out_w;
    out.height = out_h;
    out.channels = img.channels;
    out.data.resize(static_cast<std::size_t>(out_w) * out_h * img.channels);

    const double sx = static_cast<double>(img.width) / out_w;
    const double sy = static_cast<double>(img.height) / out_h;
    for (int y = 0; y < out_h; ++y) {
        const double src_y = (y + 0.5) * sy - 0.5;
        const double fy = std::clamp(src_y, 0.0, static_cast<double>(img.height - 1));
        const int y0 = static_cast<int>(fy);
        const int y1 = std::min(y0 + 1, img.height - 1);
        const double wy = fy - y0;
        for (int x = 0; x < out_w; ++x) {
            const double src_x = (x + 0.5) * sx - 0.5;
            const double fx = std::clamp(src_x, 0.0, static_cast<double>(img.width - 1));
            const int x0 = static_cast<int>(fx);
            const int x1 = std::min(x0 + 1, img.width - 1);
            const double wx = fx - x0;
            for (int c = 0; c < img.channels; ++c) {
                const double v = (1 - wy) * ((1 - wx) * img.at(x0, y0, c) + wx * img.at(x1, y0, c)) +
                                 wy * ((1 - wx) * img.at(x0, y1, c) + wx * img.at(x1, y1, c));
                out.at(x, y, c) = static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
            }
        }
    }
    return out;
}

Image crop(const Image& img, int x, int y, int w, int h) {
    if (x < 0 || y < 0 || w < 1 || h < 1 || x + w > img.width || y + h > img.height)
        throw Error("crop: rectangle out of bounds");
    Image out;
    out.width = w;
    out.height = h;
    out.channels = img.channels;
    out.data.resize(static_cast<std::size_t>(w) * h * img.channels);
    const std::size_t row_bytes = static_cast<std::size_t>(w) * img.channels;
    for (int row = 0; row < h; ++row) {
        const std::uint8_t* src = &img.data[((static_cast<std::size_t>(y) + row) * img.width + x) * img.channels];
        std::copy_n(src, row_bytes, &out.data[static_cast<std::size_t>(row) * row_bytes]);
    }
    return out;
}

GradientField gradients(const Image& gray, OrientationMode mode) {
    if (gray.channels != 1) throw Error("gradients: 1-channel image required");
    if (gray.width < 3 || gray.height < 3) throw Error("gradients: image too small (need >= 3x3)");

    GradientField out;
    out.width = gray.width;
    out.height = gray.height;
    out.mode = mode;
    const std::size_t n = static_cast<std::size_t>(gray.width) * gray.height;
    out.magnitude.resize(n);
    out.orientation.resize(n);

    constexpr double kPi = 3.14159265358979323846;
    for (int y = 0; y < gray.height; ++y) {
        const int ym = std::max(y - 1, 0), yp = std::min(y + 1, gray.height - 1);
        for (int x = 0; x < gray.width; ++x) {
            const int xm = std::max(x - 1, 0), xp = std::min(x + 1, gray.width - 1);
            const double gx = (static_cast<double>(gray.at(xp, y)) - gray.at(xm, y)) / 2.0;
            const double gy = (static_cast<double>(gray.at(x, yp)) - gray.at(x, ym)) / 2.0;
            const std::size_t i = static_cast<std::size_t>(y) * gray.width + x;
            out.magnitude[i] = std::sqrt(gx * gx + gy * gy);
            double ang = std::atan2(gy, gx); // (-pi, pi]
            if (mode == OrientationMode::Unsigned) {
                if (ang < 0) ang += kPi;
                if (ang >= kPi) ang -= kPi;
            } else {
                if (ang < 0) ang += 2 * kPi;
                if (ang >= 2 * kPi) ang -= 2 * kPi;
            }
            out.orientation[i] = ang;
        }
    }
    return out;
}

} // namespace posterlab

#include <algorithm>
#include <cmath>
#include <vector>

#include "posterlab/error.hpp"
#include "posterlab/features.hpp"

namespace posterlab {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr int kCell = 8;
constexpr int kBlock = 2; // cells per block edge
constexpr int kBins = 9;
constexpr double kClip = 0.2;

} // namespace

int hog_dim(int width, int height) {
    const int cx = width / kCell, cy = height / kCell;
    return (cx - 1) * (cy - 1) * kBlock * kBlock * kBins;
}

std::vector<double> hog(const Image& gray) {
    if (gray.channels != 1) throw Error("hog: 1-channel image required");
    if (gray.width % kCell != 0 || gray.height % kCell != 0)
        throw Error("hog: image dims must be multiples of the cell size");

    const GradientField field = gradients(gray, OrientationMode::Unsigned);
    const int cx = gray.width / kCell, cy = gray.height / kCell;

    // Per-cell orientation histograms; magnitude split linearly between the
    // two nearest bin centers (centers at b*pi/9, so a pure horizontal edge
    // lands entirely in bin 0).
    std::vector<double> cells(static_cast<std::size_t>(cx) * cy * kBins, 0.0);
    for (int y = 0; y < gray.height; ++y) {
        for (int x = 0; x < gray.width; ++x) {
            const double mag = field.mag(x, y);
            if (mag == 0.0) continue;
            const double o = field.ori(x, y) / kPi * kBins;
            const int b0 = static_cast<int>(o) % kBins;
            const double w1 = o - static_cast<int>(o);
            const std::size_t cell = (static_cast<std::size_t>(y / kCell) * cx + x / kCell) * kBins;
            cells[cell + b0] += mag * (1.0 - w1);
            cells[cell + (b0 + 1) % kBins] += mag * w1;
        }
    }

    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(hog_dim(gray.width, gray.height)));
    std::array<double, kBlock * kBlock * kBins> block;
    for (int by = 0; by + kBlock <= cy; ++by) {
        for (int bx = 0; bx + kBlock <= cx; ++bx) {
            int k = 0;
            for (int dy = 0; dy < kBlock; ++dy)
                for (int dx = 0; dx < kBlock; ++dx)
                    for (int b = 0; b < kBins; ++b)
                        block[k++] = cells[(static_cast<std::size_t>(by + dy) * cx + bx + dx) * kBins + b];

            // L2-hys: normalize, clip at 0.2, renormalize.
            double n2 = 0.0;
            for (double v : block) n2 += v * v;
            if (n2 > 0) {
                const double inv = 1.0 / std::sqrt(n2);
                for (double& v : block) v = std::min(v * inv, kClip);
                n2 = 0.0;
                for (double v : block) n2 += v * v;
                const double inv2 = 1.0 / std::sqrt(n2);
                for (double& v : block) v *= inv2;
            }
            out.insert(out.end(), block.begin(), block.end());
        }
    }
    return out;
}

const std::vector<std::pair<int, int>>& cohog_offsets() {
    // Identity plus the 30 asymmetric offsets in the upper half of a 9x9
    // neighborhood (squared radius <= 18).
    static const std::vector<std::pair<int, int>> offsets = [] {
        std::vector<std::pair<int, int>> v;
        v.emplace_back(0, 0);
        for (int dy = -4; dy <= 0; ++dy)
            for (int dx = -4; dx <= 4; ++dx) {
                if (dy == 0 && dx <= 0) continue;
                if (dx * dx + dy * dy <= 18) v.emplace_back(dx, dy);
            }
        return v;
    }();
    return offsets;
}

std::vector<double> cooccurrence_histogram(const GradientField& field, bool magnitude_weighted) {
    if (field.mode != OrientationMode::Unsigned)
        throw Error("cooccurrence_histogram: unsigned orientations required");
    const auto& offsets = cohog_offsets();
    const int w = field.width, h = field.height;

    std::vector<int> bin(static_cast<std::size_t>(w) * h);
    for (std::size_t i = 0; i < bin.size(); ++i) {
        const int b = static_cast<int>(field.orientation[i] / kPi * 8.0);
        bin[i] = std::min(b, 7);
    }

    // Layout: cell-major, then offset, then the 8x8 pair matrix.
    std::vector<double> out(static_cast<std::size_t>(4) * offsets.size() * 64, 0.0);
    const int half_w = w / 2, half_h = h / 2;
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const double mp = field.mag(x, y);
            if (mp < kCohogMagnitudeThreshold) continue;
            const int cell = (x < half_w ? 0 : 1) + (y < half_h ? 0 : 2);
            for (std::size_t o = 0; o < offsets.size(); ++o) {
                const int qx = x + offsets[o].first, qy = y + offsets[o].second;
                if (qx < 0 || qy < 0 || qx >= w || qy >= h) continue;
                const double mq = field.mag(qx, qy);
                if (mq < kCohogMagnitudeThreshold) continue;
                const std::size_t idx =
                    ((static_cast<std::size_t>(cell) * offsets.size() + o) * 64) +
                    static_cast<std::size_t>(bin[static_cast<std::size_t>(y) * w + x]) * 8 +
                    bin[static_cast<std::size_t>(qy) * w + qx];
                out[idx] += magnitude_weighted ? mp * mq : 1.0;
            }
        }
    }

    // L1-normalize each offset-cell matrix independently.
    for (std::size_t m = 0; m < 4 * offsets.size(); ++m) {
        double sum = 0.0;
        for (int i = 0; i < 64; ++i) sum += out[m * 64 + i];
        if (sum > 0)
            for (int i = 0; i < 64; ++i) out[m * 64 + i] /= sum;
    }
    return out;
}

std::vector<double> cohog(const Image& gray) {
    if (gray.width < 3 || gray.height < 3) throw Error("cohog: image too small");
    return cooccurrence_histogram(gradients(gray, OrientationMode::Unsigned), false);
}

std::vector<double> ecohog(const Image& gray) {
    if (gray.width < 3 || gray.height < 3) throw Error("ecohog: image too small");
    return cooccurrence_histogram(gradients(gray, OrientationMode::Unsigned), true);
}

} // namespace posterlab

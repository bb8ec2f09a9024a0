#include <algorithm>
#include <cmath>
#include <vector>

#include "posterlab/error.hpp"
#include "posterlab/features.hpp"

namespace posterlab {

namespace {

constexpr double kTwoPi = 2.0 * 3.14159265358979323846;
constexpr int kSpatialBins = 4;
constexpr int kOriBins = 8;
constexpr double kDescriptorClip = 0.2;

// Upright 4x4x8 descriptor around (cx, cy). Window edge = 4 * scale pixels,
// Gaussian-weighted, trilinear votes in (row bin, column bin, orientation).
std::array<float, 128> descriptor_at(const GradientField& field, int cx, int cy, int scale) {
    std::array<double, 128> acc{};
    const double sigma = 2.0 * scale; // half the window width
    const int half = 2 * scale;

    for (int dy = -half; dy < half; ++dy) {
        const int y = cy + dy;
        for (int dx = -half; dx < half; ++dx) {
            const int x = cx + dx;
            const double mag = field.mag(x, y);
            if (mag == 0.0) continue;
            const double w = std::exp(-(dx * dx + dy * dy) / (2.0 * sigma * sigma));
            const double u = static_cast<double>(dx) / scale + 1.5;
            const double v = static_cast<double>(dy) / scale + 1.5;
            const double o = field.ori(x, y) / kTwoPi * kOriBins;

            const int u0 = static_cast<int>(std::floor(u));
            const int v0 = static_cast<int>(std::floor(v));
            const int o0 = static_cast<int>(std::floor(o)) % kOriBins;
            const double fu = u - std::floor(u);
            const double fv = v - std::floor(v);
            const double fo = o - std::floor(o);

            for (int du = 0; du < 2; ++du) {
                const int ub = u0 + du;
                if (ub < 0 || ub >= kSpatialBins) continue;
                const double wu = du ? fu : 1.0 - fu;
                for (int dv = 0; dv < 2; ++dv) {
                    const int vb = v0 + dv;
                    if (vb < 0 || vb >= kSpatialBins) continue;
                    const double wv = dv ? fv : 1.0 - fv;
                    for (int dob = 0; dob < 2; ++dob) {
                        const int ob = (o0 + dob) % kOriBins;
                        const double wo = dob ? fo : 1.0 - fo;
                        acc[(vb * kSpatialBins + ub) * kOriBins + ob] += mag * w * wu * wv * wo;
                    }
                }
            }
        }
    }

    // L2 normalize, clip, renormalize; flat patches stay all-zero.
    double n2 = 0.0;
    for (double a : acc) n2 += a * a;
    std::array<float, 128> out{};
    if (n2 > 0) {
        double inv = 1.0 / std::sqrt(n2);
        for (double& a : acc) a = std::min(a * inv, kDescriptorClip);
        n2 = 0.0;
        for (double a : acc) n2 += a * a;
        inv = 1.0 / std::sqrt(n2);
        for (int i = 0; i < 128; ++i) out[i] = static_cast<float>(acc[i] * inv);
    }
    return out;
}

} // namespace

std::vector<std::vector<float>> dense_sift(const Image& gray, const DenseSiftParams& p) {
    if (gray.channels != 1) throw Error("dense_sift: 1-channel image required");
    if (p.stride < 1 || p.scale < 1) throw Error("dense_sift: bad grid parameters");

    const int margin = 2 * p.scale;
    if (gray.width < 2 * margin || gray.height < 2 * margin) return {};

    const GradientField field = gradients(gray, OrientationMode::Signed);
    std::vector<std::vector<float>> out;
    for (int y = margin; y <= gray.height - margin; y += p.stride) {
        for (int x = margin; x <= gray.width - margin; x += p.stride) {
            const auto d = descriptor_at(field, x, y, p.scale);
            out.emplace_back(d.begin(), d.end());
        }
    }
    return out;
}

std::vector<double> sift_bof(const Image& gray, const Codebook& codebook, const DenseSiftParams& p) {
    if (codebook.k < 1) throw Error("sift_bof: empty codebook");
    const auto descriptors = dense_sift(gray, p);
    std::vector<double> hist(codebook.k, 0.0);
    for (const auto& d : descriptors) hist[assign(codebook, std::span<const float>(d))] += 1.0;
    double sum = 0.0;
    for (double v : hist) sum += v;
    if (sum > 0)
        for (double& v : hist) v /= sum;
    return hist;
}

} // namespace posterlab

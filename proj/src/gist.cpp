#include <cmath>
#include <complex>
#include <mutex>
#include <vector>

#include <fftw3.h>

#include "posterlab/error.hpp"
#include "posterlab/features.hpp"

namespace posterlab {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr int kScales = 4;
constexpr int kOrientations = 8;
constexpr int kGrid = 4;
constexpr double kSigmaRadial = 0.35; // log-frequency units
constexpr double kSigmaAngular = 0.2; // radians

// Log-Gabor transfer functions sampled on the FFT grid, plus shared FFT
// plans. FFTW planning is not thread-safe, so it all happens once behind the
// magic static; plan execution on per-call buffers is.
struct GistBank {
    fftw_plan forward = nullptr;
    fftw_plan inverse = nullptr;
    std::vector<std::vector<double>> transfer; // kScales*kOrientations filters, n*n each

    GistBank() {
        const int n = kGistSize;
        fftw_complex* a = fftw_alloc_complex(static_cast<std::size_t>(n) * n);
        fftw_complex* b = fftw_alloc_complex(static_cast<std::size_t>(n) * n);
        forward = fftw_plan_dft_2d(n, n, a, b, FFTW_FORWARD, FFTW_ESTIMATE);
        inverse = fftw_plan_dft_2d(n, n, a, b, FFTW_BACKWARD, FFTW_ESTIMATE);
        fftw_free(a);
        fftw_free(b);

        transfer.resize(kScales * kOrientations);
        for (int s = 0; s < kScales; ++s) {
            const double f0 = 0.25 / std::pow(2.0, s); // cycles per pixel
            for (int o = 0; o < kOrientations; ++o) {
                const double theta0 = o * kPi / kOrientations;
                auto& g = transfer[s * kOrientations + o];
                g.resize(static_cast<std::size_t>(n) * n);
                for (int ky = 0; ky < n; ++ky) {
                    const double fy = (ky <= n / 2 ? ky : ky - n) / static_cast<double>(n);
                    for (int kx = 0; kx < n; ++kx) {
                        const double fx = (kx <= n / 2 ? kx : kx - n) / static_cast<double>(n);
                        const double r = std::hypot(fx, fy);
                        double value = 0.0;
                        if (r > 0) {
                            const double lr = std::log(r / f0);
                            double dt = std::atan2(fy, fx) - theta0;
                            while (dt > kPi) dt -= 2 * kPi;
                            while (dt < -kPi) dt += 2 * kPi;
                            value = std::exp(-lr * lr / (2 * kSigmaRadial * kSigmaRadial)) *
                                    std::exp(-dt * dt / (2 * kSigmaAngular * kSigmaAngular));
                        }
                        g[static_cast<std::size_t>(ky) * n + kx] = value;
                    }
                }
            }
        }
    }
};

GistBank& bank() {
    static GistBank b;
    return b;
}

} // namespace

std::vector<double> gist(const Image& gray256) {
    if (gray256.channels != 1) throw Error("gist: 1-channel image required");
    if (gray256.width != kGistSize || gray256.height != kGistSize)
        throw Error("gist: expected a " + std::to_string(kGistSize) + "x" + std::to_string(kGistSize) + " input");

    const GistBank& gb = bank();
    const int n = kGistSize;
    const std::size_t n2 = static_cast<std::size_t>(n) * n;

    fftw_complex* buf_in = fftw_alloc_complex(n2);
    fftw_complex* spectrum = fftw_alloc_complex(n2);
    fftw_complex* filtered = fftw_alloc_complex(n2);
    fftw_complex* response = fftw_alloc_complex(n2);

    for (std::size_t i = 0; i < n2; ++i) {
        buf_in[i][0] = gray256.data[i];
        buf_in[i][1] = 0.0;
    }
    fftw_execute_dft(gb.forward, buf_in, spectrum);
    spectrum[0][0] = 0.0; // drop DC so flat images produce an exactly zero descriptor
    spectrum[0][1] = 0.0;

    std::vector<double> out;
    out.reserve(kGistDim);
    const int block = n / kGrid;
    for (const auto& g : gb.transfer) {
        for (std::size_t i = 0; i < n2; ++i) {
            filtered[i][0] = spectrum[i][0] * g[i];
            filtered[i][1] = spectrum[i][1] * g[i];
        }
        fftw_execute_dft(gb.inverse, filtered, response);
        for (int gy = 0; gy < kGrid; ++gy) {
            for (int gx = 0; gx < kGrid; ++gx) {
                double sum = 0.0;
                for (int y = gy * block; y < (gy + 1) * block; ++y)
                    for (int x = gx * block; x < (gx + 1) * block; ++x) {
                        const std::size_t i = static_cast<std::size_t>(y) * n + x;
                        sum += std::hypot(response[i][0], response[i][1]);
                    }
                out.push_back(sum / (static_cast<double>(block) * block * n2)); // n2 undoes FFTW scaling
            }
        }
    }

    fftw_free(buf_in);
    fftw_free(spectrum);
    fftw_free(filtered);
    fftw_free(response);

    double norm2 = 0.0;
    for (double v : out) norm2 += v * v;
    if (norm2 > 0) {
        const double inv = 1.0 / std::sqrt(norm2);
        for (double& v : out) v *= inv;
    }
    return out;
}

} // namespace posterlab

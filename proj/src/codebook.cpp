#include "posterlab/codebook.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <random>

#include "posterlab/error.hpp"

namespace posterlab {

namespace {

// Uniform double in [0,1) straight from the engine; avoids the
// implementation-defined std distributions.
inline double next_unit(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline double sqdist(const float* p, const double* c, int dim) {
    double s = 0.0;
    for (int j = 0; j < dim; ++j) {
        const double d = static_cast<double>(p[j]) - c[j];
        s += d * d;
    }
    return s;
}

template <typename T>
int nearest(const Codebook& cb, const T* v) {
    int best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (int i = 0; i < cb.k; ++i) {
        double s = 0.0;
        const double* c = cb.centroids.data() + static_cast<std::size_t>(i) * cb.dim;
        for (int j = 0; j < cb.dim; ++j) {
            const double d = static_cast<double>(v[j]) - c[j];
            s += d * d;
        }
        if (s < best_d) { // strict: ties keep the lowest index
            best_d = s;
            best = i;
        }
    }
    return best;
}

} // namespace

Codebook kmeans_fit(const std::vector<float>& points, int n, int dim, int k, std::uint64_t seed,
                    int max_iter, double tol) {
    if (k < 1) throw Error("kmeans: k must be >= 1");
    if (dim < 1) throw Error("kmeans: dim must be >= 1");
    if (n < k) throw Error("kmeans: need at least k points (" + std::to_string(n) + " < " + std::to_string(k) + ")");
    if (points.size() != static_cast<std::size_t>(n) * dim) throw Error("kmeans: point buffer size mismatch");
    for (float v : points)
        if (!std::isfinite(v)) throw Error("kmeans: non-finite input");

    Codebook cb;
    cb.k = k;
    cb.dim = dim;
    cb.seed = seed;
    cb.centroids.resize(static_cast<std::size_t>(k) * dim);

    std::mt19937_64 rng(seed);
    const auto point = [&](int i) { return points.data() + static_cast<std::size_t>(i) * dim; };

    // k-means++ seeding.
    std::vector<double> min_d2(n, std::numeric_limits<double>::infinity());
    {
        const int first = static_cast<int>(next_unit(rng) * n);
        for (int j = 0; j < dim; ++j) cb.centroids[j] = point(first)[j];
        for (int c = 1; c < k; ++c) {
            double total = 0.0;
            const double* prev = cb.centroids.data() + static_cast<std::size_t>(c - 1) * dim;
            for (int i = 0; i < n; ++i) {
                min_d2[i] = std::min(min_d2[i], sqdist(point(i), prev, dim));
                total += min_d2[i];
            }
            int pick = n - 1;
            if (total > 0) {
                const double r = next_unit(rng) * total;
                double acc = 0.0;
                for (int i = 0; i < n; ++i) {
                    acc += min_d2[i];
                    if (acc >= r) {
                        pick = i;
                        break;
                    }
                }
            } else {
                pick = static_cast<int>(next_unit(rng) * n);
            }
            double* dst = cb.centroids.data() + static_cast<std::size_t>(c) * dim;
            for (int j = 0; j < dim; ++j) dst[j] = point(pick)[j];
        }
    }

    std::vector<int> labels(n, 0);
    std::vector<double> sums(static_cast<std::size_t>(k) * dim);
    std::vector<int> counts(k);
    double prev_inertia = std::numeric_limits<double>::infinity();

    for (int iter = 0; iter < max_iter; ++iter) {
        // Assignment.
        double inertia = 0.0;
        for (int i = 0; i < n; ++i) {
            const int c = nearest(cb, point(i));
            labels[i] = c;
            inertia += sqdist(point(i), cb.centroids.data() + static_cast<std::size_t>(c) * dim, dim);
        }
        if (inertia > prev_inertia + 1e-9 * std::abs(prev_inertia) + 1e-12)
            throw std::logic_error("kmeans: inertia increased between iterations");
        prev_inertia = inertia;
        cb.inertia = inertia;

        // Update.
        std::fill(sums.begin(), sums.end(), 0.0);
        std::fill(counts.begin(), counts.end(), 0);
        for (int i = 0; i < n; ++i) {
            double* s = sums.data() + static_cast<std::size_t>(labels[i]) * dim;
            const float* p = point(i);
            for (int j = 0; j < dim; ++j) s[j] += p[j];
            ++counts[labels[i]];
        }

        double max_shift2 = 0.0;
        for (int c = 0; c < k; ++c) {
            double* dst = cb.centroids.data() + static_cast<std::size_t>(c) * dim;
            if (counts[c] == 0) {
                // Re-seed to the point farthest from its own centroid.
                int far_i = 0;
                double far_d = -1.0;
                for (int i = 0; i < n; ++i) {
                    const double d = sqdist(point(i), cb.centroids.data() + static_cast<std::size_t>(labels[i]) * dim, dim);
                    if (d > far_d) {
                        far_d = d;
                        far_i = i;
                    }
                }
                for (int j = 0; j < dim; ++j) dst[j] = point(far_i)[j];
                prev_inertia = std::numeric_limits<double>::infinity(); // moved mass invalidates the bound
                max_shift2 = std::numeric_limits<double>::infinity();
                continue;
            }
            double shift2 = 0.0;
            for (int j = 0; j < dim; ++j) {
                const double next = sums[static_cast<std::size_t>(c) * dim + j] / counts[c];
                const double d = next - dst[j];
                shift2 += d * d;
                dst[j] = next;
            }
            max_shift2 = std::max(max_shift2, shift2);
        }

        if (max_shift2 < tol * tol) {
            // Final assignment pass so inertia matches the converged centroids.
            double inertia2 = 0.0;
            for (int i = 0; i < n; ++i) {
                const int c = nearest(cb, point(i));
                inertia2 += sqdist(point(i), cb.centroids.data() + static_cast<std::size_t>(c) * dim, dim);
            }
            cb.inertia = inertia2;
            break;
        }
    }
    return cb;
}

int assign(const Codebook& cb, std::span<const float> v) {
    if (static_cast<int>(v.size()) != cb.dim)
        throw Error("assign: dim mismatch (" + std::to_string(v.size()) + " vs " + std::to_string(cb.dim) + ")");
    return nearest(cb, v.data());
}

int assign(const Codebook& cb, std::span<const double> v) {
    if (static_cast<int>(v.size()) != cb.dim)
        throw Error("assign: dim mismatch (" + std::to_string(v.size()) + " vs " + std::to_string(cb.dim) + ")");
    return nearest(cb, v.data());
}

FeatureFile codebook_to_pfv(const Codebook& cb) {
    FeatureFile file;
    file.channel = "codebook:sift";
    file.dim = static_cast<std::uint32_t>(cb.dim);
    file.records.resize(cb.k);
    for (int i = 0; i < cb.k; ++i) {
        char id[16];
        std::snprintf(id, sizeof id, "c%04d", i);
        file.records[i].id = id;
        file.records[i].values.resize(cb.dim);
        for (int j = 0; j < cb.dim; ++j)
            file.records[i].values[j] = static_cast<float>(cb.centroids[static_cast<std::size_t>(i) * cb.dim + j]);
    }
    return file;
}

Codebook codebook_from_pfv(const FeatureFile& file) {
    Codebook cb;
    cb.k = static_cast<int>(file.records.size());
    cb.dim = static_cast<int>(file.dim);
    if (cb.k < 1) throw Error("codebook PFV has no centroids");
    cb.centroids.resize(static_cast<std::size_t>(cb.k) * cb.dim);
    for (int i = 0; i < cb.k; ++i)
        for (int j = 0; j < cb.dim; ++j)
            cb.centroids[static_cast<std::size_t>(i) * cb.dim + j] = file.records[i].values[j];
    return cb;
}

} // namespace posterlab

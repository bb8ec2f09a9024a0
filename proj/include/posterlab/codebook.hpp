#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "posterlab/pfv.hpp"

namespace posterlab {

// k-means codebook over fixed-dimension descriptors.
struct Codebook {
    int k = 0;
    int dim = 0;
    std::vector<double> centroids; // k x dim, row-major
    double inertia = 0.0;          // within-cluster SSE at convergence
    std::uint64_t seed = 0;

    std::span<const double> centroid(int i) const {
        return {centroids.data() + static_cast<std::size_t>(i) * dim, static_cast<std::size_t>(dim)};
    }
};

// Lloyd's algorithm with k-means++ seeding from a seeded PRNG. Empty clusters
// are re-seeded to the point farthest from its current centroid. Runs until
// the largest centroid shift falls below tol or max_iter is reached. Fixed
// seed and data order give bit-identical results.
Codebook kmeans_fit(const std::vector<float>& points, int n, int dim, int k, std::uint64_t seed,
                    int max_iter = 100, double tol = 1e-4);

// Nearest centroid by squared Euclidean distance, ties to the lowest index.
int assign(const Codebook& cb, std::span<const float> v);
int assign(const Codebook& cb, std::span<const double> v);

// PFV persistence: channel "codebook:sift", ids "c0000".."cNNNN".
FeatureFile codebook_to_pfv(const Codebook& cb);
Codebook codebook_from_pfv(const FeatureFile& file);

} // namespace posterlab

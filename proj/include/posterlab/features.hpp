#pragma once

#include <array>
#include <string>
#include <vector>

#include "posterlab/codebook.hpp"
#include "posterlab/image.hpp"

namespace posterlab {

// --- color -------------------------------------------------------------

// Three 30-bin histograms: L over [0,100], a and b over [-128,128). Each
// block L1-normalized to sum 1, concatenated L||a||b. 90 dims.
std::vector<double> lab_histogram(const LabImage& lab);
inline constexpr int kLabDim = 90;

// --- texture -----------------------------------------------------------

// 8-neighbor LBP codes with the uniform-pattern mapping: 58 uniform bins
// plus one catch-all, L1-normalized. 59 dims.
std::vector<double> lbp_histogram(const Image& gray);
inline constexpr int kLbpDim = 59;

// Uniform-pattern bin for one 8-bit LBP code (58 = non-uniform catch-all).
int lbp_uniform_bin(unsigned code);

// --- gradients ---------------------------------------------------------

// 8x8 cells, 9 unsigned orientation bins, 2x2-cell blocks with L2-hys
// normalization (clip 0.2, renormalize). On the canonical 256x384 input the
// dimension is 31*47*4*9 = 52452.
std::vector<double> hog(const Image& gray);
int hog_dim(int width, int height);

// Gradient-orientation co-occurrence over 31 offsets (identity plus the 30
// asymmetric offsets in the upper half of a 9x9 neighborhood), 8 unsigned
// orientation bins, 2x2 spatial grid. Each offset-cell 8x8 matrix is
// L1-normalized. 4*31*64 = 7936 dims. cohog counts pairs; ecohog weights
// each pair by the product of the two gradient magnitudes.
std::vector<double> cohog(const Image& gray);
std::vector<double> ecohog(const Image& gray);
std::vector<double> cooccurrence_histogram(const GradientField& field, bool magnitude_weighted);
inline constexpr int kCohogDim = 7936;
inline constexpr double kCohogMagnitudeThreshold = 1.0;

const std::vector<std::pair<int, int>>& cohog_offsets(); // 31 entries, (0,0) first

// --- spectral ----------------------------------------------------------

// Gabor bank of 4 scales x 8 orientations applied in the frequency domain on
// a 256x256 input; mean response magnitude over a 4x4 grid; L2-normalized.
// 512 dims (all-zero for constant images).
std::vector<double> gist(const Image& gray256);
inline constexpr int kGistDim = 512;

// --- local descriptors + bag of features --------------------------------

struct DenseSiftParams {
    int stride = 16;
    int scale = 8; // spatial bin edge in pixels; window = 4 * scale
};

// Upright SIFT descriptors on a dense grid: 4x4 spatial bins x 8 orientation
// bins, trilinear voting, L2-clip 0.2-renormalize. 128 dims each.
std::vector<std::vector<float>> dense_sift(const Image& gray, const DenseSiftParams& p = {});

// Hard-assignment bag-of-features histogram over a trained codebook,
// L1-normalized. k dims.
std::vector<double> sift_bof(const Image& gray, const Codebook& codebook,
                             const DenseSiftParams& p = {});

// --- faces ---------------------------------------------------------------

enum class Expression {
    Neutral = 0,
    Happiness,
    Surprise,
    Sadness,
    Anger,
    Disgust,
    Fear,
    Contempt,
};
inline constexpr int kExpressionCount = 8;

std::string to_string(Expression e);
Expression expression_from_string(const std::string& name);

struct FaceAnnotation {
    double x = 0, y = 0, w = 0, h = 0; // bbox in original image coordinates
    Expression expression = Expression::Neutral;
    double confidence = 0.0;
};

// Sidecar format: {"faces":[{"bbox":[x,y,w,h],"expression":"happiness",
// "confidence":0.93}, ...]}.
std::vector<FaceAnnotation> load_face_annotations(const std::string& path);

// Quadrant (UL, UR, LL, LR) of the bbox center, times an 8-bin expression
// count histogram, each quadrant L1-normalized (all-zero quadrants stay
// zero). dim index = quadrant*8 + expression. 32 dims.
std::vector<double> emotion_histogram(const std::vector<FaceAnnotation>& faces, int img_w, int img_h,
                                      bool per_quadrant_norm = true);
inline constexpr int kEmotionDim = 32;

} // namespace posterlab

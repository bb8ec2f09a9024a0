#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace posterlab {

enum class Kernel { Rbf, Linear };

std::string to_string(Kernel k);
Kernel kernel_from_string(const std::string& name);

struct SvmParams {
    double c = 5.0e4;
    // Unset gamma resolves at train time: 1e-5, or 1/dim when standardized
    // features are announced via gamma_scale_dim.
    std::optional<double> gamma;
    bool gamma_scale_dim = false;
    Kernel kernel = Kernel::Rbf;
    bool class_weighting = true; // C+ = C * n- / n+, C- = C
    double kkt_tol = 1e-3;
    long max_passes = 20'000'000; // cap on SMO pair updates
};

// Trained binary SVM. coef[i] = alpha_i * y_i for the retained support
// vectors; decision(x) = sum_i coef[i] K(sv_i, x) + bias.
struct SvmModel {
    std::string channel;
    int dim = 0;
    Kernel kernel = Kernel::Rbf;
    double gamma = 0.0; // resolved value actually used
    double c = 0.0;
    bool class_weighting = true;
    double kkt_tol = 1e-3;
    std::vector<std::vector<float>> support_vectors;
    std::vector<double> coef;
    double bias = 0.0;
    // Platt sigmoid p = 1 / (1 + exp(a * margin + b)); a < 0 when the
    // classifier is oriented with winners on the positive side.
    double platt_a = 0.0;
    double platt_b = 0.0;
    bool calibrated = false;
};

struct Posterior {
    std::string poster_id;
    double p_winner = 0.0;
};

// SMO with maximal-KKT-violation pair selection on the dual QP. Labels are
// +1/-1 and both classes must be present. Deterministic for a fixed data
// order.
SvmModel svm_train(const std::vector<std::vector<float>>& x, const std::vector<int>& y,
                   const SvmParams& params);

double decision(const SvmModel& model, std::span<const float> x);

struct PlattScale {
    double a = 0.0;
    double b = 0.0;
};

// Newton fit of the regularized sigmoid likelihood with Platt's smoothed
// targets t+ = (N+ + 1)/(N+ + 2), t- = 1/(N- + 2). All-equal margins fall
// back to a = 0, b = log(N-'/N+') from the smoothed priors.
PlattScale platt_fit(const std::vector<double>& margins, const std::vector<int>& labels);

double sigmoid_posterior(const PlattScale& s, double margin); // clamped to [1e-7, 1-1e-7]

// p(winner | x) through the model's fitted sigmoid. Throws on uncalibrated
// models.
double predict_proba(const SvmModel& model, std::span<const float> x);

// Train on all rows, with Platt coefficients fitted on out-of-fold margins
// from an internal stratified split (3 folds when the data allows it).
SvmModel train_calibrated(const std::vector<std::vector<float>>& x, const std::vector<int>& y,
                          const SvmParams& params, int calibration_folds = 3);

// Diagnostics used by tests: dual objective from the stored expansion, and
// the largest KKT violation over a labeled sample set.
double dual_objective(const SvmModel& model);
double max_kkt_violation(const SvmModel& model, const std::vector<std::vector<float>>& x,
                         const std::vector<int>& y);

// Per-dimension z-scoring fitted on training rows; zero-variance dimensions
// map to 0.
struct Standardizer {
    std::vector<double> mean;
    std::vector<double> inv_std;

    void fit(const std::vector<std::vector<float>>& rows);
    std::vector<float> apply(std::span<const float> row) const;
};

// Model bundle: "<base>.json" single-line text header + "<base>.pfv" with one
// record per support vector (value 0 is the dual coefficient). Coefficients
// round-trip bit-exactly.
void save_model(const SvmModel& model, const std::string& base_path);
SvmModel load_model(const std::string& base_path);

} // namespace posterlab

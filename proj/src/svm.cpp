#include "posterlab/svm.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <list>
#include <unordered_map>

#include <json.hpp>

#include "posterlab/error.hpp"
#include "posterlab/pfv.hpp"

namespace posterlab {

std::string to_string(Kernel k) { return k == Kernel::Rbf ? "rbf" : "linear"; }

Kernel kernel_from_string(const std::string& name) {
    if (name == "rbf") return Kernel::Rbf;
    if (name == "linear") return Kernel::Linear;
    throw Error("unknown kernel: '" + name + "'");
}

namespace {

double kernel_eval(Kernel kernel, double gamma, std::span<const float> a, std::span<const float> b) {
    if (kernel == Kernel::Linear) {
        double dot = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i) dot += static_cast<double>(a[i]) * b[i];
        return dot;
    }
    double d2 = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = static_cast<double>(a[i]) - b[i];
        d2 += d * d;
    }
    return std::exp(-gamma * d2);
}

// Kernel matrix rows, fully materialized up to 8000 samples, row-LRU beyond.
class KernelCache {
public:
    KernelCache(const std::vector<std::vector<float>>& x, Kernel kernel, double gamma)
        : x_(x), kernel_(kernel), gamma_(gamma), n_(x.size()) {
        if (n_ <= 8000) {
            full_.assign(n_ * n_, 0.0);
            for (std::size_t i = 0; i < n_; ++i)
                for (std::size_t j = i; j < n_; ++j) {
                    const double k = kernel_eval(kernel_, gamma_, x_[i], x_[j]);
                    full_[i * n_ + j] = k;
                    full_[j * n_ + i] = k;
                }
        } else {
            capacity_ = std::max<std::size_t>(16, 8000ull * 8000ull / n_);
        }
    }

    const double* row(std::size_t i) {
        if (!full_.empty()) return full_.data() + i * n_;
        auto it = rows_.find(i);
        if (it != rows_.end()) {
            lru_.splice(lru_.begin(), lru_, it->second.second);
            return it->second.first.data();
        }
        if (rows_.size() >= capacity_) {
            rows_.erase(lru_.back());
            lru_.pop_back();
        }
        std::vector<double> r(n_);
        for (std::size_t j = 0; j < n_; ++j) r[j] = kernel_eval(kernel_, gamma_, x_[i], x_[j]);
        lru_.push_front(i);
        auto [pos, ok] = rows_.emplace(i, std::make_pair(std::move(r), lru_.begin()));
        (void)ok;
        return pos->second.first.data();
    }

private:
    const std::vector<std::vector<float>>& x_;
    Kernel kernel_;
    double gamma_;
    std::size_t n_;
    std::vector<double> full_;
    std::size_t capacity_ = 0;
    std::list<std::size_t> lru_;
    std::unordered_map<std::size_t, std::pair<std::vector<double>, std::list<std::size_t>::iterator>> rows_;
};

double resolve_gamma(const SvmParams& p, int dim) {
    if (p.gamma) return *p.gamma;
    if (p.gamma_scale_dim) return 1.0 / dim;
    return 1.0e-5;
}

} // namespace

SvmModel svm_train(const std::vector<std::vector<float>>& x, const std::vector<int>& y,
                   const SvmParams& params) {
    const std::size_t n = x.size();
    if (n < 2 || y.size() != n) throw Error("svm_train: need at least two labeled rows");
    const int dim = static_cast<int>(x[0].size());
    std::size_t n_pos = 0, n_neg = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (static_cast<int>(x[i].size()) != dim) throw Error("svm_train: ragged feature rows");
        for (float v : x[i])
            if (!std::isfinite(v)) throw Error("svm_train: non-finite feature value");
        if (y[i] > 0)
            ++n_pos;
        else
            ++n_neg;
    }
    if (n_pos == 0 || n_neg == 0) throw Error("svm_train: single-class input");
    if (params.c <= 0) throw Error("svm_train: C must be positive");

    const double gamma = resolve_gamma(params, dim);
    if (params.kernel == Kernel::Rbf && gamma <= 0) throw Error("svm_train: gamma must be positive");

    const double c_pos = params.class_weighting
                             ? params.c * static_cast<double>(n_neg) / static_cast<double>(n_pos)
                             : params.c;
    const double c_neg = params.c;
    const auto box = [&](std::size_t i) { return y[i] > 0 ? c_pos : c_neg; };

    KernelCache cache(x, params.kernel, gamma);

    // Dual state. grad[i] = (Q alpha)_i - 1 with Q_ij = y_i y_j K_ij, so the
    // KKT score -y_i grad[i] is shared by selection, stopping and bias.
    std::vector<double> alpha(n, 0.0);
    std::vector<double> grad(n, -1.0);

    long passes = 0;
    double m_up = 0.0, m_low = 0.0;
    while (passes < params.max_passes) {
        // Maximal violating pair.
        std::ptrdiff_t i_sel = -1, j_sel = -1;
        m_up = -std::numeric_limits<double>::infinity();
        m_low = std::numeric_limits<double>::infinity();
        for (std::size_t k = 0; k < n; ++k) {
            const double score = -y[k] * grad[k];
            const bool in_up = y[k] > 0 ? alpha[k] < box(k) : alpha[k] > 0;
            const bool in_low = y[k] > 0 ? alpha[k] > 0 : alpha[k] < box(k);
            if (in_up && score > m_up) {
                m_up = score;
                i_sel = static_cast<std::ptrdiff_t>(k);
            }
            if (in_low && score < m_low) {
                m_low = score;
                j_sel = static_cast<std::ptrdiff_t>(k);
            }
        }
        if (i_sel < 0 || j_sel < 0 || m_up - m_low <= params.kkt_tol) break;

        const std::size_t i = static_cast<std::size_t>(i_sel);
        const std::size_t j = static_cast<std::size_t>(j_sel);
        const double* ki = cache.row(i);
        const double* kj = cache.row(j);

        // Two-variable analytic step. Clipped values are reconstructed from
        // the conserved pair quantity so they land exactly on 0 or C; alphas
        // a few ulps off a bound would otherwise stay selectable forever.
        const double c_i = box(i), c_j = box(j);
        const double ai_old = alpha[i], aj_old = alpha[j];
        if (y[i] != y[j]) {
            const double quad = std::max(ki[i] + kj[j] + 2.0 * ki[j] * y[i] * y[j], 1e-12);
            const double delta = (-grad[i] - grad[j]) / quad;
            const double diff = ai_old - aj_old;
            alpha[i] += delta;
            alpha[j] += delta;
            if (diff > 0) {
                if (alpha[j] < 0) { alpha[j] = 0; alpha[i] = diff; }
            } else {
                if (alpha[i] < 0) { alpha[i] = 0; alpha[j] = -diff; }
            }
            if (diff > c_i - c_j) {
                if (alpha[i] > c_i) { alpha[i] = c_i; alpha[j] = c_i - diff; }
            } else {
                if (alpha[j] > c_j) { alpha[j] = c_j; alpha[i] = c_j + diff; }
            }
        } else {
            const double quad = std::max(ki[i] + kj[j] - 2.0 * ki[j] * y[i] * y[j], 1e-12);
            const double delta = (grad[i] - grad[j]) / quad;
            const double sum = ai_old + aj_old;
            alpha[i] -= delta;
            alpha[j] += delta;
            if (sum > c_i) {
                if (alpha[i] > c_i) { alpha[i] = c_i; alpha[j] = sum - c_i; }
            } else {
                if (alpha[j] < 0) { alpha[j] = 0; alpha[i] = sum; }
            }
            if (sum > c_j) {
                if (alpha[j] > c_j) { alpha[j] = c_j; alpha[i] = sum - c_j; }
            } else {
                if (alpha[i] < 0) { alpha[i] = 0; alpha[j] = sum; }
            }
        }

        const double di = alpha[i] - ai_old;
        const double dj = alpha[j] - aj_old;
        if (di == 0.0 && dj == 0.0) break; // numerically exhausted
        for (std::size_t k = 0; k < n; ++k)
            grad[k] += y[k] * (y[i] * ki[k] * di + y[j] * kj[k] * dj);
        ++passes;
    }

    // Bias from the free support vectors, midpoint of the KKT bracket
    // otherwise.
    double b_sum = 0.0;
    std::size_t b_count = 0;
    for (std::size_t k = 0; k < n; ++k) {
        if (alpha[k] > 0 && alpha[k] < box(k)) {
            b_sum += -y[k] * grad[k];
            ++b_count;
        }
    }
    const double bias = b_count > 0 ? b_sum / static_cast<double>(b_count) : (m_up + m_low) / 2.0;

    SvmModel model;
    model.dim = dim;
    model.kernel = params.kernel;
    model.gamma = gamma;
    model.c = params.c;
    model.class_weighting = params.class_weighting;
    model.kkt_tol = params.kkt_tol;
    model.bias = bias;
    for (std::size_t k = 0; k < n; ++k) {
        if (alpha[k] > 0) {
            model.support_vectors.push_back(x[k]);
            model.coef.push_back(alpha[k] * y[k]);
        }
    }
    return model;
}

double decision(const SvmModel& model, std::span<const float> x) {
    if (static_cast<int>(x.size()) != model.dim)
        throw Error("decision: dim mismatch (" + std::to_string(x.size()) + " vs " + std::to_string(model.dim) + ")");
    double sum = model.bias;
    for (std::size_t i = 0; i < model.support_vectors.size(); ++i)
        sum += model.coef[i] * kernel_eval(model.kernel, model.gamma, model.support_vectors[i], x);
    return sum;
}

PlattScale platt_fit(const std::vector<double>& margins, const std::vector<int>& labels) {
    const std::size_t n = margins.size();
    if (n == 0 || labels.size() != n) throw Error("platt_fit: empty or mismatched inputs");
    double prior_pos = 0, prior_neg = 0;
    for (int y : labels) (y > 0 ? prior_pos : prior_neg) += 1.0;
    if (prior_pos == 0 || prior_neg == 0) throw Error("platt_fit: both classes required");

    const double fallback_b = std::log((prior_neg + 1.0) / (prior_pos + 1.0));

    const auto [mn, mx] = std::minmax_element(margins.begin(), margins.end());
    if (*mx - *mn < 1e-12) return {0.0, fallback_b}; // all margins equal

    // Newton with backtracking on the cross-entropy of p = 1/(1+exp(A f + B)),
    // targets smoothed per Platt.
    const double hi_t = (prior_pos + 1.0) / (prior_pos + 2.0);
    const double lo_t = 1.0 / (prior_neg + 2.0);
    std::vector<double> t(n);
    for (std::size_t i = 0; i < n; ++i) t[i] = labels[i] > 0 ? hi_t : lo_t;

    const auto objective = [&](double a, double b) {
        double f = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double z = a * margins[i] + b;
            f += z >= 0 ? t[i] * z + std::log1p(std::exp(-z))
                        : (t[i] - 1.0) * z + std::log1p(std::exp(z));
        }
        return f;
    };

    double a = 0.0, b = fallback_b;
    double fval = objective(a, b);
    constexpr double kSigma = 1e-12, kEps = 1e-5;
    for (int iter = 0; iter < 100; ++iter) {
        double h11 = kSigma, h22 = kSigma, h21 = 0.0, g1 = 0.0, g2 = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double z = a * margins[i] + b;
            double p, q;
            if (z >= 0) {
                p = std::exp(-z) / (1.0 + std::exp(-z));
                q = 1.0 / (1.0 + std::exp(-z));
            } else {
                p = 1.0 / (1.0 + std::exp(z));
                q = std::exp(z) / (1.0 + std::exp(z));
            }
            const double d2 = p * q;
            h11 += margins[i] * margins[i] * d2;
            h22 += d2;
            h21 += margins[i] * d2;
            const double d1 = t[i] - p;
            g1 += margins[i] * d1;
            g2 += d1;
        }
        if (std::abs(g1) < kEps && std::abs(g2) < kEps) break;

        const double det = h11 * h22 - h21 * h21;
        const double da = -(h22 * g1 - h21 * g2) / det;
        const double db = -(-h21 * g1 + h11 * g2) / det;
        const double gd = g1 * da + g2 * db;

        double step = 1.0;
        while (step >= 1e-10) {
            const double fnew = objective(a + step * da, b + step * db);
            if (fnew < fval + 1e-4 * step * gd) {
                a += step * da;
                b += step * db;
                fval = fnew;
                break;
            }
            step /= 2.0;
        }
        if (step < 1e-10) break; // line search failed
    }
    return {a, b};
}

double sigmoid_posterior(const PlattScale& s, double margin) {
    const double z = s.a * margin + s.b;
    const double p = z >= 0 ? std::exp(-z) / (1.0 + std::exp(-z)) : 1.0 / (1.0 + std::exp(z));
    return std::clamp(p, 1e-7, 1.0 - 1e-7);
}

double predict_proba(const SvmModel& model, std::span<const float> x) {
    if (!model.calibrated) throw Error("predict_proba: model is not calibrated");
    return sigmoid_posterior({model.platt_a, model.platt_b}, decision(model, x));
}

SvmModel train_calibrated(const std::vector<std::vector<float>>& x, const std::vector<int>& y,
                          const SvmParams& params, int calibration_folds) {
    const std::size_t n = x.size();
    std::vector<std::size_t> pos, neg;
    for (std::size_t i = 0; i < n; ++i) (y[i] > 0 ? pos : neg).push_back(i);

    std::vector<double> margins;
    std::vector<int> labels;

    const int folds = std::min<int>(calibration_folds,
                                    static_cast<int>(std::min(pos.size(), neg.size())));
    if (folds >= 2) {
        // Stratified round-robin split; every internal training part keeps
        // both classes.
        std::vector<int> fold_of(n);
        for (std::size_t i = 0; i < pos.size(); ++i) fold_of[pos[i]] = static_cast<int>(i % folds);
        for (std::size_t i = 0; i < neg.size(); ++i) fold_of[neg[i]] = static_cast<int>(i % folds);

        for (int f = 0; f < folds; ++f) {
            std::vector<std::vector<float>> xt;
            std::vector<int> yt;
            for (std::size_t i = 0; i < n; ++i) {
                if (fold_of[i] != f) {
                    xt.push_back(x[i]);
                    yt.push_back(y[i]);
                }
            }
            const SvmModel part = svm_train(xt, yt, params);
            for (std::size_t i = 0; i < n; ++i) {
                if (fold_of[i] == f) {
                    margins.push_back(decision(part, x[i]));
                    labels.push_back(y[i]);
                }
            }
        }
    }

    SvmModel model = svm_train(x, y, params);
    if (margins.empty()) {
        // Too few samples of one class to split; fall back to in-sample
        // margins.
        for (std::size_t i = 0; i < n; ++i) {
            margins.push_back(decision(model, x[i]));
            labels.push_back(y[i]);
        }
    }
    const PlattScale scale = platt_fit(margins, labels);
    model.platt_a = scale.a;
    model.platt_b = scale.b;
    model.calibrated = true;
    return model;
}

double dual_objective(const SvmModel& model) {
    // W(alpha) = sum alpha_i - 1/2 sum_ij coef_i coef_j K_ij, with
    // alpha_i = |coef_i|.
    double lin = 0.0;
    for (double c : model.coef) lin += std::abs(c);
    double quad = 0.0;
    const std::size_t m = model.support_vectors.size();
    for (std::size_t i = 0; i < m; ++i) {
        quad += model.coef[i] * model.coef[i] *
                kernel_eval(model.kernel, model.gamma, model.support_vectors[i], model.support_vectors[i]);
        for (std::size_t j = i + 1; j < m; ++j)
            quad += 2.0 * model.coef[i] * model.coef[j] *
                    kernel_eval(model.kernel, model.gamma, model.support_vectors[i], model.support_vectors[j]);
    }
    return lin - 0.5 * quad;
}

double max_kkt_violation(const SvmModel& model, const std::vector<std::vector<float>>& x,
                         const std::vector<int>& y) {
    std::size_t n_pos = 0, n_neg = 0;
    for (int yi : y) (yi > 0 ? n_pos : n_neg) += 1;
    const double c_pos = model.class_weighting
                             ? model.c * static_cast<double>(n_neg) / static_cast<double>(n_pos)
                             : model.c;
    const double c_neg = model.c;

    // Recover alpha for each row from the stored expansion (zero when the row
    // is not a support vector).
    std::unordered_map<std::size_t, double> alpha_at; // index into x -> alpha
    std::size_t sv = 0;
    for (std::size_t i = 0; i < x.size() && sv < model.support_vectors.size(); ++i) {
        if (x[i] == model.support_vectors[sv]) {
            alpha_at[i] = std::abs(model.coef[sv]);
            ++sv;
        }
    }

    double worst = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double yf = y[i] * decision(model, x[i]);
        const double a = alpha_at.count(i) ? alpha_at[i] : 0.0;
        const double ci = y[i] > 0 ? c_pos : c_neg;
        double viol = 0.0;
        if (a <= 1e-12 * ci)
            viol = std::max(0.0, 1.0 - yf);
        else if (a >= ci * (1.0 - 1e-12))
            viol = std::max(0.0, yf - 1.0);
        else
            viol = std::abs(yf - 1.0);
        worst = std::max(worst, viol);
    }
    return worst;
}

void Standardizer::fit(const std::vector<std::vector<float>>& rows) {
    if (rows.empty()) throw Error("standardizer: no rows");
    const std::size_t d = rows[0].size();
    mean.assign(d, 0.0);
    inv_std.assign(d, 0.0);
    for (const auto& r : rows)
        for (std::size_t j = 0; j < d; ++j) mean[j] += r[j];
    for (std::size_t j = 0; j < d; ++j) mean[j] /= static_cast<double>(rows.size());
    std::vector<double> var(d, 0.0);
    for (const auto& r : rows)
        for (std::size_t j = 0; j < d; ++j) {
            const double dj = r[j] - mean[j];
            var[j] += dj * dj;
        }
    for (std::size_t j = 0; j < d; ++j) {
        const double sd = std::sqrt(var[j] / static_cast<double>(rows.size()));
        inv_std[j] = sd > 1e-12 ? 1.0 / sd : 0.0;
    }
}

std::vector<float> Standardizer::apply(std::span<const float> row) const {
    std::vector<float> out(row.size());
    for (std::size_t j = 0; j < row.size(); ++j)
        out[j] = static_cast<float>((row[j] - mean[j]) * inv_std[j]);
    return out;
}

void save_model(const SvmModel& model, const std::string& base_path) {
    nlohmann::json header{
        {"channel", model.channel},
        {"dim", model.dim},
        {"kernel", to_string(model.kernel)},
        {"c", model.c},
        {"gamma", model.gamma},
        {"class_weighting", model.class_weighting},
        {"kkt_tol", model.kkt_tol},
        {"bias", model.bias},
        {"platt_a", model.platt_a},
        {"platt_b", model.platt_b},
        {"calibrated", model.calibrated},
        {"sv_count", model.support_vectors.size()},
    };
    std::ofstream out(base_path + ".json", std::ios::trunc);
    if (!out) throw Error("cannot write model header: " + base_path + ".json");
    out << header.dump() << "\n";

    FeatureFile file;
    file.channel = "svm:" + model.channel;
    file.dim = static_cast<std::uint32_t>(model.dim + 1);
    file.records.resize(model.support_vectors.size());
    for (std::size_t i = 0; i < model.support_vectors.size(); ++i) {
        char id[24];
        std::snprintf(id, sizeof id, "sv%06zu", i);
        file.records[i].id = id;
        file.records[i].values.reserve(file.dim);
        file.records[i].values.push_back(static_cast<float>(model.coef[i]));
        file.records[i].values.insert(file.records[i].values.end(), model.support_vectors[i].begin(),
                                      model.support_vectors[i].end());
    }
    write_pfv(base_path + ".pfv", file);
}

SvmModel load_model(const std::string& base_path) {
    std::ifstream in(base_path + ".json");
    if (!in) throw Error("cannot open model header: " + base_path + ".json");
    nlohmann::json header;
    try {
        in >> header;
    } catch (const nlohmann::json::exception& e) {
        throw Error("bad model header in " + base_path + ".json: " + e.what());
    }

    SvmModel model;
    model.channel = header.at("channel").get<std::string>();
    model.dim = header.at("dim").get<int>();
    model.kernel = kernel_from_string(header.at("kernel").get<std::string>());
    model.c = header.at("c").get<double>();
    model.gamma = header.at("gamma").get<double>();
    model.class_weighting = header.at("class_weighting").get<bool>();
    model.kkt_tol = header.at("kkt_tol").get<double>();
    model.bias = header.at("bias").get<double>();
    model.platt_a = header.at("platt_a").get<double>();
    model.platt_b = header.at("platt_b").get<double>();
    model.calibrated = header.at("calibrated").get<bool>();

    const FeatureFile file = read_pfv(base_path + ".pfv");
    if (file.dim != static_cast<std::uint32_t>(model.dim + 1))
        throw Error("model PFV dim does not match header in " + base_path);
    for (const auto& rec : file.records) {
        model.coef.push_back(rec.values[0]);
        model.support_vectors.emplace_back(rec.values.begin() + 1, rec.values.end());
    }
    return model;
}

} // namespace posterlab

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>

#include <json.hpp>

#include "posterlab/error.hpp"
#include "posterlab/features.hpp"

namespace posterlab {

namespace {

void l1_normalize(double* v, int n) {
    double sum = 0.0;
    for (int i = 0; i < n; ++i) sum += v[i];
    if (sum > 0)
        for (int i = 0; i < n; ++i) v[i] /= sum;
}

} // namespace

std::vector<double> lab_histogram(const LabImage& lab) {
    const std::size_t n = lab.l.size();
    if (n == 0) throw Error("lab_histogram: empty image");

    std::vector<double> hist(kLabDim, 0.0);
    const auto bin30 = [](double v, double lo, double hi) {
        const int b = static_cast<int>((v - lo) / (hi - lo) * 30.0);
        return std::clamp(b, 0, 29);
    };
    for (std::size_t i = 0; i < n; ++i) {
        hist[bin30(lab.l[i], 0.0, 100.0)] += 1.0;
        hist[30 + bin30(lab.a[i], -128.0, 128.0)] += 1.0;
        hist[60 + bin30(lab.b[i], -128.0, 128.0)] += 1.0;
    }
    l1_normalize(hist.data(), 30);
    l1_normalize(hist.data() + 30, 30);
    l1_normalize(hist.data() + 60, 30);
    return hist;
}

int lbp_uniform_bin(unsigned code) {
    static const std::array<int, 256> table = [] {
        std::array<int, 256> t{};
        int next = 0;
        for (unsigned c = 0; c < 256; ++c) {
            int transitions = 0;
            for (int b = 0; b < 8; ++b)
                transitions += ((c >> b) & 1u) != ((c >> ((b + 1) % 8)) & 1u);
            t[c] = transitions <= 2 ? next++ : -1;
        }
        for (unsigned c = 0; c < 256; ++c)
            if (t[c] < 0) t[c] = 58;
        return t;
    }();
    return table[code & 0xff];
}

std::vector<double> lbp_histogram(const Image& gray) {
    if (gray.channels != 1) throw Error("lbp_histogram: 1-channel image required");
    if (gray.width < 3 || gray.height < 3) throw Error("lbp_histogram: image too small (need >= 3x3)");

    // Neighbor order, clockwise from the top:
    //   7 0 1
    //   6 c 2
    //   5 4 3
    // Strictly-greater comparison, so flat regions produce the all-zeros code.
    static constexpr int dx[8] = {0, 1, 1, 1, 0, -1, -1, -1};
    static constexpr int dy[8] = {-1, -1, 0, 1, 1, 1, 0, -1};

    std::vector<double> hist(kLbpDim, 0.0);
    for (int y = 1; y < gray.height - 1; ++y) {
        for (int x = 1; x < gray.width - 1; ++x) {
            const std::uint8_t c = gray.at(x, y);
            unsigned code = 0;
            for (int b = 0; b < 8; ++b)
                code |= static_cast<unsigned>(gray.at(x + dx[b], y + dy[b]) > c) << b;
            hist[lbp_uniform_bin(code)] += 1.0;
        }
    }
    l1_normalize(hist.data(), kLbpDim);
    return hist;
}

std::string to_string(Expression e) {
    switch (e) {
        case Expression::Neutral: return "neutral";
        case Expression::Happiness: return "happiness";
        case Expression::Surprise: return "surprise";
        case Expression::Sadness: return "sadness";
        case Expression::Anger: return "anger";
        case Expression::Disgust: return "disgust";
        case Expression::Fear: return "fear";
        case Expression::Contempt: return "contempt";
    }
    return "?";
}

Expression expression_from_string(const std::string& name) {
    for (int i = 0; i < kExpressionCount; ++i)
        if (name == to_string(static_cast<Expression>(i))) return static_cast<Expression>(i);
    throw Error("unknown expression: '" + name + "'");
}

std::vector<FaceAnnotation> load_face_annotations(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open face annotations: " + path);
    nlohmann::json doc;
    try {
        in >> doc;
        std::vector<FaceAnnotation> faces;
        for (const auto& f : doc.at("faces")) {
            FaceAnnotation face;
            const auto& bbox = f.at("bbox");
            face.x = bbox.at(0).get<double>();
            face.y = bbox.at(1).get<double>();
            face.w = bbox.at(2).get<double>();
            face.h = bbox.at(3).get<double>();
            face.expression = expression_from_string(f.at("expression").get<std::string>());
            face.confidence = f.value("confidence", 1.0);
            faces.push_back(face);
        }
        return faces;
    } catch (const nlohmann::json::exception& e) {
        throw Error("bad face annotation file " + path + ": " + e.what());
    }
}

std::vector<double> emotion_histogram(const std::vector<FaceAnnotation>& faces, int img_w, int img_h,
                                      bool per_quadrant_norm) {
    std::vector<double> hist(kEmotionDim, 0.0);
    for (const auto& f : faces) {
        if (f.x + f.w <= 0 || f.y + f.h <= 0 || f.x >= img_w || f.y >= img_h)
            throw Error("face bbox fully outside image");
        const double cx = std::clamp(f.x + f.w / 2.0, 0.0, static_cast<double>(img_w));
        const double cy = std::clamp(f.y + f.h / 2.0, 0.0, static_cast<double>(img_h));
        const int quadrant = (cx < img_w / 2.0 ? 0 : 1) + (cy < img_h / 2.0 ? 0 : 2);
        hist[quadrant * kExpressionCount + static_cast<int>(f.expression)] += 1.0;
    }
    if (per_quadrant_norm) {
        for (int q = 0; q < 4; ++q) {
            double sum = 0.0;
            for (int e = 0; e < kExpressionCount; ++e) sum += hist[q * 8 + e];
            if (sum > 0)
                for (int e = 0; e < kExpressionCount; ++e) hist[q * 8 + e] /= sum;
        }
    } else {
        double sum = 0.0;
        for (double v : hist) sum += v;
        if (sum > 0)
            for (double& v : hist) v /= sum;
    }
    return hist;
}

} // namespace posterlab

#include "posterlab/channels.hpp"

#include <algorithm>
#include <atomic>
#include <filesystem>
#include <unordered_map>

#include "posterlab/error.hpp"

namespace posterlab {

namespace {

namespace fs = std::filesystem;

std::string resolve(const std::string& base_dir, const std::string& rel) {
    const fs::path p(rel);
    if (p.is_absolute() || base_dir.empty()) return rel;
    return (fs::path(base_dir) / p).string();
}

Image ensure_rgb(const Image& img) {
    if (img.channels == 3) return img;
    Image out;
    out.width = img.width;
    out.height = img.height;
    out.channels = 3;
    out.data.resize(static_cast<std::size_t>(img.width) * img.height * 3);
    for (std::size_t i = 0; i < img.data.size(); ++i) {
        out.data[i * 3] = out.data[i * 3 + 1] = out.data[i * 3 + 2] = img.data[i];
    }
    return out;
}

std::vector<float> to_f32(const std::vector<double>& v) {
    std::vector<float> out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) out[i] = static_cast<float>(v[i]);
    return out;
}

class ComputedSource final : public FeatureSource {
public:
    ComputedSource(std::string channel, std::string base_dir, RunOptions opts,
                   std::shared_ptr<const Codebook> fixed_codebook)
        : channel_(std::move(channel)),
          base_dir_(std::move(base_dir)),
          opts_(opts),
          fixed_codebook_(std::move(fixed_codebook)),
          codebook_(fixed_codebook_) {}

    std::string channel() const override { return channel_; }

    void prepare_fold(const std::vector<const PosterRecord*>& train_posters) override {
        if (channel_ != "siftbof" || fixed_codebook_) return;
        const std::vector<float> pool = pooled_sift_descriptors(train_posters, base_dir_);
        const int n = static_cast<int>(pool.size() / 128);
        const int k = std::min(opts_.codebook_k, n);
        if (k < 1) throw Error("siftbof: no descriptors available to train the codebook");
        codebook_ = std::make_shared<Codebook>(kmeans_fit(pool, n, 128, k, opts_.seed));
    }

    std::vector<SampleFeatures> poster_features(const PosterRecord& rec, bool with_crops) override {
        const Image img = decode_image(resolve(base_dir_, rec.image_path));

        std::vector<FaceAnnotation> faces;
        if (channel_ == "emotion" && !rec.annotations_path.empty()) {
            const std::string path = resolve(base_dir_, rec.annotations_path);
            if (fs::exists(path))
                faces = load_face_annotations(path);
            else
                ++warnings_;
        }

        std::vector<SampleFeatures> out;
        out.push_back({rec.id, extract_channel(channel_, img, faces, codebook_.get())});
        if (with_crops) {
            const auto rects = quadrant_rects(img.width, img.height);
            for (int q = 0; q < 4; ++q) {
                const Rect r = rects[q];
                const Image sub = crop(img, r.x, r.y, r.w, r.h);
                std::vector<FaceAnnotation> sub_faces;
                for (const FaceAnnotation& f : faces) {
                    const double cx = f.x + f.w / 2.0, cy = f.y + f.h / 2.0;
                    if (cx >= r.x && cx < r.x + r.w && cy >= r.y && cy < r.y + r.h) {
                        FaceAnnotation moved = f;
                        moved.x -= r.x;
                        moved.y -= r.y;
                        sub_faces.push_back(moved);
                    }
                }
                out.push_back({augmented_id(rec.id, q), extract_channel(channel_, sub, sub_faces, codebook_.get())});
            }
        }
        return out;
    }

    int warning_count() const override { return warnings_; }

private:
    std::string channel_;
    std::string base_dir_;
    RunOptions opts_;
    std::shared_ptr<const Codebook> fixed_codebook_;
    std::shared_ptr<const Codebook> codebook_;
    std::atomic<int> warnings_{0};
};

class PfvSource final : public FeatureSource {
public:
    explicit PfvSource(const std::string& path) : file_(read_pfv(path)) {
        for (const auto& rec : file_.records) by_id_[rec.id] = &rec;
    }

    std::string channel() const override { return file_.channel; }

    std::vector<SampleFeatures> poster_features(const PosterRecord& rec, bool with_crops) override {
        std::vector<SampleFeatures> out;
        auto it = by_id_.find(rec.id);
        if (it != by_id_.end())
            out.push_back({rec.id, it->second->values});
        else
            ++warnings_; // external files may not know every poster
        if (with_crops) {
            for (int q = 0; q < 4; ++q) {
                auto cit = by_id_.find(augmented_id(rec.id, q));
                if (cit != by_id_.end()) out.push_back({cit->first, cit->second->values});
            }
        }
        return out;
    }

    int warning_count() const override { return warnings_; }

private:
    FeatureFile file_;
    std::unordered_map<std::string, const FeatureVector*> by_id_;
    std::atomic<int> warnings_{0};
};

} // namespace

const std::vector<std::string>& computed_channels() {
    static const std::vector<std::string> names = {"lab",  "lbp",     "hog",     "cohog",
                                                   "ecohog", "gist",  "siftbof", "emotion"};
    return names;
}

bool is_computed_channel(const std::string& name) {
    const auto& c = computed_channels();
    return std::find(c.begin(), c.end(), name) != c.end();
}

std::vector<float> extract_channel(const std::string& channel, const Image& img,
                                   const std::vector<FaceAnnotation>& faces,
                                   const Codebook* codebook) {
    if (channel == "emotion") return to_f32(emotion_histogram(faces, img.width, img.height));

    if (channel == "gist") {
        const Image square = resize_bilinear(img, kGistSize, kGistSize);
        return to_f32(gist(to_grayscale(square)));
    }

    const Image canonical = resize_bilinear(img, kCanonicalWidth, kCanonicalHeight);
    if (channel == "lab") return to_f32(lab_histogram(rgb_to_lab(ensure_rgb(canonical))));
    const Image gray = to_grayscale(canonical);
    if (channel == "lbp") return to_f32(lbp_histogram(gray));
    if (channel == "hog") return to_f32(hog(gray));
    if (channel == "cohog") return to_f32(cohog(gray));
    if (channel == "ecohog") return to_f32(ecohog(gray));
    if (channel == "siftbof") {
        if (!codebook) throw Error("siftbof: no codebook available");
        return to_f32(sift_bof(gray, *codebook));
    }
    throw Error("unknown channel: '" + channel + "'");
}

std::unique_ptr<FeatureSource> make_computed_source(const std::string& channel,
                                                    const std::string& base_dir,
                                                    const RunOptions& opts,
                                                    std::shared_ptr<const Codebook> fixed_codebook) {
    if (!is_computed_channel(channel)) throw Error("unknown channel: '" + channel + "'");
    return std::make_unique<ComputedSource>(channel, base_dir, opts, std::move(fixed_codebook));
}

std::unique_ptr<FeatureSource> make_pfv_source(const std::string& path) {
    return std::make_unique<PfvSource>(path);
}

std::unique_ptr<FeatureSource> make_feature_source(const std::string& spec,
                                                   const std::string& base_dir,
                                                   const RunOptions& opts) {
    if (spec.rfind("pfv:", 0) == 0) return make_pfv_source(spec.substr(4));
    if (spec.size() > 4 && spec.ends_with(".pfv")) return make_pfv_source(spec);
    return make_computed_source(spec, base_dir, opts);
}

std::vector<float> pooled_sift_descriptors(const std::vector<const PosterRecord*>& posters,
                                           const std::string& base_dir, std::size_t cap,
                                           std::vector<std::string>* failures) {
    std::vector<std::vector<std::vector<float>>> per_poster(posters.size());
    for (std::size_t i = 0; i < posters.size(); ++i) {
        try {
            const Image img = decode_image(resolve(base_dir, posters[i]->image_path));
            const Image gray = to_grayscale(resize_bilinear(img, kCanonicalWidth, kCanonicalHeight));
            per_poster[i] = dense_sift(gray);
        } catch (const std::exception& e) {
            if (!failures) throw;
            failures->push_back(posters[i]->id + ": " + e.what());
        }
    }
    std::size_t total = 0;
    for (const auto& d : per_poster) total += d.size();
    const std::size_t stride = total > cap ? (total + cap - 1) / cap : 1;

    std::vector<float> pool;
    pool.reserve(std::min(total, cap) * 128);
    std::size_t index = 0;
    for (const auto& d : per_poster)
        for (const auto& desc : d) {
            if (index++ % stride == 0) pool.insert(pool.end(), desc.begin(), desc.end());
        }
    return pool;
}

} // namespace posterlab

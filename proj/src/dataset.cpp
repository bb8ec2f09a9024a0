#include "posterlab/dataset.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <unordered_map>
#include <unordered_set>

#include <json.hpp>

#include "posterlab/error.hpp"

namespace posterlab {

std::string to_string(Festival f) {
    switch (f) {
        case Festival::Academy: return "academy";
        case Festival::Berlin: return "berlin";
        case Festival::Cannes: return "cannes";
        case Festival::Venice: return "venice";
    }
    return "?";
}

Festival festival_from_string(const std::string& name) {
    for (Festival f : kFestivals)
        if (name == to_string(f)) return f;
    throw Error("unknown festival name: '" + name + "'");
}

Corpus::Corpus(std::vector<PosterRecord> records) : records_(std::move(records)) {
    std::unordered_set<std::string> ids;
    for (std::size_t i = 0; i < records_.size(); ++i) {
        const PosterRecord& r = records_[i];
        if (r.id.empty()) throw Error("poster record with empty id");
        if (!ids.insert(r.id).second) throw Error("duplicate poster id: '" + r.id + "'");
        if (r.year < 1925 || r.year > 2100)
            throw Error("poster '" + r.id + "': year " + std::to_string(r.year) + " out of range 1925..2100");
        if (r.image_path.empty()) throw Error("poster '" + r.id + "': empty image path");
        index_[{r.festival, r.year}].push_back(i);
    }
}

bool Corpus::has(Festival f) const {
    auto it = index_.lower_bound({f, 0});
    return it != index_.end() && it->first.first == f;
}

std::vector<int> Corpus::years(Festival f) const {
    std::vector<int> out;
    for (auto it = index_.lower_bound({f, 0}); it != index_.end() && it->first.first == f; ++it)
        out.push_back(it->first.second);
    return out;
}

std::vector<const PosterRecord*> Corpus::lookup(Festival f, int year) const {
    std::vector<const PosterRecord*> out;
    auto it = index_.find({f, year});
    if (it == index_.end()) return out;
    out.reserve(it->second.size());
    for (std::size_t i : it->second) out.push_back(&records_[i]);
    return out;
}

const PosterRecord* Corpus::find(const std::string& id) const {
    for (const auto& r : records_)
        if (r.id == id) return &r;
    return nullptr;
}

Corpus load_manifest(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open manifest: " + path);

    std::vector<PosterRecord> records;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        nlohmann::json obj;
        try {
            obj = nlohmann::json::parse(line);
            PosterRecord r;
            r.festival = festival_from_string(obj.at("festival").get<std::string>());
            r.year = obj.at("year").get<int>();
            r.id = obj.at("id").get<std::string>();
            r.title = obj.value("title", std::string{});
            r.image_path = obj.at("image").get<std::string>();
            r.winner = obj.at("winner").get<bool>();
            r.annotations_path = obj.value("annotations", std::string{});
            records.push_back(std::move(r));
        } catch (const nlohmann::json::exception& e) {
            throw Error("manifest parse error at line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    return Corpus(std::move(records)); // id/range validation happens here
}

std::array<Rect, 4> quadrant_rects(int width, int height) {
    const int lw = width / 2, th = height / 2;   // left/top get the floor
    const int rw = width - lw, bh = height - th; // right/bottom get the extra pixel
    return {Rect{0, 0, lw, th}, Rect{lw, 0, rw, th}, Rect{0, th, lw, bh}, Rect{lw, th, rw, bh}};
}

std::string augmented_id(const std::string& parent_id, int crop_index) {
    return parent_id + "#q" + std::to_string(crop_index);
}

std::vector<QuadrantCrop> augment_quadrants(const PosterRecord& record, const Image& image) {
    if (image.width < 2 || image.height < 2)
        throw Error("augment_quadrants: degenerate image for '" + record.id + "' (dims < 2)");
    std::vector<QuadrantCrop> out;
    out.reserve(4);
    const auto rects = quadrant_rects(image.width, image.height);
    for (int q = 0; q < 4; ++q) {
        QuadrantCrop qc;
        qc.sample = {record.id, q, record.winner};
        qc.image = crop(image, rects[q].x, rects[q].y, rects[q].w, rects[q].h);
        out.push_back(std::move(qc));
    }
    return out;
}

std::vector<FoldPlan> plan_loyo(const Corpus& corpus, Festival festival) {
    if (!corpus.has(festival)) throw Error("festival '" + to_string(festival) + "' absent from corpus");

    const std::vector<int> years = corpus.years(festival);
    std::vector<FoldPlan> folds;
    folds.reserve(years.size());
    for (int test_year : years) {
        FoldPlan fold;
        fold.festival = festival;
        fold.test_year = test_year;
        for (int year : years) {
            for (const PosterRecord* r : corpus.lookup(festival, year)) {
                if (year == test_year) {
                    fold.test_ids.push_back(r->id);
                    if (r->winner) ++fold.winner_count_k;
                } else {
                    fold.train_ids.push_back(r->id);
                    for (int q = 0; q < 4; ++q) fold.train_ids.push_back(augmented_id(r->id, q));
                }
            }
        }
        std::sort(fold.train_ids.begin(), fold.train_ids.end());
        std::sort(fold.test_ids.begin(), fold.test_ids.end());
        fold.skipped = fold.winner_count_k == 0;
        folds.push_back(std::move(fold));
    }
    return folds;
}

std::vector<FestivalStats> summarize(const Corpus& corpus) {
    std::vector<FestivalStats> out;
    for (Festival f : kFestivals) {
        if (!corpus.has(f)) continue;
        FestivalStats s;
        s.festival = f;
        const std::vector<int> years = corpus.years(f);
        s.year_min = years.front();
        s.year_max = years.back();
        s.distinct_years = static_cast<int>(years.size());
        int total = 0;
        for (int year : years) {
            for (const PosterRecord* r : corpus.lookup(f, year)) {
                ++total;
                if (r->winner)
                    ++s.winners;
                else
                    ++s.nominates;
            }
        }
        s.mean_per_year = static_cast<double>(total) / s.distinct_years;
        out.push_back(s);
    }
    return out;
}

} // namespace posterlab

#pragma once

#include <array>
#include <map>
#include <string>
#include <vector>

#include "posterlab/image.hpp"

namespace posterlab {

enum class Festival { Academy, Berlin, Cannes, Venice };

inline constexpr std::array<Festival, 4> kFestivals = {Festival::Academy, Festival::Berlin,
                                                       Festival::Cannes, Festival::Venice};

std::string to_string(Festival f);
Festival festival_from_string(const std::string& name); // lowercase, throws on unknown

// One nominated film.
struct PosterRecord {
    Festival festival = Festival::Academy;
    int year = 0;
    std::string id;
    std::string title;
    std::string image_path;
    bool winner = false;
    std::string annotations_path; // empty when absent
};

class Corpus {
public:
    Corpus() = default;
    explicit Corpus(std::vector<PosterRecord> records);

    const std::vector<PosterRecord>& records() const { return records_; }
    bool empty() const { return records_.empty(); }

    bool has(Festival f) const;
    std::vector<int> years(Festival f) const;                          // ascending
    std::vector<const PosterRecord*> lookup(Festival f, int year) const;
    const PosterRecord* find(const std::string& id) const;             // nullptr if absent

private:
    std::vector<PosterRecord> records_;
    std::map<std::pair<Festival, int>, std::vector<std::size_t>> index_;
};

// Manifest: UTF-8, one JSON object per line, e.g.
//   {"festival":"academy","year":1929,"id":"tt0018578","title":"Wings",
//    "image":"posters/tt0018578.png","winner":true,"annotations":"faces/tt0018578.json"}
// Unknown extra fields are ignored. Duplicate ids, unknown festival names and
// malformed lines are reported with the offending line number / id.
Corpus load_manifest(const std::string& path);

// One training crop derived from a poster. crop_index: 0=UL 1=UR 2=LL 3=LR.
struct AugmentedSample {
    std::string parent_id;
    int crop_index = 0;
    bool label = false;
};

struct QuadrantCrop {
    AugmentedSample sample;
    Image image;
};

struct Rect {
    int x = 0, y = 0, w = 0, h = 0;
};

// Quadrant split; on odd dimensions the extra pixel goes to the right/bottom
// crops. Order: UL, UR, LL, LR.
std::array<Rect, 4> quadrant_rects(int width, int height);

// Sample id scheme for crops: "<parent>#q<crop_index>".
std::string augmented_id(const std::string& parent_id, int crop_index);

// Four non-overlapping quadrant crops tiling the full image; labels inherit
// the parent's winner flag. Training samples only -- never applied to test
// posters.
std::vector<QuadrantCrop> augment_quadrants(const PosterRecord& record, const Image& image);

// One leave-one-year-out split. train_ids holds sample ids (originals plus
// their four crop ids); test_ids holds original poster ids only.
struct FoldPlan {
    Festival festival = Festival::Academy;
    int test_year = 0;
    std::vector<std::string> train_ids;
    std::vector<std::string> test_ids;
    int winner_count_k = 0;
    bool skipped = false; // true when the test year has no winner
};

// One fold per distinct year of the festival, years ascending, ids sorted.
std::vector<FoldPlan> plan_loyo(const Corpus& corpus, Festival festival);

struct FestivalStats {
    Festival festival = Festival::Academy;
    int year_min = 0;
    int year_max = 0;
    int distinct_years = 0;
    int winners = 0;
    int nominates = 0; // non-winner records, matching the winners/nominates column split
    double mean_per_year = 0.0; // all records / distinct years
};

// Per-festival stats for the festivals present, in enum order.
std::vector<FestivalStats> summarize(const Corpus& corpus);

} // namespace posterlab

#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "posterlab/dataset.hpp"
#include "posterlab/svm.hpp"

namespace posterlab {

struct SampleFeatures {
    std::string sample_id; // poster id or "<id>#q<k>" crop id
    std::vector<float> values;
};

// Supplies feature vectors per poster (and its training crops). Computed
// sources decode the poster once and derive every sample from it; PFV-backed
// sources look ids up in the loaded file.
class FeatureSource {
public:
    virtual ~FeatureSource() = default;
    virtual std::string channel() const = 0;
    virtual std::vector<SampleFeatures> poster_features(const PosterRecord& rec, bool with_crops) = 0;
    // Called once per fold with the fold's training posters, before any
    // feature query of that fold. Fold-local state (the SIFT codebook) is
    // rebuilt here so nothing leaks across folds.
    virtual void prepare_fold(const std::vector<const PosterRecord*>& train_posters) { (void)train_posters; }
    // Missing-input events (absent annotation sidecars etc.) accumulated so
    // far; reported, never fatal.
    virtual int warning_count() const { return 0; }
};

struct RunOptions {
    bool standardize = false;
    std::uint64_t seed = 42;
    int jobs = 1;
    int codebook_k = 256;
};

struct FoldResult {
    int year = 0;
    bool skipped = false; // zero-winner year, no estimation
    bool failed = false;  // training/extraction error; message in `error`
    std::string error;
    int train_count = 0;
    std::map<std::string, double> posteriors; // poster id -> p(winner)
};

struct ChannelRun {
    std::string channel;
    Festival festival = Festival::Academy;
    std::vector<FoldResult> folds; // ascending year
};

struct WinnerPrediction {
    Festival festival = Festival::Academy;
    int test_year = 0;
    std::vector<std::pair<std::string, double>> ranking; // (poster id, p), p desc then id asc
    std::vector<std::string> selected;                   // top winner_count_k ids
};

struct YearHit {
    int year = 0;
    int k = 0;
    int hits = 0;
};

struct FestivalScore {
    std::string channel;
    Festival festival = Festival::Academy;
    double winner_recall = 0.0;      // micro: correct winners / total winners, non-skipped years
    double per_year_hit_rate = 0.0;  // years with all k winners found / non-skipped years
    std::vector<YearHit> per_year;
    double random_baseline = 0.0;    // sum k_y / sum n_y over the same years
};

// Leave-one-year-out evaluation of one feature channel: per fold, train on
// every other year (originals plus the four quadrant crops), calibrate, and
// emit posteriors for the fold's test posters. Zero-winner folds are skipped;
// per-fold failures are recorded and the run continues.
ChannelRun run_channel(const Corpus& corpus, Festival festival, FeatureSource& source,
                       const SvmParams& params, const RunOptions& opts);

enum class FusionRule { Mean, Product };

// Late fusion of per-channel posteriors. Weighted arithmetic mean by default
// (uniform when no weights), geometric mean for the product rule. All runs
// must cover identical folds and posters.
ChannelRun late_fuse(const std::vector<ChannelRun>& runs, const std::vector<double>& weights = {},
                     FusionRule rule = FusionRule::Mean);

// Top-k selection by (posterior descending, poster id ascending).
WinnerPrediction select_winners(Festival festival, int year,
                                const std::map<std::string, double>& posteriors, int k);

FestivalScore score(const ChannelRun& run, const Corpus& corpus);

// Line-text run records, one JSON object per (year, poster):
// {channel, festival, year, poster_id, p, selected, skipped}.
std::string run_records_jsonl(const ChannelRun& run, const Corpus& corpus);

// Bounded worker pool; fn(i) runs for i in [0, n), each writing only its own
// slot, so results are deterministic regardless of scheduling.
void parallel_for(int n, int jobs, const std::function<void(int)>& fn);

} // namespace posterlab

#include "posterlab/protocol.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <set>
#include <thread>

#include <json.hpp>

#include "posterlab/error.hpp"

namespace posterlab {

void parallel_for(int n, int jobs, const std::function<void(int)>& fn) {
    jobs = std::max(1, std::min(jobs, n));
    if (jobs == 1) {
        for (int i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<int> next{0};
    std::exception_ptr first_error;
    std::mutex error_mutex;
    std::vector<std::thread> workers;
    workers.reserve(jobs);
    for (int w = 0; w < jobs; ++w) {
        workers.emplace_back([&] {
            for (;;) {
                const int i = next.fetch_add(1);
                if (i >= n) return;
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard lock(error_mutex);
                    if (!first_error) first_error = std::current_exception();
                }
            }
        });
    }
    for (auto& t : workers) t.join();
    if (first_error) std::rethrow_exception(first_error);
}

ChannelRun run_channel(const Corpus& corpus, Festival festival, FeatureSource& source,
                       const SvmParams& params, const RunOptions& opts) {
    const std::vector<FoldPlan> folds = plan_loyo(corpus, festival);

    ChannelRun run;
    run.channel = source.channel();
    run.festival = festival;
    run.folds.resize(folds.size());

    SvmParams fold_params = params;
    if (opts.standardize && !params.gamma) fold_params.gamma_scale_dim = true;

    for (std::size_t f = 0; f < folds.size(); ++f) {
        const FoldPlan& plan = folds[f];
        FoldResult& result = run.folds[f];
        result.year = plan.test_year;
        if (plan.skipped) {
            result.skipped = true;
            continue;
        }

        try {
            std::vector<const PosterRecord*> train_posters;
            for (int year : corpus.years(festival)) {
                if (year == plan.test_year) continue;
                for (const PosterRecord* r : corpus.lookup(festival, year)) train_posters.push_back(r);
            }
            std::sort(train_posters.begin(), train_posters.end(),
                      [](const PosterRecord* a, const PosterRecord* b) { return a->id < b->id; });
            std::vector<const PosterRecord*> test_posters = corpus.lookup(festival, plan.test_year);
            std::sort(test_posters.begin(), test_posters.end(),
                      [](const PosterRecord* a, const PosterRecord* b) { return a->id < b->id; });

            source.prepare_fold(train_posters);

            // Extraction, one worker per poster.
            std::vector<std::vector<SampleFeatures>> train_feats(train_posters.size());
            std::vector<std::vector<SampleFeatures>> test_feats(test_posters.size());
            std::vector<std::string> extract_errors(train_posters.size() + test_posters.size());
            parallel_for(static_cast<int>(train_posters.size() + test_posters.size()), opts.jobs, [&](int i) {
                try {
                    if (i < static_cast<int>(train_posters.size()))
                        train_feats[i] = source.poster_features(*train_posters[i], true);
                    else
                        test_feats[i - train_posters.size()] =
                            source.poster_features(*test_posters[i - train_posters.size()], false);
                } catch (const std::exception& e) {
                    extract_errors[i] = e.what();
                }
            });
            for (const auto& msg : extract_errors)
                if (!msg.empty()) throw Error("feature extraction failed: " + msg);

            std::vector<std::vector<float>> x;
            std::vector<int> y;
            for (std::size_t i = 0; i < train_posters.size(); ++i) {
                for (auto& s : train_feats[i]) {
                    x.push_back(std::move(s.values));
                    y.push_back(train_posters[i]->winner ? +1 : -1);
                }
            }
            result.train_count = static_cast<int>(x.size());

            Standardizer stand;
            if (opts.standardize) {
                stand.fit(x);
                for (auto& row : x) row = stand.apply(row);
            }

            const SvmModel model = train_calibrated(x, y, fold_params);

            for (std::size_t i = 0; i < test_posters.size(); ++i) {
                const PosterRecord* rec = test_posters[i];
                const SampleFeatures* original = nullptr;
                for (const auto& s : test_feats[i])
                    if (s.sample_id == rec->id) original = &s;
                if (!original) throw Error("no features for test poster '" + rec->id + "'");
                const std::vector<float> row =
                    opts.standardize ? stand.apply(original->values) : original->values;
                result.posteriors[rec->id] = predict_proba(model, row);
            }
        } catch (const std::exception& e) {
            result.failed = true;
            result.error = e.what();
            result.posteriors.clear();
        }
    }
    return run;
}

ChannelRun late_fuse(const std::vector<ChannelRun>& runs, const std::vector<double>& weights,
                     FusionRule rule) {
    if (runs.empty()) throw Error("late_fuse: no runs");
    if (!weights.empty() && weights.size() != runs.size())
        throw Error("late_fuse: weight count does not match run count");

    const ChannelRun& first = runs[0];
    for (const ChannelRun& r : runs) {
        if (r.festival != first.festival) throw Error("late_fuse: mismatched festivals");
        if (r.folds.size() != first.folds.size()) throw Error("late_fuse: mismatched fold coverage");
        for (std::size_t f = 0; f < r.folds.size(); ++f) {
            const FoldResult& a = first.folds[f];
            const FoldResult& b = r.folds[f];
            if (a.year != b.year || a.skipped != b.skipped || a.failed != b.failed)
                throw Error("late_fuse: mismatched fold coverage at year " + std::to_string(a.year));
            if (a.posteriors.size() != b.posteriors.size() ||
                !std::equal(a.posteriors.begin(), a.posteriors.end(), b.posteriors.begin(),
                            [](const auto& p, const auto& q) { return p.first == q.first; }))
                throw Error("late_fuse: mismatched posters at year " + std::to_string(a.year));
        }
    }

    double weight_sum = 0.0;
    for (std::size_t i = 0; i < runs.size(); ++i)
        weight_sum += weights.empty() ? 1.0 : weights[i];

    ChannelRun fused;
    fused.channel = "fused";
    fused.festival = first.festival;
    fused.folds.resize(first.folds.size());
    for (std::size_t f = 0; f < first.folds.size(); ++f) {
        FoldResult& out = fused.folds[f];
        out = first.folds[f];
        for (auto& [id, p] : out.posteriors) {
            double acc = rule == FusionRule::Mean ? 0.0 : 1.0;
            for (std::size_t r = 0; r < runs.size(); ++r) {
                const double w = weights.empty() ? 1.0 : weights[r];
                const double pr = runs[r].folds[f].posteriors.at(id);
                if (rule == FusionRule::Mean)
                    acc += w * pr;
                else
                    acc *= std::pow(pr, w / weight_sum);
            }
            p = rule == FusionRule::Mean ? acc / weight_sum : acc;
        }
    }
    return fused;
}

WinnerPrediction select_winners(Festival festival, int year,
                                const std::map<std::string, double>& posteriors, int k) {
    if (k < 1) throw Error("select_winners: k must be >= 1");
    if (static_cast<std::size_t>(k) > posteriors.size())
        throw Error("select_winners: k exceeds poster count");

    WinnerPrediction pred;
    pred.festival = festival;
    pred.test_year = year;
    pred.ranking.assign(posteriors.begin(), posteriors.end());
    std::sort(pred.ranking.begin(), pred.ranking.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });
    for (int i = 0; i < k; ++i) pred.selected.push_back(pred.ranking[i].first);
    return pred;
}

FestivalScore score(const ChannelRun& run, const Corpus& corpus) {
    FestivalScore s;
    s.channel = run.channel;
    s.festival = run.festival;

    int total_winners = 0, total_hits = 0, exact_years = 0, counted_years = 0;
    long total_posters = 0;
    for (const FoldResult& fold : run.folds) {
        if (fold.skipped || fold.failed) continue;
        std::set<std::string> truth;
        for (const PosterRecord* r : corpus.lookup(run.festival, fold.year))
            if (r->winner) truth.insert(r->id);
        const int k = static_cast<int>(truth.size());
        if (k == 0) continue;

        const WinnerPrediction pred = select_winners(run.festival, fold.year, fold.posteriors, k);
        int hits = 0;
        for (const auto& id : pred.selected) hits += truth.count(id) ? 1 : 0;

        s.per_year.push_back({fold.year, k, hits});
        total_winners += k;
        total_hits += hits;
        total_posters += static_cast<long>(fold.posteriors.size());
        exact_years += hits == k ? 1 : 0;
        ++counted_years;
    }
    s.winner_recall = total_winners > 0 ? static_cast<double>(total_hits) / total_winners : 0.0;
    s.per_year_hit_rate = counted_years > 0 ? static_cast<double>(exact_years) / counted_years : 0.0;
    s.random_baseline = total_posters > 0 ? static_cast<double>(total_winners) / total_posters : 0.0;
    return s;
}

std::string run_records_jsonl(const ChannelRun& run, const Corpus& corpus) {
    std::string out;
    for (const FoldResult& fold : run.folds) {
        if (fold.failed) continue; // failures are reported separately
        if (fold.skipped) {
            for (const PosterRecord* r : corpus.lookup(run.festival, fold.year)) {
                nlohmann::json line{{"channel", run.channel}, {"festival", to_string(run.festival)},
                                    {"year", fold.year},      {"poster_id", r->id},
                                    {"p", nullptr},           {"selected", false},
                                    {"skipped", true}};
                out += line.dump() + "\n";
            }
            continue;
        }
        std::set<std::string> truth;
        for (const PosterRecord* r : corpus.lookup(run.festival, fold.year))
            if (r->winner) truth.insert(r->id);
        const WinnerPrediction pred =
            select_winners(run.festival, fold.year, fold.posteriors, static_cast<int>(truth.size()));
        std::set<std::string> selected(pred.selected.begin(), pred.selected.end());
        for (const auto& [id, p] : fold.posteriors) {
            nlohmann::json line{{"channel", run.channel}, {"festival", to_string(run.festival)},
                                {"year", fold.year},      {"poster_id", id},
                                {"p", p},                 {"selected", selected.count(id) > 0},
                                {"skipped", false}};
            out += line.dump() + "\n";
        }
    }
    return out;
}

} // namespace posterlab

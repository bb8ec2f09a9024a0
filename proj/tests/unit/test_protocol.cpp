#include <doctest.h>

#include <cmath>
#include <functional>

#include "posterlab/error.hpp"
#include "posterlab/protocol.hpp"
#include "support/fixtures.hpp"
#include "support/oracles.hpp"

using namespace posterlab;
using namespace posterlab::testing;

namespace {

// Feature source with no disk behind it: winners cluster near (1,0), nominees
// near (0,1), with deterministic per-sample jitter.
class ToySource final : public FeatureSource {
public:
    std::string channel() const override { return "toy"; }

    std::vector<SampleFeatures> poster_features(const PosterRecord& rec, bool with_crops) override {
        std::vector<SampleFeatures> out;
        out.push_back({rec.id, vec(rec.id, rec.winner)});
        if (with_crops)
            for (int q = 0; q < 4; ++q)
                out.push_back({augmented_id(rec.id, q), vec(augmented_id(rec.id, q), rec.winner)});
        return out;
    }

private:
    static std::vector<float> vec(const std::string& id, bool winner) {
        const auto h = std::hash<std::string>{}(id);
        const float j1 = static_cast<float>(h % 97) / 970.0f;
        const float j2 = static_cast<float>(h % 89) / 890.0f;
        return winner ? std::vector<float>{1.0f + j1, j2} : std::vector<float>{j1, 1.0f + j2};
    }
};

Corpus toy_corpus(int years, int winners_per_year, int nominees_per_year, int first_year = 2000) {
    std::vector<PosterRecord> records;
    for (int y = 0; y < years; ++y) {
        const int year = first_year + y;
        for (int i = 0; i < winners_per_year; ++i)
            records.push_back({Festival::Academy, year, "y" + std::to_string(year) + "w" + std::to_string(i),
                               "", "x.png", true, ""});
        for (int i = 0; i < nominees_per_year; ++i)
            records.push_back({Festival::Academy, year, "y" + std::to_string(year) + "n" + std::to_string(i),
                               "", "x.png", false, ""});
    }
    return Corpus{std::move(records)};
}

SvmParams toy_params() {
    SvmParams params;
    params.c = 10.0;
    params.gamma = 1.0;
    params.kkt_tol = 1e-4;
    return params;
}

} // namespace

TEST_SUITE("protocol") {

TEST_CASE("run_channel covers each year exactly once with 5x augmented training") {
    const Corpus corpus = toy_corpus(3, 1, 5);
    ToySource source;
    const ChannelRun run = run_channel(corpus, Festival::Academy, source, toy_params(), {});
    REQUIRE(run.folds.size() == 3);
    for (const FoldResult& fold : run.folds) {
        CHECK_FALSE(fold.skipped);
        CHECK_FALSE(fold.failed);
        CHECK(fold.train_count == 12 * 5);
        CHECK(fold.posteriors.size() == 6);
        for (const auto& [id, p] : fold.posteriors) {
            CHECK(id.find("y" + std::to_string(fold.year)) == 0);
            CHECK(p >= 0.0);
            CHECK(p <= 1.0);
        }
    }
    // clearly separable features: every fold ranks its winner first
    const FestivalScore s = score(run, corpus);
    CHECK(s.winner_recall == doctest::Approx(1.0));
    CHECK(s.per_year_hit_rate == doctest::Approx(1.0));
}

TEST_CASE("zero-winner years are skipped, not predicted") {
    std::vector<PosterRecord> records;
    for (const auto& [year, winner] : std::vector<std::pair<int, bool>>{
             {2000, true}, {2001, true}, {2002, false}}) {
        records.push_back({Festival::Academy, year, "w" + std::to_string(year), "", "x.png", winner, ""});
        records.push_back({Festival::Academy, year, "n" + std::to_string(year), "", "x.png", false, ""});
        records.push_back({Festival::Academy, year, "m" + std::to_string(year), "", "x.png", false, ""});
    }
    const Corpus corpus{std::move(records)};
    ToySource source;
    const ChannelRun run = run_channel(corpus, Festival::Academy, source, toy_params(), {});
    REQUIRE(run.folds.size() == 3);
    CHECK(run.folds[2].skipped);
    CHECK(run.folds[2].posteriors.empty());
    CHECK_FALSE(run.folds[0].skipped);
}

TEST_CASE("single-class training years fail their fold and the run continues") {
    std::vector<PosterRecord> records;
    // 1995 has only winners; training for 1996 sees one class
    records.push_back({Festival::Venice, 1995, "a", "", "x.png", true, ""});
    records.push_back({Festival::Venice, 1995, "b", "", "x.png", true, ""});
    records.push_back({Festival::Venice, 1996, "c", "", "x.png", true, ""});
    records.push_back({Festival::Venice, 1996, "d", "", "x.png", false, ""});
    const Corpus corpus{std::move(records)};
    ToySource source;
    const ChannelRun run = run_channel(corpus, Festival::Venice, source, toy_params(), {});
    REQUIRE(run.folds.size() == 2);
    CHECK_FALSE(run.folds[0].failed); // tests 1995, trains on 1996 (both classes)
    CHECK(run.folds[1].failed);
    CHECK(run.folds[1].error.find("single-class") != std::string::npos);
}

TEST_CASE("late fusion: identity, mean, coverage checks") {
    const Corpus corpus = toy_corpus(2, 1, 2);
    ToySource source;
    const ChannelRun run = run_channel(corpus, Festival::Academy, source, toy_params(), {});

    const ChannelRun same = late_fuse({run});
    for (std::size_t f = 0; f < run.folds.size(); ++f)
        CHECK(same.folds[f].posteriors == run.folds[f].posteriors);

    ChannelRun shifted = run;
    shifted.channel = "toy2";
    for (auto& fold : shifted.folds)
        for (auto& [id, p] : fold.posteriors) p = std::min(1.0, p + 0.4);
    const ChannelRun fused = late_fuse({run, shifted});
    CHECK(fused.channel == "fused");
    for (std::size_t f = 0; f < run.folds.size(); ++f)
        for (const auto& [id, p] : fused.folds[f].posteriors)
            CHECK(p == doctest::Approx((run.folds[f].posteriors.at(id) +
                                        shifted.folds[f].posteriors.at(id)) /
                                       2.0));

    // two identical runs fuse to themselves
    const ChannelRun dup = late_fuse({run, run});
    for (std::size_t f = 0; f < run.folds.size(); ++f)
        for (const auto& [id, p] : dup.folds[f].posteriors)
            CHECK(p == doctest::Approx(run.folds[f].posteriors.at(id)));

    ChannelRun broken = run;
    broken.folds[0].posteriors.erase(broken.folds[0].posteriors.begin());
    CHECK_THROWS_WITH_AS(late_fuse({run, broken}), doctest::Contains("mismatched"), Error);

    // weighted mean and product rule
    ChannelRun a = run, b = run;
    for (auto& fold : a.folds)
        for (auto& [id, p] : fold.posteriors) p = 0.2;
    for (auto& fold : b.folds)
        for (auto& [id, p] : fold.posteriors) p = 0.6;
    const ChannelRun mean = late_fuse({a, b});
    CHECK(mean.folds[0].posteriors.begin()->second == doctest::Approx(0.4));
    const ChannelRun prod = late_fuse({a, b}, {}, FusionRule::Product);
    CHECK(prod.folds[0].posteriors.begin()->second == doctest::Approx(std::sqrt(0.2 * 0.6)));
}

TEST_CASE("select_winners reproduces the 2017 slate ordering") {
    std::map<std::string, double> posteriors;
    for (const auto& [title, p] : academy2017_scores()) posteriors[title] = p;

    const WinnerPrediction top1 = select_winners(Festival::Academy, 2017, posteriors, 1);
    REQUIRE(top1.selected.size() == 1);
    CHECK(top1.selected[0] == "Moonlight");
    REQUIRE(top1.ranking.size() == 9);
    for (std::size_t i = 0; i < 9; ++i) {
        CHECK(top1.ranking[i].first == academy2017_scores()[i].first);
        CHECK(top1.ranking[i].second == academy2017_scores()[i].second);
    }
    CHECK(top1.ranking.back().first == "La La Land");
}

TEST_CASE("select_winners tie-breaks by id and validates k") {
    const std::map<std::string, double> posteriors{{"a", 0.3}, {"b", 0.3}, {"c", 0.1}};
    const WinnerPrediction two = select_winners(Festival::Cannes, 1999, posteriors, 2);
    CHECK(two.selected == std::vector<std::string>{"a", "b"});
    const WinnerPrediction all = select_winners(Festival::Cannes, 1999, posteriors, 3);
    CHECK(all.selected.size() == 3);
    CHECK_THROWS_AS(select_winners(Festival::Cannes, 1999, posteriors, 4), Error);
    CHECK_THROWS_AS(select_winners(Festival::Cannes, 1999, posteriors, 0), Error);
}

TEST_CASE("selection only depends on the posterior ranking") {
    const Corpus corpus = toy_corpus(4, 2, 4);
    ToySource source;
    ChannelRun run = run_channel(corpus, Festival::Academy, source, toy_params(), {});
    ChannelRun squashed = run;
    for (auto& fold : squashed.folds)
        for (auto& [id, p] : fold.posteriors) p = p * p; // strictly increasing on [0,1]
    for (std::size_t f = 0; f < run.folds.size(); ++f) {
        const auto a = select_winners(Festival::Academy, run.folds[f].year, run.folds[f].posteriors, 2);
        const auto b =
            select_winners(Festival::Academy, squashed.folds[f].year, squashed.folds[f].posteriors, 2);
        CHECK(a.selected == b.selected);
    }
}

TEST_CASE("score arithmetic: perfect run, baselines, fold order invariance") {
    const Corpus corpus = toy_corpus(5, 1, 5);
    ChannelRun run;
    run.channel = "x";
    run.festival = Festival::Academy;
    for (int year : corpus.years(Festival::Academy)) {
        FoldResult fold;
        fold.year = year;
        for (const PosterRecord* r : corpus.lookup(Festival::Academy, year))
            fold.posteriors[r->id] = r->winner ? 0.9 : 0.1;
        run.folds.push_back(fold);
    }
    const FestivalScore s = score(run, corpus);
    CHECK(s.winner_recall == doctest::Approx(1.0));
    CHECK(s.per_year_hit_rate == doctest::Approx(1.0));
    CHECK(s.random_baseline == doctest::Approx(1.0 / 6.0));
    CHECK(s.per_year.size() == 5);

    ChannelRun reversed = run;
    std::reverse(reversed.folds.begin(), reversed.folds.end());
    const FestivalScore s2 = score(reversed, corpus);
    CHECK(s2.winner_recall == s.winner_recall);
    CHECK(s2.random_baseline == s.random_baseline);
}

TEST_CASE("uniform random selection sits at the analytic baseline") {
    // 20 years of 1 winner + 5 nominees: expected recall 1/6
    const double mc = random_selection_recall(20, 6, 1, 10000, 99);
    CHECK(std::abs(mc - 1.0 / 6.0) < 0.01);

    // ~6.7 posters per year -> baseline ~0.15
    std::vector<PosterRecord> records;
    for (int y = 0; y < 10; ++y) {
        const int year = 2000 + y;
        const int n = y % 10 < 7 ? 7 : 6; // mean 6.7
        for (int i = 0; i < n; ++i)
            records.push_back({Festival::Berlin, year, "y" + std::to_string(year) + "p" + std::to_string(i),
                               "", "x.png", i == 0, ""});
    }
    const Corpus corpus{std::move(records)};
    ChannelRun run;
    run.channel = "x";
    run.festival = Festival::Berlin;
    for (int year : corpus.years(Festival::Berlin)) {
        FoldResult fold;
        fold.year = year;
        for (const PosterRecord* r : corpus.lookup(Festival::Berlin, year)) fold.posteriors[r->id] = 0.5;
        run.folds.push_back(fold);
    }
    const FestivalScore s = score(run, corpus);
    CHECK(std::abs(s.random_baseline - 0.15) < 0.005);
}

TEST_CASE("run records serialize and parse back") {
    const Corpus corpus = toy_corpus(3, 1, 3);
    ToySource source;
    const ChannelRun run = run_channel(corpus, Festival::Academy, source, toy_params(), {});
    const std::string jsonl = run_records_jsonl(run, corpus);
    CHECK(jsonl.find("\"channel\":\"toy\"") != std::string::npos);
    CHECK(jsonl.find("\"selected\":true") != std::string::npos);
}

TEST_CASE("parallel extraction gives the same result as serial") {
    const Corpus corpus = toy_corpus(3, 1, 4);
    ToySource s1, s2;
    RunOptions serial;
    RunOptions parallel;
    parallel.jobs = 4;
    const ChannelRun a = run_channel(corpus, Festival::Academy, s1, toy_params(), serial);
    const ChannelRun b = run_channel(corpus, Festival::Academy, s2, toy_params(), parallel);
    REQUIRE(a.folds.size() == b.folds.size());
    for (std::size_t f = 0; f < a.folds.size(); ++f) CHECK(a.folds[f].posteriors == b.folds[f].posteriors);
}

} // TEST_SUITE

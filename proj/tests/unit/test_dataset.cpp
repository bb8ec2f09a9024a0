#include <doctest.h>

#include <fstream>
#include <random>
#include <set>

#include "posterlab/dataset.hpp"
#include "posterlab/error.hpp"
#include "support/fixtures.hpp"
#include "support/test_images.hpp"

using namespace posterlab;
using namespace posterlab::testing;

namespace {

std::string write_lines(const TempDir& dir, const std::string& name,
                        const std::vector<std::string>& lines) {
    const std::string path = dir.file(name);
    std::ofstream out(path);
    for (const auto& l : lines) out << l << "\n";
    return path;
}

} // namespace

TEST_SUITE("dataset") {

TEST_CASE("manifest with four distinct records loads") {
    TempDir dir;
    const auto path = write_lines(dir, "m.jsonl",
                                  {manifest_line("academy", 2000, "a", "A", "a.png", true),
                                   manifest_line("academy", 2000, "b", "B", "b.png", false),
                                   manifest_line("berlin", 2001, "c", "C", "c.png", false),
                                   manifest_line("venice", 2002, "d", "D", "d.png", true)});
    const Corpus corpus = load_manifest(path);
    CHECK(corpus.records().size() == 4);
    CHECK(corpus.find("c")->festival == Festival::Berlin);
    CHECK(corpus.lookup(Festival::Academy, 2000).size() == 2);
    CHECK(corpus.has(Festival::Venice));
    CHECK_FALSE(corpus.has(Festival::Cannes));
}

TEST_CASE("duplicate ids are rejected by name") {
    TempDir dir;
    const auto path = write_lines(dir, "m.jsonl",
                                  {manifest_line("academy", 2000, "tt001", "A", "a.png", true),
                                   manifest_line("academy", 2001, "tt001", "B", "b.png", false)});
    CHECK_THROWS_WITH_AS(load_manifest(path), doctest::Contains("tt001"), Error);
}

TEST_CASE("unknown festival name is rejected") {
    TempDir dir;
    const auto path =
        write_lines(dir, "m.jsonl", {manifest_line("sundance", 2000, "a", "A", "a.png", false)});
    CHECK_THROWS_WITH_AS(load_manifest(path), doctest::Contains("sundance"), Error);
}

TEST_CASE("parse errors carry the line number") {
    TempDir dir;
    const auto path = write_lines(dir, "m.jsonl",
                                  {manifest_line("academy", 2000, "a", "A", "a.png", true),
                                   "{not json"});
    CHECK_THROWS_WITH_AS(load_manifest(path), doctest::Contains("line 2"), Error);
}

TEST_CASE("year range and empty image path are validated") {
    TempDir dir;
    CHECK_THROWS_AS(load_manifest(write_lines(dir, "m1.jsonl",
                                              {manifest_line("academy", 1800, "a", "A", "a.png", true)})),
                    Error);
    CHECK_THROWS_AS(load_manifest(write_lines(dir, "m2.jsonl",
                                              {manifest_line("academy", 2000, "a", "A", "", true)})),
                    Error);
}

TEST_CASE("summary of the reference manifest matches the published counts") {
    TempDir dir;
    const auto path = dir.file("table1.jsonl");
    write_reference_manifest(path);
    const auto stats = summarize(load_manifest(path));
    REQUIRE(stats.size() == 4);
    CHECK(stats[0].festival == Festival::Academy);
    CHECK(stats[0].winners == 88);
    CHECK(stats[0].nominates == 440);
    CHECK(stats[1].winners == 63);
    CHECK(stats[1].nominates == 905);
    CHECK(stats[2].winners == 91);
    CHECK(stats[2].nominates == 1335);
    CHECK(stats[3].winners == 53);
    CHECK(stats[3].nominates == 869);
}

TEST_CASE("summary arithmetic and empty corpus") {
    CHECK(summarize(Corpus{}).empty());

    std::vector<PosterRecord> records;
    for (int i = 0; i < 12; ++i)
        records.push_back({Festival::Cannes, 2000 + i % 2, "id" + std::to_string(i), "", "x.png",
                           i == 0, ""});
    const auto stats = summarize(Corpus{std::move(records)});
    REQUIRE(stats.size() == 1);
    CHECK(stats[0].distinct_years == 2);
    CHECK(stats[0].mean_per_year == doctest::Approx(6.0));
}

TEST_CASE("three-year corpus gives three folds of six with k=1") {
    std::vector<PosterRecord> records;
    for (int year : {2000, 2001, 2002})
        for (int i = 0; i < 6; ++i)
            records.push_back({Festival::Academy, year, "y" + std::to_string(year) + "p" + std::to_string(i),
                               "", "x.png", i == 0, ""});
    const Corpus corpus{std::move(records)};
    const auto folds = plan_loyo(corpus, Festival::Academy);
    REQUIRE(folds.size() == 3);
    for (const auto& fold : folds) {
        CHECK(fold.test_ids.size() == 6);
        CHECK(fold.winner_count_k == 1);
        CHECK_FALSE(fold.skipped);
        // originals + 4 crops for each of the 12 other-year posters
        CHECK(fold.train_ids.size() == 12 * 5);
    }
}

TEST_CASE("multi-winner and zero-winner years") {
    std::vector<PosterRecord> records;
    records.push_back({Festival::Venice, 1990, "w1", "", "x.png", true, ""});
    records.push_back({Festival::Venice, 1990, "w2", "", "x.png", true, ""});
    records.push_back({Festival::Venice, 1990, "n1", "", "x.png", false, ""});
    records.push_back({Festival::Venice, 1991, "n2", "", "x.png", false, ""});
    records.push_back({Festival::Venice, 1991, "n3", "", "x.png", false, ""});
    const Corpus corpus{std::move(records)};
    const auto folds = plan_loyo(corpus, Festival::Venice);
    REQUIRE(folds.size() == 2);
    CHECK(folds[0].winner_count_k == 2);
    CHECK_FALSE(folds[0].skipped);
    CHECK(folds[1].winner_count_k == 0);
    CHECK(folds[1].skipped);
}

TEST_CASE("plan_loyo rejects absent festivals") {
    std::vector<PosterRecord> records{{Festival::Venice, 1990, "a", "", "x.png", true, ""}};
    const Corpus corpus{std::move(records)};
    CHECK_THROWS_AS(plan_loyo(corpus, Festival::Berlin), Error);
}

TEST_CASE("folds never leak test posters or their crops, and test sets partition the corpus") {
    std::mt19937_64 rng(11);
    std::vector<PosterRecord> records;
    int id = 0;
    for (int year = 2000; year < 2010; ++year) {
        const int n = 2 + static_cast<int>(rng() % 7);
        for (int i = 0; i < n; ++i)
            records.push_back({Festival::Berlin, year, "p" + std::to_string(id++), "", "x.png",
                               i < static_cast<int>(rng() % 3), ""});
    }
    const std::size_t total = records.size();
    const Corpus corpus{std::move(records)};
    const auto folds = plan_loyo(corpus, Festival::Berlin);

    std::size_t test_total = 0;
    std::set<std::string> seen;
    for (const auto& fold : folds) {
        std::set<std::string> train(fold.train_ids.begin(), fold.train_ids.end());
        for (const auto& test_id : fold.test_ids) {
            CHECK(train.count(test_id) == 0);
            for (int q = 0; q < 4; ++q) CHECK(train.count(augmented_id(test_id, q)) == 0);
            CHECK(seen.insert(test_id).second); // each poster tested exactly once
        }
        test_total += fold.test_ids.size();
        // each non-test poster contributes exactly 5 train ids
        CHECK(fold.train_ids.size() == (total - fold.test_ids.size()) * 5);
    }
    CHECK(test_total == total);
}

TEST_CASE("quadrant crops tile the image exactly") {
    SUBCASE("even dims") {
        const auto rects = quadrant_rects(100, 200);
        CHECK(rects[0].w == 50);
        CHECK(rects[0].h == 100);
        CHECK(rects[1].x == 50);
        CHECK(rects[2].y == 100);
        CHECK(rects[3].x == 50);
        CHECK(rects[3].y == 100);
        for (const auto& r : rects) {
            CHECK(r.w == 50);
            CHECK(r.h == 100);
        }
    }
    SUBCASE("odd dims put the extra pixel right/bottom") {
        const auto rects = quadrant_rects(101, 201);
        CHECK(rects[0].w == 50);
        CHECK(rects[1].w == 51);
        CHECK(rects[0].h == 100);
        CHECK(rects[2].h == 101);
        long pixels = 0;
        for (const auto& r : rects) pixels += static_cast<long>(r.w) * r.h;
        CHECK(pixels == 101L * 201L);
    }
}

TEST_CASE("augment_quadrants inherits the label and rejects degenerate images") {
    PosterRecord rec{Festival::Academy, 2000, "w", "", "x.png", true, ""};
    Image img = solid_image(10, 8, 1, 2, 3);
    // distinct corner values so crops are distinguishable
    img.at(0, 0, 0) = 11;
    img.at(9, 0, 0) = 22;
    img.at(0, 7, 0) = 33;
    img.at(9, 7, 0) = 44;

    const auto crops = augment_quadrants(rec, img);
    REQUIRE(crops.size() == 4);
    std::size_t pixel_sum = 0;
    for (int q = 0; q < 4; ++q) {
        CHECK(crops[q].sample.parent_id == "w");
        CHECK(crops[q].sample.crop_index == q);
        CHECK(crops[q].sample.label == true);
        pixel_sum += static_cast<std::size_t>(crops[q].image.width) * crops[q].image.height;
    }
    CHECK(pixel_sum == 80);
    CHECK(crops[0].image.at(0, 0, 0) == 11);
    CHECK(crops[1].image.at(crops[1].image.width - 1, 0, 0) == 22);
    CHECK(crops[2].image.at(0, crops[2].image.height - 1, 0) == 33);
    CHECK(crops[3].image.at(crops[3].image.width - 1, crops[3].image.height - 1, 0) == 44);

    const Image tiny = solid_image(1, 5, 0, 0, 0);
    CHECK_THROWS_AS(augment_quadrants(rec, tiny), Error);
}

TEST_CASE("loading and planning are deterministic") {
    TempDir dir;
    const auto path = write_lines(dir, "m.jsonl",
                                  {manifest_line("cannes", 2001, "b", "B", "b.png", false),
                                   manifest_line("cannes", 2000, "a", "A", "a.png", true),
                                   manifest_line("cannes", 2001, "c", "C", "c.png", true)});
    const Corpus c1 = load_manifest(path);
    const Corpus c2 = load_manifest(path);
    const auto f1 = plan_loyo(c1, Festival::Cannes);
    const auto f2 = plan_loyo(c2, Festival::Cannes);
    REQUIRE(f1.size() == f2.size());
    for (std::size_t i = 0; i < f1.size(); ++i) {
        CHECK(f1[i].train_ids == f2[i].train_ids);
        CHECK(f1[i].test_ids == f2[i].test_ids);
        CHECK(f1[i].winner_count_k == f2[i].winner_count_k);
    }
}

} // TEST_SUITE

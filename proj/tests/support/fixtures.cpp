#include "support/fixtures.hpp"

#include <filesystem>
#include <fstream>
#include <random>
#include <stdexcept>

#include <json.hpp>

#include "support/test_images.hpp"

namespace posterlab::testing {

std::string manifest_line(const std::string& festival, int year, const std::string& id,
                          const std::string& title, const std::string& image, bool winner,
                          const std::string& annotations) {
    nlohmann::json obj{{"festival", festival}, {"year", year},     {"id", id},
                       {"title", title},       {"image", image},   {"winner", winner}};
    if (!annotations.empty()) obj["annotations"] = annotations;
    return obj.dump();
}

void write_reference_manifest(const std::string& path) {
    struct Row {
        const char* festival;
        int first_year;
        int winners;
        int nominates;
    };
    // Winner counts and non-winner nominee counts per festival.
    static const Row rows[] = {
        {"academy", 1929, 88, 440},
        {"berlin", 1951, 63, 905},
        {"cannes", 1946, 91, 1335},
        {"venice", 1932, 53, 869},
    };

    std::ofstream out(path, std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + path);
    for (const Row& row : rows) {
        // Spread records over years; every year gets at least one record.
        const int total = row.winners + row.nominates;
        for (int i = 0; i < total; ++i) {
            const bool winner = i < row.winners;
            const int year = row.first_year + i % 60;
            const std::string id = std::string(row.festival) + (winner ? "_w" : "_n") + std::to_string(i);
            out << manifest_line(row.festival, year, id, "Film " + std::to_string(i),
                                 "posters/" + id + ".png", winner)
                << "\n";
        }
    }
}

const std::vector<std::pair<std::string, double>>& academy2017_scores() {
    static const std::vector<std::pair<std::string, double>> scores = {
        {"Moonlight", 0.167},        {"Lion", 0.163},
        {"Hell or High Water", 0.162}, {"Arrival", 0.151},
        {"Hacksaw Ridge", 0.142},    {"Fences", 0.138},
        {"Hidden Figures", 0.114},   {"Manchester by the Sea", 0.112},
        {"La La Land", 0.093},
    };
    return scores;
}

namespace {

inline double unit(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

Image class_image(std::mt19937_64& rng, int w, int h, bool winner, double noise) {
    Image img;
    img.width = w;
    img.height = h;
    img.channels = 3;
    img.data.resize(static_cast<std::size_t>(w) * h * 3);
    for (std::size_t i = 0; i < static_cast<std::size_t>(w) * h; ++i) {
        std::uint8_t r, g, b;
        if (unit(rng) < noise) {
            r = static_cast<std::uint8_t>(unit(rng) * 256);
            g = static_cast<std::uint8_t>(unit(rng) * 256);
            b = static_cast<std::uint8_t>(unit(rng) * 256);
        } else if (winner) { // red-dominant
            r = static_cast<std::uint8_t>(150 + unit(rng) * 105);
            g = static_cast<std::uint8_t>(unit(rng) * 80);
            b = static_cast<std::uint8_t>(unit(rng) * 80);
        } else { // blue-dominant
            r = static_cast<std::uint8_t>(unit(rng) * 80);
            g = static_cast<std::uint8_t>(unit(rng) * 80);
            b = static_cast<std::uint8_t>(150 + unit(rng) * 105);
        }
        img.data[i * 3] = r;
        img.data[i * 3 + 1] = g;
        img.data[i * 3 + 2] = b;
    }
    return img;
}

} // namespace

std::string build_synthetic_corpus(const std::string& dir, const SyntheticCorpusSpec& spec) {
    namespace fs = std::filesystem;
    fs::create_directories(fs::path(dir) / "posters");
    std::mt19937_64 rng(spec.seed);

    const std::string manifest_path = (fs::path(dir) / "manifest.jsonl").string();
    std::ofstream manifest(manifest_path, std::ios::trunc);
    if (!manifest) throw std::runtime_error("cannot write " + manifest_path);

    for (int y = 0; y < spec.years; ++y) {
        const int year = spec.first_year + y;
        for (int i = 0; i <= spec.nominees_per_year; ++i) {
            const bool winner = i == 0;
            char id[32];
            std::snprintf(id, sizeof id, "y%04d%c%02d", year, winner ? 'w' : 'n', i);
            const std::string rel = std::string("posters/") + id + ".png";
            write_png((fs::path(dir) / rel).string(),
                      class_image(rng, spec.width, spec.height, winner, spec.noise));
            manifest << manifest_line(spec.festival, year, id, std::string("Title ") + id, rel, winner)
                     << "\n";
        }
    }
    return manifest_path;
}

std::string face_annotation_json(
    const std::vector<std::tuple<double, double, double, double, std::string>>& faces) {
    nlohmann::json doc;
    doc["faces"] = nlohmann::json::array();
    for (const auto& [x, y, w, h, expr] : faces) {
        doc["faces"].push_back({{"bbox", {x, y, w, h}}, {"expression", expr}, {"confidence", 0.9}});
    }
    return doc.dump();
}

} // namespace posterlab::testing

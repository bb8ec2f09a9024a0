#include "posterlab/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "posterlab/error.hpp"
#include "posterlab/features.hpp"
#include "posterlab/image.hpp"

namespace posterlab {

namespace {

std::string csv_quote(const std::string& field) {
    if (field.find_first_of(",\"\n\r") == std::string::npos) return field;
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

std::string fmt(double v, int decimals) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
    return buf;
}

// Minimal grouped-bar SVG: one group per festival, one bar per channel.
std::string grouped_bar_svg(const std::vector<FestivalScore>& scores) {
    std::vector<std::string> channels;
    std::vector<Festival> festivals;
    for (const auto& s : scores) {
        if (std::find(channels.begin(), channels.end(), s.channel) == channels.end())
            channels.push_back(s.channel);
        if (std::find(festivals.begin(), festivals.end(), s.festival) == festivals.end())
            festivals.push_back(s.festival);
    }
    std::sort(channels.begin(), channels.end());

    const int bar_w = 24, gap = 10, group_gap = 36, chart_h = 220, base_y = 250, left = 50;
    const int group_w = static_cast<int>(channels.size()) * (bar_w + gap) + group_gap;
    const int width = left + group_w * static_cast<int>(festivals.size()) + 40;

    static const char* palette[] = {"#4e79a7", "#f28e2b", "#e15759", "#76b7b2",
                                    "#59a14f", "#edc948", "#b07aa1", "#9c755f"};
    std::string svg = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(width) +
                      "\" height=\"300\" font-family=\"sans-serif\" font-size=\"11\">\n";
    svg += "<line x1=\"" + std::to_string(left) + "\" y1=\"" + std::to_string(base_y) + "\" x2=\"" +
           std::to_string(width - 20) + "\" y2=\"" + std::to_string(base_y) + "\" stroke=\"#333\"/>\n";

    int gx = left;
    for (Festival f : festivals) {
        int bx = gx;
        for (std::size_t c = 0; c < channels.size(); ++c) {
            double recall = 0.0;
            for (const auto& s : scores)
                if (s.festival == f && s.channel == channels[c]) recall = s.winner_recall;
            const int h = static_cast<int>(std::lround(recall * chart_h));
            svg += "<rect x=\"" + std::to_string(bx) + "\" y=\"" + std::to_string(base_y - h) +
                   "\" width=\"" + std::to_string(bar_w) + "\" height=\"" + std::to_string(h) +
                   "\" fill=\"" + palette[c % 8] + "\"><title>" + channels[c] + " " +
                   fmt(recall * 100.0, 1) + "%</title></rect>\n";
            bx += bar_w + gap;
        }
        svg += "<text x=\"" + std::to_string(gx) + "\" y=\"" + std::to_string(base_y + 16) + "\">" +
               to_string(f) + "</text>\n";
        gx += group_w;
    }
    for (std::size_t c = 0; c < channels.size(); ++c) {
        const int ly = 20 + static_cast<int>(c) * 14;
        svg += "<rect x=\"" + std::to_string(width - 130) + "\" y=\"" + std::to_string(ly - 9) +
               "\" width=\"10\" height=\"10\" fill=\"" + std::string(palette[c % 8]) + "\"/>\n";
        svg += "<text x=\"" + std::to_string(width - 115) + "\" y=\"" + std::to_string(ly) + "\">" +
               channels[c] + "</text>\n";
    }
    svg += "</svg>\n";
    return svg;
}

} // namespace

std::string to_csv(const Report& report) {
    std::string out;
    for (std::size_t i = 0; i < report.header.size(); ++i) {
        if (i) out += ',';
        out += csv_quote(report.header[i]);
    }
    out += '\n';
    for (const auto& row : report.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i) out += ',';
            out += csv_quote(row[i]);
        }
        out += '\n';
    }
    return out;
}

void write_csv(const Report& report, const std::string& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write report: " + path);
    out << to_csv(report);
}

Report accuracy_table(const std::vector<FestivalScore>& scores) {
    Report report;
    report.kind = ReportKind::AccuracyTable;
    report.header = {"festival", "channel", "winner_recall", "per_year_hit_rate", "random_baseline"};

    std::vector<FestivalScore> sorted = scores;
    std::sort(sorted.begin(), sorted.end(), [](const FestivalScore& a, const FestivalScore& b) {
        if (a.festival != b.festival) return static_cast<int>(a.festival) < static_cast<int>(b.festival);
        return a.channel < b.channel;
    });
    for (const auto& s : sorted)
        report.rows.push_back({to_string(s.festival), s.channel, fmt(s.winner_recall, 4),
                               fmt(s.per_year_hit_rate, 4), fmt(s.random_baseline, 4)});
    if (!sorted.empty()) report.svg = grouped_bar_svg(sorted);
    return report;
}

Report expression_report(const Corpus& corpus, const std::string& base_dir) {
    Report report;
    report.kind = ReportKind::ExpressionHistograms;
    report.header = {"festival", "group"};
    static const char* quadrant_names[] = {"UL", "UR", "LL", "LR"};
    for (int i = 0; i < kEmotionDim; ++i)
        report.header.push_back(std::string(quadrant_names[i / 8]) + "_" +
                                to_string(static_cast<Expression>(i % 8)));

    for (Festival f : kFestivals) {
        if (!corpus.has(f)) continue;
        std::vector<double> winner_mean(kEmotionDim, 0.0), nominee_mean(kEmotionDim, 0.0);
        int winner_n = 0, nominee_n = 0;
        for (int year : corpus.years(f)) {
            for (const PosterRecord* r : corpus.lookup(f, year)) {
                std::vector<FaceAnnotation> faces;
                if (!r->annotations_path.empty()) {
                    const auto path = std::filesystem::path(base_dir) / r->annotations_path;
                    if (std::filesystem::exists(path)) {
                        faces = load_face_annotations(path.string());
                    } else {
                        ++report.warnings;
                    }
                }
                int img_w = 0, img_h = 0;
                if (!faces.empty()) {
                    try {
                        std::tie(img_w, img_h) =
                            image_dimensions((std::filesystem::path(base_dir) / r->image_path).string());
                    } catch (const Error&) {
                        ++report.warnings; // image unreadable, faces dropped
                        faces.clear();
                    }
                }
                const auto hist = emotion_histogram(faces, std::max(img_w, 1), std::max(img_h, 1));
                auto& mean = r->winner ? winner_mean : nominee_mean;
                for (int i = 0; i < kEmotionDim; ++i) mean[i] += hist[i];
                (r->winner ? winner_n : nominee_n) += 1;
            }
        }
        for (int i = 0; i < kEmotionDim; ++i) {
            if (winner_n > 0) winner_mean[i] /= winner_n;
            if (nominee_n > 0) nominee_mean[i] /= nominee_n;
        }
        for (const auto* group : {"winner", "nominee"}) {
            std::vector<std::string> row{to_string(f), group};
            const auto& mean = std::string(group) == "winner" ? winner_mean : nominee_mean;
            for (int i = 0; i < kEmotionDim; ++i) row.push_back(fmt(mean[i], 6));
            report.rows.push_back(std::move(row));
        }
    }
    return report;
}

Report slate_ranking(const WinnerPrediction& prediction,
                     const std::map<std::string, std::string>& titles) {
    if (prediction.ranking.empty()) throw Error("slate_ranking: empty prediction");
    Report report;
    report.kind = ReportKind::SlateRanking;
    report.header = {"title", "score", "rank"};
    int rank = 1;
    for (const auto& [id, p] : prediction.ranking) {
        auto it = titles.find(id);
        const std::string title = it != titles.end() && !it->second.empty() ? it->second : id;
        report.rows.push_back({title, fmt(p, 3), std::to_string(rank++)});
    }
    return report;
}

Report corpus_summary(const std::vector<FestivalStats>& stats) {
    Report report;
    report.kind = ReportKind::CorpusSummary;
    report.header = {"festival", "years", "winners", "nominates", "mean_nominations_per_year"};
    for (const auto& s : stats)
        report.rows.push_back({to_string(s.festival),
                               std::to_string(s.year_min) + "-" + std::to_string(s.year_max),
                               std::to_string(s.winners), std::to_string(s.nominates),
                               fmt(s.mean_per_year, 2)});
    return report;
}

} // namespace posterlab

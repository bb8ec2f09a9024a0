#pragma once

#include <map>
#include <string>
#include <vector>

#include "posterlab/dataset.hpp"
#include "posterlab/protocol.hpp"

namespace posterlab {

enum class ReportKind { AccuracyTable, ExpressionHistograms, SlateRanking, CorpusSummary };

// Tabular report. CSV is the canonical output; the SVG, when present, is a
// cosmetic rendering of the same rows.
struct Report {
    ReportKind kind = ReportKind::AccuracyTable;
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
    std::string svg;      // empty when no chart applies
    int warnings = 0;     // missing inputs encountered while building
};

// RFC 4180 CSV with a header row, UTF-8, LF line endings. Byte-deterministic
// for identical inputs.
std::string to_csv(const Report& report);
void write_csv(const Report& report, const std::string& path);

// Rows (festival, channel, winner_recall, per_year_hit_rate, random_baseline)
// sorted by (festival, channel); grouped-bar SVG alongside.
Report accuracy_table(const std::vector<FestivalScore>& scores);

// Per festival, the mean 32-dim expression histogram over winners and over
// nominees (two aligned rows), followed by per-quadrant sub-tables. Missing
// annotation files are counted in `warnings`.
Report expression_report(const Corpus& corpus, const std::string& base_dir);

// Rows (title, score, rank) sorted by score descending; scores printed with
// three decimals. Posters without a title fall back to their id.
Report slate_ranking(const WinnerPrediction& prediction,
                     const std::map<std::string, std::string>& titles);

Report corpus_summary(const std::vector<FestivalStats>& stats);

} // namespace posterlab

#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "posterlab/dataset.hpp"

namespace posterlab::testing {

// One manifest line in the format load_manifest expects.
std::string manifest_line(const std::string& festival, int year, const std::string& id,
                          const std::string& title, const std::string& image, bool winner,
                          const std::string& annotations = "");

// Manifest with the published corpus cardinalities: Academy 88/440,
// Berlin 63/905, Cannes 91/1335, Venice 53/869 (winners / non-winner
// nominees). Image paths are synthetic; nothing decodes them.
void write_reference_manifest(const std::string& path);

// The nine-film 2017 slate with its predicted scores, used as a replay
// fixture.
const std::vector<std::pair<std::string, double>>& academy2017_scores();

// Red-dominant winners vs blue-dominant nominees with a fraction of noise
// pixels; writes posters plus manifest.jsonl into dir and returns the
// manifest path.
struct SyntheticCorpusSpec {
    int years = 20;
    int nominees_per_year = 5; // plus one winner
    int width = 48;
    int height = 72;
    double noise = 0.10;
    std::uint64_t seed = 7;
    std::string festival = "academy";
    int first_year = 2000;
};
std::string build_synthetic_corpus(const std::string& dir, const SyntheticCorpusSpec& spec = {});

// Face annotation sidecar content for the given (bbox, expression) list.
std::string face_annotation_json(
    const std::vector<std::tuple<double, double, double, double, std::string>>& faces);

} // namespace posterlab::testing

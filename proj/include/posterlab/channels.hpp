#pragma once

#include <memory>
#include <string>
#include <vector>

#include "posterlab/codebook.hpp"
#include "posterlab/features.hpp"
#include "posterlab/protocol.hpp"

namespace posterlab {

// Channels computed from pixels/annotations by this library.
const std::vector<std::string>& computed_channels();

bool is_computed_channel(const std::string& name);

// One sample's feature vector: `img` is the original poster or one quadrant
// crop, `faces` already remapped into its coordinates.
std::vector<float> extract_channel(const std::string& channel, const Image& img,
                                   const std::vector<FaceAnnotation>& faces,
                                   const Codebook* codebook);

// Feature source for a computed channel. Decodes each poster once and derives
// the original + crop samples from it. For "siftbof" the codebook is rebuilt
// per fold from the fold's training posters unless a fixed codebook is given.
std::unique_ptr<FeatureSource> make_computed_source(const std::string& channel,
                                                    const std::string& base_dir,
                                                    const RunOptions& opts,
                                                    std::shared_ptr<const Codebook> fixed_codebook = {});

// Feature source backed by a PFV file (externally supplied deep/mid-level
// features, or a previous `extract` run). Missing crop ids are skipped;
// missing originals are skipped with a warning.
std::unique_ptr<FeatureSource> make_pfv_source(const std::string& path);

// "lab", "hog", ... -> computed source; "pfv:<path>" or "<path>.pfv" -> PFV
// source.
std::unique_ptr<FeatureSource> make_feature_source(const std::string& spec,
                                                   const std::string& base_dir,
                                                   const RunOptions& opts);

// Pooled dense-SIFT descriptors of the given posters (decoded at canonical
// size), deterministically stride-subsampled to at most `cap` descriptors.
// Per-poster failures are collected in `failures` when given, rethrown
// otherwise.
std::vector<float> pooled_sift_descriptors(const std::vector<const PosterRecord*>& posters,
                                           const std::string& base_dir, std::size_t cap = 100000,
                                           std::vector<std::string>* failures = nullptr);

} // namespace posterlab

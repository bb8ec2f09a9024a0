#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "posterlab/dataset.hpp"
#include "posterlab/protocol.hpp"
#include "posterlab/svm.hpp"

namespace posterlab {

// Resolved configuration for one command invocation. Defaults mirror the
// classifier constants the pipeline ships with (C = 5e4, gamma = 1e-5, RBF).
struct RunConfig {
    std::string manifest;
    std::optional<Festival> festival; // evaluate/predict filter
    std::vector<std::string> channels = {"lab"};
    SvmParams svm;
    bool standardize = false;
    FusionRule fusion = FusionRule::Mean;
    int codebook_k = 256;
    std::uint64_t seed = 42;
    int jobs = 1;
    std::string out_dir;
    std::string inject_posteriors; // posterior JSONL, bypasses training in predict
    std::string codebook_path;     // fixed codebook PFV for extract / evaluate
};

// Exit codes: 0 success, 1 partial (per-item failures), 2 configuration or
// input error.
int cmd_summarize(const std::string& manifest_path, const std::string& out_dir, std::ostream& out,
                  std::ostream& err);
int cmd_extract(const RunConfig& cfg, std::ostream& out, std::ostream& err);
int cmd_train_codebook(const RunConfig& cfg, std::ostream& out, std::ostream& err);
int cmd_evaluate(const RunConfig& cfg, std::ostream& out, std::ostream& err);
int cmd_predict(const RunConfig& cfg, const std::string& slate_manifest, std::ostream& out,
                std::ostream& err);
int cmd_report(const RunConfig& cfg, const std::string& runs_path, std::ostream& out,
               std::ostream& err);

// Inverse of run_records_jsonl: rebuild per-channel runs from a records file.
std::vector<ChannelRun> parse_run_records(const std::string& path);

} // namespace posterlab

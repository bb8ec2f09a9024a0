#include "posterlab/commands.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>

#include <json.hpp>

#include "posterlab/channels.hpp"
#include "posterlab/error.hpp"
#include "posterlab/report.hpp"

namespace posterlab {

namespace {

namespace fs = std::filesystem;

std::string manifest_dir(const std::string& manifest_path) {
    return fs::path(manifest_path).parent_path().string();
}

void ensure_out_dir(const std::string& out_dir) {
    if (out_dir.empty()) throw Error("--out directory required");
    fs::create_directories(out_dir);
}

std::vector<Festival> festivals_to_run(const Corpus& corpus, const std::optional<Festival>& filter) {
    std::vector<Festival> out;
    for (Festival f : kFestivals) {
        if (filter && *filter != f) continue;
        if (corpus.has(f)) out.push_back(f);
    }
    if (filter && out.empty()) throw Error("festival '" + to_string(*filter) + "' absent from corpus");
    return out;
}

std::vector<const PosterRecord*> festival_posters(const Corpus& corpus, Festival f) {
    std::vector<const PosterRecord*> out;
    for (int year : corpus.years(f))
        for (const PosterRecord* r : corpus.lookup(f, year)) out.push_back(r);
    std::sort(out.begin(), out.end(),
              [](const PosterRecord* a, const PosterRecord* b) { return a->id < b->id; });
    return out;
}

std::shared_ptr<const Codebook> load_fixed_codebook(const std::string& path) {
    if (path.empty()) return {};
    return std::make_shared<Codebook>(codebook_from_pfv(read_pfv(path)));
}

} // namespace

int cmd_summarize(const std::string& manifest_path, const std::string& out_dir, std::ostream& out,
                  std::ostream& err) {
    try {
        const Corpus corpus = load_manifest(manifest_path);
        const Report report = corpus_summary(summarize(corpus));
        out << to_csv(report);
        if (!out_dir.empty()) {
            fs::create_directories(out_dir);
            write_csv(report, (fs::path(out_dir) / "corpus_summary.csv").string());
        }
        return 0;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    }
}

int cmd_extract(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    Corpus corpus;
    std::shared_ptr<const Codebook> codebook;
    try {
        corpus = load_manifest(cfg.manifest);
        ensure_out_dir(cfg.out_dir);
        for (const auto& channel : cfg.channels) {
            if (!is_computed_channel(channel))
                throw Error("extract: '" + channel + "' is not a computed channel");
            if (channel == "siftbof" && cfg.codebook_path.empty())
                throw Error("extract: siftbof needs --codebook (train one with train-codebook)");
        }
        codebook = load_fixed_codebook(cfg.codebook_path);
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    }

    const std::string base = manifest_dir(cfg.manifest);
    const RunOptions opts{cfg.standardize, cfg.seed, cfg.jobs, cfg.codebook_k};

    std::vector<const PosterRecord*> posters;
    for (Festival f : kFestivals) {
        if (cfg.festival && *cfg.festival != f) continue;
        if (!corpus.has(f)) continue;
        const auto fp = festival_posters(corpus, f);
        posters.insert(posters.end(), fp.begin(), fp.end());
    }

    int failures = 0;
    for (const auto& channel : cfg.channels) {
        auto source = make_computed_source(channel, base, opts, codebook);
        std::vector<std::vector<SampleFeatures>> feats(posters.size());
        std::vector<std::string> errors(posters.size());
        parallel_for(static_cast<int>(posters.size()), cfg.jobs, [&](int i) {
            try {
                feats[i] = source->poster_features(*posters[i], true);
            } catch (const std::exception& e) {
                errors[i] = e.what();
            }
        });

        FeatureFile file;
        file.channel = channel;
        for (std::size_t i = 0; i < posters.size(); ++i) {
            if (!errors[i].empty()) {
                err << "extract " << channel << ": " << posters[i]->id << ": " << errors[i] << "\n";
                ++failures;
                continue;
            }
            for (auto& s : feats[i]) {
                if (file.records.empty()) file.dim = static_cast<std::uint32_t>(s.values.size());
                file.records.push_back({std::move(s.sample_id), std::move(s.values)});
            }
        }
        std::sort(file.records.begin(), file.records.end(),
                  [](const FeatureVector& a, const FeatureVector& b) { return a.id < b.id; });
        const std::string path = (fs::path(cfg.out_dir) / (channel + ".pfv")).string();
        write_pfv(path, file);
        out << channel << ": " << file.records.size() << " records -> " << path << "\n";
    }
    return failures > 0 ? 1 : 0;
}

int cmd_train_codebook(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    try {
        const Corpus corpus = load_manifest(cfg.manifest);
        ensure_out_dir(cfg.out_dir);

        std::vector<const PosterRecord*> posters;
        for (Festival f : festivals_to_run(corpus, cfg.festival)) {
            const auto fp = festival_posters(corpus, f);
            posters.insert(posters.end(), fp.begin(), fp.end());
        }
        if (posters.empty()) throw Error("train-codebook: no posters");

        std::vector<std::string> failures;
        const std::vector<float> pool =
            pooled_sift_descriptors(posters, manifest_dir(cfg.manifest), 100000, &failures);
        for (const auto& f : failures) err << "train-codebook: " << f << "\n";

        const int n = static_cast<int>(pool.size() / 128);
        if (n < 1) throw Error("train-codebook: no descriptors extracted");
        const int k = std::min(cfg.codebook_k, n);
        const Codebook cb = kmeans_fit(pool, n, 128, k, cfg.seed);

        const std::string path = (fs::path(cfg.out_dir) / "codebook.pfv").string();
        write_pfv(path, codebook_to_pfv(cb));
        out << "codebook: k=" << cb.k << " inertia=" << cb.inertia << " -> " << path << "\n";
        return failures.empty() ? 0 : 1;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    }
}

int cmd_evaluate(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    Corpus corpus;
    std::vector<Festival> festivals;
    std::shared_ptr<const Codebook> codebook;
    try {
        corpus = load_manifest(cfg.manifest);
        ensure_out_dir(cfg.out_dir);
        if (cfg.channels.empty()) throw Error("evaluate: at least one channel required");
        festivals = festivals_to_run(corpus, cfg.festival);
        codebook = load_fixed_codebook(cfg.codebook_path);
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    }

    const std::string base = manifest_dir(cfg.manifest);
    const RunOptions opts{cfg.standardize, cfg.seed, cfg.jobs, cfg.codebook_k};

    std::string records;
    std::vector<FestivalScore> scores;
    int failed_folds = 0;
    for (Festival festival : festivals) {
        std::vector<ChannelRun> runs;
        for (const auto& spec : cfg.channels) {
            std::unique_ptr<FeatureSource> source;
            try {
                source = spec == "siftbof" && codebook
                             ? make_computed_source(spec, base, opts, codebook)
                             : make_feature_source(spec, base, opts);
            } catch (const std::exception& e) {
                err << "error: " << e.what() << "\n";
                return 2;
            }
            runs.push_back(run_channel(corpus, festival, *source, cfg.svm, opts));
        }
        if (runs.size() > 1) runs.push_back(late_fuse(runs, {}, cfg.fusion));

        for (const ChannelRun& run : runs) {
            for (const FoldResult& fold : run.folds) {
                if (fold.failed) {
                    err << "failed fold: " << run.channel << " " << to_string(festival) << " "
                        << fold.year << ": " << fold.error << "\n";
                    ++failed_folds;
                }
            }
            records += run_records_jsonl(run, corpus);
            scores.push_back(score(run, corpus));
        }
    }

    {
        std::ofstream rec_out(fs::path(cfg.out_dir) / "runs.jsonl", std::ios::binary | std::ios::trunc);
        rec_out << records;
    }
    const Report table = accuracy_table(scores);
    write_csv(table, (fs::path(cfg.out_dir) / "accuracy.csv").string());
    if (!table.svg.empty()) {
        std::ofstream svg_out(fs::path(cfg.out_dir) / "accuracy.svg", std::ios::binary | std::ios::trunc);
        svg_out << table.svg;
    }
    out << to_csv(table);
    return failed_folds > 0 ? 1 : 0;
}

namespace {

std::map<std::string, double> load_injected_posteriors(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open posterior file: " + path);
    std::map<std::string, double> posteriors;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            const auto obj = nlohmann::json::parse(line);
            const std::string id =
                obj.contains("poster_id") ? obj.at("poster_id").get<std::string>() : obj.at("id").get<std::string>();
            posteriors[id] = obj.at("p").get<double>();
        } catch (const nlohmann::json::exception& e) {
            throw Error("bad posterior file line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    return posteriors;
}

} // namespace

int cmd_predict(const RunConfig& cfg, const std::string& slate_manifest, std::ostream& out,
                std::ostream& err) {
    try {
        const Corpus slate = load_manifest(slate_manifest);
        if (slate.empty()) throw Error("predict: empty slate");
        const Festival festival = slate.records().front().festival;
        const int year = slate.records().front().year;

        std::map<std::string, std::string> titles;
        int slate_winners = 0;
        for (const PosterRecord& r : slate.records()) {
            titles[r.id] = r.title;
            slate_winners += r.winner ? 1 : 0;
        }

        std::map<std::string, double> posteriors;
        if (!cfg.inject_posteriors.empty()) {
            const auto injected = load_injected_posteriors(cfg.inject_posteriors);
            for (const PosterRecord& r : slate.records()) {
                auto it = injected.find(r.id);
                if (it == injected.end()) throw Error("no injected posterior for '" + r.id + "'");
                posteriors[r.id] = it->second;
            }
        } else {
            if (!cfg.festival) throw Error("predict: --festival required to train on the corpus");
            const Corpus corpus = load_manifest(cfg.manifest);
            const std::string base = manifest_dir(cfg.manifest);
            const std::string slate_base = manifest_dir(slate_manifest);
            const RunOptions opts{cfg.standardize, cfg.seed, cfg.jobs, cfg.codebook_k};
            const auto train_posters = festival_posters(corpus, *cfg.festival);
            if (train_posters.empty()) throw Error("predict: no training posters for festival");

            SvmParams params = cfg.svm;
            if (cfg.standardize && !params.gamma) params.gamma_scale_dim = true;

            std::vector<std::map<std::string, double>> per_channel;
            for (const auto& spec : cfg.channels) {
                auto source = make_feature_source(spec, base, opts);
                source->prepare_fold(train_posters);

                std::vector<std::vector<float>> x;
                std::vector<int> y;
                for (const PosterRecord* r : train_posters) {
                    for (auto& s : source->poster_features(*r, true)) {
                        x.push_back(std::move(s.values));
                        y.push_back(r->winner ? +1 : -1);
                    }
                }
                Standardizer stand;
                if (cfg.standardize) {
                    stand.fit(x);
                    for (auto& row : x) row = stand.apply(row);
                }
                const SvmModel model = train_calibrated(x, y, params);

                // Slate features come from the slate manifest's own directory.
                auto slate_source = make_feature_source(spec, slate_base, opts);
                std::map<std::string, double> channel_posteriors;
                for (const PosterRecord& r : slate.records()) {
                    const auto feats = slate_source->poster_features(r, false);
                    if (feats.empty()) throw Error("no features for slate poster '" + r.id + "'");
                    const std::vector<float> row =
                        cfg.standardize ? stand.apply(feats.front().values) : feats.front().values;
                    channel_posteriors[r.id] = predict_proba(model, row);
                }
                per_channel.push_back(std::move(channel_posteriors));
            }
            for (const PosterRecord& r : slate.records()) {
                double acc = cfg.fusion == FusionRule::Mean ? 0.0 : 1.0;
                for (const auto& channel_posteriors : per_channel) {
                    const double p = channel_posteriors.at(r.id);
                    if (cfg.fusion == FusionRule::Mean)
                        acc += p / per_channel.size();
                    else
                        acc *= std::pow(p, 1.0 / per_channel.size());
                }
                posteriors[r.id] = acc;
            }
        }

        const int k = std::max(1, slate_winners);
        const WinnerPrediction pred = select_winners(festival, year, posteriors, k);
        const Report report = slate_ranking(pred, titles);
        out << to_csv(report);
        if (!cfg.out_dir.empty()) {
            fs::create_directories(cfg.out_dir);
            write_csv(report, (fs::path(cfg.out_dir) / "slate_ranking.csv").string());
        }
        return 0;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    }
}

std::vector<ChannelRun> parse_run_records(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open run records: " + path);

    // (channel, festival) -> year -> fold
    std::map<std::pair<std::string, Festival>, std::map<int, FoldResult>> grouped;
    std::vector<std::pair<std::string, Festival>> order;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            const auto obj = nlohmann::json::parse(line);
            const std::string channel = obj.at("channel").get<std::string>();
            const Festival festival = festival_from_string(obj.at("festival").get<std::string>());
            const int year = obj.at("year").get<int>();
            const auto key = std::make_pair(channel, festival);
            if (!grouped.count(key)) order.push_back(key);
            FoldResult& fold = grouped[key][year];
            fold.year = year;
            if (obj.at("skipped").get<bool>()) {
                fold.skipped = true;
            } else {
                fold.posteriors[obj.at("poster_id").get<std::string>()] = obj.at("p").get<double>();
            }
        } catch (const nlohmann::json::exception& e) {
            throw Error("bad run record at line " + std::to_string(line_no) + ": " + e.what());
        }
    }

    std::vector<ChannelRun> runs;
    for (const auto& key : order) {
        ChannelRun run;
        run.channel = key.first;
        run.festival = key.second;
        for (auto& [year, fold] : grouped[key]) run.folds.push_back(std::move(fold));
        runs.push_back(std::move(run));
    }
    return runs;
}

int cmd_report(const RunConfig& cfg, const std::string& runs_path, std::ostream& out,
               std::ostream& err) {
    try {
        const Corpus corpus = load_manifest(cfg.manifest);
        ensure_out_dir(cfg.out_dir);

        std::vector<FestivalScore> scores;
        for (const ChannelRun& run : parse_run_records(runs_path)) scores.push_back(score(run, corpus));

        const Report table = accuracy_table(scores);
        write_csv(table, (fs::path(cfg.out_dir) / "accuracy.csv").string());
        if (!table.svg.empty()) {
            std::ofstream svg_out(fs::path(cfg.out_dir) / "accuracy.svg",
                                  std::ios::binary | std::ios::trunc);
            svg_out << table.svg;
        }

        const Report faces = expression_report(corpus, manifest_dir(cfg.manifest));
        write_csv(faces, (fs::path(cfg.out_dir) / "expression.csv").string());
        if (faces.warnings > 0)
            err << "expression report: " << faces.warnings << " poster(s) with missing inputs\n";

        out << to_csv(table);
        return 0;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    }
}

} // namespace posterlab

#include <cstdlib>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "posterlab/commands.hpp"
#include "posterlab/error.hpp"

using namespace posterlab;

int main(int argc, char** argv) {
    CLI::App app{"posterlab: festival winner prediction from movie posters"};
    app.require_subcommand(1);

    RunConfig cfg;
    std::string festival_name, kernel_name = "rbf", fusion_name = "mean";
    std::string slate_path, runs_path;
    bool no_class_weights = false;
    double svm_c = cfg.svm.c;
    double svm_gamma = -1.0; // <0 means unset
    bool seed_given = false;

    const auto add_common = [&](CLI::App* cmd, bool needs_manifest = true) {
        if (needs_manifest) cmd->add_option("--manifest", cfg.manifest, "poster manifest (JSONL)")->required();
        cmd->add_option("--festival", festival_name, "restrict to one festival: academy|berlin|cannes|venice");
        cmd->add_option("--out", cfg.out_dir, "output directory");
        cmd->add_option("--jobs", cfg.jobs, "worker threads")->check(CLI::PositiveNumber);
        cmd->add_option("--seed", cfg.seed, "PRNG seed")->each([&](const std::string&) { seed_given = true; });
    };
    const auto add_model_flags = [&](CLI::App* cmd) {
        cmd->add_option("--channels", cfg.channels, "feature channels (computed name or pfv:<file>)")
            ->delimiter(',');
        cmd->add_option("--svm-c", svm_c, "SVM C");
        cmd->add_option("--svm-gamma", svm_gamma, "RBF gamma (default 1e-5, or 1/dim with --standardize)");
        cmd->add_option("--kernel", kernel_name, "rbf|linear");
        cmd->add_flag("--no-class-weights", no_class_weights, "disable minority-class C scaling");
        cmd->add_flag("--standardize", cfg.standardize, "z-score features per training fold");
        cmd->add_option("--fusion", fusion_name, "late fusion rule: mean|product");
        cmd->add_option("--codebook-k", cfg.codebook_k, "SIFT codebook size")->check(CLI::PositiveNumber);
        cmd->add_option("--codebook", cfg.codebook_path, "fixed codebook PFV for siftbof");
    };

    CLI::App* summarize = app.add_subcommand("summarize", "corpus statistics per festival");
    add_common(summarize);

    CLI::App* extract = app.add_subcommand("extract", "write one PFV feature file per channel");
    add_common(extract);
    add_model_flags(extract);

    CLI::App* train_codebook = app.add_subcommand("train-codebook", "fit the SIFT bag-of-features codebook");
    add_common(train_codebook);
    train_codebook->add_option("--codebook-k", cfg.codebook_k, "codebook size")->check(CLI::PositiveNumber);

    CLI::App* evaluate = app.add_subcommand("evaluate", "leave-one-year-out winner prediction");
    add_common(evaluate);
    add_model_flags(evaluate);

    CLI::App* predict = app.add_subcommand("predict", "rank a slate of nominees");
    add_common(predict);
    add_model_flags(predict);
    predict->add_option("--slate", slate_path, "slate manifest (JSONL)")->required();
    predict->add_option("--inject-posteriors", cfg.inject_posteriors,
                        "posterior JSONL replay hook; skips training");

    CLI::App* report = app.add_subcommand("report", "rebuild reports from saved run records");
    add_common(report);
    report->add_option("--runs", runs_path, "runs.jsonl from a previous evaluate")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (!festival_name.empty()) cfg.festival = festival_from_string(festival_name);
        cfg.svm.kernel = kernel_from_string(kernel_name);
        if (fusion_name == "mean")
            cfg.fusion = FusionRule::Mean;
        else if (fusion_name == "product")
            cfg.fusion = FusionRule::Product;
        else
            throw Error("unknown fusion rule: '" + fusion_name + "'");
        cfg.svm.c = svm_c;
        if (svm_gamma >= 0) cfg.svm.gamma = svm_gamma;
        cfg.svm.class_weighting = !no_class_weights;
        if (!seed_given) {
            if (const char* env = std::getenv("POSTERLAB_SEED")) cfg.seed = std::strtoull(env, nullptr, 10);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }

    if (summarize->parsed()) return cmd_summarize(cfg.manifest, cfg.out_dir, std::cout, std::cerr);
    if (extract->parsed()) return cmd_extract(cfg, std::cout, std::cerr);
    if (train_codebook->parsed()) return cmd_train_codebook(cfg, std::cout, std::cerr);
    if (evaluate->parsed()) return cmd_evaluate(cfg, std::cout, std::cerr);
    if (predict->parsed()) return cmd_predict(cfg, slate_path, std::cout, std::cerr);
    if (report->parsed()) return cmd_report(cfg, runs_path, std::cout, std::cerr);
    return 2;
}

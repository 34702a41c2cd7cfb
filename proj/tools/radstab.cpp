// radstab command line: stage-wise and end-to-end access to the robust
// radiomics workflow. Subcommands: phantom, perturb, extract, icc, survival,
// pipeline. Each accepts --config <json> plus flag overrides; stage commands
// derive their random substreams from the same root seed as the pipeline, so
// running stages individually reproduces the pipeline bundle byte for byte.
//
// Exit codes: 0 success, 1 internal error, 2 bad input.

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include "radstab/radstab.hpp"

namespace fs = std::filesystem;
using radstab::input_error;

namespace {

nlohmann::json load_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw input_error("cannot open config file: " + path);
    try {
        nlohmann::json j;
        in >> j;
        return j;
    } catch (const nlohmann::json::exception& e) {
        throw input_error("malformed JSON in " + path + ": " + e.what());
    }
}

radstab::PipelineConfig load_pipeline_config(const std::string& config_path) {
    radstab::PipelineConfig cfg;
    if (!config_path.empty()) cfg = load_json_file(config_path).get<radstab::PipelineConfig>();
    return cfg;
}

struct CommonFlags {
    std::string config_path;
    std::string out;
    std::uint64_t seed = 0;
    bool seed_set = false;
    int n_segmentations = 0;
    double icc_cutoff = -1.0;
    double bin_width = 0.0;
    int threads = 1;

    void register_on(CLI::App* cmd) {
        cmd->add_option("--config", config_path, "pipeline config JSON");
        cmd->add_option("--out", out, "output directory");
        cmd->add_option("--seed", seed, "root seed override")->each([this](const std::string&) {
            seed_set = true;
        });
        cmd->add_option("--n-segmentations", n_segmentations,
                        "masks sampled per case (override)");
        cmd->add_option("--icc-cutoff", icc_cutoff, "ICC retention cutoff (override)");
        cmd->add_option("--bin-width", bin_width, "discretization bin width (override)");
        cmd->add_option("--threads", threads, "worker threads");
    }

    radstab::PipelineConfig resolve() const {
        radstab::PipelineConfig cfg = load_pipeline_config(config_path);
        if (!out.empty()) cfg.out_dir = out;
        if (seed_set) cfg.seed = seed;
        if (n_segmentations > 0) cfg.n_segmentations = n_segmentations;
        if (icc_cutoff >= 0.0) cfg.icc_cutoff = icc_cutoff;
        if (bin_width > 0.0) cfg.extraction.bin_width = bin_width;
        return cfg;
    }
};

int run_phantom(const std::string& config_path, const std::string& out, std::uint64_t seed,
                bool seed_set, int n_cases) {
    radstab::PhantomSpec spec;
    if (!config_path.empty()) spec = load_json_file(config_path).get<radstab::PhantomSpec>();
    if (seed_set) spec.seed = seed;
    if (n_cases >= 0) spec.n_cases = n_cases;
    if (out.empty()) throw input_error("phantom: --out is required");
    const auto cases = radstab::generate_phantom(spec);
    radstab::write_phantom(out, spec, cases);
    std::cout << "phantom: wrote " << cases.size() << " cases to " << out << "\n";
    return 0;
}

int run_perturb(const CommonFlags& flags, const std::string& masks_override) {
    radstab::PipelineConfig cfg = flags.resolve();
    if (!masks_override.empty()) cfg.masks_dir = masks_override;
    if (cfg.masks_dir.empty()) throw input_error("perturb: masks_dir is required");
    if (cfg.out_dir.empty()) throw input_error("perturb: --out is required");
    const auto ids = radstab::discover_case_ids(cfg.masks_dir);
    const auto result = radstab::perturb_cohort(cfg, ids, flags.threads);
    radstab::write_ensemble_archive((fs::path(cfg.out_dir) / "ensembles").string(),
                                    result.cases);
    std::cout << "perturb: " << result.cases.size() << " cases, " << cfg.n_segmentations
              << " masks each\n";
    return 0;
}

int run_extract(const CommonFlags& flags, const std::string& images_override,
                const std::string& ensembles) {
    radstab::PipelineConfig cfg = flags.resolve();
    if (!images_override.empty()) cfg.images_dir = images_override;
    if (cfg.images_dir.empty()) throw input_error("extract: images_dir is required");
    if (cfg.out_dir.empty()) throw input_error("extract: --out is required");
    const std::string archive =
        ensembles.empty() ? (fs::path(cfg.out_dir) / "ensembles").string() : ensembles;
    const auto cases = radstab::load_ensemble_archive(archive);
    const auto result =
        radstab::extract_cohort(cfg.images_dir, cases, cfg.extraction, flags.threads);
    fs::create_directories(cfg.out_dir);
    radstab::write_feature_csv(result.table, (fs::path(cfg.out_dir) / "features.csv").string());
    for (const std::string& id : result.excluded_cases)
        std::cerr << "excluded (failed segmentation): " << id << "\n";
    std::cout << "extract: " << result.table.n_cases() << " cases x "
              << result.table.n_masks() << " masks x " << result.table.n_features()
              << " features\n";
    return 0;
}

// Sample-mask sub-table: every slot except "reference".
radstab::FeatureTable sample_subtable(const radstab::FeatureTable& t) {
    std::vector<std::size_t> keep;
    for (std::size_t m = 0; m < t.n_masks(); ++m)
        if (t.mask_ids[m] != "reference") keep.push_back(m);
    if (keep.empty()) throw input_error("feature table has only reference masks");
    return radstab::select_masks(t, keep);
}

int run_icc(const CommonFlags& flags, const std::string& features_path) {
    radstab::PipelineConfig cfg = flags.resolve();
    if (cfg.out_dir.empty()) throw input_error("icc: --out is required");
    const std::string fpath = features_path.empty()
                                  ? (fs::path(cfg.out_dir) / "features.csv").string()
                                  : features_path;
    const radstab::FeatureTable full = radstab::read_feature_csv(fpath);
    const radstab::FeatureTable samples = sample_subtable(full);
    const radstab::ICCReport report =
        radstab::icc_report(samples, cfg.icc_cutoff,
                            cfg.icc_variant == "twoway" ? radstab::IccVariant::TwoWay
                                                        : radstab::IccVariant::OneWay);
    fs::create_directories(cfg.out_dir);
    radstab::write_icc_csv(report, (fs::path(cfg.out_dir) / "icc_report.csv").string());
    {
        std::ofstream out(fs::path(cfg.out_dir) / "icc_summary.json");
        out << radstab::icc_summary(report).dump(2) << "\n";
        if (!out) throw input_error("icc: write failed");
    }
    const radstab::AveragedFeatures averaged =
        radstab::average_over_masks(samples, report.retained);
    {
        std::ofstream out(fs::path(cfg.out_dir) / "averaged_features.csv", std::ios::binary);
        std::vector<std::string> header = {"case_id"};
        header.insert(header.end(), averaged.feature_names.begin(),
                      averaged.feature_names.end());
        radstab::csv::write_row(out, header);
        for (std::size_t c = 0; c < averaged.case_ids.size(); ++c) {
            std::vector<std::string> row = {averaged.case_ids[c]};
            for (std::size_t f = 0; f < averaged.n_features(); ++f)
                row.push_back(radstab::csv::format_double(averaged.at(c, f)));
            radstab::csv::write_row(out, row);
        }
        if (!out) throw input_error("icc: write failed");
    }
    std::cout << "icc: " << report.feature_names.size() << " features, retained fraction "
              << report.retained_fraction << "\n";
    return 0;
}

int run_survival(const CommonFlags& flags, const std::string& features_path,
                 const std::string& icc_path, const std::string& survival_override,
                 const std::string& signature_override) {
    radstab::PipelineConfig cfg = flags.resolve();
    if (cfg.out_dir.empty()) throw input_error("survival: --out is required");
    if (!survival_override.empty()) cfg.survival_csv = survival_override;
    if (!signature_override.empty()) cfg.signature_json = signature_override;
    if (cfg.survival_csv.empty()) throw input_error("survival: survival_csv is required");

    const std::string fpath = features_path.empty()
                                  ? (fs::path(cfg.out_dir) / "features.csv").string()
                                  : features_path;
    const std::string ipath = icc_path.empty()
                                  ? (fs::path(cfg.out_dir) / "icc_report.csv").string()
                                  : icc_path;
    const radstab::FeatureTable full = radstab::read_feature_csv(fpath);
    const radstab::FeatureTable samples = sample_subtable(full);
    const radstab::ICCReport report = radstab::read_icc_csv(ipath);
    const auto surv = radstab::read_survival_csv(cfg.survival_csv);
    const auto aligned = radstab::align_survival(surv, samples.case_ids);
    fs::create_directories(cfg.out_dir);

    nlohmann::json summary;
    radstab::write_stability_prognosis_csv(
        radstab::stability_vs_prognosis(samples, surv, report),
        (fs::path(cfg.out_dir) / "stability_prognosis.csv").string());

    const radstab::AveragedFeatures averaged =
        radstab::average_over_masks(samples, report.retained);
    const radstab::SelectionResult sel = radstab::forward_select(
        averaged, aligned, cfg.max_signature_features, cfg.cv_folds,
        radstab::named_stream_seed(cfg.seed, "cvfolds"));
    summary["selection"] = {{"features", sel.features}, {"cv_cindex", sel.cv_cindex}};
    if (!sel.features.empty()) {
        std::ofstream out(fs::path(cfg.out_dir) / "selected_signature.json");
        out << nlohmann::json(sel.model).dump(2) << "\n";
        if (!out) throw input_error("survival: write failed");
    }

    if (!cfg.signature_json.empty()) {
        const radstab::CoxModel signature = radstab::load_signature(cfg.signature_json);
        const radstab::SignatureSpread spread =
            radstab::signature_across_masks(samples, signature, surv);
        radstab::write_cindex_hist_csv(spread,
                                       (fs::path(cfg.out_dir) / "cindex_hist.csv").string());
        summary["signature"] = {{"min", spread.min}, {"max", spread.max},
                                {"spread", spread.spread}};
        std::vector<std::size_t> ref;
        for (std::size_t m = 0; m < full.n_masks(); ++m)
            if (full.mask_ids[m] == "reference") ref.push_back(m);
        if (!ref.empty())
            summary["expert_cindex"] = radstab::evaluate_expert(
                radstab::select_masks(full, {ref[0]}), signature, surv);
    }

    std::ofstream out(fs::path(cfg.out_dir) / "survival_summary.json");
    out << summary.dump(2) << "\n";
    if (!out) throw input_error("survival: write failed");
    std::cout << "survival: wrote summary to " << cfg.out_dir << "\n";
    return 0;
}

int run_full_pipeline(const CommonFlags& flags) {
    const radstab::PipelineConfig cfg = flags.resolve();
    const radstab::PipelineResult result = radstab::run_pipeline(cfg, flags.threads);
    std::cout << "pipeline: " << result.table.n_cases() << " cases, config hash "
              << result.manifest["config_hash"].get<std::string>() << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"radstab: radiomics feature stability under segmentation variability"};
    app.set_version_flag("--version", radstab::kVersion);
    app.require_subcommand(1);

    // phantom
    auto* phantom = app.add_subcommand("phantom", "generate a synthetic test cohort");
    std::string ph_config, ph_out;
    std::uint64_t ph_seed = 0;
    bool ph_seed_set = false;
    int ph_cases = -1;
    phantom->add_option("--config", ph_config, "phantom spec JSON");
    phantom->add_option("--out", ph_out, "output directory");
    phantom->add_option("--seed", ph_seed, "seed override")->each([&](const std::string&) {
        ph_seed_set = true;
    });
    phantom->add_option("--n-cases", ph_cases, "number of cases");

    // perturb
    auto* perturb = app.add_subcommand("perturb", "sample segmentation ensembles");
    CommonFlags pe_flags;
    pe_flags.register_on(perturb);
    std::string pe_masks;
    perturb->add_option("--masks", pe_masks, "reference masks directory");

    // extract
    auto* extract = app.add_subcommand("extract", "extract radiomics features");
    CommonFlags ex_flags;
    ex_flags.register_on(extract);
    std::string ex_images, ex_ensembles;
    extract->add_option("--images", ex_images, "images directory");
    extract->add_option("--ensembles", ex_ensembles, "mask archive directory");

    // icc
    auto* icc = app.add_subcommand("icc", "score per-feature stability");
    CommonFlags ic_flags;
    ic_flags.register_on(icc);
    std::string ic_features;
    icc->add_option("--features", ic_features, "features CSV");

    // survival
    auto* survival = app.add_subcommand("survival", "survival model evaluation");
    CommonFlags su_flags;
    su_flags.register_on(survival);
    std::string su_features, su_icc, su_survival, su_signature;
    survival->add_option("--features", su_features, "features CSV");
    survival->add_option("--icc", su_icc, "ICC report CSV");
    survival->add_option("--survival", su_survival, "survival CSV");
    survival->add_option("--signature", su_signature, "signature JSON");

    // pipeline
    auto* pipeline = app.add_subcommand("pipeline", "run the full workflow");
    CommonFlags pl_flags;
    pl_flags.register_on(pipeline);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        if (app.got_subcommand(phantom))
            return run_phantom(ph_config, ph_out, ph_seed, ph_seed_set, ph_cases);
        if (app.got_subcommand(perturb)) return run_perturb(pe_flags, pe_masks);
        if (app.got_subcommand(extract)) return run_extract(ex_flags, ex_images, ex_ensembles);
        if (app.got_subcommand(icc)) return run_icc(ic_flags, ic_features);
        if (app.got_subcommand(survival))
            return run_survival(su_flags, su_features, su_icc, su_survival, su_signature);
        if (app.got_subcommand(pipeline)) return run_full_pipeline(pl_flags);
    } catch (const input_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}

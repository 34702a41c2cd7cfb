#pragma once
// End-to-end robust-signature workflow: generate (or ingest) segmentation
// ensembles, screen failed cases, extract features per (case, mask), score
// per-feature ICC, average retained features over masks, then fit/evaluate
// survival models. Every random decision derives from the root seed through
// named substreams, so stage commands and the full pipeline produce identical
// bytes, independent of worker-thread count.

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "radstab/ensemble.hpp"
#include "radstab/ensemble_io.hpp"
#include "radstab/extract.hpp"
#include "radstab/feature_table.hpp"
#include "radstab/icc.hpp"
#include "radstab/nrrd.hpp"
#include "radstab/parallel.hpp"
#include "radstab/rng.hpp"
#include "radstab/survival.hpp"
#include "radstab/version.hpp"

namespace radstab {

inline void to_json(nlohmann::json& j, const PerturbConfig& c) {
    j = nlohmann::json{{"n_samples", c.n_samples},
                       {"max_morph_radius", c.max_morph_radius},
                       {"boundary_flip_prob", c.boundary_flip_prob},
                       {"smooth_passes", c.smooth_passes}};
}

inline void from_json(const nlohmann::json& j, PerturbConfig& c) {
    PerturbConfig d;
    c.n_samples = j.value("n_samples", d.n_samples);
    c.max_morph_radius = j.value("max_morph_radius", d.max_morph_radius);
    c.boundary_flip_prob = j.value("boundary_flip_prob", d.boundary_flip_prob);
    c.smooth_passes = j.value("smooth_passes", d.smooth_passes);
}

struct PipelineConfig {
    std::string images_dir;
    std::string masks_dir;      // reference masks, <case_id>.nrrd
    std::string ensembles_dir;  // optional: ingest an existing mask archive
    std::string survival_csv;   // optional
    std::string signature_json; // optional
    std::string out_dir;
    std::uint64_t seed = 0;
    int n_segmentations = 25;
    double icc_cutoff = 0.9;
    std::string icc_variant = "oneway";  // or "twoway"
    PerturbConfig perturb{0, 200, 1, 0.05, 1};
    ExtractionSettings extraction;
    int max_signature_features = 4;
    int cv_folds = 5;
};

inline void to_json(nlohmann::json& j, const PipelineConfig& c) {
    j = nlohmann::json{{"images_dir", c.images_dir},
                       {"masks_dir", c.masks_dir},
                       {"ensembles_dir", c.ensembles_dir},
                       {"survival_csv", c.survival_csv},
                       {"signature_json", c.signature_json},
                       {"out_dir", c.out_dir},
                       {"seed", c.seed},
                       {"n_segmentations", c.n_segmentations},
                       {"icc_cutoff", c.icc_cutoff},
                       {"icc_variant", c.icc_variant},
                       {"perturb", c.perturb},
                       {"extraction", c.extraction},
                       {"max_signature_features", c.max_signature_features},
                       {"cv_folds", c.cv_folds}};
}

inline void from_json(const nlohmann::json& j, PipelineConfig& c) {
    PipelineConfig d;
    c.images_dir = j.value("images_dir", d.images_dir);
    c.masks_dir = j.value("masks_dir", d.masks_dir);
    c.ensembles_dir = j.value("ensembles_dir", d.ensembles_dir);
    c.survival_csv = j.value("survival_csv", d.survival_csv);
    c.signature_json = j.value("signature_json", d.signature_json);
    c.out_dir = j.value("out_dir", d.out_dir);
    c.seed = j.value("seed", d.seed);
    c.n_segmentations = j.value("n_segmentations", d.n_segmentations);
    c.icc_cutoff = j.value("icc_cutoff", d.icc_cutoff);
    c.icc_variant = j.value("icc_variant", d.icc_variant);
    if (j.contains("perturb")) j.at("perturb").get_to(c.perturb);
    if (j.contains("extraction")) j.at("extraction").get_to(c.extraction);
    c.max_signature_features = j.value("max_signature_features", d.max_signature_features);
    c.cv_folds = j.value("cv_folds", d.cv_folds);
    if (c.icc_variant != "oneway" && c.icc_variant != "twoway")
        throw input_error("pipeline config: icc_variant must be 'oneway' or 'twoway'");
    if (c.n_segmentations < 1)
        throw input_error("pipeline config: n_segmentations must be >= 1");
    if (c.icc_cutoff < 0.0 || c.icc_cutoff > 1.0)
        throw input_error("pipeline config: icc_cutoff must be in [0,1]");
}

// FNV-1a over the canonical (sorted-key) JSON dump.
inline std::string config_hash(const PipelineConfig& c) {
    const std::string dump = nlohmann::json(c).dump();
    std::uint64_t h = 0xCBF29CE484222325ull;
    for (unsigned char ch : dump) {
        h ^= ch;
        h *= 0x100000001B3ull;
    }
    char buf[20];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

// Sorted case ids from the <id>.nrrd files in a directory.
inline std::vector<std::string> discover_case_ids(const std::string& masks_dir) {
    namespace fs = std::filesystem;
    if (!fs::is_directory(masks_dir)) throw input_error("not a directory: " + masks_dir);
    std::vector<std::string> ids;
    for (const auto& entry : fs::directory_iterator(masks_dir)) {
        if (entry.is_regular_file() && entry.path().extension() == ".nrrd")
            ids.push_back(entry.path().stem().string());
    }
    std::sort(ids.begin(), ids.end());
    return ids;
}

// Perturb -> dedup -> Dice-stratified sampling for one case; the result is
// padded to exactly n_slots members by cycling when fewer unique masks exist.
inline MaskEnsemble build_case_ensemble(const Mask& reference, const PipelineConfig& cfg,
                                        const std::string& case_id, std::size_t* unique_out) {
    PerturbConfig pc = cfg.perturb;
    pc.seed = named_stream_seed(cfg.seed, "perturb/" + case_id);
    const std::vector<Mask> raw = perturb(reference, pc);
    MaskEnsemble ens = make_ensemble(reference, dedup(raw));
    ens = sample_uniform_dice(ens, cfg.n_segmentations,
                              named_stream_seed(cfg.seed, "sample/" + case_id));
    if (unique_out) *unique_out = ens.members.size();
    const std::size_t m = ens.members.size();
    for (std::size_t j = m; j < static_cast<std::size_t>(cfg.n_segmentations); ++j) {
        ens.members.push_back(ens.members[j % m]);
        ens.dice.push_back(ens.dice[j % m]);
    }
    return ens;
}

struct PerturbStageResult {
    std::vector<CaseEnsemble> cases;
    std::map<std::string, std::size_t> unique_members;  // per case, before slot fill
};

inline PerturbStageResult perturb_cohort(const PipelineConfig& cfg,
                                         const std::vector<std::string>& ids, int threads) {
    namespace fs = std::filesystem;
    PerturbStageResult r;
    r.cases.resize(ids.size());
    std::vector<std::size_t> uniques(ids.size(), 0);
    parallel_for(ids.size(), threads, [&](std::size_t i) {
        const std::string path = (fs::path(cfg.masks_dir) / (ids[i] + ".nrrd")).string();
        const Mask reference = load_mask(path);
        r.cases[i].case_id = ids[i];
        r.cases[i].ensemble = build_case_ensemble(reference, cfg, ids[i], &uniques[i]);
    });
    for (std::size_t i = 0; i < ids.size(); ++i) r.unique_members[ids[i]] = uniques[i];
    return r;
}

struct ExtractStageResult {
    FeatureTable table;  // mask slot 0 is "reference", then sample_0000..
    std::vector<std::string> excluded_cases;
};

// Screens failed cases (empty reference or any empty member, plus masks that
// become empty on the extraction grid) and extracts everything else.
inline ExtractStageResult extract_cohort(const std::string& images_dir,
                                         const std::vector<CaseEnsemble>& cases,
                                         const ExtractionSettings& settings, int threads) {
    namespace fs = std::filesystem;
    const ScreenResult screen = screen_failed(cases);
    ExtractStageResult out;
    for (std::size_t i : screen.excluded) out.excluded_cases.push_back(cases[i].case_id);
    if (screen.kept.empty()) throw input_error("extract: every case was screened out");

    const std::size_t n_slots = cases[screen.kept[0]].ensemble.members.size() + 1;
    std::vector<std::string> mask_ids = {"reference"};
    for (std::size_t j = 0; j + 1 < n_slots; ++j)
        mask_ids.push_back(sample_file_name(static_cast<int>(j)).substr(0, 11));  // sample_0000

    std::vector<std::string> kept_ids;
    for (std::size_t i : screen.kept) {
        kept_ids.push_back(cases[i].case_id);
        if (cases[i].ensemble.members.size() + 1 != n_slots)
            throw input_error("extract: ragged ensemble for case " + cases[i].case_id);
    }

    const FeatureNames names = extraction_feature_names(settings);
    FeatureTable t = make_feature_table(kept_ids, mask_ids, *names);
    std::vector<std::uint8_t> failed(kept_ids.size(), 0);
    parallel_for(screen.kept.size(), threads, [&](std::size_t ci) {
        const CaseEnsemble& ce = cases[screen.kept[ci]];
        const std::string image_path = (fs::path(images_dir) / (ce.case_id + ".nrrd")).string();
        const Volume image = load_volume(image_path);
        require_same_geometry(image.geom, ce.ensemble.reference.geom,
                              "extract case " + ce.case_id);
        const TransformedImage prepared = prepare_transforms(image, settings);
        for (std::size_t m = 0; m < n_slots; ++m) {
            const Mask& mask =
                (m == 0) ? ce.ensemble.reference : ce.ensemble.members[m - 1];
            const FeatureVector fv = extract_prepared(prepared, mask, settings);
            if (fv.failed) {
                failed[ci] = 1;
                return;
            }
            set_row(t, ci, m, fv);
        }
    });

    // drop cases whose masks collapsed on the extraction grid
    if (std::find(failed.begin(), failed.end(), 1) != failed.end()) {
        std::vector<std::string> ok_ids;
        for (std::size_t c = 0; c < kept_ids.size(); ++c) {
            if (failed[c])
                out.excluded_cases.push_back(kept_ids[c]);
            else
                ok_ids.push_back(kept_ids[c]);
        }
        if (ok_ids.empty()) throw input_error("extract: every case was screened out");
        FeatureTable t2 = make_feature_table(ok_ids, mask_ids, *names);
        std::size_t dst = 0;
        for (std::size_t c = 0; c < kept_ids.size(); ++c) {
            if (failed[c]) continue;
            for (std::size_t m = 0; m < n_slots; ++m)
                for (std::size_t f = 0; f < t.n_features(); ++f) {
                    t2.values[t2.offset(dst, m, f)] = t.values[t.offset(c, m, f)];
                    t2.undefined[t2.offset(dst, m, f)] = t.undefined[t.offset(c, m, f)];
                }
            ++dst;
        }
        t = std::move(t2);
    }
    std::sort(out.excluded_cases.begin(), out.excluded_cases.end());
    out.table = std::move(t);
    return out;
}

// Greedy forward selection maximizing cross-validated cindex.
struct SelectionResult {
    std::vector<std::string> features;
    double cv_cindex = 0.5;
    CoxModel model;  // fitted on all cases with the selected features
};

inline SelectionResult forward_select(const AveragedFeatures& a,
                                      const std::vector<SurvivalRecord>& aligned,
                                      int max_features, int folds, std::uint64_t seed) {
    const std::size_t n = a.case_ids.size();
    if (aligned.size() != n) throw input_error("forward_select: survival size mismatch");
    const int k = std::max(2, std::min<int>(folds, static_cast<int>(n) / 2));

    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    Rng rng(seed);
    rng.shuffle(perm);
    std::vector<int> fold_of(n);
    for (std::size_t i = 0; i < n; ++i) fold_of[perm[i]] = static_cast<int>(i) % k;

    auto cv_score = [&](const std::vector<std::size_t>& cols) -> double {
        double total = 0.0;
        int used = 0;
        for (int f = 0; f < k; ++f) {
            std::vector<std::vector<double>> x_train, x_test;
            std::vector<SurvivalRecord> s_train, s_test;
            for (std::size_t i = 0; i < n; ++i) {
                std::vector<double> row;
                for (std::size_t c : cols) row.push_back(a.at(i, c));
                if (fold_of[i] == f) {
                    x_test.push_back(std::move(row));
                    s_test.push_back(aligned[i]);
                } else {
                    x_train.push_back(std::move(row));
                    s_train.push_back(aligned[i]);
                }
            }
            try {
                std::vector<std::string> names(cols.size());
                for (std::size_t q = 0; q < cols.size(); ++q) names[q] = a.feature_names[cols[q]];
                const CoxModel m = cox_fit(names, x_train, s_train);
                std::vector<double> risk(x_test.size());
                for (std::size_t i = 0; i < x_test.size(); ++i) risk[i] = m.risk(x_test[i]);
                total += cindex(risk, s_test);
                ++used;
            } catch (const input_error&) {
                // fold not scorable (degenerate fit or no comparable pairs)
            }
        }
        if (used == 0) return -1.0;
        return total / used;
    };

    SelectionResult sel;
    std::vector<std::size_t> chosen;
    double best_score = 0.5;  // uninformative baseline
    while (static_cast<int>(chosen.size()) < max_features) {
        std::size_t best_col = a.n_features();
        double best_candidate = best_score;
        for (std::size_t c = 0; c < a.n_features(); ++c) {
            if (std::find(chosen.begin(), chosen.end(), c) != chosen.end()) continue;
            std::vector<std::size_t> trial = chosen;
            trial.push_back(c);
            const double score = cv_score(trial);
            if (score > best_candidate + 1e-9) {
                best_candidate = score;
                best_col = c;
            }
        }
        if (best_col == a.n_features()) break;
        chosen.push_back(best_col);
        best_score = best_candidate;
    }

    sel.cv_cindex = best_score;
    for (std::size_t c : chosen) sel.features.push_back(a.feature_names[c]);
    if (!chosen.empty()) {
        std::vector<std::vector<double>> X(n);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t c : chosen) X[i].push_back(a.at(i, c));
        sel.model = cox_fit(sel.features, X, aligned);
    }
    return sel;
}

namespace detail {

template <typename Fn>
inline void run_stage(const char* name, Fn&& fn) {
    try {
        fn();
    } catch (const input_error& e) {
        throw input_error(std::string("[stage:") + name + "] " + e.what());
    } catch (const std::exception& e) {
        throw std::runtime_error(std::string("[stage:") + name + "] " + e.what());
    }
}

}  // namespace detail

struct PipelineResult {
    nlohmann::json manifest;
    FeatureTable table;
};

inline PipelineResult run_pipeline(const PipelineConfig& cfg, int threads = 1) {
    namespace fs = std::filesystem;
    if (cfg.out_dir.empty()) throw input_error("pipeline: out_dir is required");
    fs::create_directories(cfg.out_dir);

    nlohmann::json manifest;
    manifest["tool_version"] = kVersion;
    manifest["config"] = cfg;
    manifest["config_hash"] = config_hash(cfg);
    manifest["seed"] = cfg.seed;
    nlohmann::json artifacts = nlohmann::json::object();
    auto artifact = [&](const std::string& key, const std::string& rel) {
        artifacts[key] = {{"file", rel}, {"valid", false}};
        return (fs::path(cfg.out_dir) / rel).string();
    };
    auto mark_valid = [&](const std::string& key) { artifacts[key]["valid"] = true; };
    auto flush_manifest = [&] {
        manifest["artifacts"] = artifacts;
        std::ofstream out(fs::path(cfg.out_dir) / "run_manifest.json");
        out << manifest.dump(2) << "\n";
    };

    try {
        // stage 1+2: ensembles (generate or ingest), screened downstream
        PerturbStageResult perturbed;
        detail::run_stage("perturb", [&] {
            if (!cfg.ensembles_dir.empty()) {
                perturbed.cases = load_ensemble_archive(cfg.ensembles_dir);
                for (const CaseEnsemble& c : perturbed.cases)
                    perturbed.unique_members[c.case_id] = c.ensemble.members.size();
            } else {
                if (cfg.masks_dir.empty())
                    throw input_error("need masks_dir or ensembles_dir");
                perturbed = perturb_cohort(cfg, discover_case_ids(cfg.masks_dir), threads);
            }
            const std::string dir = artifact("ensembles", "ensembles");
            if (cfg.ensembles_dir.empty()) write_ensemble_archive(dir, perturbed.cases);
            mark_valid("ensembles");
        });
        manifest["cases_total"] = perturbed.cases.size();
        manifest["unique_members"] = perturbed.unique_members;

        // stage 3: extraction (includes the screening step)
        ExtractStageResult extracted;
        detail::run_stage("extract", [&] {
            if (cfg.images_dir.empty()) throw input_error("images_dir is required");
            const std::string path = artifact("features_csv", "features.csv");
            extracted = extract_cohort(cfg.images_dir, perturbed.cases, cfg.extraction, threads);
            write_feature_csv(extracted.table, path);
            mark_valid("features_csv");
        });
        manifest["excluded_cases"] = extracted.excluded_cases;
        std::size_t undefined_cells = 0;
        for (std::uint8_t u : extracted.table.undefined) undefined_cells += u;
        manifest["undefined_cells"] = undefined_cells;

        // sample-mask sub-table (ICC and signature evaluation skip "reference")
        std::vector<std::size_t> sample_slots;
        for (std::size_t m = 1; m < extracted.table.n_masks(); ++m) sample_slots.push_back(m);
        const FeatureTable samples = select_masks(extracted.table, sample_slots);
        const FeatureTable expert = select_masks(extracted.table, {0});

        // stage 4: ICC report
        ICCReport report;
        detail::run_stage("icc", [&] {
            const std::string path = artifact("icc_csv", "icc_report.csv");
            report = icc_report(samples, cfg.icc_cutoff,
                                cfg.icc_variant == "twoway" ? IccVariant::TwoWay
                                                            : IccVariant::OneWay);
            write_icc_csv(report, path);
            mark_valid("icc_csv");
            const std::string spath = artifact("icc_summary", "icc_summary.json");
            std::ofstream out(spath);
            out << icc_summary(report).dump(2) << "\n";
            if (!out) throw input_error("write failed: " + spath);
            mark_valid("icc_summary");
        });
        manifest["retained_fraction"] = report.retained_fraction;

        // stage 5: averaged retained features
        AveragedFeatures averaged;
        detail::run_stage("average", [&] {
            const std::string path = artifact("averaged_csv", "averaged_features.csv");
            averaged = average_over_masks(samples, report.retained);
            std::ofstream out(path, std::ios::binary);
            std::vector<std::string> header = {"case_id"};
            header.insert(header.end(), averaged.feature_names.begin(),
                          averaged.feature_names.end());
            csv::write_row(out, header);
            for (std::size_t c = 0; c < averaged.case_ids.size(); ++c) {
                std::vector<std::string> row = {averaged.case_ids[c]};
                for (std::size_t f = 0; f < averaged.n_features(); ++f)
                    row.push_back(csv::format_double(averaged.at(c, f)));
                csv::write_row(out, row);
            }
            if (!out) throw input_error("write failed: " + path);
            mark_valid("averaged_csv");
        });

        // stage 6: survival analyses (only when survival data is supplied)
        if (!cfg.survival_csv.empty()) {
            detail::run_stage("survival", [&] {
                const std::vector<SurvivalRecord> surv = read_survival_csv(cfg.survival_csv);
                const std::vector<SurvivalRecord> aligned =
                    align_survival(surv, samples.case_ids);
                nlohmann::json summary;

                const std::string sp_path = artifact("stability_prognosis", "stability_prognosis.csv");
                write_stability_prognosis_csv(stability_vs_prognosis(samples, surv, report),
                                              sp_path);
                mark_valid("stability_prognosis");

                const SelectionResult sel =
                    forward_select(averaged, aligned, cfg.max_signature_features, cfg.cv_folds,
                                   named_stream_seed(cfg.seed, "cvfolds"));
                summary["selection"] = {{"features", sel.features},
                                        {"cv_cindex", sel.cv_cindex}};
                manifest["selected_features"] = sel.features;
                if (!sel.features.empty()) {
                    const std::string mp = artifact("selected_signature", "selected_signature.json");
                    std::ofstream mo(mp);
                    mo << nlohmann::json(sel.model).dump(2) << "\n";
                    if (!mo) throw input_error("write failed: " + mp);
                    mark_valid("selected_signature");
                }

                if (!cfg.signature_json.empty()) {
                    const CoxModel signature = load_signature(cfg.signature_json);
                    const SignatureSpread spread =
                        signature_across_masks(samples, signature, surv);
                    const std::string hp = artifact("cindex_hist", "cindex_hist.csv");
                    write_cindex_hist_csv(spread, hp);
                    mark_valid("cindex_hist");
                    summary["signature"] = {{"min", spread.min},
                                            {"max", spread.max},
                                            {"spread", spread.spread}};
                    summary["expert_cindex"] = evaluate_expert(expert, signature, surv);
                }

                const std::string sum_path = artifact("survival_summary", "survival_summary.json");
                std::ofstream out(sum_path);
                out << summary.dump(2) << "\n";
                if (!out) throw input_error("write failed: " + sum_path);
                mark_valid("survival_summary");
            });
        }

        flush_manifest();
        return {manifest, std::move(extracted.table)};
    } catch (...) {
        flush_manifest();  // partially written artifacts stay marked invalid
        throw;
    }
}

}  // namespace radstab

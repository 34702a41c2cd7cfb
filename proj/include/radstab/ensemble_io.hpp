#pragma once
// On-disk ensemble archive: <case_id>/reference.nrrd plus
// <case_id>/sample_####.nrrd per member, with an ensemble.json manifest at the
// archive root recording case ids, member files and Dice scores.

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "radstab/ensemble.hpp"
#include "radstab/nrrd.hpp"

namespace radstab {

inline std::string sample_file_name(int index) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "sample_%04d.nrrd", index);
    return buf;
}

inline void write_ensemble_archive(const std::string& dir, const std::vector<CaseEnsemble>& cases,
                                   NrrdEncoding encoding = NrrdEncoding::Gzip) {
    namespace fs = std::filesystem;
    fs::create_directories(dir);
    nlohmann::json manifest;
    manifest["cases"] = nlohmann::json::array();
    for (const CaseEnsemble& c : cases) {
        const fs::path case_dir = fs::path(dir) / c.case_id;
        fs::create_directories(case_dir);
        save_mask(c.ensemble.reference, (case_dir / "reference.nrrd").string(), encoding);
        nlohmann::json entry;
        entry["case_id"] = c.case_id;
        entry["reference"] = c.case_id + "/reference.nrrd";
        entry["samples"] = nlohmann::json::array();
        entry["dice"] = nlohmann::json::array();
        for (std::size_t i = 0; i < c.ensemble.members.size(); ++i) {
            const std::string name = sample_file_name(static_cast<int>(i));
            save_mask(c.ensemble.members[i], (case_dir / name).string(), encoding);
            entry["samples"].push_back(c.case_id + "/" + name);
            entry["dice"].push_back(c.ensemble.dice[i]);
        }
        manifest["cases"].push_back(std::move(entry));
    }
    std::ofstream out(fs::path(dir) / "ensemble.json");
    if (!out) throw input_error("cannot write ensemble manifest in " + dir);
    out << manifest.dump(2) << "\n";
}

inline std::vector<CaseEnsemble> load_ensemble_archive(const std::string& dir) {
    namespace fs = std::filesystem;
    const fs::path manifest_path = fs::path(dir) / "ensemble.json";
    std::ifstream in(manifest_path);
    if (!in) throw input_error("missing ensemble manifest: " + manifest_path.string());
    nlohmann::json manifest;
    try {
        in >> manifest;
    } catch (const nlohmann::json::exception& e) {
        throw input_error("malformed ensemble manifest " + manifest_path.string() + ": " + e.what());
    }
    std::vector<CaseEnsemble> cases;
    for (const auto& entry : manifest.at("cases")) {
        CaseEnsemble c;
        c.case_id = entry.at("case_id").get<std::string>();
        c.ensemble.reference =
            load_mask((fs::path(dir) / entry.at("reference").get<std::string>()).string());
        for (const auto& rel : entry.at("samples"))
            c.ensemble.members.push_back(
                load_mask((fs::path(dir) / rel.get<std::string>()).string()));
        for (const auto& d : entry.at("dice")) c.ensemble.dice.push_back(d.get<double>());
        if (c.ensemble.dice.size() != c.ensemble.members.size())
            throw input_error("ensemble manifest: dice/member count mismatch for " + c.case_id);
        cases.push_back(std::move(c));
    }
    return cases;
}

}  // namespace radstab

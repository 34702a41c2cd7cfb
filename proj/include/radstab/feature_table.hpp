#pragma once
// Rectangular case x mask x feature table plus its CSV form. Every case has
// the same mask slots and all values are finite (the extractor's undefined
// policy guarantees that upstream).

#include <fstream>
#include <string>
#include <vector>

#include "radstab/csv.hpp"
#include "radstab/errors.hpp"
#include "radstab/extract.hpp"

namespace radstab {

struct FeatureTable {
    std::vector<std::string> case_ids;
    std::vector<std::string> mask_ids;  // k slot ids, shared by all cases
    std::vector<std::string> feature_names;
    std::vector<double> values;         // [case][mask][feature]
    std::vector<std::uint8_t> undefined;

    std::size_t n_cases() const { return case_ids.size(); }
    std::size_t n_masks() const { return mask_ids.size(); }
    std::size_t n_features() const { return feature_names.size(); }
    std::size_t offset(std::size_t c, std::size_t m, std::size_t f) const {
        return (c * n_masks() + m) * n_features() + f;
    }
    double at(std::size_t c, std::size_t m, std::size_t f) const {
        return values[offset(c, m, f)];
    }
};

inline FeatureTable make_feature_table(std::vector<std::string> case_ids,
                                       std::vector<std::string> mask_ids,
                                       std::vector<std::string> feature_names) {
    FeatureTable t;
    t.case_ids = std::move(case_ids);
    t.mask_ids = std::move(mask_ids);
    t.feature_names = std::move(feature_names);
    t.values.assign(t.n_cases() * t.n_masks() * t.n_features(), 0.0);
    t.undefined.assign(t.values.size(), 0);
    return t;
}

inline void set_row(FeatureTable& t, std::size_t c, std::size_t m, const FeatureVector& fv) {
    if (fv.values.size() != t.n_features())
        throw input_error("feature table: row width mismatch");
    const std::size_t base = t.offset(c, m, 0);
    for (std::size_t f = 0; f < fv.values.size(); ++f) {
        t.values[base + f] = fv.values[f];
        t.undefined[base + f] = fv.undefined[f];
    }
}

// Keeps only the mask slots selected by `keep` (indices into mask_ids).
inline FeatureTable select_masks(const FeatureTable& t, const std::vector<std::size_t>& keep) {
    FeatureTable out;
    out.case_ids = t.case_ids;
    out.feature_names = t.feature_names;
    for (std::size_t m : keep) out.mask_ids.push_back(t.mask_ids[m]);
    out.values.reserve(t.n_cases() * keep.size() * t.n_features());
    out.undefined.reserve(out.values.capacity());
    for (std::size_t c = 0; c < t.n_cases(); ++c)
        for (std::size_t m : keep) {
            const std::size_t base = t.offset(c, m, 0);
            out.values.insert(out.values.end(), t.values.begin() + base,
                              t.values.begin() + base + t.n_features());
            out.undefined.insert(out.undefined.end(), t.undefined.begin() + base,
                                 t.undefined.begin() + base + t.n_features());
        }
    return out;
}

inline void write_feature_csv(const FeatureTable& t, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw input_error("cannot open for writing: " + path);
    std::vector<std::string> header = {"case_id", "mask_id"};
    header.insert(header.end(), t.feature_names.begin(), t.feature_names.end());
    csv::write_row(out, header);
    std::vector<std::string> row;
    for (std::size_t c = 0; c < t.n_cases(); ++c)
        for (std::size_t m = 0; m < t.n_masks(); ++m) {
            row.clear();
            row.push_back(t.case_ids[c]);
            row.push_back(t.mask_ids[m]);
            for (std::size_t f = 0; f < t.n_features(); ++f)
                row.push_back(csv::format_double(t.at(c, m, f)));
            csv::write_row(out, row);
        }
    if (!out) throw input_error("write failed: " + path);
}

inline FeatureTable read_feature_csv(const std::string& path) {
    const auto rows = csv::read_file(path);
    if (rows.empty() || rows[0].size() < 3 || rows[0][0] != "case_id" || rows[0][1] != "mask_id")
        throw input_error(path + ": expected header case_id,mask_id,<features...>");

    FeatureTable t;
    t.feature_names.assign(rows[0].begin() + 2, rows[0].end());

    // collect rows grouped by case in first-seen order
    std::vector<std::vector<std::size_t>> per_case_rows;
    for (std::size_t r = 1; r < rows.size(); ++r) {
        if (rows[r].size() != rows[0].size())
            throw input_error(path + ": ragged row " + std::to_string(r + 1));
        const std::string& cid = rows[r][0];
        std::size_t c = 0;
        for (; c < t.case_ids.size(); ++c)
            if (t.case_ids[c] == cid) break;
        if (c == t.case_ids.size()) {
            t.case_ids.push_back(cid);
            per_case_rows.emplace_back();
        }
        per_case_rows[c].push_back(r);
    }
    if (t.case_ids.empty()) throw input_error(path + ": no data rows");

    for (std::size_t r : per_case_rows[0]) t.mask_ids.push_back(rows[r][1]);
    for (std::size_t c = 0; c < t.case_ids.size(); ++c) {
        if (per_case_rows[c].size() != t.mask_ids.size())
            throw input_error(path + ": case " + t.case_ids[c] + " has a different mask count");
        for (std::size_t m = 0; m < t.mask_ids.size(); ++m)
            if (rows[per_case_rows[c][m]][1] != t.mask_ids[m])
                throw input_error(path + ": mask ids differ across cases (not rectangular)");
    }

    t.values.resize(t.n_cases() * t.n_masks() * t.n_features());
    t.undefined.assign(t.values.size(), 0);
    for (std::size_t c = 0; c < t.n_cases(); ++c)
        for (std::size_t m = 0; m < t.n_masks(); ++m) {
            const auto& row = rows[per_case_rows[c][m]];
            for (std::size_t f = 0; f < t.n_features(); ++f)
                t.values[t.offset(c, m, f)] = csv::parse_double(row[f + 2], path);
        }
    return t;
}

}  // namespace radstab

#pragma once
// Full feature extraction for one (image, mask) pair: resample both onto the
// target grid, compute shape features from the mask, then first-order and
// texture features per image transform (original plus the eight wavelet
// subbands). Feature names follow "<transform>_<family>_<feature>" and their
// order is fixed by the settings alone, so vectors from the same settings
// always align.

#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

#include "radstab/discretize.hpp"
#include "radstab/ensemble.hpp"
#include "radstab/first_order.hpp"
#include "radstab/glcm.hpp"
#include "radstab/glrlm.hpp"
#include "radstab/glszm.hpp"
#include "radstab/ngtdm.hpp"
#include "radstab/resample.hpp"
#include "radstab/shape_features.hpp"
#include "radstab/volume.hpp"
#include "radstab/wavelet.hpp"

namespace radstab {

struct ExtractionSettings {
    double bin_width = 25.0;
    Vec3 target_spacing = {1.0, 1.0, 1.0};
    bool wavelet = true;
    GlcmAggregation glcm_aggregation = GlcmAggregation::AverageOverDirections;
};

inline void to_json(nlohmann::json& j, const ExtractionSettings& s) {
    j = nlohmann::json{
        {"bin_width", s.bin_width},
        {"spacing", s.target_spacing},
        {"wavelet", s.wavelet},
        {"glcm_aggregation",
         s.glcm_aggregation == GlcmAggregation::MergeDirections ? "merge" : "average"}};
}

inline void from_json(const nlohmann::json& j, ExtractionSettings& s) {
    s.bin_width = j.value("bin_width", 25.0);
    if (j.contains("spacing")) j.at("spacing").get_to(s.target_spacing);
    s.wavelet = j.value("wavelet", true);
    const std::string agg = j.value("glcm_aggregation", "average");
    if (agg == "merge")
        s.glcm_aggregation = GlcmAggregation::MergeDirections;
    else if (agg == "average")
        s.glcm_aggregation = GlcmAggregation::AverageOverDirections;
    else
        throw input_error("extraction settings: unknown glcm_aggregation '" + agg + "'");
}

using FeatureNames = std::shared_ptr<const std::vector<std::string>>;

inline FeatureNames extraction_feature_names(const ExtractionSettings& s) {
    auto names = std::make_shared<std::vector<std::string>>();
    for (const std::string& f : shape_feature_names()) names->push_back("original_shape_" + f);
    std::vector<std::string> transforms = {"original"};
    if (s.wavelet)
        for (const std::string& b : wavelet_subband_names()) transforms.push_back("wavelet-" + b);
    for (const std::string& t : transforms) {
        for (const std::string& f : first_order_feature_names())
            names->push_back(t + "_firstorder_" + f);
        for (const std::string& f : glcm_feature_names()) names->push_back(t + "_glcm_" + f);
        for (const std::string& f : glrlm_feature_names()) names->push_back(t + "_glrlm_" + f);
        for (const std::string& f : glszm_feature_names()) names->push_back(t + "_glszm_" + f);
        for (const std::string& f : ngtdm_feature_names()) names->push_back(t + "_ngtdm_" + f);
    }
    return names;
}

struct FeatureVector {
    FeatureNames names;
    std::vector<double> values;
    std::vector<std::uint8_t> undefined;
    bool failed = false;  // mask became empty on the extraction grid
};

namespace detail {

inline void append_block(FeatureVector& fv, const FeatureBlock& b) {
    fv.values.insert(fv.values.end(), b.values.begin(), b.values.end());
    fv.undefined.insert(fv.undefined.end(), b.undefined.begin(), b.undefined.end());
}

}  // namespace detail

// Image resampled to the target grid plus its transform stack. The transforms
// depend only on the image, so one TransformedImage serves every mask of the
// same case.
struct TransformedImage {
    Volume resampled;
    std::vector<Volume> transforms;  // original first, then the 8 subbands
};

inline TransformedImage prepare_transforms(const Volume& v, const ExtractionSettings& s) {
    TransformedImage t;
    t.resampled = resample(v, s.target_spacing, ResampleMode::ImageLinear);
    t.transforms.push_back(t.resampled);
    if (s.wavelet) {
        for (WaveletSubband& band : wavelet_subbands(t.resampled))
            t.transforms.push_back(std::move(band.volume));
    }
    return t;
}

inline FeatureVector extract_prepared(const TransformedImage& t, const Mask& m,
                                      const ExtractionSettings& s) {
    FeatureVector fv;
    fv.names = extraction_feature_names(s);
    if (m.empty()) {
        fv.failed = true;
        return fv;
    }
    const Mask rm = resample_mask(m, s.target_spacing);
    if (rm.empty()) {
        fv.failed = true;
        return fv;
    }
    require_same_geometry(t.resampled.geom, rm.geom, "extract_prepared");

    detail::append_block(fv, shape_features(rm));
    for (const Volume& image : t.transforms) {
        const DiscretizedROI d = discretize(image, rm, s.bin_width);
        detail::append_block(fv, first_order(image, rm, d));
        detail::append_block(fv, glcm_features(d, s.glcm_aggregation));
        detail::append_block(fv, glrlm_features(d));
        detail::append_block(fv, glszm_features(d));
        detail::append_block(fv, ngtdm_features(d));
    }
    return fv;
}

inline FeatureVector extract_all(const Volume& v, const Mask& m, const ExtractionSettings& s) {
    require_same_geometry(v.geom, m.geom, "extract_all");
    return extract_prepared(prepare_transforms(v, s), m, s);
}

}  // namespace radstab

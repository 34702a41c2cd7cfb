#pragma once
// Segmentation ensembles: a stochastic perturbation sampler standing in for a
// learned probabilistic segmenter, plus deduplication, Dice scoring,
// Dice-stratified subsampling and failed-case screening.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <unordered_map>
#include <vector>

#include "radstab/morphology.hpp"
#include "radstab/rng.hpp"
#include "radstab/volume.hpp"

namespace radstab {

inline double dice(const Mask& a, const Mask& b) {
    require_same_geometry(a.geom, b.geom, "dice");
    if (a.foreground == 0 && b.foreground == 0) return 1.0;  // degenerate agreement
    std::size_t inter = 0;
    for (std::size_t i = 0; i < a.voxels.size(); ++i)
        inter += (a.voxels[i] && b.voxels[i]);
    return 2.0 * static_cast<double>(inter) /
           static_cast<double>(a.foreground + b.foreground);
}

struct PerturbConfig {
    std::uint64_t seed = 0;
    int n_samples = 1000;
    int max_morph_radius = 1;
    double boundary_flip_prob = 0.05;
    int smooth_passes = 1;
};

inline void validate_perturb_config(const PerturbConfig& cfg) {
    if (cfg.n_samples < 1) throw input_error("perturb: n_samples must be >= 1");
    if (cfg.max_morph_radius < 0) throw input_error("perturb: max_morph_radius must be >= 0");
    if (cfg.boundary_flip_prob < 0.0 || cfg.boundary_flip_prob > 1.0)
        throw input_error("perturb: boundary_flip_prob must be in [0,1]");
    if (cfg.smooth_passes < 0) throw input_error("perturb: smooth_passes must be >= 0");
}

namespace detail {

// One perturbation draw: morphology, simultaneous boundary flips, smoothing,
// then retain the component that best overlaps the reference.
inline Mask perturb_once(const Mask& reference, const PerturbConfig& cfg, Rng& rng) {
    Mask m = reference;
    const bool dilate_op = rng.uniform_below(2) == 0;
    const int radius = static_cast<int>(rng.uniform_int(0, cfg.max_morph_radius));
    if (radius > 0) m = dilate_op ? dilate6(m, radius) : erode6(m, radius);

    if (cfg.boundary_flip_prob > 0.0) {
        const std::vector<std::size_t> boundary = boundary_voxels6(m);
        for (std::size_t idx : boundary) {
            if (rng.bernoulli(cfg.boundary_flip_prob)) m.voxels[idx] ^= 1;
        }
        m.recount();
    }
    if (cfg.smooth_passes > 0) m = majority_smooth6(m, cfg.smooth_passes);
    if (!m.empty()) m = largest_overlap_component(m, reference);
    return m;
}

}  // namespace detail

// Draws cfg.n_samples masks from the reference. Sample i uses its own
// substream of cfg.seed, so the output does not depend on evaluation order.
// Samples that collapse to all-background are returned as empty masks for the
// caller to screen.
inline std::vector<Mask> perturb(const Mask& reference, const PerturbConfig& cfg) {
    validate_perturb_config(cfg);
    if (reference.empty()) throw input_error("perturb: empty reference mask");
    std::vector<Mask> out;
    out.reserve(static_cast<std::size_t>(cfg.n_samples));
    for (int i = 0; i < cfg.n_samples; ++i) {
        Rng rng(substream_seed(cfg.seed, static_cast<std::uint64_t>(i)));
        out.push_back(detail::perturb_once(reference, cfg, rng));
    }
    return out;
}

// Exact voxelwise deduplication, first occurrence wins; order preserved.
inline std::vector<Mask> dedup(const std::vector<Mask>& masks) {
    std::vector<Mask> out;
    std::unordered_map<std::uint64_t, std::vector<std::size_t>> by_hash;
    for (const Mask& m : masks) {
        if (!out.empty()) require_same_geometry(out.front().geom, m.geom, "dedup");
        std::uint64_t h = 0xCBF29CE484222325ull;
        for (std::uint8_t v : m.voxels) {
            h ^= v;
            h *= 0x100000001B3ull;
        }
        bool duplicate = false;
        for (std::size_t j : by_hash[h]) {
            if (out[j].voxels == m.voxels) {
                duplicate = true;
                break;
            }
        }
        if (!duplicate) {
            by_hash[h].push_back(out.size());
            out.push_back(m);
        }
    }
    return out;
}

struct MaskEnsemble {
    Mask reference;
    std::vector<Mask> members;
    std::vector<double> dice;  // vs. reference, aligned with members
};

inline MaskEnsemble make_ensemble(Mask reference, std::vector<Mask> members) {
    MaskEnsemble e{std::move(reference), std::move(members), {}};
    e.dice.reserve(e.members.size());
    for (const Mask& m : e.members) e.dice.push_back(dice(m, e.reference));
    return e;
}

inline bool has_empty_member(const MaskEnsemble& e) {
    for (const Mask& m : e.members)
        if (m.empty()) return true;
    return false;
}

// Subsamples k members spread uniformly over the observed Dice range:
// the range is split into k equal-width bins and one member is drawn per
// nonempty bin (ascending); remaining slots are filled with the unused member
// farthest (in Dice) from everything already selected.
inline MaskEnsemble sample_uniform_dice(const MaskEnsemble& ens, int k, std::uint64_t seed) {
    if (ens.members.empty()) throw input_error("sample_uniform_dice: empty ensemble");
    if (k < 1) throw input_error("sample_uniform_dice: k must be >= 1");
    const std::size_t n = ens.members.size();
    Rng rng(seed);

    double dmin = ens.dice[0], dmax = ens.dice[0];
    for (double d : ens.dice) {
        dmin = std::min(dmin, d);
        dmax = std::max(dmax, d);
    }
    std::vector<std::vector<std::size_t>> bins(static_cast<std::size_t>(k));
    for (std::size_t i = 0; i < n; ++i) {
        int b = 0;
        if (dmax > dmin) {
            b = static_cast<int>((ens.dice[i] - dmin) / (dmax - dmin) * k);
            b = std::min(b, k - 1);
        }
        bins[static_cast<std::size_t>(b)].push_back(i);
    }

    std::vector<std::size_t> selected;
    std::vector<bool> used(n, false);
    for (const auto& bin : bins) {
        if (static_cast<int>(selected.size()) >= k) break;
        if (bin.empty()) continue;
        const std::size_t pick = bin[rng.uniform_below(bin.size())];
        selected.push_back(pick);
        used[pick] = true;
    }
    while (static_cast<int>(selected.size()) < k && selected.size() < n) {
        std::size_t best = n;
        double best_dist = -1.0;
        for (std::size_t i = 0; i < n; ++i) {
            if (used[i]) continue;
            double dist = std::numeric_limits<double>::infinity();
            for (std::size_t s : selected)
                dist = std::min(dist, std::abs(ens.dice[i] - ens.dice[s]));
            if (dist > best_dist) {
                best_dist = dist;
                best = i;
            }
        }
        selected.push_back(best);
        used[best] = true;
    }

    MaskEnsemble out;
    out.reference = ens.reference;
    for (std::size_t i : selected) {
        out.members.push_back(ens.members[i]);
        out.dice.push_back(ens.dice[i]);
    }
    return out;
}

struct CaseEnsemble {
    std::string case_id;
    MaskEnsemble ensemble;
};

struct ScreenResult {
    std::vector<std::size_t> kept;
    std::vector<std::size_t> excluded;
};

// A case fails when its reference is empty or any ensemble member is empty.
inline ScreenResult screen_failed(const std::vector<CaseEnsemble>& cases) {
    ScreenResult r;
    for (std::size_t i = 0; i < cases.size(); ++i) {
        const MaskEnsemble& e = cases[i].ensemble;
        if (e.reference.empty() || has_empty_member(e))
            r.excluded.push_back(i);
        else
            r.kept.push_back(i);
    }
    return r;
}

}  // namespace radstab

#pragma once
// Synthetic cohort generator: spherical "tumors" on a smooth intensity ramp
// with seeded voxel noise, plus survival times drawn from a known Cox model
// over two designated image quantities (log tumor volume and the case-level
// intensity shift). Fully reproducible from the spec and seed.

#include <array>
#include <cmath>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "radstab/nrrd.hpp"
#include "radstab/rng.hpp"
#include "radstab/survival.hpp"
#include "radstab/volume.hpp"

namespace radstab {

struct PhantomSpec {
    int n_cases = 100;
    Dims3 dims = {40, 40, 40};
    Vec3 spacing = {1.0, 1.0, 1.0};
    double radius_min = 5.0;
    double radius_max = 9.0;
    double gradient_scale = 40.0;   // smooth ramp across the grid
    double noise_amplitude = 20.0;  // sd of the texture noise field
    int noise_smooth_passes = 1;    // 1-2-1 smoothing per axis: correlated texture
    double tumor_contrast = 60.0;   // intensity step inside the tumor
    double beta_volume = 0.8;       // true coefficient on standardized log-volume
    double beta_mean = 0.6;         // true coefficient on standardized intensity shift
    double censoring_rate = 0.25;
    double base_hazard = 0.001;
    std::uint64_t seed = 0;
};

inline void to_json(nlohmann::json& j, const PhantomSpec& s) {
    j = nlohmann::json{{"n_cases", s.n_cases},
                       {"dims", s.dims},
                       {"spacing", s.spacing},
                       {"radius_min", s.radius_min},
                       {"radius_max", s.radius_max},
                       {"gradient_scale", s.gradient_scale},
                       {"noise_amplitude", s.noise_amplitude},
                       {"noise_smooth_passes", s.noise_smooth_passes},
                       {"tumor_contrast", s.tumor_contrast},
                       {"beta_volume", s.beta_volume},
                       {"beta_mean", s.beta_mean},
                       {"censoring_rate", s.censoring_rate},
                       {"base_hazard", s.base_hazard},
                       {"seed", s.seed}};
}

inline void from_json(const nlohmann::json& j, PhantomSpec& s) {
    PhantomSpec d;
    s.n_cases = j.value("n_cases", d.n_cases);
    if (j.contains("dims")) j.at("dims").get_to(s.dims);
    if (j.contains("spacing")) j.at("spacing").get_to(s.spacing);
    s.radius_min = j.value("radius_min", d.radius_min);
    s.radius_max = j.value("radius_max", d.radius_max);
    s.gradient_scale = j.value("gradient_scale", d.gradient_scale);
    s.noise_amplitude = j.value("noise_amplitude", d.noise_amplitude);
    s.noise_smooth_passes = j.value("noise_smooth_passes", d.noise_smooth_passes);
    s.tumor_contrast = j.value("tumor_contrast", d.tumor_contrast);
    s.beta_volume = j.value("beta_volume", d.beta_volume);
    s.beta_mean = j.value("beta_mean", d.beta_mean);
    s.censoring_rate = j.value("censoring_rate", d.censoring_rate);
    s.base_hazard = j.value("base_hazard", d.base_hazard);
    s.seed = j.value("seed", d.seed);
}

inline void validate_phantom_spec(const PhantomSpec& s) {
    if (s.n_cases < 0) throw input_error("phantom: n_cases must be >= 0");
    if (!(s.radius_min > 0.0) || s.radius_max < s.radius_min)
        throw input_error("phantom: need 0 < radius_min <= radius_max");
    if (s.censoring_rate < 0.0 || s.censoring_rate >= 1.0)
        throw input_error("phantom: censoring_rate must be in [0,1)");
    if (s.noise_smooth_passes < 0)
        throw input_error("phantom: noise_smooth_passes must be >= 0");
    double half_extent = 1e300;
    for (int a = 0; a < 3; ++a)
        half_extent = std::min(half_extent, s.dims[a] * s.spacing[a] / 2.0);
    if (s.radius_max + 3.0 > half_extent)
        throw input_error("phantom: radius_max does not fit the grid");
}

namespace detail {

// Spatially correlated unit-variance texture: iid normals smoothed with a
// 1-2-1 kernel per axis, then rescaled to empirical sd 1.
inline std::vector<double> noise_field(const Geometry& g, int smooth_passes, Rng& rng) {
    std::vector<double> field(g.voxel_count());
    for (double& v : field) v = rng.normal();
    std::vector<double> tmp(field.size());
    for (int pass = 0; pass < smooth_passes; ++pass) {
        for (int axis = 0; axis < 3; ++axis) {
            for (int z = 0; z < g.dims[2]; ++z)
                for (int y = 0; y < g.dims[1]; ++y)
                    for (int x = 0; x < g.dims[0]; ++x) {
                        int lo[3] = {x, y, z}, hi[3] = {x, y, z};
                        lo[axis] = std::max(lo[axis] - 1, 0);
                        hi[axis] = std::min(hi[axis] + 1, g.dims[axis] - 1);
                        tmp[g.index(x, y, z)] =
                            0.25 * field[g.index(lo[0], lo[1], lo[2])] +
                            0.5 * field[g.index(x, y, z)] +
                            0.25 * field[g.index(hi[0], hi[1], hi[2])];
                    }
            std::swap(field, tmp);
        }
    }
    double var = 0.0;
    for (double v : field) var += v * v;
    var /= static_cast<double>(field.size());
    const double scale = var > 0 ? 1.0 / std::sqrt(var) : 1.0;
    for (double& v : field) v *= scale;
    return field;
}

}  // namespace detail

struct PhantomCase {
    std::string case_id;
    Volume image;
    Mask mask;
    SurvivalRecord survival;
};

inline std::vector<PhantomCase> generate_phantom(const PhantomSpec& spec) {
    validate_phantom_spec(spec);
    Geometry g;
    g.dims = spec.dims;
    g.spacing = spec.spacing;

    std::vector<PhantomCase> cases(static_cast<std::size_t>(spec.n_cases));
    std::vector<double> log_volume(cases.size()), shift(cases.size());
    const std::uint64_t image_root = named_stream_seed(spec.seed, "phantom-image");
    for (std::size_t i = 0; i < cases.size(); ++i) {
        Rng rng(substream_seed(image_root, i));
        char buf[32];
        std::snprintf(buf, sizeof(buf), "case_%04zu", i);
        PhantomCase& pc = cases[i];
        pc.case_id = buf;

        double center[3];
        for (int a = 0; a < 3; ++a)
            center[a] = g.physical(a, g.dims[a] / 2) + rng.uniform() * 4.0 - 2.0;
        const double radius =
            spec.radius_min + rng.uniform() * (spec.radius_max - spec.radius_min);
        shift[i] = rng.uniform() * 60.0 - 30.0;

        pc.image = make_volume(g);
        Mask m{g, std::vector<std::uint8_t>(g.voxel_count(), 0), 0};
        const double extent = g.dims[0] * g.spacing[0] + g.dims[1] * g.spacing[1] +
                              g.dims[2] * g.spacing[2];
        const std::vector<double> noise =
            detail::noise_field(g, spec.noise_smooth_passes, rng);
        // partial-volume-like soft edge: about one voxel wide
        const double edge_width = 1.0;
        std::size_t idx = 0;
        for (int z = 0; z < g.dims[2]; ++z)
            for (int y = 0; y < g.dims[1]; ++y)
                for (int x = 0; x < g.dims[0]; ++x, ++idx) {
                    const double px = g.physical(0, x), py = g.physical(1, y),
                                 pz = g.physical(2, z);
                    const double dx = px - center[0], dy = py - center[1], dz = pz - center[2];
                    const double dist = std::sqrt(dx * dx + dy * dy + dz * dz);
                    if (dist <= radius) m.voxels[idx] = 1;
                    double v = spec.gradient_scale * (px + py + pz) / extent + shift[i];
                    v += spec.tumor_contrast / (1.0 + std::exp((dist - radius) / edge_width));
                    v += spec.noise_amplitude * noise[idx];
                    pc.image.data[idx] = v;
                }
        m.recount();
        pc.mask = std::move(m);
        log_volume[i] = std::log(static_cast<double>(pc.mask.foreground) * g.voxel_volume());
    }

    if (!cases.empty()) {
        // standardized designated covariates drive the true hazard
        auto standardize = [&](std::vector<double>& v) {
            double mean = 0;
            for (double x : v) mean += x;
            mean /= static_cast<double>(v.size());
            double var = 0;
            for (double x : v) var += (x - mean) * (x - mean);
            const double sd = std::sqrt(var / static_cast<double>(v.size()));
            for (double& x : v) x = sd > 0 ? (x - mean) / sd : 0.0;
        };
        standardize(log_volume);
        standardize(shift);
        const std::uint64_t surv_root = named_stream_seed(spec.seed, "phantom-survival");
        for (std::size_t i = 0; i < cases.size(); ++i) {
            Rng rng(substream_seed(surv_root, i));
            const double hazard = spec.base_hazard *
                                  std::exp(spec.beta_volume * log_volume[i] +
                                           spec.beta_mean * shift[i]);
            const double t = rng.exponential(hazard);
            SurvivalRecord& r = cases[i].survival;
            r.case_id = cases[i].case_id;
            if (rng.bernoulli(spec.censoring_rate)) {
                r.time = t * rng.uniform_open();
                r.event = false;
            } else {
                r.time = t;
                r.event = true;
            }
        }
    }
    return cases;
}

// Writes images/<id>.nrrd, masks/<id>.nrrd, survival.csv and phantom.json.
inline void write_phantom(const std::string& dir, const PhantomSpec& spec,
                          const std::vector<PhantomCase>& cases,
                          NrrdEncoding encoding = NrrdEncoding::Gzip) {
    namespace fs = std::filesystem;
    fs::create_directories(fs::path(dir) / "images");
    fs::create_directories(fs::path(dir) / "masks");
    std::vector<SurvivalRecord> surv;
    for (const PhantomCase& c : cases) {
        save_volume(c.image, (fs::path(dir) / "images" / (c.case_id + ".nrrd")).string(),
                    encoding);
        save_mask(c.mask, (fs::path(dir) / "masks" / (c.case_id + ".nrrd")).string(), encoding);
        surv.push_back(c.survival);
    }
    write_survival_csv(surv, (fs::path(dir) / "survival.csv").string());
    nlohmann::json j = spec;
    std::ofstream out(fs::path(dir) / "phantom.json");
    if (!out) throw input_error("cannot write phantom manifest in " + dir);
    out << j.dump(2) << "\n";
}

}  // namespace radstab

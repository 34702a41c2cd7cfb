#include <catch2/catch_amalgamated.hpp>

#include "oracles.hpp"
#include "radstab/icc.hpp"
#include "radstab/rng.hpp"

using namespace radstab;

namespace {

FeatureTable table_from(const std::vector<std::string>& features,
                        const std::vector<std::vector<std::vector<double>>>& data) {
    // data[case][mask][feature]
    std::vector<std::string> case_ids, mask_ids;
    for (std::size_t c = 0; c < data.size(); ++c) case_ids.push_back("case" + std::to_string(c));
    for (std::size_t m = 0; m < data[0].size(); ++m) mask_ids.push_back("m" + std::to_string(m));
    FeatureTable t = make_feature_table(case_ids, mask_ids, features);
    for (std::size_t c = 0; c < data.size(); ++c)
        for (std::size_t m = 0; m < data[c].size(); ++m)
            for (std::size_t f = 0; f < features.size(); ++f)
                t.values[t.offset(c, m, f)] = data[c][m][f];
    return t;
}

}  // namespace

TEST_CASE("within-case constant, between-case varying gives ICC 1") {
    const IccValue v = icc_oneway({{1, 1}, {5, 5}, {9, 9}});
    REQUIRE_FALSE(v.undefined);
    REQUIRE(v.value == 1.0);
}

TEST_CASE("identical case means with within-case noise gives ICC <= 0") {
    const std::vector<std::vector<double>> x = {{-1, 1}, {1, -1}, {-2, 2}};
    const IccValue v = icc_oneway(x);
    REQUIRE(v.value <= 0.0);
    REQUIRE(v.value == Catch::Approx(oracle::icc_oneway(x)).margin(1e-12));
}

TEST_CASE("3x2 ladder matrix matches the hand ANOVA oracle") {
    const std::vector<std::vector<double>> x = {{1, 2}, {3, 4}, {5, 6}};
    // hand ANOVA: row means 1.5, 3.5, 5.5; grand 3.5; SSB = 2*(4+0+4) = 16,
    // MSB = 8; SSW = 6*0.25 = 1.5, MSW = 0.5; ICC = 7.5/8.5
    const IccValue v = icc_oneway(x);
    REQUIRE(v.value == Catch::Approx(7.5 / 8.5).margin(1e-15));
    REQUIRE(v.value == Catch::Approx(oracle::icc_oneway(x)).margin(1e-15));
}

TEST_CASE("icc_oneway matches the two-pass ANOVA oracle on random matrices", "[property]") {
    Rng rng(2718);
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t n = 2 + rng.uniform_below(10);
        const std::size_t k = 2 + rng.uniform_below(6);
        std::vector<std::vector<double>> x(n, std::vector<double>(k));
        for (auto& row : x) {
            const double base = rng.normal() * 5.0;
            for (double& v : row) v = base + rng.normal();
        }
        const IccValue got = icc_oneway(x);
        REQUIRE_FALSE(got.undefined);
        REQUIRE(got.value == Catch::Approx(oracle::icc_oneway(x)).margin(1e-12));
        REQUIRE(got.value <= 1.0);
    }
}

TEST_CASE("ICC is invariant under positive affine maps", "[property]") {
    Rng rng(5);
    std::vector<std::vector<double>> x(6, std::vector<double>(4));
    for (auto& row : x) {
        const double base = rng.normal() * 3.0;
        for (double& v : row) v = base + rng.normal() * 0.5;
    }
    const double before = icc_oneway(x).value;
    for (auto& row : x)
        for (double& v : row) v = 2.5 * v - 17.0;
    REQUIRE(icc_oneway(x).value == Catch::Approx(before).margin(1e-12));
}

TEST_CASE("increasing within-case noise strictly lowers ICC", "[property]") {
    Rng rng(808);
    const std::size_t n = 30, k = 5;
    std::vector<std::vector<double>> base(n, std::vector<double>(k));
    std::vector<double> case_effect(n);
    for (std::size_t c = 0; c < n; ++c) case_effect[c] = rng.normal() * 2.0;
    std::vector<double> noise_unit(n * k);
    for (double& u : noise_unit) u = rng.normal();

    double prev = 2.0;
    for (double sd : {0.1, 0.3, 1.0}) {
        for (std::size_t c = 0; c < n; ++c)
            for (std::size_t m = 0; m < k; ++m)
                base[c][m] = case_effect[c] + sd * noise_unit[c * k + m];
        const double icc = icc_oneway(base).value;
        REQUIRE(icc < prev);
        prev = icc;
    }
}

TEST_CASE("all-identical matrix is flagged undefined") {
    const IccValue v = icc_oneway({{3, 3}, {3, 3}});
    REQUIRE(v.undefined);
}

TEST_CASE("icc_oneway input validation") {
    REQUIRE_THROWS_AS(icc_oneway({{1.0, 2.0}}), input_error);            // n < 2
    REQUIRE_THROWS_AS(icc_oneway({{1.0}, {2.0}}), input_error);          // k < 2
}

TEST_CASE("icc_report ranks stable features first and applies the cutoff") {
    // feature A: mask-invariant, case-varying; feature B: pure within-case noise
    Rng rng(99);
    std::vector<std::vector<std::vector<double>>> data;
    for (int c = 0; c < 12; ++c) {
        std::vector<std::vector<double>> masks;
        const double a_val = c * 3.0;
        for (int m = 0; m < 4; ++m) masks.push_back({a_val, rng.normal()});
        data.push_back(masks);
    }
    const FeatureTable t = table_from({"featA", "featB"}, data);
    const ICCReport r = icc_report(t, 0.9);
    REQUIRE(r.stability_rank[0] == 1);
    REQUIRE(r.retained[0] == 1);
    REQUIRE(r.retained[1] == 0);
    REQUIRE(r.icc[0] == 1.0);
    REQUIRE(r.retained_fraction == 0.5);
}

TEST_CASE("equal ICCs break ties by feature name; single feature ranks 1") {
    std::vector<std::vector<std::vector<double>>> data;
    for (int c = 0; c < 4; ++c) {
        const double v = c * 2.0;
        data.push_back({{v, v}, {v, v}});  // both features identical columns
    }
    const FeatureTable t = table_from({"zeta", "alpha"}, data);
    const ICCReport r = icc_report(t, 0.9);
    REQUIRE(r.icc[0] == r.icc[1]);
    REQUIRE(r.stability_rank[1] == 1);  // "alpha" before "zeta"
    REQUIRE(r.stability_rank[0] == 2);

    const FeatureTable single = table_from({"only"}, {{{1.0}, {1.5}}, {{4.0}, {4.5}}});
    REQUIRE(icc_report(single, 0.9).stability_rank == std::vector<int>{1});
}

TEST_CASE("undefined (constant) features rank last and are not retained") {
    std::vector<std::vector<std::vector<double>>> data;
    Rng rng(4);
    for (int c = 0; c < 5; ++c) {
        std::vector<std::vector<double>> masks;
        for (int m = 0; m < 3; ++m) masks.push_back({7.0, c + 0.01 * rng.normal()});
        data.push_back(masks);
    }
    const FeatureTable t = table_from({"constant", "useful"}, data);
    const ICCReport r = icc_report(t, 0.9);
    REQUIRE(r.undefined[0] == 1);
    REQUIRE(r.retained[0] == 0);
    REQUIRE(r.stability_rank[0] == 2);
    REQUIRE(r.stability_rank[1] == 1);
}

TEST_CASE("average_over_masks basics") {
    const FeatureTable t = table_from(
        {"f"}, {{{1.0}, {2.0}, {3.0}}, {{10.0}, {10.0}, {10.0}}});
    const AveragedFeatures a = average_over_masks(t, {1});
    REQUIRE(a.values == std::vector<double>{2.0, 10.0});

    // k = 1 is the identity on retained columns
    const FeatureTable t1 = table_from({"f", "g"}, {{{5.0, 6.0}}, {{7.0, 8.0}}});
    const AveragedFeatures a1 = average_over_masks(t1, {0, 1});
    REQUIRE(a1.feature_names == std::vector<std::string>{"g"});
    REQUIRE(a1.values == std::vector<double>{6.0, 8.0});

    REQUIRE_THROWS_AS(average_over_masks(t1, std::vector<std::uint8_t>{0, 0}), input_error);
}

TEST_CASE("average_over_masks commutes with feature-wise affine maps", "[property]") {
    Rng rng(17);
    std::vector<std::vector<std::vector<double>>> data;
    for (int c = 0; c < 6; ++c) {
        std::vector<std::vector<double>> masks;
        for (int m = 0; m < 3; ++m) masks.push_back({rng.normal(), rng.normal()});
        data.push_back(masks);
    }
    FeatureTable t = table_from({"a", "b"}, data);
    const AveragedFeatures before = average_over_masks(t, {1, 1});
    for (std::size_t c = 0; c < t.n_cases(); ++c)
        for (std::size_t m = 0; m < t.n_masks(); ++m) {
            t.values[t.offset(c, m, 0)] = 3.0 * t.values[t.offset(c, m, 0)] + 1.0;
            t.values[t.offset(c, m, 1)] = -2.0 * t.values[t.offset(c, m, 1)] + 4.0;
        }
    const AveragedFeatures after = average_over_masks(t, {1, 1});
    for (std::size_t c = 0; c < t.n_cases(); ++c) {
        REQUIRE(after.at(c, 0) == Catch::Approx(3.0 * before.at(c, 0) + 1.0).margin(1e-12));
        REQUIRE(after.at(c, 1) == Catch::Approx(-2.0 * before.at(c, 1) + 4.0).margin(1e-12));
    }
}

TEST_CASE("ICC report CSV round trip") {
    std::vector<std::vector<std::vector<double>>> data;
    Rng rng(3);
    for (int c = 0; c < 5; ++c) {
        std::vector<std::vector<double>> masks;
        for (int m = 0; m < 3; ++m)
            masks.push_back({c * 1.0 + 0.1 * rng.normal(), rng.normal()});
        data.push_back(masks);
    }
    const FeatureTable t = table_from({"stable", "noisy"}, data);
    const ICCReport r = icc_report(t, 0.9);
    const std::string path =
        (std::filesystem::temp_directory_path() / "radstab_icc_test.csv").string();
    write_icc_csv(r, path);
    const ICCReport back = read_icc_csv(path);
    REQUIRE(back.feature_names == r.feature_names);
    REQUIRE(back.icc == r.icc);
    REQUIRE(back.stability_rank == r.stability_rank);
    REQUIRE(back.retained == r.retained);
}

TEST_CASE("icc summary groups by family and transform") {
    std::vector<std::vector<std::vector<double>>> data;
    for (int c = 0; c < 3; ++c) {
        const double v = c * 1.0;
        data.push_back({{v, v, v}, {v + 0.01, v + 0.02, v + 0.4}});
    }
    const FeatureTable t = table_from({"original_firstorder_Mean",
                                       "wavelet-LLH_firstorder_Mean",
                                       "wavelet-HHH_glszm_ZoneEntropy"},
                                      data);
    const nlohmann::json j = icc_summary(icc_report(t, 0.9));
    REQUIRE(j["by_family"].contains("firstorder"));
    REQUIRE(j["by_family"].contains("glszm"));
    REQUIRE(j["by_transform"].contains("original"));
    REQUIRE(j["by_transform"].contains("wavelet"));
    REQUIRE(j["by_transform"]["wavelet"]["count"].get<int>() == 2);
}

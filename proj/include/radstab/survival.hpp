#pragma once
// Right-censored survival analysis: concordance index, Cox proportional
// hazards fit (partial likelihood, Breslow ties, Newton iterations with step
// halving), and evaluation of a fixed linear signature across mask slots.
//
// cindex pair rules: a pair is comparable when the observed times differ and
// the case with the smaller time had the event; it is concordant when that
// case has strictly higher risk; risk ties on a comparable pair count 0.5.

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "radstab/csv.hpp"
#include "radstab/errors.hpp"
#include "radstab/feature_table.hpp"
#include "radstab/icc.hpp"

namespace radstab {

struct SurvivalRecord {
    std::string case_id;
    double time = 0.0;
    bool event = false;  // true = observed, false = right-censored
};

inline std::vector<SurvivalRecord> read_survival_csv(const std::string& path) {
    const auto rows = csv::read_file(path);
    if (rows.empty() || rows[0] != std::vector<std::string>{"case_id", "time", "event"})
        throw input_error(path + ": expected header case_id,time,event");
    std::vector<SurvivalRecord> out;
    for (std::size_t i = 1; i < rows.size(); ++i) {
        if (rows[i].size() != 3) throw input_error(path + ": ragged row");
        SurvivalRecord r;
        r.case_id = rows[i][0];
        r.time = csv::parse_double(rows[i][1], path);
        if (!(r.time > 0.0)) throw input_error(path + ": time must be positive");
        if (rows[i][2] != "0" && rows[i][2] != "1")
            throw input_error(path + ": event must be 0 or 1");
        r.event = rows[i][2] == "1";
        out.push_back(std::move(r));
    }
    return out;
}

inline void write_survival_csv(const std::vector<SurvivalRecord>& records,
                               const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw input_error("cannot open for writing: " + path);
    csv::write_row(out, {"case_id", "time", "event"});
    for (const SurvivalRecord& r : records)
        csv::write_row(out, {r.case_id, csv::format_double(r.time), r.event ? "1" : "0"});
    if (!out) throw input_error("write failed: " + path);
}

// Reorders records to match `case_ids`; every id must be present.
inline std::vector<SurvivalRecord> align_survival(const std::vector<SurvivalRecord>& records,
                                                  const std::vector<std::string>& case_ids) {
    std::unordered_map<std::string, std::size_t> by_id;
    for (std::size_t i = 0; i < records.size(); ++i) by_id[records[i].case_id] = i;
    std::vector<SurvivalRecord> out;
    out.reserve(case_ids.size());
    for (const std::string& id : case_ids) {
        const auto it = by_id.find(id);
        if (it == by_id.end()) throw input_error("survival data missing case id: " + id);
        out.push_back(records[it->second]);
    }
    return out;
}

inline double cindex(const std::vector<double>& risk, const std::vector<SurvivalRecord>& surv) {
    if (risk.size() != surv.size()) throw input_error("cindex: risk/survival size mismatch");
    const std::size_t n = risk.size();
    if (n < 2) throw input_error("cindex: need at least 2 cases");

    // sweep cases in time order; each event case is compared against all
    // strictly later times
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return surv[a].time < surv[b].time; });

    double concordant = 0.0;
    std::size_t possible = 0;
    for (std::size_t a = 0; a < n; ++a) {
        const std::size_t i = order[a];
        if (!surv[i].event) continue;
        for (std::size_t b = a + 1; b < n; ++b) {
            const std::size_t j = order[b];
            if (surv[j].time == surv[i].time) continue;
            ++possible;
            if (risk[i] > risk[j])
                concordant += 1.0;
            else if (risk[i] == risk[j])
                concordant += 0.5;
        }
    }
    if (possible == 0) throw input_error("cindex: no comparable pairs");
    return concordant / static_cast<double>(possible);
}

struct CoxModel {
    std::vector<std::string> feature_names;
    std::vector<double> coefficients;  // on the standardized scale
    std::vector<double> means;         // per-feature standardization
    std::vector<double> sds;

    double risk(const std::vector<double>& x) const {
        double s = 0.0;
        for (std::size_t i = 0; i < coefficients.size(); ++i)
            s += coefficients[i] * (x[i] - means[i]) / sds[i];
        return s;
    }
};

inline void to_json(nlohmann::json& j, const CoxModel& m) {
    j = nlohmann::json{{"features", m.feature_names},
                       {"coefficients", m.coefficients},
                       {"standardize", {{"means", m.means}, {"sds", m.sds}}}};
}

inline void from_json(const nlohmann::json& j, CoxModel& m) {
    j.at("features").get_to(m.feature_names);
    j.at("coefficients").get_to(m.coefficients);
    if (m.feature_names.size() != m.coefficients.size())
        throw input_error("signature: features/coefficients length mismatch");
    if (j.contains("standardize")) {
        j.at("standardize").at("means").get_to(m.means);
        j.at("standardize").at("sds").get_to(m.sds);
        if (m.means.size() != m.feature_names.size() || m.sds.size() != m.feature_names.size())
            throw input_error("signature: standardize length mismatch");
        for (double s : m.sds)
            if (!(s > 0.0)) throw input_error("signature: sds must be positive");
    } else {
        m.means.assign(m.feature_names.size(), 0.0);
        m.sds.assign(m.feature_names.size(), 1.0);
    }
}

inline CoxModel load_signature(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw input_error("cannot open signature file: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw input_error("malformed signature JSON " + path + ": " + e.what());
    }
    return j.get<CoxModel>();
}

// Partial log-likelihood with Breslow ties, plus gradient and (negative
// Hessian) information matrix, evaluated on the given covariates as-is.
struct CoxObjective {
    double loglik = 0.0;
    std::vector<double> gradient;
    std::vector<double> information;  // p x p, row-major
};

inline CoxObjective cox_evaluate(const std::vector<std::vector<double>>& X,
                                 const std::vector<SurvivalRecord>& surv,
                                 const std::vector<double>& beta) {
    const std::size_t n = X.size();
    const std::size_t p = beta.size();
    CoxObjective o;
    o.gradient.assign(p, 0.0);
    o.information.assign(p * p, 0.0);

    std::vector<std::size_t> order(n);  // descending time: risk set accumulates
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return surv[a].time > surv[b].time; });

    double s0 = 0.0;
    std::vector<double> s1(p, 0.0);
    std::vector<double> s2(p * p, 0.0);
    std::size_t a = 0;
    while (a < n) {
        const double t = surv[order[a]].time;
        // add everyone with this time into the risk set
        std::size_t b = a;
        while (b < n && surv[order[b]].time == t) {
            const std::size_t i = order[b];
            double eta = 0.0;
            for (std::size_t q = 0; q < p; ++q) eta += beta[q] * X[i][q];
            const double w = std::exp(eta);
            s0 += w;
            for (std::size_t q = 0; q < p; ++q) {
                s1[q] += w * X[i][q];
                for (std::size_t r = 0; r < p; ++r) s2[q * p + r] += w * X[i][q] * X[i][r];
            }
            ++b;
        }
        // Breslow: all events at this time share the same risk-set sums
        std::size_t deaths = 0;
        for (std::size_t c = a; c < b; ++c) {
            const std::size_t i = order[c];
            if (!surv[i].event) continue;
            ++deaths;
            double eta = 0.0;
            for (std::size_t q = 0; q < p; ++q) {
                eta += beta[q] * X[i][q];
                o.gradient[q] += X[i][q];
            }
            o.loglik += eta;
        }
        if (deaths > 0) {
            const double d = static_cast<double>(deaths);
            o.loglik -= d * std::log(s0);
            for (std::size_t q = 0; q < p; ++q) {
                o.gradient[q] -= d * s1[q] / s0;
                for (std::size_t r = 0; r < p; ++r)
                    o.information[q * p + r] +=
                        d * (s2[q * p + r] / s0 - s1[q] * s1[r] / (s0 * s0));
            }
        }
        a = b;
    }
    return o;
}

namespace detail {

// Solves A x = b for small dense symmetric A via Gaussian elimination with
// partial pivoting; throws on (near-)singularity.
inline std::vector<double> solve_dense(std::vector<double> a, std::vector<double> b) {
    const std::size_t p = b.size();
    for (std::size_t col = 0; col < p; ++col) {
        std::size_t pivot = col;
        for (std::size_t r = col + 1; r < p; ++r)
            if (std::abs(a[r * p + col]) > std::abs(a[pivot * p + col])) pivot = r;
        if (std::abs(a[pivot * p + col]) < 1e-12)
            throw input_error("cox_fit: singular information matrix");
        if (pivot != col) {
            for (std::size_t cc = 0; cc < p; ++cc) std::swap(a[col * p + cc], a[pivot * p + cc]);
            std::swap(b[col], b[pivot]);
        }
        for (std::size_t r = col + 1; r < p; ++r) {
            const double f = a[r * p + col] / a[col * p + col];
            for (std::size_t cc = col; cc < p; ++cc) a[r * p + cc] -= f * a[col * p + cc];
            b[r] -= f * b[col];
        }
    }
    std::vector<double> x(p);
    for (std::size_t r = p; r-- > 0;) {
        double s = b[r];
        for (std::size_t cc = r + 1; cc < p; ++cc) s -= a[r * p + cc] * x[cc];
        x[r] = s / a[r * p + r];
    }
    return x;
}

}  // namespace detail

struct CoxOptions {
    int max_iterations = 100;
    double tolerance = 1e-8;  // on the max abs score component
};

inline CoxModel cox_fit(const std::vector<std::string>& feature_names,
                        const std::vector<std::vector<double>>& X,
                        const std::vector<SurvivalRecord>& surv, CoxOptions opt = {}) {
    const std::size_t n = X.size();
    const std::size_t p = feature_names.size();
    if (n == 0 || p == 0) throw input_error("cox_fit: empty design");
    if (n <= p) throw input_error("cox_fit: need more cases than features");
    if (surv.size() != n) throw input_error("cox_fit: survival size mismatch");
    for (const auto& row : X)
        if (row.size() != p) throw input_error("cox_fit: ragged design matrix");

    // standardize columns (population sd)
    std::vector<double> means(p, 0.0), sds(p, 0.0);
    for (std::size_t q = 0; q < p; ++q) {
        for (std::size_t i = 0; i < n; ++i) means[q] += X[i][q];
        means[q] /= static_cast<double>(n);
        for (std::size_t i = 0; i < n; ++i)
            sds[q] += (X[i][q] - means[q]) * (X[i][q] - means[q]);
        sds[q] = std::sqrt(sds[q] / static_cast<double>(n));
        if (!(sds[q] > 0.0))
            throw input_error("cox_fit: constant column '" + feature_names[q] + "'");
    }
    std::vector<std::vector<double>> Z(n, std::vector<double>(p));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t q = 0; q < p; ++q) Z[i][q] = (X[i][q] - means[q]) / sds[q];

    std::vector<double> beta(p, 0.0);
    CoxObjective cur = cox_evaluate(Z, surv, beta);
    bool converged = false;
    for (int it = 0; it < opt.max_iterations; ++it) {
        double score_max = 0.0;
        for (double g : cur.gradient) score_max = std::max(score_max, std::abs(g));
        if (score_max < opt.tolerance) {
            converged = true;
            break;
        }
        const std::vector<double> step = detail::solve_dense(cur.information, cur.gradient);
        double scale = 1.0;
        bool improved = false;
        // near the optimum the likelihood gain drops below double round-off;
        // a tie within rounding noise still counts as an accepted step
        const double tie_slack = 1e-10 * (std::abs(cur.loglik) + 1.0);
        for (int half = 0; half < 30; ++half) {
            std::vector<double> trial = beta;
            for (std::size_t q = 0; q < p; ++q) trial[q] += scale * step[q];
            const CoxObjective next = cox_evaluate(Z, surv, trial);
            if (next.loglik >= cur.loglik - tie_slack || !std::isfinite(cur.loglik)) {
                beta = std::move(trial);
                cur = next;
                improved = true;
                break;
            }
            scale *= 0.5;
        }
        if (!improved) break;  // likelihood cannot be improved along the Newton direction
    }
    if (!converged) {
        double score_max = 0.0;
        for (double g : cur.gradient) score_max = std::max(score_max, std::abs(g));
        if (score_max >= opt.tolerance)
            throw input_error("cox_fit: Newton iterations did not converge");
    }

    CoxModel m;
    m.feature_names = feature_names;
    m.coefficients = beta;
    m.means = means;
    m.sds = sds;
    return m;
}

// Scores every case from one mask slot at a time and reports the per-slot
// cindex spread of a fixed signature.
struct MaskCindex {
    int mask_index = 0;
    double cindex = 0.0;
};

struct SignatureSpread {
    std::vector<MaskCindex> per_mask;
    double min = 0.0, max = 0.0, spread = 0.0;
};

namespace detail {

inline std::vector<std::size_t> model_feature_columns(const FeatureTable& t, const CoxModel& m) {
    std::vector<std::size_t> cols;
    for (const std::string& f : m.feature_names) {
        const auto it = std::find(t.feature_names.begin(), t.feature_names.end(), f);
        if (it == t.feature_names.end())
            throw input_error("feature table is missing model feature: " + f);
        cols.push_back(static_cast<std::size_t>(it - t.feature_names.begin()));
    }
    return cols;
}

}  // namespace detail

inline SignatureSpread signature_across_masks(const FeatureTable& t, const CoxModel& model,
                                              const std::vector<SurvivalRecord>& surv) {
    const std::vector<SurvivalRecord> aligned = align_survival(surv, t.case_ids);
    const std::vector<std::size_t> cols = detail::model_feature_columns(t, model);
    SignatureSpread out;
    std::vector<double> risk(t.n_cases());
    std::vector<double> x(cols.size());
    for (std::size_t m = 0; m < t.n_masks(); ++m) {
        for (std::size_t c = 0; c < t.n_cases(); ++c) {
            for (std::size_t q = 0; q < cols.size(); ++q) x[q] = t.at(c, m, cols[q]);
            risk[c] = model.risk(x);
        }
        out.per_mask.push_back({static_cast<int>(m), cindex(risk, aligned)});
    }
    out.min = out.max = out.per_mask[0].cindex;
    for (const MaskCindex& mc : out.per_mask) {
        out.min = std::min(out.min, mc.cindex);
        out.max = std::max(out.max, mc.cindex);
    }
    out.spread = out.max - out.min;
    return out;
}

// Single cindex on reference-mask features (table with one mask slot).
inline double evaluate_expert(const FeatureTable& t_expert, const CoxModel& model,
                              const std::vector<SurvivalRecord>& surv) {
    if (t_expert.n_masks() != 1)
        throw input_error("evaluate_expert: expected exactly one mask slot");
    return signature_across_masks(t_expert, model, surv).per_mask[0].cindex;
}

// Stability rank vs univariate prognostic value: each feature's mask-averaged
// value is used as a risk score (plus the orientation-corrected max(c, 1-c)).
struct StabilityPrognosisRow {
    std::string feature;
    int stability_rank = 0;
    double cindex = 0.0;
    double cindex_oriented = 0.0;
};

inline std::vector<StabilityPrognosisRow> stability_vs_prognosis(
    const FeatureTable& t, const std::vector<SurvivalRecord>& surv, const ICCReport& report) {
    if (report.feature_names != t.feature_names)
        throw input_error("stability_vs_prognosis: report/table feature mismatch");
    const std::vector<SurvivalRecord> aligned = align_survival(surv, t.case_ids);
    std::vector<std::uint8_t> all(t.n_features(), 1);
    const AveragedFeatures avg = average_over_masks(t, all);
    std::vector<StabilityPrognosisRow> rows;
    std::vector<double> risk(t.n_cases());
    for (std::size_t f = 0; f < t.n_features(); ++f) {
        for (std::size_t c = 0; c < t.n_cases(); ++c) risk[c] = avg.at(c, f);
        StabilityPrognosisRow row;
        row.feature = t.feature_names[f];
        row.stability_rank = report.stability_rank[f];
        row.cindex = cindex(risk, aligned);
        row.cindex_oriented = std::max(row.cindex, 1.0 - row.cindex);
        rows.push_back(std::move(row));
    }
    return rows;
}

inline void write_stability_prognosis_csv(const std::vector<StabilityPrognosisRow>& rows,
                                          const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw input_error("cannot open for writing: " + path);
    csv::write_row(out, {"feature", "stability_rank", "cindex", "cindex_oriented"});
    for (const StabilityPrognosisRow& r : rows)
        csv::write_row(out, {r.feature, std::to_string(r.stability_rank),
                             csv::format_double(r.cindex), csv::format_double(r.cindex_oriented)});
    if (!out) throw input_error("write failed: " + path);
}

inline void write_cindex_hist_csv(const SignatureSpread& s, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw input_error("cannot open for writing: " + path);
    csv::write_row(out, {"mask_index", "cindex"});
    for (const MaskCindex& mc : s.per_mask)
        csv::write_row(out, {std::to_string(mc.mask_index), csv::format_double(mc.cindex)});
    if (!out) throw input_error("write failed: " + path);
}

}  // namespace radstab

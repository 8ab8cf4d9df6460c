#include "hrtrust/explain/explain.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <exception>
#include <iomanip>
#include <limits>
#include <map>
#include <mutex>
#include <numeric>
#include <sstream>
#include <thread>

#include "hrtrust/core/error.hpp"
#include "hrtrust/core/rng.hpp"

namespace hrtrust {
namespace {

double corr_or_nan(const std::vector<double>& a, const std::vector<double>& b) {
    try {
        return pearson(a, b);
    } catch (const DegenerateInput&) {
        return std::numeric_limits<double>::quiet_NaN();
    }
}

std::vector<double> mean_abs(const std::vector<ShapExplanation>& ex, std::size_t p) {
    std::vector<double> m(p, 0.0);
    for (const auto& e : ex) {
        for (std::size_t j = 0; j < p; ++j) {
            m[j] += std::abs(e.phi.at(j));
        }
    }
    for (double& v : m) {
        v /= static_cast<double>(ex.size());
    }
    return m;
}

void check_values(const std::vector<ShapExplanation>& ex, const Matrix& values, std::size_t p) {
    if (values.size() != ex.size()) {
        throw InvalidInput("explanations and feature values differ in row count");
    }
    for (std::size_t i = 0; i < ex.size(); ++i) {
        if (ex[i].phi.size() != p || values[i].size() != p) {
            throw InvalidInput("explanation " + std::to_string(i) + " does not match the feature names");
        }
    }
}

}  // namespace

ShapExplanation shap_exact(const ValueFunction& f, std::span<const double> x, const Matrix& background) {
    const std::size_t m = x.size();
    if (m == 0) {
        throw InvalidInput("shap: no features");
    }
    if (m > kMaxShapFeatures) {
        throw InvalidInput("shap: exact enumeration supports at most " + std::to_string(kMaxShapFeatures) +
                           " features, got " + std::to_string(m));
    }
    if (background.empty()) {
        throw InvalidInput("shap: empty background");
    }
    for (const auto& b : background) {
        if (b.size() != m) {
            throw InvalidInput("shap: background width does not match x");
        }
    }
    const std::size_t n_sets = std::size_t{1} << m;
    std::vector<double> v(n_sets);
    std::vector<double> z(m);
    for (std::size_t mask = 0; mask < n_sets; ++mask) {
        double s = 0.0;
        for (const auto& b : background) {
            for (std::size_t j = 0; j < m; ++j) {
                z[j] = (mask >> j) & 1U ? x[j] : b[j];
            }
            s += f(z);
        }
        v[mask] = s / static_cast<double>(background.size());
    }
    // |S|! (M - |S| - 1)! / M!
    std::vector<double> w(m);
    for (std::size_t s = 0; s < m; ++s) {
        w[s] = std::exp(std::lgamma(static_cast<double>(s) + 1.0) + std::lgamma(static_cast<double>(m - s)) -
                        std::lgamma(static_cast<double>(m) + 1.0));
    }
    ShapExplanation e;
    e.phi.assign(m, 0.0);
    for (std::size_t mask = 0; mask < n_sets; ++mask) {
        const auto size = static_cast<std::size_t>(std::popcount(mask));
        for (std::size_t i = 0; i < m; ++i) {
            if (!((mask >> i) & 1U)) {
                e.phi[i] += w[size] * (v[mask | (std::size_t{1} << i)] - v[mask]);
            }
        }
    }
    e.base = v[0];
    e.prediction = v[n_sets - 1];
    e.coalitions = n_sets;
    return e;
}

ShapExplanation shap_exact(const Model& model, std::span<const double> x, const Matrix& background) {
    return shap_exact([&model](std::span<const double> z) { return model.predict_proba(z); }, x, background);
}

std::vector<ShapExplanation> shap_rows(const Model& model, const Matrix& X, const Matrix& background,
                                       unsigned threads) {
    std::vector<ShapExplanation> out(X.size());
    const unsigned workers = std::max(1U, std::min<unsigned>(threads, static_cast<unsigned>(X.size())));
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex mu;
    const auto work = [&] {
        for (std::size_t i = next++; i < X.size(); i = next++) {
            try {
                out[i] = shap_exact(model, X[i], background);
            } catch (...) {
                std::lock_guard lock(mu);
                if (!error) {
                    error = std::current_exception();
                }
            }
        }
    };
    if (workers == 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        for (unsigned t = 0; t < workers; ++t) {
            pool.emplace_back(work);
        }
        for (auto& t : pool) {
            t.join();
        }
    }
    if (error) {
        std::rethrow_exception(error);
    }
    return out;
}

Matrix sample_background(const Matrix& X, std::size_t n, std::uint64_t seed) {
    if (X.empty() || n == 0) {
        throw InvalidInput("background: need at least one row");
    }
    std::vector<std::size_t> idx(X.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    Rng rng(seed);
    portable_shuffle(idx.begin(), idx.end(), rng);
    idx.resize(std::min(n, idx.size()));
    std::sort(idx.begin(), idx.end());
    Matrix out;
    for (std::size_t i : idx) {
        out.push_back(X[i]);
    }
    return out;
}

std::vector<FeatureRank> global_summary(const std::vector<ShapExplanation>& explanations,
                                        const std::vector<std::string>& names) {
    if (explanations.empty()) {
        throw InvalidInput("global summary: no explanations");
    }
    const auto m = mean_abs(explanations, names.size());
    std::vector<FeatureRank> r;
    for (std::size_t j = 0; j < names.size(); ++j) {
        r.push_back({names[j], m[j]});
    }
    std::sort(r.begin(), r.end(), [](const FeatureRank& a, const FeatureRank& b) {
        return a.mean_abs_phi != b.mean_abs_phi ? a.mean_abs_phi > b.mean_abs_phi : a.name < b.name;
    });
    return r;
}

std::vector<ParticipantSummary> per_participant_summary(const std::vector<ShapExplanation>& explanations,
                                                        const Matrix& values, const std::vector<std::string>& ids,
                                                        const std::vector<std::string>& names, double no_trend) {
    check_values(explanations, values, names.size());
    if (ids.size() != explanations.size()) {
        throw InvalidInput("per-participant summary: one operator id per explanation is required");
    }
    std::map<std::string, std::vector<std::size_t>> groups;
    for (std::size_t i = 0; i < ids.size(); ++i) {
        groups[ids[i]].push_back(i);
    }
    std::vector<ParticipantSummary> out;
    for (const auto& [id, rows] : groups) {
        std::vector<ShapExplanation> ex;
        for (std::size_t i : rows) {
            ex.push_back(explanations[i]);
        }
        ParticipantSummary s;
        s.operator_id = id;
        s.rows = rows.size();
        s.ranking = global_summary(ex, names);
        for (std::size_t j = 0; j < names.size(); ++j) {
            std::vector<double> val;
            std::vector<double> phi;
            for (std::size_t i : rows) {
                val.push_back(values[i][j]);
                phi.push_back(explanations[i].phi[j]);
            }
            const double c = rows.size() >= 2 ? corr_or_nan(val, phi) : std::numeric_limits<double>::quiet_NaN();
            s.trend_corr.push_back(c);
            s.trend.push_back(std::isnan(c) || std::abs(c) < no_trend ? 0 : (c > 0.0 ? 1 : -1));
        }
        out.push_back(std::move(s));
    }
    return out;
}

void TrustScoreWeights::validate() const {
    if (names.empty() || weights.size() != names.size() || signs.size() != names.size()) {
        throw InvalidInput("trust weights: names, weights and signs must align");
    }
    double s = 0.0;
    for (std::size_t j = 0; j < weights.size(); ++j) {
        if (!(weights[j] >= 0.0) || (signs[j] != 1 && signs[j] != -1)) {
            throw InvalidInput("trust weights: weights must be >= 0 and signs +-1");
        }
        s += weights[j];
    }
    if (std::abs(s - 1.0) > 1e-9) {
        throw InvalidInput("trust weights must sum to 1");
    }
}

TrustScoreWeights trust_score_weights(const std::vector<ShapExplanation>& explanations, const Matrix& values,
                                      const std::vector<std::string>& names) {
    if (explanations.empty()) {
        throw InvalidInput("trust weights: no explanations");
    }
    check_values(explanations, values, names.size());
    TrustScoreWeights w;
    w.names = names;
    w.weights = mean_abs(explanations, names.size());
    const double total = std::accumulate(w.weights.begin(), w.weights.end(), 0.0);
    if (!(total > 0.0)) {
        throw DegenerateInput("trust weights: every SHAP value is zero");
    }
    for (double& v : w.weights) {
        v /= total;
    }
    for (std::size_t j = 0; j < names.size(); ++j) {
        std::vector<double> val;
        std::vector<double> phi;
        for (std::size_t i = 0; i < values.size(); ++i) {
            val.push_back(values[i][j]);
            phi.push_back(explanations[i].phi[j]);
        }
        const double c = values.size() >= 2 ? corr_or_nan(val, phi) : std::numeric_limits<double>::quiet_NaN();
        w.signs.push_back(c < 0.0 ? -1 : 1);
    }
    return w;
}

double trust_score(std::span<const double> diffs, const TrustScoreWeights& weights) {
    weights.validate();
    if (diffs.size() != weights.names.size()) {
        throw InvalidInput("trust score: expected " + std::to_string(weights.names.size()) + " diffs, got " +
                           std::to_string(diffs.size()));
    }
    double s = 0.0;
    for (std::size_t j = 0; j < diffs.size(); ++j) {
        s += weights.signs[j] * weights.weights[j] * std::clamp(diffs[j], -1.0, 1.0);
    }
    return s;
}

json beeswarm_json(const std::vector<ShapExplanation>& explanations, const Matrix& values,
                   const std::vector<std::string>& names) {
    if (explanations.empty()) {
        throw InvalidInput("beeswarm: no explanations");
    }
    check_values(explanations, values, names.size());
    json points = json::array();
    for (std::size_t j = 0; j < names.size(); ++j) {
        double lo = values[0][j];
        double hi = lo;
        for (const auto& r : values) {
            lo = std::min(lo, r[j]);
            hi = std::max(hi, r[j]);
        }
        for (std::size_t i = 0; i < explanations.size(); ++i) {
            const double scaled = hi > lo ? (values[i][j] - lo) / (hi - lo) : 0.5;
            points.push_back({{"feature", names[j]}, {"phi", explanations[i].phi[j]}, {"value", scaled}});
        }
    }
    return json{{"features", names}, {"points", points}};
}

std::string beeswarm_svg(const json& beeswarm) {
    const auto names = beeswarm.at("features").get<std::vector<std::string>>();
    const auto& points = beeswarm.at("points");
    double extent = 1e-12;
    for (const auto& p : points) {
        extent = std::max(extent, std::abs(p.at("phi").get<double>()));
    }
    constexpr double kLeft = 160.0;
    constexpr double kWidth = 480.0;
    constexpr double kRow = 36.0;
    const double height = kRow * static_cast<double>(names.size()) + 40.0;
    std::map<std::string, std::size_t> row;
    for (std::size_t j = 0; j < names.size(); ++j) {
        row[names[j]] = j;
    }
    std::ostringstream out;
    out << std::fixed << std::setprecision(2);
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kLeft + kWidth + 20.0 << "\" height=\"" << height
        << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    const double zero = kLeft + kWidth / 2.0;
    out << "<line x1=\"" << zero << "\" y1=\"10\" x2=\"" << zero << "\" y2=\"" << height - 20.0
        << "\" stroke=\"#999\"/>\n";
    for (std::size_t j = 0; j < names.size(); ++j) {
        out << "<text x=\"8\" y=\"" << 30.0 + kRow * static_cast<double>(j) << "\">" << names[j] << "</text>\n";
    }
    out << "<text x=\"" << zero - 30.0 << "\" y=\"" << height - 4.0 << "\">SHAP value</text>\n";
    std::map<std::string, std::size_t> seen;
    for (const auto& p : points) {
        const auto f = p.at("feature").get<std::string>();
        const double phi = p.at("phi").get<double>();
        const double v = std::clamp(p.at("value").get<double>(), 0.0, 1.0);
        const std::size_t k = seen[f]++;
        const double jitter = static_cast<double>(k % 9) - 4.0;
        const double cx = zero + phi / extent * (kWidth / 2.0 - 10.0);
        const double cy = 26.0 + kRow * static_cast<double>(row.at(f)) + jitter * 2.0;
        const int red = static_cast<int>(std::lround(30.0 + 215.0 * v));
        const int blue = static_cast<int>(std::lround(245.0 - 215.0 * v));
        out << "<circle cx=\"" << cx << "\" cy=\"" << cy << "\" r=\"3\" fill=\"rgb(" << red << ",60," << blue
            << ")\"/>\n";
    }
    out << "</svg>\n";
    return out.str();
}

std::vector<ShapExplanation> personalized_explanations(const FeatureMatrix& originals, const PersonalizedConfig& cfg) {
    originals.validate();
    std::map<std::string, std::vector<std::size_t>> groups;
    for (std::size_t i = 0; i < originals.rows.size(); ++i) {
        groups[originals.rows[i].operator_id].push_back(i);
    }
    std::vector<ShapExplanation> out(originals.rows.size());
    for (const auto& [id, rows] : groups) {
        const FeatureMatrix own = originals.subset(rows);
        const Matrix X = own.X();
        const Labels y = own.y();
        const std::uint64_t seed = derive_seed(cfg.seed, id);
        Matrix Xa = X;
        Labels ya = y;
        if (X.size() >= std::max<std::size_t>(2, cfg.label_k)) {
            const Matrix synth = augment_gaussian(X, cfg.augment_factor, derive_seed(seed, "augment"));
            const Labels sy = nn_label(synth, X, y, cfg.label_k);
            Xa.insert(Xa.end(), synth.begin(), synth.end());
            ya.insert(ya.end(), sy.begin(), sy.end());
        }
        ValueFunction f;
        std::shared_ptr<const ForestModel> forest;
        if (std::all_of(ya.begin(), ya.end(), [&](int v) { return v == ya.front(); })) {
            const double p = ya.front() == 1 ? 1.0 : 0.0;
            f = [p](std::span<const double>) { return p; };
        } else {
            ForestParams fp;
            fp.n_estimators = cfg.n_estimators;
            fp.seed = derive_seed(seed, "forest");
            forest = train_forest(Xa, ya, fp);
            f = [forest](std::span<const double> z) { return forest->predict_proba(z); };
        }
        for (std::size_t k = 0; k < rows.size(); ++k) {
            out[rows[k]] = shap_exact(f, X[k], X);
        }
    }
    return out;
}

void to_json(json& j, const ShapExplanation& e) {
    j = json{{"phi", e.phi}, {"base", e.base}, {"prediction", e.prediction}, {"coalitions", e.coalitions}};
}

void from_json(const json& j, ShapExplanation& e) {
    e.phi = j.at("phi").get<std::vector<double>>();
    e.base = j.at("base").get<double>();
    e.prediction = j.at("prediction").get<double>();
    e.coalitions = j.value("coalitions", std::size_t{0});
}

void to_json(json& j, const FeatureRank& r) { j = json{{"feature", r.name}, {"mean_abs_phi", r.mean_abs_phi}}; }

void to_json(json& j, const ParticipantSummary& s) {
    json corr = json::array();
    for (double c : s.trend_corr) {
        corr.push_back(std::isnan(c) ? json(nullptr) : json(c));
    }
    j = json{{"operator_id", s.operator_id},
             {"rows", s.rows},
             {"ranking", s.ranking},
             {"trend", s.trend},
             {"trend_corr", corr}};
}

void to_json(json& j, const TrustScoreWeights& w) {
    j = json{{"features", w.names}, {"weights", w.weights}, {"signs", w.signs}};
}

void from_json(const json& j, TrustScoreWeights& w) {
    w.names = j.at("features").get<std::vector<std::string>>();
    w.weights = j.at("weights").get<std::vector<double>>();
    w.signs = j.at("signs").get<std::vector<int>>();
    w.validate();
}

void to_json(json& j, const PersonalizedConfig& c) {
    j = json{{"augment_factor", c.augment_factor}, {"label_k", c.label_k}, {"n_estimators", c.n_estimators}};
}

void from_json(const json& j, PersonalizedConfig& c) {
    const PersonalizedConfig d;
    c.augment_factor = j.value("augment_factor", d.augment_factor);
    c.label_k = j.value("label_k", d.label_k);
    c.n_estimators = j.value("n_estimators", d.n_estimators);
}

}  // namespace hrtrust

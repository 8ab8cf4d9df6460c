#include <gtest/gtest.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numeric>
#include <regex>

#include "../oracles/data_oracle.hpp"
#include "hrtrust/core/error.hpp"
#include "hrtrust/core/rng.hpp"
#include "hrtrust/explain/explain.hpp"

using namespace hrtrust;

namespace {

Matrix random_matrix(std::size_t n, std::size_t p, std::uint64_t seed) {
    Rng rng(seed);
    Matrix X(n, std::vector<double>(p));
    for (auto& r : X) {
        for (auto& v : r) {
            v = standard_normal(rng);
        }
    }
    return X;
}

double nonlinear(std::span<const double> z) {
    return std::tanh(z[0] * z[1]) + 0.3 * z[2] * z[2] - 0.5 * std::sin(z[3]) * (z.size() > 4 ? z[4] : 1.0);
}

}  // namespace

TEST(ShapExact, ConstantModel) {
    const auto bg = random_matrix(10, 4, 1);
    const auto e = shap_exact([](std::span<const double>) { return 0.37; }, bg[0], bg);
    EXPECT_DOUBLE_EQ(e.base, 0.37);
    for (double p : e.phi) {
        EXPECT_NEAR(p, 0.0, 1e-15);
    }
}

TEST(ShapExact, AdditiveModelHasClosedForm) {
    const auto bg = random_matrix(25, 5, 2);
    const auto g = [](std::size_t i, double v) { return std::sin(v * static_cast<double>(i + 1)) + 0.1 * v * v; };
    const ValueFunction f = [&](std::span<const double> z) {
        double s = 0.0;
        for (std::size_t i = 0; i < z.size(); ++i) {
            s += g(i, z[i]);
        }
        return s;
    };
    for (const auto& x : random_matrix(10, 5, 3)) {
        const auto e = shap_exact(f, x, bg);
        for (std::size_t i = 0; i < 5; ++i) {
            double mean = 0.0;
            for (const auto& b : bg) {
                mean += g(i, b[i]) / static_cast<double>(bg.size());
            }
            EXPECT_NEAR(e.phi[i], g(i, x[i]) - mean, 1e-6);
        }
    }
}

TEST(ShapExact, SixFeaturesUseSixtyFourCoalitions) {
    const auto bg = random_matrix(7, 6, 4);
    std::atomic<std::size_t> calls{0};
    const auto e = shap_exact(
        [&](std::span<const double> z) {
            ++calls;
            return nonlinear(z);
        },
        bg[0], bg);
    EXPECT_EQ(e.coalitions, 64U);
    EXPECT_EQ(calls.load(), 64U * bg.size());
}

TEST(ShapExact, MatchesPermutationOracle) {
    for (std::size_t m = 1; m <= 5; ++m) {
        const auto bg = random_matrix(6, m, 10 + m);
        const ValueFunction f = [](std::span<const double> z) {
            double s = 0.0;
            for (std::size_t i = 0; i < z.size(); ++i) {
                s += std::tanh(z[i] * z[(i + 1) % z.size()]) + 0.2 * static_cast<double>(i) * z[i];
            }
            return s;
        };
        for (const auto& x : random_matrix(4, m, 20 + m)) {
            const auto e = shap_exact(f, x, bg);
            const auto want = oracle::shapley_permutations(f, x, bg);
            for (std::size_t i = 0; i < m; ++i) {
                EXPECT_NEAR(e.phi[i], want[i], 1e-9) << "m=" << m;
            }
        }
    }
}

TEST(ShapExact, EfficiencyOnTrainedModels) {
    const Matrix X = random_matrix(120, 4, 30);
    Labels y(X.size());
    for (std::size_t i = 0; i < X.size(); ++i) {
        y[i] = X[i][0] - 0.5 * X[i][2] * X[i][1] > 0.0 ? 1 : -1;
    }
    const auto v = train_voting(reference_params(ModelKind::knn), {{"n_estimators", 30}},
                                reference_params(ModelKind::svm), X, y, 1);
    const auto bg = sample_background(X, 20, 2);
    const auto ex = shap_rows(*v, X, bg, 4);
    for (std::size_t i = 0; i < X.size(); ++i) {
        const double total = std::accumulate(ex[i].phi.begin(), ex[i].phi.end(), ex[i].base);
        EXPECT_NEAR(total, v->predict_proba(std::span<const double>(X[i])), 1e-6);
        EXPECT_NEAR(ex[i].prediction, v->predict_proba(std::span<const double>(X[i])), 1e-12);
    }
    EXPECT_EQ(shap_rows(*v, X, bg, 1), ex);
}

TEST(ShapExact, SymmetryOfInterchangeableFeatures) {
    Matrix bg = random_matrix(15, 3, 31);
    for (auto& r : bg) {
        r[1] = r[0];
    }
    const ValueFunction f = [](std::span<const double> z) { return std::exp(-(z[0] + z[1]) * (z[0] + z[1])) * z[2]; };
    for (auto x : random_matrix(5, 3, 32)) {
        x[1] = x[0];
        const auto e = shap_exact(f, x, bg);
        EXPECT_NEAR(e.phi[0], e.phi[1], 1e-6);
    }
}

TEST(ShapExact, NullPlayerGetsZero) {
    Matrix X = random_matrix(150, 3, 33);
    Labels y(X.size());
    for (std::size_t i = 0; i < X.size(); ++i) {
        y[i] = X[i][0] + X[i][1] > 0.0 ? 1 : -1;
        X[i][2] = 0.0;
    }
    ForestParams p;
    p.n_estimators = 40;
    const auto f = train_forest(X, y, p);
    const auto bg = random_matrix(20, 3, 34);
    for (const auto& x : random_matrix(10, 3, 35)) {
        EXPECT_NEAR(shap_exact(*f, x, bg).phi[2], 0.0, 1e-6);
    }
}

TEST(ShapExact, RejectsBadInput) {
    const ValueFunction f = [](std::span<const double>) { return 0.0; };
    EXPECT_THROW((void)shap_exact(f, std::vector<double>(13, 0.0), Matrix(1, std::vector<double>(13, 0.0))),
                 InvalidInput);
    EXPECT_THROW((void)shap_exact(f, std::vector<double>(3, 0.0), Matrix{}), InvalidInput);
    EXPECT_THROW((void)shap_exact(f, std::vector<double>(3, 0.0), Matrix{{0.0, 0.0}}), InvalidInput);
}

TEST(Background, SamplesWithoutReplacement) {
    const auto X = random_matrix(300, 2, 36);
    const auto bg = sample_background(X, 100, 7);
    EXPECT_EQ(bg.size(), 100U);
    EXPECT_EQ(sample_background(X, 100, 7), bg);
    EXPECT_EQ(sample_background(X, 1000, 7).size(), 300U);
}

TEST(GlobalSummary, RankingRules) {
    const std::vector<std::string> names{"b", "a", "c"};
    const ShapExplanation one{{0.1, -0.3, 0.1}, 0.5, 0.4, 8};
    const auto r1 = global_summary({one}, names);
    EXPECT_EQ(r1[0].name, "a");
    EXPECT_EQ(r1[1].name, "b");  // tie with c broken by name
    EXPECT_EQ(r1[2].name, "c");

    std::vector<ShapExplanation> many;
    Rng rng(37);
    for (int i = 0; i < 30; ++i) {
        many.push_back({{0.1 * standard_normal(rng), 0.1 * standard_normal(rng), standard_normal(rng)}, 0.0, 0.0, 8});
    }
    const auto ranking = global_summary(many, names);
    auto shuffled = many;
    portable_shuffle(shuffled.begin(), shuffled.end(), rng);
    const auto again = global_summary(shuffled, names);
    for (std::size_t i = 0; i < ranking.size(); ++i) {
        EXPECT_EQ(again[i].name, ranking[i].name);
        EXPECT_NEAR(again[i].mean_abs_phi, ranking[i].mean_abs_phi, 1e-12);
    }
}

TEST(GlobalSummary, PlantedDependenceRanksFirst) {
    const Matrix X = random_matrix(200, 4, 38);
    Labels y(X.size());
    for (std::size_t i = 0; i < X.size(); ++i) {
        y[i] = X[i][2] > 0.0 ? 1 : -1;
    }
    ForestParams p;
    p.n_estimators = 30;
    const auto f = train_forest(X, y, p);
    const auto ex = shap_rows(*f, Matrix(X.begin(), X.begin() + 40), sample_background(X, 30, 1));
    EXPECT_EQ(global_summary(ex, {"f0", "f1", "f2", "f3"}).front().name, "f2");
}

TEST(PerParticipant, TrendSignsAndSingleOperator) {
    Rng rng(39);
    Matrix values;
    std::vector<ShapExplanation> ex;
    std::vector<std::string> ids;
    for (int i = 0; i < 60; ++i) {
        const double v0 = standard_normal(rng);
        const double v1 = standard_normal(rng);
        const bool up = i % 2 == 0;
        values.push_back({v0, v1});
        ex.push_back({{(up ? 0.2 : -0.2) * v0 + 0.01 * standard_normal(rng), 0.05 * standard_normal(rng)}, 0.5, 0.5, 4});
        ids.push_back(up ? "op00" : "op01");
    }
    const auto s = per_participant_summary(ex, values, ids, {"x", "y"});
    ASSERT_EQ(s.size(), 2U);
    EXPECT_EQ(s[0].operator_id, "op00");
    EXPECT_EQ(s[0].trend[0], 1);
    EXPECT_EQ(s[1].trend[0], -1);
    EXPECT_EQ(s[0].rows, 30U);
    for (const auto& p : s) {
        EXPECT_EQ(p.trend[1] == 0, std::abs(p.trend_corr[1]) < kNoTrend);
    }

    const std::vector<std::string> same(ids.size(), "solo");
    const auto solo = per_participant_summary(ex, values, same, {"x", "y"});
    ASSERT_EQ(solo.size(), 1U);
    EXPECT_EQ(solo[0].ranking, global_summary(ex, {"x", "y"}));
    EXPECT_THROW((void)per_participant_summary(ex, values, {"a"}, {"x", "y"}), InvalidInput);
}

TEST(TrustScore, ArithmeticAndValidation) {
    TrustScoreWeights w{{"a", "b"}, {1.0, 0.0}, {1, -1}};
    EXPECT_EQ(trust_score(std::vector<double>{0.0, 0.0}, w), 0.0);
    EXPECT_DOUBLE_EQ(trust_score(std::vector<double>{0.3, 0.9}, w), 0.3);
    EXPECT_DOUBLE_EQ(trust_score(std::vector<double>{4.0, 0.0}, w), 1.0);
    w.weights = {0.25, 0.75};
    EXPECT_DOUBLE_EQ(trust_score(std::vector<double>{0.4, 0.4}, w), 0.25 * 0.4 - 0.75 * 0.4);
    EXPECT_THROW((void)trust_score(std::vector<double>{0.1}, w), InvalidInput);
    w.weights = {0.5, 0.6};
    EXPECT_THROW((void)trust_score(std::vector<double>{0.0, 0.0}, w), InvalidInput);
}

TEST(TrustScore, WeightsFromExplanations) {
    const Matrix values{{1.0, 0.0}, {2.0, 1.0}, {3.0, 0.5}};
    const std::vector<ShapExplanation> ex{{{-0.1, 0.3}, 0, 0, 4}, {{-0.2, 0.1}, 0, 0, 4}, {{-0.3, 0.2}, 0, 0, 4}};
    const auto w = trust_score_weights(ex, values, {"a", "b"});
    EXPECT_NEAR(w.weights[0], 0.2 / 0.4, 1e-12);
    EXPECT_NEAR(w.weights[1], 0.2 / 0.4, 1e-12);
    EXPECT_EQ(w.signs[0], -1);
    EXPECT_EQ(w.signs[1], -1);  // b: values (0, 1, 0.5) vs phi (0.3, 0.1, 0.2) fall together
    EXPECT_EQ(json(w).get<TrustScoreWeights>(), w);
}

TEST(Beeswarm, TriplesRoundTripAndSvgPoints) {
    const auto X = random_matrix(1, 6, 40);
    const auto bg = random_matrix(5, 6, 41);
    const std::vector<ShapExplanation> ex{shap_exact(nonlinear, X[0], bg)};
    const std::vector<std::string> names{"a", "b", "c", "d", "e", "f"};
    const json b = beeswarm_json(ex, X, names);
    EXPECT_EQ(b.at("points").size(), 6U);
    EXPECT_EQ(json::parse(b.dump()), b);
    const auto svg = beeswarm_svg(b);
    const std::regex circle("<circle ");
    EXPECT_EQ(std::distance(std::sregex_iterator(svg.begin(), svg.end(), circle), std::sregex_iterator()), 6);

    const auto many = random_matrix(25, 6, 42);
    std::vector<ShapExplanation> mex;
    for (const auto& r : many) {
        mex.push_back(shap_exact(nonlinear, r, bg));
    }
    const auto svg2 = beeswarm_svg(beeswarm_json(mex, many, names));
    EXPECT_EQ(std::distance(std::sregex_iterator(svg2.begin(), svg2.end(), circle), std::sregex_iterator()), 150);
}

TEST(Personalized, PlantedAttentionSignsAreRecovered) {
    const Study study = generate_study(14, 15, 8);
    const auto fm = study_features(study, study_indicator_config(study, 8));
    PersonalizedConfig cfg;
    cfg.seed = 8;
    const auto ex = personalized_explanations(fm, cfg);
    ASSERT_EQ(ex.size(), fm.rows.size());
    std::vector<std::string> ids;
    for (const auto& r : fm.rows) {
        ids.push_back(r.operator_id);
    }
    const auto s = per_participant_summary(ex, fm.X(), ids, fm.names);
    ASSERT_EQ(s.size(), 14U);
    int match = 0;
    int opposite = 0;
    for (std::size_t k = 0; k < s.size(); ++k) {
        const int planted = k % 2 == 0 ? 1 : -1;  // sample_operator alternates the task-attention gain
        const int t = s[k].trend[1];
        match += t == planted;
        opposite += t == -planted;
    }
    EXPECT_GT(match, 2 * opposite);
    for (std::size_t i = 0; i < ex.size(); ++i) {
        const double total = std::accumulate(ex[i].phi.begin(), ex[i].phi.end(), ex[i].base);
        EXPECT_NEAR(total, ex[i].prediction, 1e-6);
    }
}

TEST(TrustScore, TracksLatentUtilityDirection) {
    const Study study = generate_study(14, 15, 1);
    const auto fm = study_features(study, study_indicator_config(study, 1));
    PipelineConfig pc;
    pc.seed = 1;
    const auto d = prepare_dataset(fm, pc);
    const auto train = d.matrix.subset(d.split.train);
    ForestParams fp;
    fp.n_estimators = 60;
    fp.seed = 1;
    const auto forest = train_forest(train.X(), train.y(), fp);
    const auto orig = fm.select(d.selection.mask);
    const auto ex = shap_rows(*forest, orig.X(), sample_background(train.X(), 30, 1), 4);
    const auto w = trust_score_weights(ex, orig.X(), orig.names);
    std::vector<double> score;
    std::vector<double> du;
    for (std::size_t i = 0; i < orig.rows.size(); ++i) {
        score.push_back(trust_score(orig.rows[i].diffs, w));
        const auto& r = study.rows[i];
        const auto op = std::find_if(study.operators.begin(), study.operators.end(),
                                     [&](const SyntheticOperator& o) { return o.id == r.operator_id; });
        du.push_back(latent_utility(*op, r.x2) - latent_utility(*op, r.x1));
    }
    EXPECT_GT(pearson(score, du), 0.0);
}

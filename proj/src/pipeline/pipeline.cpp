#include "hrtrust/pipeline/pipeline.hpp"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>

#include "hrtrust/core/error.hpp"
#include "hrtrust/core/hash.hpp"
#include "hrtrust/core/rng.hpp"

namespace hrtrust {

namespace fs = std::filesystem;

namespace {

std::string fixed(double v, int digits = 4) {
    std::ostringstream ss;
    ss << std::fixed << std::setprecision(digits) << v;
    return ss.str();
}

std::string html_escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '&': out += "&amp;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

struct Loaded {
    PreparedDataset data;
    FeatureMatrix originals;  ///< all indicator columns
    ModelPtr model;
};

Loaded load_trained(const fs::path& dir) {
    require_artifact(dir, run_paths::kOriginals, "indicators");
    require_artifact(dir, run_paths::kDataset, "train");
    require_artifact(dir, run_paths::kDatasetInfo, "train");
    require_artifact(dir, run_paths::kModel, "train");
    Loaded l;
    l.originals = read_feature_matrix(dir / run_paths::kOriginals);
    l.data.matrix = read_feature_matrix(dir / run_paths::kDataset);
    const json info = read_json_file(dir / run_paths::kDatasetInfo);
    l.data.all_names = info.at("all_names").get<std::vector<std::string>>();
    l.data.importance = info.at("importance").get<std::vector<double>>();
    l.data.selection.mask = info.at("mask").get<std::vector<bool>>();
    l.data.selection.reasons = info.at("reasons").get<std::vector<std::string>>();
    l.data.split.train = info.at("train").get<std::vector<std::size_t>>();
    l.data.split.test = info.at("test").get<std::vector<std::size_t>>();
    l.data.seed = info.at("seed").get<std::uint64_t>();
    l.model = model_from_json(read_json_file(dir / run_paths::kModel));
    return l;
}

std::string roc_svg(const std::vector<RocPoint>& roc, double auc) {
    const double s = 360.0;
    const double o = 30.0;
    std::ostringstream ss;
    ss << R"(<svg xmlns="http://www.w3.org/2000/svg" width="420" height="420" font-family="sans-serif" font-size="12">)"
       << '\n';
    ss << "<rect x=\"" << o << "\" y=\"" << o << "\" width=\"" << s << "\" height=\"" << s
       << "\" fill=\"none\" stroke=\"#444\"/>\n";
    ss << "<line x1=\"" << o << "\" y1=\"" << o + s << "\" x2=\"" << o + s << "\" y2=\"" << o
       << "\" stroke=\"#bbb\" stroke-dasharray=\"4 4\"/>\n";
    ss << "<polyline fill=\"none\" stroke=\"#c0392b\" stroke-width=\"2\" points=\"";
    for (const auto& p : roc) {
        ss << fixed(o + p.fpr * s, 2) << ',' << fixed(o + (1.0 - p.tpr) * s, 2) << ' ';
    }
    ss << "\"/>\n";
    ss << "<text x=\"" << o + s / 2 << "\" y=\"" << o + s + 24 << "\" text-anchor=\"middle\">false positive rate</text>\n";
    ss << "<text x=\"12\" y=\"" << o + s / 2 << "\" transform=\"rotate(-90 12 " << o + s / 2
       << ")\" text-anchor=\"middle\">true positive rate</text>\n";
    ss << "<text x=\"" << o + s - 8 << "\" y=\"" << o + s - 10 << "\" text-anchor=\"end\">AUC = "
       << (std::isnan(auc) ? std::string("n/a") : fixed(auc, 3)) << "</text>\n";
    ss << "</svg>\n";
    return ss.str();
}

std::string confusion_svg(const std::array<std::array<std::size_t, 2>, 2>& cm) {
    std::size_t peak = 1;
    for (const auto& r : cm) {
        for (auto v : r) {
            peak = std::max(peak, v);
        }
    }
    std::ostringstream ss;
    ss << R"(<svg xmlns="http://www.w3.org/2000/svg" width="300" height="300" font-family="sans-serif" font-size="14">)"
       << '\n';
    const char* labels[2] = {"-1", "+1"};
    for (int r = 0; r < 2; ++r) {
        for (int c = 0; c < 2; ++c) {
            const double shade = static_cast<double>(cm[r][c]) / static_cast<double>(peak);
            const int g = static_cast<int>(std::lround(235.0 - 150.0 * shade));
            const int x = 60 + 110 * c;
            const int y = 60 + 110 * r;
            ss << "<rect class=\"cell\" x=\"" << x << "\" y=\"" << y << "\" width=\"110\" height=\"110\" fill=\"rgb(" << g
               << ',' << g << ",255)\" stroke=\"#fff\"/>\n";
            ss << "<text x=\"" << x + 55 << "\" y=\"" << y + 60 << "\" text-anchor=\"middle\">" << cm[r][c]
               << "</text>\n";
        }
        ss << "<text x=\"40\" y=\"" << 120 + 110 * r << "\" text-anchor=\"middle\">" << labels[r] << "</text>\n";
        ss << "<text x=\"" << 115 + 110 * r << "\" y=\"45\" text-anchor=\"middle\">" << labels[r] << "</text>\n";
    }
    ss << "<text x=\"170\" y=\"20\" text-anchor=\"middle\">predicted</text>\n";
    ss << "<text x=\"14\" y=\"170\" transform=\"rotate(-90 14 170)\" text-anchor=\"middle\">true</text>\n";
    ss << "</svg>\n";
    return ss.str();
}

std::string bar_svg(const std::vector<FeatureRank>& ranking) {
    const double peak = ranking.empty() ? 1.0 : std::max(ranking.front().mean_abs_phi, 1e-12);
    std::ostringstream ss;
    const std::size_t h = 30 + 26 * ranking.size();
    ss << R"(<svg xmlns="http://www.w3.org/2000/svg" width="520" height=")" << h
       << R"(" font-family="sans-serif" font-size="12">)" << '\n';
    for (std::size_t i = 0; i < ranking.size(); ++i) {
        const double y = 15.0 + 26.0 * static_cast<double>(i);
        ss << "<text x=\"150\" y=\"" << y + 14 << "\" text-anchor=\"end\">" << html_escape(ranking[i].name)
           << "</text>\n";
        ss << "<rect class=\"bar\" x=\"160\" y=\"" << y << "\" height=\"20\" width=\""
           << fixed(280.0 * ranking[i].mean_abs_phi / peak, 2) << "\" fill=\"#2e86c1\"/>\n";
        ss << "<text x=\"" << fixed(166.0 + 280.0 * ranking[i].mean_abs_phi / peak, 2) << "\" y=\"" << y + 14 << "\">"
           << fixed(ranking[i].mean_abs_phi) << "</text>\n";
    }
    ss << "</svg>\n";
    return ss.str();
}

}  // namespace

void RunConfig::validate() const {
    if (n_operators == 0 || n_evals < 1) {
        throw InvalidInput("run config: n_operators and n_evals must be positive");
    }
    simulator.validate();
    dataset.validate();
    if (tune_folds < 2) {
        throw InvalidInput("run config: tune_folds must be at least 2");
    }
    if (background == 0) {
        throw InvalidInput("run config: background must be positive");
    }
    if (threads == 0) {
        throw InvalidInput("run config: threads must be positive");
    }
    if (!knn.is_object() || !forest.is_object() || !svm.is_object()) {
        throw InvalidInput("run config: knn, forest and svm must be objects");
    }
}

void to_json(json& j, const RunConfig& c) {
    j = json{{"seed", c.seed},
             {"n_operators", c.n_operators},
             {"n_evals", c.n_evals},
             {"simulator", c.simulator},
             {"dataset", c.dataset},
             {"knn", c.knn},
             {"forest", c.forest},
             {"svm", c.svm},
             {"tune", c.tune},
             {"tune_folds", c.tune_folds},
             {"background", c.background},
             {"personalized", c.personalized},
             {"personal", c.personal}};
    j["dataset"].erase("seed");
}

void from_json(const json& j, RunConfig& c) {
    if (!j.is_object()) {
        throw InvalidInput("run config must be a JSON object");
    }
    static const std::set<std::string> known{"seed",  "n_operators", "n_evals",    "simulator",  "dataset",
                                             "knn",   "forest",      "svm",        "tune",       "tune_folds",
                                             "background", "personalized", "personal", "threads"};
    for (const auto& [k, v] : j.items()) {
        if (!known.contains(k)) {
            throw InvalidInput("run config: unknown key '" + k + "'");
        }
    }
    const RunConfig d;
    try {
        c.seed = j.value("seed", d.seed);
        c.n_operators = j.value("n_operators", d.n_operators);
        c.n_evals = j.value("n_evals", d.n_evals);
        c.simulator = j.contains("simulator") ? j.at("simulator").get<SimulatorConfig>() : d.simulator;
        c.dataset = j.contains("dataset") ? j.at("dataset").get<PipelineConfig>() : d.dataset;
        c.knn = j.value("knn", d.knn);
        c.forest = j.value("forest", d.forest);
        c.svm = j.value("svm", d.svm);
        c.tune = j.value("tune", d.tune);
        c.tune_folds = j.value("tune_folds", d.tune_folds);
        c.background = j.value("background", d.background);
        c.personalized = j.value("personalized", d.personalized);
        c.personal = j.contains("personal") ? j.at("personal").get<PersonalizedConfig>() : d.personal;
        c.threads = j.value("threads", d.threads);
    } catch (const json::exception& e) {
        throw InvalidInput(std::string("run config: ") + e.what());
    }
}

std::uint64_t stage_seed(const RunConfig& cfg, const std::string& stage) { return derive_seed(cfg.seed, stage); }

const std::vector<std::string>& stage_names() {
    static const std::vector<std::string> names{"simulate", "indicators", "train", "evaluate", "explain", "report"};
    return names;
}

void require_artifact(const fs::path& dir, const fs::path& rel, const std::string& producer) {
    if (!fs::exists(dir / rel)) {
        throw NotFound("missing input " + (dir / rel).string() + " (run the '" + producer + "' stage first)");
    }
}

void run_simulate(const fs::path& dir, const RunConfig& cfg) {
    cfg.validate();
    const Study study = generate_study(cfg.n_operators, cfg.n_evals, stage_seed(cfg, "simulate"), cfg.simulator);
    fs::remove_all(dir / run_paths::kStudy);
    write_study(dir / run_paths::kStudy, study);
}

void run_indicators(const fs::path& dir, const RunConfig& cfg) {
    cfg.validate();
    require_artifact(dir, run_paths::kStudy / "operators.json", "simulate");
    const Study study = read_study(dir / run_paths::kStudy);
    const IndicatorConfig icfg = study_indicator_config(study, stage_seed(cfg, "indicators"));
    write_json_file(dir / run_paths::kIndicatorConfig, icfg);
    std::ostringstream cycles;
    for (const auto& [ref, rec] : study.recordings) {
        cycles << json{{"ref", ref}, {"indicators", cycle_summary(rec, study.trajectories.at(ref), icfg)}}.dump()
               << '\n';
    }
    write_text_file(dir / run_paths::kCycles, cycles.str());
    write_feature_matrix(dir / run_paths::kOriginals, study_features(study, icfg));
}

void run_train(const fs::path& dir, const RunConfig& cfg) {
    cfg.validate();
    require_artifact(dir, run_paths::kOriginals, "indicators");
    const FeatureMatrix originals = read_feature_matrix(dir / run_paths::kOriginals);
    PipelineConfig pc = cfg.dataset;
    pc.seed = stage_seed(cfg, "dataset");
    const PreparedDataset d = prepare_dataset(originals, pc);

    write_feature_matrix(dir / run_paths::kDataset, d.matrix);
    write_json_file(dir / run_paths::kDatasetInfo, json{{"all_names", d.all_names},
                                                        {"importance", d.importance},
                                                        {"mask", d.selection.mask},
                                                        {"reasons", d.selection.reasons},
                                                        {"train", d.split.train},
                                                        {"test", d.split.test},
                                                        {"seed", d.seed},
                                                        {"config", pc}});

    const FeatureMatrix train = d.matrix.subset(d.split.train);
    const Matrix X = train.X();
    const Labels y = train.y();
    json knn = cfg.knn;
    json forest = cfg.forest;
    json svm = cfg.svm;
    if (cfg.tune) {
        json tuning = json::object();
        const std::uint64_t tseed = stage_seed(cfg, "tune");
        for (auto kind : {ModelKind::knn, ModelKind::forest, ModelKind::svm}) {
            GridSearchOptions opt;
            opt.folds = cfg.tune_folds;
            opt.seed = derive_seed(tseed, to_string(kind));
            opt.threads = cfg.threads;
            const auto r = grid_search(kind, default_grid(kind), X, y, opt);
            tuning[to_string(kind)] = json{{"best_params", r.best_params}, {"best_score", r.mean_scores[r.best_index]}};
            (kind == ModelKind::knn ? knn : kind == ModelKind::forest ? forest : svm) = r.best_params;
        }
        write_json_file(dir / run_paths::kTuning, tuning);
    } else {
        fs::remove(dir / run_paths::kTuning);
    }
    const auto model = train_voting(knn, forest, svm, X, y, stage_seed(cfg, "train"));
    write_json_file(dir / run_paths::kModel, model->to_json());
}

void run_evaluate(const fs::path& dir, const RunConfig& cfg) {
    cfg.validate();
    const Loaded l = load_trained(dir);
    const FeatureMatrix test = l.data.matrix.subset(l.data.split.test);
    const Matrix X = test.X();
    const Labels y = test.y();
    json out{{"voting", evaluate(*l.model, X, y)},
             {"train_rows", l.data.split.train.size()},
             {"test_rows", l.data.split.test.size()},
             {"features", l.data.matrix.names}};
    json members = json::object();
    const auto* voting = dynamic_cast<const VotingModel*>(l.model.get());
    if (voting != nullptr) {
        for (const auto& m : voting->members()) {
            members[to_string(m->kind())] = evaluate(*m, X, y);
        }
    }
    out["members"] = members;
    write_json_file(dir / run_paths::kEval, out);
}

void run_explain(const fs::path& dir, const RunConfig& cfg) {
    cfg.validate();
    const Loaded l = load_trained(dir);
    const std::uint64_t seed = stage_seed(cfg, "explain");
    const FeatureMatrix rows = l.originals.select(l.data.selection.mask);
    const Matrix X = rows.X();
    const Matrix train = l.data.matrix.subset(l.data.split.train).X();
    const Matrix bg = sample_background(train, cfg.background, derive_seed(seed, "background"));
    const auto ex = shap_rows(*l.model, X, bg, cfg.threads);

    std::vector<std::string> ids;
    for (const auto& r : rows.rows) {
        ids.push_back(r.operator_id);
    }
    const auto weights = trust_score_weights(ex, X, rows.names);
    json scores = json::array();
    for (const auto& r : rows.rows) {
        scores.push_back(trust_score(r.diffs, weights));
    }
    write_json_file(dir / run_paths::kShap, json{{"names", rows.names},
                                                 {"background_rows", bg.size()},
                                                 {"explanations", ex},
                                                 {"global", global_summary(ex, rows.names)},
                                                 {"participants", per_participant_summary(ex, X, ids, rows.names)},
                                                 {"trust_weights", weights},
                                                 {"trust_scores", scores}});
    write_json_file(dir / run_paths::kBeeswarm, beeswarm_json(ex, X, rows.names));

    if (cfg.personalized) {
        PersonalizedConfig pc = cfg.personal;
        pc.seed = derive_seed(seed, "personalized");
        const auto pex = personalized_explanations(l.originals, pc);
        std::vector<std::string> all_ids;
        for (const auto& r : l.originals.rows) {
            all_ids.push_back(r.operator_id);
        }
        write_json_file(dir / run_paths::kPersonalized,
                        json{{"names", l.originals.names},
                             {"participants",
                              per_participant_summary(pex, l.originals.X(), all_ids, l.originals.names)}});
    } else {
        fs::remove(dir / run_paths::kPersonalized);
    }
}

void run_report(const fs::path& dir, const RunConfig& cfg) {
    cfg.validate();
    require_artifact(dir, run_paths::kEval, "evaluate");
    require_artifact(dir, run_paths::kShap, "explain");
    require_artifact(dir, run_paths::kBeeswarm, "explain");
    const json eval = read_json_file(dir / run_paths::kEval);
    const json shap = read_json_file(dir / run_paths::kShap);
    const EvalReport voting = eval.at("voting").get<EvalReport>();
    std::vector<FeatureRank> global;
    for (const auto& g : shap.at("global")) {
        global.push_back({g.at("feature").get<std::string>(), g.at("mean_abs_phi").get<double>()});
    }

    const fs::path out = dir / run_paths::kReport;
    fs::remove_all(out);
    write_text_file(out / "roc.svg", roc_svg(voting.roc, voting.auc));
    write_text_file(out / "confusion.svg", confusion_svg(voting.confusion));
    write_text_file(out / "shap_bar.svg", bar_svg(global));
    write_text_file(out / "beeswarm.svg", beeswarm_svg(read_json_file(dir / run_paths::kBeeswarm)));

    json metrics = json::object();
    const auto metric_row = [&](const std::string& name, const EvalReport& r) {
        metrics[name] = json{{"accuracy", r.accuracy}, {"precision", r.precision}, {"recall", r.recall},
                             {"f1", r.f1},             {"auc", std::isnan(r.auc) ? json(nullptr) : json(r.auc)}};
        return "<tr><td>" + name + "</td><td>" + fixed(r.accuracy) + "</td><td>" + fixed(r.precision) + "</td><td>" +
               fixed(r.recall) + "</td><td>" + fixed(r.f1) + "</td><td>" +
               (std::isnan(r.auc) ? std::string("n/a") : fixed(r.auc)) + "</td></tr>\n";
    };
    std::string rows = metric_row("voting", voting);
    for (const auto& [name, r] : eval.at("members").items()) {
        rows += metric_row(name, r.get<EvalReport>());
    }

    std::ostringstream html;
    html << "<!DOCTYPE html>\n<html><head><meta charset=\"utf-8\"><title>Trust model report</title>\n"
         << "<style>body{font-family:sans-serif;margin:2em}table{border-collapse:collapse}"
         << "td,th{border:1px solid #ccc;padding:4px 8px;text-align:right}</style></head><body>\n"
         << "<h1>Trust model report</h1>\n<p>seed " << cfg.seed << ", " << eval.at("train_rows") << " training rows, "
         << eval.at("test_rows") << " held-out rows</p>\n"
         << "<h2>Held-out metrics</h2>\n<table><tr><th>model</th><th>accuracy</th><th>precision</th><th>recall</th>"
         << "<th>F1</th><th>AUC</th></tr>\n"
         << rows << "</table>\n"
         << "<h2>ROC</h2>\n<img src=\"roc.svg\" alt=\"ROC curve\">\n"
         << "<h2>Confusion matrix</h2>\n<img src=\"confusion.svg\" alt=\"confusion matrix\">\n"
         << "<h2>Mean |SHAP|</h2>\n<img src=\"shap_bar.svg\" alt=\"global SHAP ranking\">\n"
         << "<h2>SHAP beeswarm</h2>\n<img src=\"beeswarm.svg\" alt=\"SHAP beeswarm\">\n"
         << "<h2>Per participant</h2>\n<table><tr><th>operator</th><th>rows</th><th>top feature</th>";
    const auto& names = shap.at("names");
    for (const auto& n : names) {
        html << "<th>trend " << html_escape(n.get<std::string>()) << "</th>";
    }
    html << "</tr>\n";
    for (const auto& p : shap.at("participants")) {
        html << "<tr><td>" << html_escape(p.at("operator_id").get<std::string>()) << "</td><td>" << p.at("rows")
             << "</td><td>" << html_escape(p.at("ranking").at(0).at("feature").get<std::string>()) << "</td>";
        for (const auto& t : p.at("trend")) {
            const int v = t.get<int>();
            html << "<td>" << (v > 0 ? "+" : v < 0 ? "-" : "0") << "</td>";
        }
        html << "</tr>\n";
    }
    html << "</table>\n</body></html>\n";
    write_text_file(out / "index.html", html.str());
    write_json_file(out / "report.json", json{{"seed", cfg.seed},
                                              {"metrics", metrics},
                                              {"confusion", voting.confusion},
                                              {"global_shap", shap.at("global")},
                                              {"assets", {"roc.svg", "confusion.svg", "shap_bar.svg", "beeswarm.svg"}}});
}

std::size_t parse_operator_spec(const std::string& spec) {
    constexpr std::string_view prefix = "sim:";
    if (spec.rfind(prefix, 0) != 0 || spec.size() == prefix.size()) {
        throw InvalidInput("operator must look like sim:<index>, got '" + spec + "'");
    }
    const std::string digits = spec.substr(prefix.size());
    if (!std::all_of(digits.begin(), digits.end(), [](char c) { return c >= '0' && c <= '9'; }) || digits.size() > 6) {
        throw InvalidInput("operator index must be a non-negative integer, got '" + digits + "'");
    }
    return std::stoul(digits);
}

SessionState run_optimize(const fs::path& dir, const RunConfig& cfg, const OptimizeRequest& req) {
    cfg.validate();
    if (req.iters < 1) {
        throw InvalidInput("optimize: iters must be positive");
    }
    SyntheticOperator op = sample_operator(req.operator_index, derive_seed(stage_seed(cfg, "simulate"), "operators"),
                                           cfg.simulator.box);
    if (req.noiseless) {
        op.preference_noise = std::numeric_limits<double>::infinity();
    }
    PboConfig pbo;
    pbo.box = cfg.simulator.box;
    pbo.n_iters = req.iters;
    Rng rng(derive_seed(op.rng_seed, "preferences"));
    const SessionState s = run_session(
        [&](const InteractionParams& best, const InteractionParams& cand) {
            return answer_preference(op, best, cand, rng);
        },
        pbo, derive_seed(op.rng_seed, "session"));

    std::ostringstream transcript;
    write_transcript(transcript, s);
    write_text_file(dir / run_paths::kOptimize / (op.id + ".jsonl"), transcript.str());
    const double range = utility_range(op);
    write_json_file(dir / run_paths::kOptimize / (op.id + ".json"),
                    json{{"operator", op},
                         {"iterations", s.history.size()},
                         {"best", s.best},
                         {"best_utility", latent_utility(op, s.best)},
                         {"utility_gap_fraction", -latent_utility(op, s.best) / range}});
    return s;
}

void run_stage(const std::string& stage, const fs::path& dir, const RunConfig& cfg) {
    if (stage == "simulate") {
        run_simulate(dir, cfg);
    } else if (stage == "indicators") {
        run_indicators(dir, cfg);
    } else if (stage == "train") {
        run_train(dir, cfg);
    } else if (stage == "evaluate") {
        run_evaluate(dir, cfg);
    } else if (stage == "explain") {
        run_explain(dir, cfg);
    } else if (stage == "report") {
        run_report(dir, cfg);
    } else {
        throw InvalidInput("unknown stage '" + stage + "'");
    }
}

void to_json(json& j, const RunManifest& m) {
    j = json{{"seed", m.seed},
             {"config_paths", m.config_paths},
             {"stages", m.stages},
             {"output_dir", m.output_dir},
             {"hashes", m.hashes}};
}

void from_json(const json& j, RunManifest& m) {
    m.seed = j.at("seed").get<std::uint64_t>();
    m.config_paths = j.at("config_paths").get<std::vector<std::string>>();
    m.stages = j.at("stages").get<std::vector<std::string>>();
    m.output_dir = j.at("output_dir").get<std::string>();
    m.hashes = j.at("hashes").get<std::map<std::string, std::string>>();
}

std::map<std::string, std::string> hash_tree(const fs::path& dir) {
    std::map<std::string, std::string> out;
    if (!fs::exists(dir)) {
        return out;
    }
    for (const auto& e : fs::recursive_directory_iterator(dir)) {
        if (!e.is_regular_file()) {
            continue;
        }
        const std::string rel = fs::relative(e.path(), dir).generic_string();
        if (rel == run_paths::kManifest.generic_string()) {
            continue;
        }
        out.emplace(rel, sha256_file(e.path()));
    }
    return out;
}

RunManifest update_manifest(const fs::path& dir, const RunConfig& cfg, const std::string& stage,
                            const std::vector<std::string>& config_paths) {
    RunManifest m;
    const fs::path path = dir / run_paths::kManifest;
    if (fs::exists(path)) {
        m = read_json_file(path).get<RunManifest>();
    }
    m.seed = cfg.seed;
    for (const auto& c : config_paths) {
        if (std::find(m.config_paths.begin(), m.config_paths.end(), c) == m.config_paths.end()) {
            m.config_paths.push_back(c);
        }
    }
    if (std::find(m.stages.begin(), m.stages.end(), stage) == m.stages.end()) {
        m.stages.push_back(stage);
    }
    m.output_dir = fs::absolute(dir).lexically_normal().generic_string();
    m.hashes = hash_tree(dir);
    write_json_file(path, m);
    return m;
}

}  // namespace hrtrust

#include "hrtrust/dataset/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

#include "hrtrust/core/error.hpp"
#include "hrtrust/core/rng.hpp"

namespace hrtrust {
namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream in(line);
    while (std::getline(in, cell, ',')) {
        out.push_back(cell);
    }
    if (!line.empty() && line.back() == ',') {
        out.emplace_back();
    }
    return out;
}

std::vector<double> column(const Matrix& X, std::size_t j) {
    std::vector<double> c(X.size());
    for (std::size_t i = 0; i < X.size(); ++i) {
        c[i] = X[i][j];
    }
    return c;
}

void check_matrix(const Matrix& X, const char* what) {
    if (X.empty() || X.front().empty()) {
        throw InvalidInput(std::string(what) + ": empty matrix");
    }
    for (const auto& r : X) {
        if (r.size() != X.front().size()) {
            throw InvalidInput(std::string(what) + ": ragged matrix");
        }
    }
}

/// Indices of the k rows of `pts` nearest to q, ordered by (squared distance, index).
std::vector<std::size_t> nearest(const Matrix& pts, std::span<const double> q, std::size_t k, std::size_t skip) {
    std::vector<std::pair<double, std::size_t>> d;
    d.reserve(pts.size());
    for (std::size_t i = 0; i < pts.size(); ++i) {
        if (i == skip) {
            continue;
        }
        double s = 0.0;
        for (std::size_t j = 0; j < q.size(); ++j) {
            const double e = pts[i][j] - q[j];
            s += e * e;
        }
        d.emplace_back(s, i);
    }
    std::partial_sort(d.begin(), d.begin() + static_cast<std::ptrdiff_t>(k), d.end());
    std::vector<std::size_t> out(k);
    for (std::size_t i = 0; i < k; ++i) {
        out[i] = d[i].second;
    }
    return out;
}

}  // namespace

std::string to_string(Provenance p) {
    switch (p) {
        case Provenance::original:
            return "original";
        case Provenance::gaussian:
            return "gaussian-synthetic";
        case Provenance::smote:
            return "smote-synthetic";
    }
    return "unknown";
}

Provenance provenance_from_string(const std::string& s) {
    if (s == "original") {
        return Provenance::original;
    }
    if (s == "gaussian-synthetic") {
        return Provenance::gaussian;
    }
    if (s == "smote-synthetic") {
        return Provenance::smote;
    }
    throw InvalidInput("unknown provenance " + s);
}

void FeatureMatrix::validate() const {
    if (std::set<std::string>(names.begin(), names.end()).size() != names.size()) {
        throw InvalidInput("feature matrix: duplicate feature names");
    }
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto& r = rows[i];
        if (r.diffs.size() != names.size()) {
            throw InvalidInput("feature matrix: row " + std::to_string(i) + " has " + std::to_string(r.diffs.size()) +
                               " values for " + std::to_string(names.size()) + " features");
        }
        if (r.label != 1 && r.label != -1) {
            throw InvalidInput("feature matrix: row " + std::to_string(i) + " label must be -1 or +1");
        }
        for (double v : r.diffs) {
            if (!std::isfinite(v)) {
                throw InvalidInput("feature matrix: row " + std::to_string(i) + " has a non-finite value");
            }
        }
    }
}

Matrix FeatureMatrix::X() const {
    Matrix out;
    out.reserve(rows.size());
    for (const auto& r : rows) {
        out.push_back(r.diffs);
    }
    return out;
}

Labels FeatureMatrix::y() const {
    Labels out;
    out.reserve(rows.size());
    for (const auto& r : rows) {
        out.push_back(r.label);
    }
    return out;
}

std::size_t FeatureMatrix::count(Provenance p) const {
    return static_cast<std::size_t>(
        std::count_if(rows.begin(), rows.end(), [p](const FeatureRow& r) { return r.provenance == p; }));
}

FeatureMatrix FeatureMatrix::select(const std::vector<bool>& mask) const {
    if (mask.size() != names.size()) {
        throw InvalidInput("feature mask length does not match the feature count");
    }
    FeatureMatrix out;
    for (std::size_t j = 0; j < names.size(); ++j) {
        if (mask[j]) {
            out.names.push_back(names[j]);
        }
    }
    for (const auto& r : rows) {
        FeatureRow s = r;
        s.diffs.clear();
        for (std::size_t j = 0; j < names.size(); ++j) {
            if (mask[j]) {
                s.diffs.push_back(r.diffs[j]);
            }
        }
        out.rows.push_back(std::move(s));
    }
    return out;
}

FeatureMatrix FeatureMatrix::subset(const std::vector<std::size_t>& idx) const {
    FeatureMatrix out;
    out.names = names;
    for (std::size_t i : idx) {
        out.rows.push_back(rows.at(i));
    }
    return out;
}

std::vector<double> pairwise_diff(std::span<const double> current, std::span<const double> prev_best) {
    if (current.size() != prev_best.size()) {
        throw InvalidInput("pairwise_diff: feature counts differ");
    }
    std::vector<double> d(current.size());
    for (std::size_t j = 0; j < d.size(); ++j) {
        d[j] = current[j] - prev_best[j];
    }
    return d;
}

FeatureRow pairwise_diff(const IndicatorVector& current, const IndicatorVector& prev_best, int pi) {
    if (pi != 1 && pi != -1) {
        throw InvalidInput("pairwise_diff: label must be -1 or +1");
    }
    const auto a = current.values();
    const auto b = prev_best.values();
    FeatureRow r;
    r.diffs = pairwise_diff(a, b);
    r.label = pi;
    return r;
}

double pearson(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) {
        throw InvalidInput("pearson: series lengths differ");
    }
    if (a.size() < 2) {
        throw InvalidInput("pearson: at least two samples are required");
    }
    const auto n = static_cast<double>(a.size());
    const double ma = std::accumulate(a.begin(), a.end(), 0.0) / n;
    const double mb = std::accumulate(b.begin(), b.end(), 0.0) / n;
    double sab = 0.0;
    double saa = 0.0;
    double sbb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double da = a[i] - ma;
        const double db = b[i] - mb;
        sab += da * db;
        saa += da * da;
        sbb += db * db;
    }
    if (!(saa > 0.0) || !(sbb > 0.0)) {
        throw DegenerateInput("pearson: correlation undefined for a constant series");
    }
    return std::clamp(sab / std::sqrt(saa * sbb), -1.0, 1.0);
}

std::vector<std::vector<double>> correlation_matrix(const Matrix& X) {
    check_matrix(X, "correlation_matrix");
    const std::size_t p = X.front().size();
    std::vector<std::vector<double>> cols(p);
    for (std::size_t j = 0; j < p; ++j) {
        cols[j] = column(X, j);
    }
    std::vector<std::vector<double>> c(p, std::vector<double>(p, 1.0));
    for (std::size_t a = 0; a < p; ++a) {
        for (std::size_t b = a + 1; b < p; ++b) {
            c[a][b] = c[b][a] = pearson(cols[a], cols[b]);
        }
    }
    return c;
}

std::vector<double> gain_importance(const Matrix& X, const Labels& y, const ImportanceConfig& cfg) {
    check_dataset(X, y);
    if (X.size() < 20) {
        throw InvalidInput("gain_importance: at least 20 rows are required");
    }
    ForestParams p;
    p.n_estimators = cfg.n_estimators;
    p.seed = cfg.seed;
    const auto forest = train_forest(X, y, p);
    std::vector<double> imp = forest->gain_importance();
    const double mx = *std::max_element(imp.begin(), imp.end());
    if (!(mx > 0.0)) {
        throw DegenerateInput("gain_importance: the forest made no splits");
    }
    for (double& v : imp) {
        v /= mx;
    }
    return imp;
}

FeatureSelection select_features(const Matrix& X, const std::vector<std::string>& names,
                                 const std::vector<double>& importance, const SelectionConfig& cfg) {
    check_matrix(X, "select_features");
    const std::size_t p = names.size();
    if (X.front().size() != p || importance.size() != p) {
        throw InvalidInput("select_features: names, importance and columns disagree in length");
    }
    if (std::set<std::string>(names.begin(), names.end()).size() != p) {
        throw InvalidInput("select_features: duplicate feature names");
    }
    const double mx = *std::max_element(importance.begin(), importance.end());
    FeatureSelection sel{std::vector<bool>(p, true), std::vector<std::string>(p)};

    const auto prune = [&] {
        std::vector<std::vector<double>> cols(p);
        for (std::size_t j = 0; j < p; ++j) {
            cols[j] = column(X, j);
        }
        const std::vector<bool> active = sel.mask;
        for (std::size_t a = 0; a < p; ++a) {
            for (std::size_t b = a + 1; b < p; ++b) {
                if (!active[a] || !active[b]) {
                    continue;
                }
                const double r = pearson(cols[a], cols[b]);
                if (std::abs(r) < cfg.corr_threshold) {
                    continue;
                }
                std::size_t lose = importance[a] < importance[b] ? a : b;
                if (importance[a] == importance[b]) {
                    lose = names[a] > names[b] ? a : b;
                }
                const std::size_t keep = lose == a ? b : a;
                if (sel.mask[lose]) {
                    sel.mask[lose] = false;
                    std::ostringstream why;
                    why << "correlated with " << names[keep] << " (r = " << std::setprecision(3) << r << ")";
                    sel.reasons[lose] = why.str();
                }
            }
        }
    };
    const auto floor = [&] {
        for (std::size_t j = 0; j < p; ++j) {
            if (sel.mask[j] && importance[j] < cfg.importance_floor * mx) {
                sel.mask[j] = false;
                sel.reasons[j] = "importance below floor";
            }
        }
    };
    if (cfg.prune_first) {
        prune();
        floor();
    } else {
        floor();
        prune();
    }
    if (std::none_of(sel.mask.begin(), sel.mask.end(), [](bool b) { return b; })) {
        throw InvalidInput("select_features: every feature was dropped");
    }
    return sel;
}

Matrix augment_gaussian(const Matrix& X, std::size_t factor, std::uint64_t seed) {
    check_matrix(X, "augment_gaussian");
    if (X.size() < 2) {
        throw InvalidInput("augment_gaussian: at least two rows are required");
    }
    const std::size_t p = X.front().size();
    std::vector<double> mean(p);
    std::vector<double> sd(p);
    for (std::size_t j = 0; j < p; ++j) {
        const auto c = column(X, j);
        const double m = std::accumulate(c.begin(), c.end(), 0.0) / static_cast<double>(c.size());
        double v = 0.0;
        for (double x : c) {
            v += (x - m) * (x - m);
        }
        mean[j] = m;
        sd[j] = std::sqrt(v / static_cast<double>(c.size()));
    }
    Rng rng(seed);
    Matrix out(factor * X.size(), std::vector<double>(p));
    for (auto& r : out) {
        for (std::size_t j = 0; j < p; ++j) {
            r[j] = mean[j] + sd[j] * standard_normal(rng);
        }
    }
    return out;
}

Labels nn_label(const Matrix& synthetic, const Matrix& originals, const Labels& y, std::size_t k) {
    check_dataset(originals, y);
    if (k % 2 == 0) {
        throw InvalidInput("nn_label: k must be odd");
    }
    if (k > originals.size()) {
        throw InvalidInput("nn_label: k exceeds the number of originals");
    }
    const auto scaler = Standardizer::fit(originals);
    const Matrix Z = scaler.apply(originals);
    Labels out;
    out.reserve(synthetic.size());
    for (const auto& s : synthetic) {
        const auto q = scaler.apply(s);
        int vote = 0;
        for (std::size_t i : nearest(Z, q, k, Z.size())) {
            vote += y[i];
        }
        out.push_back(vote > 0 ? 1 : -1);
    }
    return out;
}

SmoteResult smote_balance(const Matrix& X, const Labels& y, std::size_t k, std::uint64_t seed,
                          const Standardizer* scaler) {
    check_dataset(X, y);
    std::vector<std::size_t> pos;
    std::vector<std::size_t> neg;
    for (std::size_t i = 0; i < y.size(); ++i) {
        (y[i] == 1 ? pos : neg).push_back(i);
    }
    if (pos.empty() || neg.empty()) {
        throw DegenerateInput("smote: both classes must be present");
    }
    SmoteResult res{X, y, 0};
    const bool pos_minor = pos.size() < neg.size();
    const auto& minor = pos_minor ? pos : neg;
    const std::size_t need = (pos_minor ? neg.size() : pos.size()) - minor.size();
    if (need == 0) {
        return res;
    }
    if (minor.size() <= k) {
        throw InvalidInput("smote: minority class has " + std::to_string(minor.size()) + " rows, needs more than k = " +
                           std::to_string(k));
    }
    const int label = pos_minor ? 1 : -1;
    const Standardizer own = scaler ? *scaler : Standardizer::fit(X);
    Matrix M;
    Matrix MZ;
    for (std::size_t i : minor) {
        M.push_back(X[i]);
        MZ.push_back(own.apply(X[i]));
    }
    std::vector<std::vector<std::size_t>> nn(M.size());
    Rng rng(seed);
    for (std::size_t n = 0; n < need; ++n) {
        const auto i = static_cast<std::size_t>(uniform_index(rng, M.size()));
        if (nn[i].empty()) {
            nn[i] = nearest(MZ, MZ[i], k, i);
        }
        const std::size_t j = nn[i][uniform_index(rng, k)];
        const double u = uniform01(rng);
        std::vector<double> s(M[i].size());
        for (std::size_t c = 0; c < s.size(); ++c) {
            s[c] = M[i][c] + u * (M[j][c] - M[i][c]);
        }
        res.X.push_back(std::move(s));
        res.y.push_back(label);
    }
    res.added = need;
    return res;
}

SplitIndices stratified_split(const Labels& y, double test_fraction, std::uint64_t seed) {
    if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
        throw InvalidInput("stratified_split: test_fraction must lie in (0, 1)");
    }
    SplitIndices s;
    for (int cls : {-1, 1}) {
        std::vector<std::size_t> idx;
        for (std::size_t i = 0; i < y.size(); ++i) {
            if (y[i] == cls) {
                idx.push_back(i);
            }
        }
        if (idx.empty()) {
            continue;
        }
        if (idx.size() < 2) {
            throw InvalidInput("stratified_split: class " + std::to_string(cls) + " has fewer than two rows");
        }
        Rng rng(derive_seed(seed, static_cast<std::uint64_t>(cls + 1)));
        portable_shuffle(idx.begin(), idx.end(), rng);
        auto n_test = static_cast<std::size_t>(std::llround(test_fraction * static_cast<double>(idx.size())));
        n_test = std::clamp<std::size_t>(n_test, 1, idx.size() - 1);
        s.test.insert(s.test.end(), idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(n_test));
        s.train.insert(s.train.end(), idx.begin() + static_cast<std::ptrdiff_t>(n_test), idx.end());
    }
    if (s.train.empty()) {
        throw InvalidInput("stratified_split: no labelled rows");
    }
    std::sort(s.train.begin(), s.train.end());
    std::sort(s.test.begin(), s.test.end());
    return s;
}

IndicatorConfig study_indicator_config(const Study& study, std::uint64_t seed) {
    IndicatorConfig cfg;
    cfg.attention.task_center = study.config.layout.b;
    cfg.dt = study.config.dt;
    cfg.bounds = calibrate_bounds(study.config, derive_seed(seed, "bounds"), 40, cfg.speed_window);
    return cfg;
}

FeatureMatrix study_features(const Study& study, const IndicatorConfig& cfg) {
    FeatureMatrix m;
    for (auto n : IndicatorVector::names) {
        m.names.emplace_back(n);
    }
    std::map<std::string, IndicatorVector> cache;
    const auto summary = [&](const std::string& ref) -> const IndicatorVector& {
        auto it = cache.find(ref);
        if (it == cache.end()) {
            const auto rec = study.recordings.find(ref);
            const auto traj = study.trajectories.find(ref);
            if (rec == study.recordings.end() || traj == study.trajectories.end()) {
                throw NotFound("study has no recording or trajectory for " + ref);
            }
            it = cache.emplace(ref, cycle_summary(rec->second, traj->second, cfg)).first;
        }
        return it->second;
    };
    for (const auto& r : study.rows) {
        FeatureRow row = pairwise_diff(summary(r.candidate_ref), summary(r.best_ref), r.pi);
        row.operator_id = r.operator_id;
        row.iteration = r.iteration;
        m.rows.push_back(std::move(row));
    }
    m.validate();
    return m;
}

void PipelineConfig::validate() const {
    if (augment_factor < 1 || label_k < 1 || smote_k < 1) {
        throw InvalidInput("pipeline: augment_factor, label_k and smote_k must be positive");
    }
    if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
        throw InvalidInput("pipeline: test_fraction must lie in (0, 1)");
    }
    if (!(selection.corr_threshold > 0.0 && selection.corr_threshold <= 1.0) ||
        !(selection.importance_floor >= 0.0 && selection.importance_floor < 1.0)) {
        throw InvalidInput("pipeline: selection thresholds out of range");
    }
}

PreparedDataset prepare_dataset(const FeatureMatrix& originals, const PipelineConfig& cfg) {
    cfg.validate();
    originals.validate();
    if (originals.count(Provenance::original) != originals.rows.size()) {
        throw InvalidInput("prepare_dataset: input must contain original rows only");
    }
    PreparedDataset out;
    out.seed = cfg.seed;
    out.all_names = originals.names;
    const Matrix X0 = originals.X();
    const Labels y0 = originals.y();

    ImportanceConfig ic = cfg.importance;
    ic.seed = derive_seed(cfg.seed, "importance");
    out.importance = gain_importance(X0, y0, ic);
    out.selection = select_features(X0, originals.names, out.importance, cfg.selection);
    FeatureMatrix m = originals.select(out.selection.mask);

    const Matrix X = m.X();
    const Matrix synth = augment_gaussian(X, cfg.augment_factor, derive_seed(cfg.seed, "augment"));
    const Labels synth_y = nn_label(synth, X, y0, cfg.label_k);
    for (std::size_t i = 0; i < synth.size(); ++i) {
        m.rows.push_back({synth[i], synth_y[i], "", 0, Provenance::gaussian});
    }

    const Standardizer scaler = Standardizer::fit(X);
    const auto bal = smote_balance(m.X(), m.y(), cfg.smote_k, derive_seed(cfg.seed, "smote"), &scaler);
    for (std::size_t i = m.rows.size(); i < bal.X.size(); ++i) {
        m.rows.push_back({bal.X[i], bal.y[i], "", 0, Provenance::smote});
    }
    out.split = stratified_split(m.y(), cfg.test_fraction, derive_seed(cfg.seed, "split"));
    out.matrix = std::move(m);
    return out;
}

void write_feature_matrix(const std::filesystem::path& csv, const FeatureMatrix& m, const json& extra) {
    m.validate();
    if (csv.has_parent_path()) {
        std::filesystem::create_directories(csv.parent_path());
    }
    std::ofstream out(csv);
    if (!out) {
        throw InvalidInput("cannot write " + csv.string());
    }
    out << "operator_id,iteration,provenance,label";
    for (const auto& n : m.names) {
        out << ',' << n;
    }
    out << '\n' << std::setprecision(17);
    for (const auto& r : m.rows) {
        out << r.operator_id << ',' << r.iteration << ',' << to_string(r.provenance) << ',' << r.label;
        for (double v : r.diffs) {
            out << ',' << v;
        }
        out << '\n';
    }
    json manifest = {{"format_version", 1},
                     {"features", m.names},
                     {"rows", m.rows.size()},
                     {"provenance",
                      {{"original", m.count(Provenance::original)},
                       {"gaussian-synthetic", m.count(Provenance::gaussian)},
                       {"smote-synthetic", m.count(Provenance::smote)}}}};
    for (const auto& [k, v] : extra.items()) {
        manifest[k] = v;
    }
    write_json_file(csv.string() + ".json", manifest);
}

FeatureMatrix read_feature_matrix(const std::filesystem::path& csv) {
    std::ifstream in(csv);
    if (!in) {
        throw NotFound("feature matrix not found: " + csv.string());
    }
    std::string line;
    if (!std::getline(in, line)) {
        throw InvalidInput(csv.string() + ": empty file");
    }
    const auto header = split_csv_line(line);
    if (header.size() < 5 || header[0] != "operator_id" || header[1] != "iteration" || header[2] != "provenance" ||
        header[3] != "label") {
        throw InvalidInput(csv.string() + ": unexpected header");
    }
    FeatureMatrix m;
    m.names.assign(header.begin() + 4, header.end());
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) {
            continue;
        }
        const auto cells = split_csv_line(line);
        if (cells.size() != header.size()) {
            throw InvalidInput(csv.string() + ":" + std::to_string(line_no) + ": wrong number of columns");
        }
        try {
            FeatureRow r;
            r.operator_id = cells[0];
            r.iteration = std::stoi(cells[1]);
            r.provenance = provenance_from_string(cells[2]);
            r.label = std::stoi(cells[3]);
            for (std::size_t j = 4; j < cells.size(); ++j) {
                r.diffs.push_back(std::stod(cells[j]));
            }
            m.rows.push_back(std::move(r));
        } catch (const std::logic_error&) {
            throw InvalidInput(csv.string() + ":" + std::to_string(line_no) + ": malformed number");
        }
    }
    m.validate();
    return m;
}

json read_feature_manifest(const std::filesystem::path& csv) { return read_json_file(csv.string() + ".json"); }

void to_json(json& j, const SelectionConfig& c) {
    j = json{{"corr_threshold", c.corr_threshold},
             {"importance_floor", c.importance_floor},
             {"prune_first", c.prune_first}};
}

void from_json(const json& j, SelectionConfig& c) {
    const SelectionConfig d;
    c.corr_threshold = j.value("corr_threshold", d.corr_threshold);
    c.importance_floor = j.value("importance_floor", d.importance_floor);
    c.prune_first = j.value("prune_first", d.prune_first);
}

void to_json(json& j, const PipelineConfig& c) {
    j = json{{"selection", c.selection},
             {"importance_trees", c.importance.n_estimators},
             {"augment_factor", c.augment_factor},
             {"label_k", c.label_k},
             {"smote_k", c.smote_k},
             {"test_fraction", c.test_fraction},
             {"seed", c.seed}};
}

void from_json(const json& j, PipelineConfig& c) {
    const PipelineConfig d;
    c.selection = j.value("selection", d.selection);
    c.importance.n_estimators = j.value("importance_trees", d.importance.n_estimators);
    c.augment_factor = j.value("augment_factor", d.augment_factor);
    c.label_k = j.value("label_k", d.label_k);
    c.smote_k = j.value("smote_k", d.smote_k);
    c.test_fraction = j.value("test_fraction", d.test_fraction);
    c.seed = j.value("seed", d.seed);
}

}  // namespace hrtrust

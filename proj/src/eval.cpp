#include "touchsig/eval.hpp"

#include <algorithm>
#include <map>
#include <memory>
#include <random>
#include <set>

#include "touchsig/error.hpp"

namespace touchsig {

std::vector<std::vector<std::size_t>> kfold_split(std::size_t n, std::size_t k, std::uint64_t seed,
                                                  std::span<const std::string> labels) {
    if (k < 1 || k > n) {
        throw Error(ErrorCode::KTooLarge, std::to_string(k) + " folds over " + std::to_string(n) + " samples");
    }
    if (labels.size() != n) throw Error(ErrorCode::InconsistentDimensions, "label count differs from n");

    std::map<std::string, std::vector<std::size_t>> by_class;
    for (std::size_t i = 0; i < n; ++i) by_class[labels[i]].push_back(i);

    std::mt19937_64 rng(seed);
    std::vector<std::vector<std::size_t>> folds(k);
    std::size_t next = 0;
    for (auto& [label, idx] : by_class) {
        std::shuffle(idx.begin(), idx.end(), rng);
        for (auto i : idx) folds[next++ % k].push_back(i);
    }
    for (auto& f : folds) std::sort(f.begin(), f.end());
    return folds;
}

std::vector<std::string> class_order(std::span<const std::string> labels) {
    const std::set<std::string> unique(labels.begin(), labels.end());
    std::vector<std::pair<int, std::string>> keyed;
    for (const auto& l : unique) {
        int key = 1000;
        try {
            const auto parsed = Label::parse(l);
            key = parsed.is_action() ? static_cast<int>(parsed.action()) : 100 + parsed.digit().value;
        } catch (const Error&) {
            // Not a canonical label (e.g. the stage-1 "scroll" class).
        }
        keyed.emplace_back(key, l);
    }
    std::sort(keyed.begin(), keyed.end());
    std::vector<std::string> out;
    for (auto& [key, l] : keyed) out.push_back(std::move(l));
    return out;
}

ConfusionMatrix::ConfusionMatrix(std::vector<std::string> cls)
    : classes(std::move(cls)), counts(classes.size(), std::vector<std::size_t>(classes.size(), 0)) {}

std::size_t ConfusionMatrix::index_of(const std::string& label) const {
    const auto it = std::find(classes.begin(), classes.end(), label);
    if (it == classes.end()) throw Error(ErrorCode::DimensionMismatch, "class " + label + " not in confusion matrix");
    return static_cast<std::size_t>(it - classes.begin());
}

void ConfusionMatrix::add(const std::string& actual, const std::string& predicted) {
    ++counts[index_of(actual)][index_of(predicted)];
}

std::size_t ConfusionMatrix::total() const {
    std::size_t t = 0;
    for (std::size_t a = 0; a < classes.size(); ++a) t += actual_total(a);
    return t;
}

std::size_t ConfusionMatrix::actual_total(std::size_t actual) const {
    std::size_t t = 0;
    for (auto c : counts[actual]) t += c;
    return t;
}

double ConfusionMatrix::percent(std::size_t actual, std::size_t predicted) const {
    const auto t = actual_total(actual);
    return t == 0 ? 0.0 : 100.0 * static_cast<double>(counts[actual][predicted]) / static_cast<double>(t);
}

double ConfusionMatrix::overall_rate() const {
    const auto t = total();
    if (t == 0) return 0.0;
    std::size_t hits = 0;
    for (std::size_t i = 0; i < classes.size(); ++i) hits += counts[i][i];
    return static_cast<double>(hits) / static_cast<double>(t);
}

Trainer two_stage_trainer(TwoStageConfig config) {
    return [config](const FeatureMatrix& train) -> RankedPredictor {
        auto model = std::make_shared<TwoStageModel>(two_stage_fit(train.rows, train.labels, config));
        return [model](std::span<const double> x) {
            return std::vector<std::string>{Label(two_stage_predict(*model, x)).str()};
        };
    };
}

Trainer knn_trainer(int k, Metric metric) {
    return [k, metric](const FeatureMatrix& train) -> RankedPredictor {
        auto model = std::make_shared<KnnModel>(knn_fit(train.rows, train.labels, k, metric));
        return [model](std::span<const double> x) { return std::vector<std::string>{knn_predict(*model, x)}; };
    };
}

Trainer ann_trainer(std::size_t hidden, ScgConfig config) {
    return [hidden, config](const FeatureMatrix& train) -> RankedPredictor {
        const auto inner = stratified_split(train.labels, SplitSpec{0.85, 0.15, 0.0, config.seed});
        auto model = std::make_shared<MlpModel>(train_ann_on(train, inner.train, inner.validation, hidden, config).model);
        return [model](std::span<const double> x) {
            std::vector<std::string> ranked;
            for (auto& r : predict_ranked(*model, x)) ranked.push_back(std::move(r.label));
            return ranked;
        };
    };
}

GuessCurve guess_curve(std::span<const std::string> classes, std::span<const std::string> truth,
                       std::span<const std::vector<std::string>> rankings) {
    if (truth.size() != rankings.size()) throw Error(ErrorCode::DimensionMismatch, "truth/ranking count differ");
    const auto C = classes.size();
    GuessCurve g;
    g.classes.assign(classes.begin(), classes.end());
    g.per_class.assign(C, std::vector<double>(C, 0.0));
    g.average.assign(C, 0.0);
    g.samples = truth.size();

    std::vector<std::size_t> class_count(C, 0);
    std::vector<std::vector<std::size_t>> hit_at(C, std::vector<std::size_t>(C, 0));  // first hit rank per class
    for (std::size_t s = 0; s < truth.size(); ++s) {
        const auto ci = static_cast<std::size_t>(std::find(classes.begin(), classes.end(), truth[s]) - classes.begin());
        if (ci == C) throw Error(ErrorCode::DimensionMismatch, "true class " + truth[s] + " not ranked");
        ++class_count[ci];
        const auto& ranked = rankings[s];
        const auto pos = static_cast<std::size_t>(std::find(ranked.begin(), ranked.end(), truth[s]) - ranked.begin());
        if (pos < C) ++hit_at[ci][pos];
    }
    std::vector<std::size_t> pooled(C, 0);
    for (std::size_t ci = 0; ci < C; ++ci) {
        std::size_t cum = 0;
        for (std::size_t r = 0; r < C; ++r) {
            cum += hit_at[ci][r];
            pooled[r] += cum;
            g.per_class[ci][r] = class_count[ci] ? static_cast<double>(cum) / static_cast<double>(class_count[ci]) : 0.0;
        }
    }
    for (std::size_t r = 0; r < C; ++r) {
        g.average[r] = g.samples ? static_cast<double>(pooled[r]) / static_cast<double>(g.samples) : 0.0;
    }
    return g;
}

GuessCurve guess_curve(const MlpModel& model, const FeatureMatrix& test) {
    std::vector<std::vector<std::string>> rankings;
    rankings.reserve(test.size());
    for (const auto& row : test.rows) {
        std::vector<std::string> ranked;
        for (auto& r : predict_ranked(model, row)) ranked.push_back(std::move(r.label));
        rankings.push_back(std::move(ranked));
    }
    return guess_curve(model.classes(), test.labels, rankings);
}

CvResult cross_validate(const FeatureMatrix& matrix, const Trainer& trainer, std::size_t k, std::uint64_t seed) {
    const auto classes = class_order(matrix.labels);
    if (classes.size() < 2) throw Error(ErrorCode::DegenerateSplit, "cross-validation needs at least two classes");
    const auto folds = kfold_split(matrix.size(), k, seed, matrix.labels);

    CvResult out{ConfusionMatrix(classes), 0.0, k, seed, std::nullopt};
    std::vector<std::string> truth;
    std::vector<std::vector<std::string>> rankings;
    bool full_rankings = true;

    for (std::size_t f = 0; f < folds.size(); ++f) {
        std::vector<std::size_t> train_idx;
        for (std::size_t g = 0; g < folds.size(); ++g) {
            if (g != f) train_idx.insert(train_idx.end(), folds[g].begin(), folds[g].end());
        }
        std::sort(train_idx.begin(), train_idx.end());
        const auto predictor = trainer(matrix.subset(train_idx));
        for (auto i : folds[f]) {
            auto ranked = predictor(matrix.rows[i]);
            if (ranked.empty()) throw Error(ErrorCode::DimensionMismatch, "classifier returned no label");
            if (std::find(classes.begin(), classes.end(), ranked.front()) == classes.end()) {
                throw Error(ErrorCode::DimensionMismatch, "classifier predicted unknown class " + ranked.front());
            }
            out.confusion.add(matrix.labels[i], ranked.front());
            full_rankings = full_rankings && ranked.size() == classes.size();
            truth.push_back(matrix.labels[i]);
            rankings.push_back(std::move(ranked));
        }
    }
    out.overall_rate = out.confusion.overall_rate();
    if (full_rankings) out.guess = guess_curve(classes, truth, rankings);
    return out;
}

}  // namespace touchsig

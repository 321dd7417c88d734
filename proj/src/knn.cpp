#include "touchsig/knn.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "touchsig/error.hpp"

namespace touchsig {

std::string_view to_string(Metric m) noexcept { return m == Metric::Euclidean ? "euclidean" : "cityblock"; }

Metric parse_metric(std::string_view text) {
    if (text == "euclidean") return Metric::Euclidean;
    if (text == "cityblock") return Metric::CityBlock;
    throw Error(ErrorCode::UsageError, "metric must be euclidean|cityblock");
}

double distance(std::span<const double> a, std::span<const double> b, Metric metric) {
    if (a.size() != b.size()) throw Error(ErrorCode::LengthMismatch, "distance between vectors of unequal length");
    double acc = 0.0;
    if (metric == Metric::Euclidean) {
        for (std::size_t i = 0; i < a.size(); ++i) {
            const double d = a[i] - b[i];
            acc += d * d;
        }
        return std::sqrt(acc);
    }
    for (std::size_t i = 0; i < a.size(); ++i) acc += std::abs(a[i] - b[i]);
    return acc;
}

KnnModel knn_fit(std::span<const std::vector<double>> vectors, std::span<const std::string> labels, int k,
                 Metric metric) {
    if (vectors.empty()) throw Error(ErrorCode::EmptyTrainingSet, "knn_fit");
    if (labels.size() != vectors.size()) {
        throw Error(ErrorCode::InconsistentDimensions, "label count differs from vector count");
    }
    if (k < 1 || static_cast<std::size_t>(k) > vectors.size()) {
        throw Error(ErrorCode::KTooLarge,
                    "k=" + std::to_string(k) + " with " + std::to_string(vectors.size()) + " training vectors");
    }
    KnnModel m;
    m.dim_ = vectors[0].size();
    m.k_ = k;
    m.metric_ = metric;
    m.data_.reserve(vectors.size() * m.dim_);
    for (std::size_t i = 0; i < vectors.size(); ++i) {
        if (vectors[i].size() != m.dim_) {
            throw Error(ErrorCode::InconsistentDimensions, "training vector " + std::to_string(i) + " has length " +
                                                               std::to_string(vectors[i].size()));
        }
        m.data_.insert(m.data_.end(), vectors[i].begin(), vectors[i].end());
        auto it = std::find(m.classes_.begin(), m.classes_.end(), labels[i]);
        if (it == m.classes_.end()) it = m.classes_.insert(m.classes_.end(), labels[i]);
        m.labels_.push_back(static_cast<int>(it - m.classes_.begin()));
    }
    return m;
}

std::vector<std::size_t> KnnModel::neighbours(std::span<const double> query) const {
    if (query.size() != dim_) {
        throw Error(ErrorCode::DimensionMismatch,
                    "query has " + std::to_string(query.size()) + " features, model expects " + std::to_string(dim_));
    }
    std::vector<double> dist(size());
    for (std::size_t i = 0; i < size(); ++i) dist[i] = distance(vector(i), query, metric_);
    std::vector<std::size_t> order(size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    const auto k = static_cast<std::size_t>(k_);
    std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k), order.end(),
                      [&](std::size_t a, std::size_t b) { return dist[a] < dist[b] || (dist[a] == dist[b] && a < b); });
    order.resize(k);
    return order;
}

std::string knn_predict(const KnnModel& model, std::span<const double> query) {
    const auto nn = model.neighbours(query);
    std::vector<int> votes(model.classes().size(), 0);
    for (auto i : nn) ++votes[static_cast<std::size_t>(model.class_index(i))];
    const int best = *std::max_element(votes.begin(), votes.end());
    // Neighbours are ordered by (distance, index): the first tied label seen wins.
    for (auto i : nn) {
        if (votes[static_cast<std::size_t>(model.class_index(i))] == best) return model.label(i);
    }
    return model.label(nn.front());
}

TwoStageModel two_stage_fit(std::span<const std::vector<double>> vectors, std::span<const std::string> labels,
                            const TwoStageConfig& config) {
    if (labels.size() != vectors.size()) {
        throw Error(ErrorCode::InconsistentDimensions, "label count differs from vector count");
    }
    std::vector<std::string> coarse;
    std::vector<std::vector<double>> scroll_vectors;
    std::vector<std::string> scroll_labels;
    coarse.reserve(labels.size());
    for (std::size_t i = 0; i < labels.size(); ++i) {
        const auto action = Label::parse(labels[i]).action();
        if (is_scroll(action)) {
            coarse.emplace_back(kScrollClass);
            scroll_vectors.push_back(vectors[i]);
            scroll_labels.push_back(labels[i]);
        } else {
            coarse.push_back(labels[i]);
        }
    }
    TwoStageModel model;
    model.stage1 = knn_fit(vectors, coarse, config.stage1_k, config.stage1_metric);
    if (!scroll_vectors.empty()) {
        model.stage2 = knn_fit(scroll_vectors, scroll_labels, config.stage2_k, config.stage2_metric);
    }
    return model;
}

TouchAction two_stage_predict(const TwoStageModel& model, std::span<const double> query) {
    const auto coarse = knn_predict(model.stage1, query);
    if (coarse != kScrollClass) return Label::parse(coarse).action();
    if (!model.stage2) throw Error(ErrorCode::EmptyTrainingSet, "stage 2 has no scroll samples");
    return Label::parse(knn_predict(*model.stage2, query)).action();
}

}  // namespace touchsig

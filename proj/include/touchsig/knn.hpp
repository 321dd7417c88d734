#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "touchsig/model.hpp"

namespace touchsig {

enum class Metric { Euclidean, CityBlock };

std::string_view to_string(Metric m) noexcept;
Metric parse_metric(std::string_view text);

/// Throws Error(LengthMismatch) when the vectors differ in length.
double distance(std::span<const double> a, std::span<const double> b, Metric metric);

/// Lazy learner: keeps every training vector verbatim.
///
/// Prediction takes the k nearest training vectors, ordering equal distances
/// by training index. The label with most votes wins; a vote tie goes to the
/// tied label whose nearest member is closest (and, at equal distance, has the
/// lower training index), i.e. the tied label that appears first in the
/// ordered neighbour list.
class KnnModel {
public:
    KnnModel() = default;

    std::size_t dim() const noexcept { return dim_; }
    std::size_t size() const noexcept { return labels_.size(); }
    int k() const noexcept { return k_; }
    Metric metric() const noexcept { return metric_; }
    const std::vector<std::string>& classes() const noexcept { return classes_; }

    std::span<const double> vector(std::size_t i) const { return {data_.data() + i * dim_, dim_}; }
    const std::string& label(std::size_t i) const { return classes_[static_cast<std::size_t>(labels_[i])]; }
    int class_index(std::size_t i) const { return labels_[i]; }

    /// Indices of the k nearest training vectors, nearest first.
    std::vector<std::size_t> neighbours(std::span<const double> query) const;

    friend KnnModel knn_fit(std::span<const std::vector<double>> vectors, std::span<const std::string> labels, int k,
                            Metric metric);
    friend bool operator==(const KnnModel&, const KnnModel&) = default;

private:
    std::size_t dim_ = 0;
    int k_ = 1;
    Metric metric_ = Metric::Euclidean;
    std::vector<double> data_;  // row-major, size() x dim()
    std::vector<int> labels_;   // index into classes_
    std::vector<std::string> classes_;  // first-appearance order
};

/// Throws EmptyTrainingSet, InconsistentDimensions, KTooLarge (also for k < 1).
KnnModel knn_fit(std::span<const std::vector<double>> vectors, std::span<const std::string> labels, int k,
                 Metric metric);

/// Throws Error(DimensionMismatch).
std::string knn_predict(const KnnModel& model, std::span<const double> query);

/// Stage 1 separates click / hold / zoom-in / zoom-out / scroll; stage 2 only
/// sees scroll samples and picks the direction.
struct TwoStageModel {
    KnnModel stage1;
    std::optional<KnnModel> stage2;  // absent when training held no scrolls

    friend bool operator==(const TwoStageModel&, const TwoStageModel&) = default;
};

inline constexpr std::string_view kScrollClass = "scroll";

struct TwoStageConfig {
    int stage1_k = 1;
    Metric stage1_metric = Metric::Euclidean;
    int stage2_k = 1;
    Metric stage2_metric = Metric::CityBlock;
};

/// `labels` must be touch-action labels (`action:*`). Stage 2 is trained on
/// the ground-truth scroll samples.
TwoStageModel two_stage_fit(std::span<const std::vector<double>> vectors, std::span<const std::string> labels,
                            const TwoStageConfig& config = {});

TouchAction two_stage_predict(const TwoStageModel& model, std::span<const double> query);

}  // namespace touchsig

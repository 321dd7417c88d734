#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "touchsig/knn.hpp"
#include "touchsig/matrix.hpp"
#include "touchsig/mlp.hpp"
#include "touchsig/scg.hpp"

namespace touchsig {

/// Stratified k-fold partition of 0..n-1: each class is shuffled by `seed`
/// and dealt round-robin, continuing across classes, so fold sizes differ by
/// at most one. Throws Error(KTooLarge) when k > n or k < 1.
std::vector<std::vector<std::size_t>> kfold_split(std::size_t n, std::size_t k, std::uint64_t seed,
                                                  std::span<const std::string> labels);

/// Canonical display order: touch actions in table order, digits ascending,
/// anything else lexicographic after them.
std::vector<std::string> class_order(std::span<const std::string> labels);

struct ConfusionMatrix {
    std::vector<std::string> classes;
    std::vector<std::vector<std::size_t>> counts;  // [actual][predicted]

    explicit ConfusionMatrix(std::vector<std::string> classes = {});

    std::size_t index_of(const std::string& label) const;  // throws DimensionMismatch
    void add(const std::string& actual, const std::string& predicted);

    std::size_t total() const;
    std::size_t actual_total(std::size_t actual) const;
    /// Share of actual-class samples predicted as `predicted`, in percent.
    double percent(std::size_t actual, std::size_t predicted) const;
    double overall_rate() const;  // fraction on the diagonal, 0..1
};

/// Best-first label ranking for one sample; may hold only the top label.
using RankedPredictor = std::function<std::vector<std::string>(std::span<const double>)>;
using Trainer = std::function<RankedPredictor(const FeatureMatrix& train)>;

Trainer two_stage_trainer(TwoStageConfig config = {});
Trainer knn_trainer(int k, Metric metric);
/// Each training fold is split again 85/15 (stratified) for early stopping.
Trainer ann_trainer(std::size_t hidden, ScgConfig config);

struct GuessCurve {
    std::vector<std::string> classes;
    std::vector<std::vector<double>> per_class;  // [class][rank-1], fraction 0..1
    std::vector<double> average;                 // [rank-1] over all samples
    std::size_t samples = 0;
};

struct CvResult {
    ConfusionMatrix confusion;
    double overall_rate = 0.0;
    std::size_t folds = 0;
    std::uint64_t seed = 0;
    std::optional<GuessCurve> guess;  // when every prediction ranked all classes
};

/// Trains on k-1 folds, predicts the held-out fold, pools the counts.
/// Throws Error(DegenerateSplit) with fewer than two classes.
CvResult cross_validate(const FeatureMatrix& matrix, const Trainer& trainer, std::size_t k, std::uint64_t seed);

/// Cumulative hit rate of the true class within the top r, r = 1..classes.
GuessCurve guess_curve(std::span<const std::string> classes, std::span<const std::string> truth,
                       std::span<const std::vector<std::string>> rankings);

GuessCurve guess_curve(const MlpModel& model, const FeatureMatrix& test);

}  // namespace touchsig

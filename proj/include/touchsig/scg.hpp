#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "touchsig/matrix.hpp"
#include "touchsig/mlp.hpp"

namespace touchsig {

struct ScgConfig {
    double sigma0 = 1e-4;   // step for the finite-difference curvature estimate
    double lambda0 = 1e-6;  // initial Levenberg-Marquardt scale
    int max_epochs = 1000;
    int early_stop_patience = 6;
    double min_grad = 1e-10;
    std::uint64_t seed = 0;  // weight initialisation (used by train_ann)

    void validate() const;  // throws Error(InvalidSpec)
};

struct EpochRecord {
    int epoch = 0;
    double train_loss = 0.0;  // at the weights held after this epoch
    double val_loss = 0.0;    // NaN without a validation set
    bool accepted = false;
    double lambda = 0.0;
};

struct ScgResult {
    MlpModel model;  // weights with the best validation loss (best training loss without validation)
    std::vector<EpochRecord> history;
    int best_epoch = 0;
    double best_train_loss = 0.0;
    double best_val_loss = 0.0;
    double initial_train_loss = 0.0;
    std::string stop_reason;
};

/// Full-batch scaled conjugate gradient. Steps are applied only when the
/// comparison parameter is positive, so accepted training losses strictly
/// decrease. The search direction restarts to steepest descent every
/// param_count() accepted steps. With a validation set, training stops after
/// `early_stop_patience` consecutive accepted steps without a new best
/// validation loss. Throws Error(NonFiniteLoss) if the objective diverges.
ScgResult scg_train(const MlpModel& init, const LabeledBatch& train, const LabeledBatch* validation,
                    const ScgConfig& config);

struct SplitSpec {
    double train = 0.70;
    double validation = 0.15;
    double test = 0.15;
    std::uint64_t seed = 0;

    void validate() const;  // throws Error(InvalidSpec) unless fractions are >= 0 and sum to 1
};

struct SplitIndices {
    std::vector<std::size_t> train;
    std::vector<std::size_t> validation;
    std::vector<std::size_t> test;
};

/// Per-class shuffle, then each class is cut by the fractions (rounded to
/// nearest, validation taken after train, test gets the remainder).
SplitIndices stratified_split(std::span<const std::string> labels, const SplitSpec& spec);

/// Rows of `matrix` at `indices` as a batch over `classes`.
LabeledBatch make_batch(const FeatureMatrix& matrix, std::span<const std::size_t> indices,
                        std::span<const std::string> classes);

struct AnnTraining {
    MlpModel model;
    ScgResult result;
    SplitIndices split;
};

/// Sorted class list, stratified split, input map fitted on the training
/// rows, mlp_init(config.seed), then scg_train with the validation rows.
/// Throws Error(DegenerateSplit) when a class has no training row.
AnnTraining train_ann(const FeatureMatrix& matrix, std::size_t hidden, const ScgConfig& config,
                      const SplitSpec& split);

/// Same, on explicit training/validation row sets (no test carve-out).
AnnTraining train_ann_on(const FeatureMatrix& matrix, std::span<const std::size_t> train_rows,
                         std::span<const std::size_t> validation_rows, std::size_t hidden, const ScgConfig& config);

}  // namespace touchsig

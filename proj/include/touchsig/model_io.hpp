#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "touchsig/features.hpp"
#include "touchsig/knn.hpp"
#include "touchsig/matrix.hpp"
#include "touchsig/mlp.hpp"
#include "touchsig/scg.hpp"

namespace touchsig {

/// What `train` writes: exactly one of two_stage / flat / ann is set.
struct StoredModel {
    Phase phase = Phase::Phase1;
    std::uint64_t layout_hash = 0;
    std::size_t dim = 0;

    std::optional<TwoStageModel> two_stage;  // touch actions
    std::optional<KnnModel> flat;            // any other label set

    std::optional<MlpModel> ann;
    std::size_t ann_hidden = 0;
    ScgConfig scg;
    SplitSpec split;
    int best_epoch = 0;
    std::string stop_reason;

    std::string kind() const;  // "knn" | "ann"
};

/// Touch-action matrices get the two-stage classifier (`config`); anything
/// else a flat k-NN with config.stage1_k / stage1_metric.
StoredModel fit_knn_model(const FeatureMatrix& matrix, const TwoStageConfig& config = {});

StoredModel fit_ann_model(const FeatureMatrix& matrix, std::size_t hidden, const ScgConfig& config,
                          const SplitSpec& split);

/// Self-describing JSON document; doubles round-trip exactly.
std::string encode_model(const StoredModel& model);
StoredModel decode_model(const std::string& text);  // throws Error(BadModelFile)

void save_model(const std::filesystem::path& path, const StoredModel& model);  // throws StorageFailure
/// Throws Error(ModelNotFound) when the file is missing, Error(BadModelFile)
/// when it cannot be decoded.
StoredModel load_model(const std::filesystem::path& path);

/// Best-first labels per row (all classes for the ANN, the winner for k-NN).
/// Throws Error(DimensionMismatch) when the matrix layout is not the model's.
std::vector<std::vector<std::string>> predict_rows(const StoredModel& model, const FeatureMatrix& matrix);

}  // namespace touchsig

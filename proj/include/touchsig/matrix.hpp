#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "touchsig/features.hpp"
#include "touchsig/model.hpp"

namespace touchsig {

/// Labeled feature rows of one phase. Labels are the canonical label text
/// (`action:click`, `digit:7`), which is what the classifiers operate on.
struct FeatureMatrix {
    Phase phase = Phase::Phase1;
    std::vector<std::string> layout;
    std::vector<std::string> labels;
    std::vector<std::vector<double>> rows;

    std::size_t size() const noexcept { return rows.size(); }
    std::size_t dim() const noexcept { return layout.size(); }

    /// Rows at `indices`, in that order.
    FeatureMatrix subset(std::span<const std::size_t> indices) const;
};

FeatureMatrix build_matrix(std::span<const LabeledTrace> traces, Phase phase);

/// Header record `{"layout":[…],"phase":"1"}` followed by one
/// `{"features":[…],"label":"…"}` record per row.
void write_matrix(const std::filesystem::path& path, const FeatureMatrix& matrix);
FeatureMatrix read_matrix(const std::filesystem::path& path);

/// FNV-1a over the newline-joined names; stored in model files so a model is
/// never applied to a matrix with a different layout.
std::uint64_t layout_hash(std::span<const std::string> names);

}  // namespace touchsig

#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace touchsig {

using RowMajorMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Pattern-recognition network: one tanh hidden layer, softmax output.
///
/// Inputs pass through a fixed per-feature affine map before the first layer,
/// x' = (x - centre) * gain, which training fits to send each feature's
/// training range onto [-1, 1]. The map is part of the model, not a trainable
/// parameter; it is the identity after mlp_init.
///
/// All trainable parameters live in one flat vector, in this order:
///   W1 (hidden x in, row-major), b1 (hidden), W2 (out x hidden, row-major), b2 (out).
/// Gradients use the same order.
class MlpModel {
public:
    MlpModel() = default;

    /// All-zero weights and biases. Throws Error(BadDimensions) if any dim is 0.
    MlpModel(std::size_t in_dim, std::size_t hidden, std::size_t out_dim);

    std::size_t in_dim() const noexcept { return in_; }
    std::size_t hidden() const noexcept { return hidden_; }
    std::size_t out_dim() const noexcept { return out_; }
    std::size_t param_count() const noexcept { return static_cast<std::size_t>(params_.size()); }

    const Eigen::VectorXd& params() const noexcept { return params_; }
    void set_params(Eigen::VectorXd params);

    Eigen::Map<const RowMajorMatrix> w1() const { return {params_.data(), Eigen::Index(hidden_), Eigen::Index(in_)}; }
    Eigen::Map<const Eigen::VectorXd> b1() const { return {params_.data() + hidden_ * in_, Eigen::Index(hidden_)}; }
    Eigen::Map<const RowMajorMatrix> w2() const {
        return {params_.data() + hidden_ * in_ + hidden_, Eigen::Index(out_), Eigen::Index(hidden_)};
    }
    Eigen::Map<const Eigen::VectorXd> b2() const {
        return {params_.data() + hidden_ * in_ + hidden_ + out_ * hidden_, Eigen::Index(out_)};
    }

    const Eigen::VectorXd& input_centre() const noexcept { return centre_; }
    const Eigen::VectorXd& input_gain() const noexcept { return gain_; }
    void set_input_map(Eigen::VectorXd centre, Eigen::VectorXd gain);

    /// Fits the input map to the column ranges of `inputs` (rows are samples).
    /// Constant columns get gain 0.
    void fit_input_map(const Eigen::MatrixXd& inputs);

    /// Output class names, index-aligned with the softmax outputs.
    const std::vector<std::string>& classes() const noexcept { return classes_; }
    void set_classes(std::vector<std::string> classes);

    friend bool operator==(const MlpModel& a, const MlpModel& b);

private:
    std::size_t in_ = 0;
    std::size_t hidden_ = 0;
    std::size_t out_ = 0;
    Eigen::VectorXd params_;
    Eigen::VectorXd centre_;
    Eigen::VectorXd gain_;
    std::vector<std::string> classes_;
};

/// Weights ~ N(0, 1) / sqrt(fan-in), drawn deterministically from `seed`;
/// biases zero. Throws Error(BadDimensions).
MlpModel mlp_init(std::size_t in_dim, std::size_t hidden, std::size_t out_dim, std::uint64_t seed);

/// Samples as rows, integer class targets.
struct LabeledBatch {
    Eigen::MatrixXd inputs;
    std::vector<int> targets;

    std::size_t size() const noexcept { return targets.size(); }
};

/// Softmax posterior for one input. Throws Error(DimensionMismatch).
std::vector<double> forward(const MlpModel& model, std::span<const double> x);

/// Mean cross-entropy over the batch and its gradient (flat parameter order).
/// Throws Error(DimensionMismatch) or Error(EmptyTrainingSet).
std::pair<double, Eigen::VectorXd> loss_and_grad(const MlpModel& model, const LabeledBatch& batch);

/// Same objective evaluated at `params` instead of the model's own weights;
/// `grad` may be null when only the loss is needed.
double evaluate_loss(const MlpModel& shape, const Eigen::VectorXd& params, const LabeledBatch& batch,
                     Eigen::VectorXd* grad);

struct RankedClass {
    int index = 0;
    std::string label;
    double posterior = 0.0;
};

/// All classes by descending posterior; equal posteriors by ascending index.
std::vector<RankedClass> predict_ranked(const MlpModel& model, std::span<const double> x);

}  // namespace touchsig

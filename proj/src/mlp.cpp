#include "touchsig/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "touchsig/error.hpp"

namespace touchsig {

MlpModel::MlpModel(std::size_t in_dim, std::size_t hidden, std::size_t out_dim)
    : in_(in_dim), hidden_(hidden), out_(out_dim) {
    if (in_dim == 0 || hidden == 0 || out_dim == 0) {
        throw Error(ErrorCode::BadDimensions, "network dimensions must all be >= 1");
    }
    params_ = Eigen::VectorXd::Zero(Eigen::Index(hidden * in_dim + hidden + out_dim * hidden + out_dim));
    centre_ = Eigen::VectorXd::Zero(Eigen::Index(in_dim));
    gain_ = Eigen::VectorXd::Ones(Eigen::Index(in_dim));
    classes_.reserve(out_dim);
    for (std::size_t i = 0; i < out_dim; ++i) classes_.push_back(std::to_string(i));
}

void MlpModel::set_params(Eigen::VectorXd params) {
    if (static_cast<std::size_t>(params.size()) != param_count()) {
        throw Error(ErrorCode::DimensionMismatch, "parameter vector has the wrong length");
    }
    if (!params.allFinite()) throw Error(ErrorCode::NonFiniteLoss, "non-finite weights");
    params_ = std::move(params);
}

void MlpModel::set_input_map(Eigen::VectorXd centre, Eigen::VectorXd gain) {
    if (static_cast<std::size_t>(centre.size()) != in_ || static_cast<std::size_t>(gain.size()) != in_) {
        throw Error(ErrorCode::DimensionMismatch, "input map has the wrong length");
    }
    centre_ = std::move(centre);
    gain_ = std::move(gain);
}

void MlpModel::fit_input_map(const Eigen::MatrixXd& inputs) {
    if (static_cast<std::size_t>(inputs.cols()) != in_ || inputs.rows() == 0) {
        throw Error(ErrorCode::DimensionMismatch, "cannot fit the input map to this matrix");
    }
    const Eigen::RowVectorXd lo = inputs.colwise().minCoeff();
    const Eigen::RowVectorXd hi = inputs.colwise().maxCoeff();
    Eigen::VectorXd centre(static_cast<Eigen::Index>(in_)), gain(static_cast<Eigen::Index>(in_));
    for (Eigen::Index j = 0; j < Eigen::Index(in_); ++j) {
        centre[j] = 0.5 * (lo[j] + hi[j]);
        gain[j] = hi[j] > lo[j] ? 2.0 / (hi[j] - lo[j]) : 0.0;
    }
    set_input_map(std::move(centre), std::move(gain));
}

void MlpModel::set_classes(std::vector<std::string> classes) {
    if (classes.size() != out_) throw Error(ErrorCode::DimensionMismatch, "class list does not match output width");
    classes_ = std::move(classes);
}

bool operator==(const MlpModel& a, const MlpModel& b) {
    return a.in_ == b.in_ && a.hidden_ == b.hidden_ && a.out_ == b.out_ && a.params_ == b.params_ &&
           a.centre_ == b.centre_ && a.gain_ == b.gain_ && a.classes_ == b.classes_;
}

MlpModel mlp_init(std::size_t in_dim, std::size_t hidden, std::size_t out_dim, std::uint64_t seed) {
    MlpModel model(in_dim, hidden, out_dim);
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    Eigen::VectorXd p = model.params();
    const double s1 = 1.0 / std::sqrt(static_cast<double>(in_dim));
    const double s2 = 1.0 / std::sqrt(static_cast<double>(hidden));
    const auto n_w1 = Eigen::Index(hidden * in_dim);
    const auto off_w2 = n_w1 + Eigen::Index(hidden);
    const auto n_w2 = Eigen::Index(out_dim * hidden);
    for (Eigen::Index i = 0; i < n_w1; ++i) p[i] = gauss(rng) * s1;
    for (Eigen::Index i = 0; i < n_w2; ++i) p[off_w2 + i] = gauss(rng) * s2;
    model.set_params(std::move(p));
    return model;
}

namespace {

void check_input(const MlpModel& model, std::size_t n) {
    if (n != model.in_dim()) {
        throw Error(ErrorCode::DimensionMismatch,
                    "input has " + std::to_string(n) + " features, network expects " + std::to_string(model.in_dim()));
    }
}

}  // namespace

double evaluate_loss(const MlpModel& shape, const Eigen::VectorXd& params, const LabeledBatch& batch,
                     Eigen::VectorXd* grad) {
    if (batch.size() == 0) throw Error(ErrorCode::EmptyTrainingSet, "empty batch");
    if (static_cast<std::size_t>(batch.inputs.rows()) != batch.size()) {
        throw Error(ErrorCode::DimensionMismatch, "batch inputs and targets differ in count");
    }
    check_input(shape, static_cast<std::size_t>(batch.inputs.cols()));
    if (static_cast<std::size_t>(params.size()) != shape.param_count()) {
        throw Error(ErrorCode::DimensionMismatch, "parameter vector has the wrong length");
    }

    const auto D = Eigen::Index(shape.in_dim());
    const auto H = Eigen::Index(shape.hidden());
    const auto C = Eigen::Index(shape.out_dim());
    const auto N = Eigen::Index(batch.size());
    Eigen::Map<const RowMajorMatrix> w1(params.data(), H, D);
    Eigen::Map<const Eigen::VectorXd> b1(params.data() + H * D, H);
    Eigen::Map<const RowMajorMatrix> w2(params.data() + H * D + H, C, H);
    Eigen::Map<const Eigen::VectorXd> b2(params.data() + H * D + H + C * H, C);

    const Eigen::MatrixXd x =
        (batch.inputs.rowwise() - shape.input_centre().transpose()).array().rowwise() *
        shape.input_gain().transpose().array();
    const Eigen::MatrixXd hidden = ((x * w1.transpose()).rowwise() + b1.transpose()).array().tanh().matrix();
    Eigen::MatrixXd logits = (hidden * w2.transpose()).rowwise() + b2.transpose();

    double loss = 0.0;
    for (Eigen::Index n = 0; n < N; ++n) {
        const int t = batch.targets[static_cast<std::size_t>(n)];
        if (t < 0 || t >= C) throw Error(ErrorCode::DimensionMismatch, "target class out of range");
        const double top = logits.row(n).maxCoeff();
        logits.row(n).array() -= top;
        const double log_z = std::log(logits.row(n).array().exp().sum());
        loss -= logits(n, t) - log_z;
        // Row becomes the posterior.
        logits.row(n) = (logits.row(n).array() - log_z).exp().matrix();
    }
    loss /= static_cast<double>(N);

    if (grad) {
        Eigen::MatrixXd dz = logits;
        for (Eigen::Index n = 0; n < N; ++n) dz(n, batch.targets[static_cast<std::size_t>(n)]) -= 1.0;
        dz /= static_cast<double>(N);
        const Eigen::MatrixXd dh = ((dz * w2).array() * (1.0 - hidden.array().square())).matrix();

        grad->resize(params.size());
        Eigen::Map<RowMajorMatrix> g_w1(grad->data(), H, D);
        Eigen::Map<Eigen::VectorXd> g_b1(grad->data() + H * D, H);
        Eigen::Map<RowMajorMatrix> g_w2(grad->data() + H * D + H, C, H);
        Eigen::Map<Eigen::VectorXd> g_b2(grad->data() + H * D + H + C * H, C);
        g_w1.noalias() = dh.transpose() * x;
        g_b1 = dh.colwise().sum().transpose();
        g_w2.noalias() = dz.transpose() * hidden;
        g_b2 = dz.colwise().sum().transpose();
    }
    return loss;
}

std::pair<double, Eigen::VectorXd> loss_and_grad(const MlpModel& model, const LabeledBatch& batch) {
    Eigen::VectorXd grad;
    const double loss = evaluate_loss(model, model.params(), batch, &grad);
    return {loss, std::move(grad)};
}

std::vector<double> forward(const MlpModel& model, std::span<const double> x) {
    check_input(model, x.size());
    const Eigen::Map<const Eigen::VectorXd> in(x.data(), Eigen::Index(x.size()));
    const Eigen::VectorXd scaled = ((in - model.input_centre()).array() * model.input_gain().array()).matrix();
    const Eigen::VectorXd hidden = (model.w1() * scaled + model.b1()).array().tanh().matrix();
    Eigen::VectorXd logits = model.w2() * hidden + model.b2();
    logits.array() -= logits.maxCoeff();
    logits = logits.array().exp().matrix();
    logits /= logits.sum();
    return {logits.data(), logits.data() + logits.size()};
}

std::vector<RankedClass> predict_ranked(const MlpModel& model, std::span<const double> x) {
    const auto post = forward(model, x);
    std::vector<RankedClass> ranked;
    ranked.reserve(post.size());
    for (std::size_t i = 0; i < post.size(); ++i) ranked.push_back({static_cast<int>(i), model.classes()[i], post[i]});
    std::stable_sort(ranked.begin(), ranked.end(),
                     [](const RankedClass& a, const RankedClass& b) { return a.posterior > b.posterior; });
    return ranked;
}

}  // namespace touchsig

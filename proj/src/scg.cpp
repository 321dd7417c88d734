#include "touchsig/scg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <random>
#include <set>

#include "touchsig/error.hpp"

namespace touchsig {

namespace {

constexpr double kLambdaMax = 1e100;

void require_finite(double loss, const Eigen::VectorXd& grad) {
    if (!std::isfinite(loss) || !grad.allFinite()) throw Error(ErrorCode::NonFiniteLoss, "objective diverged");
}

}  // namespace

void ScgConfig::validate() const {
    if (!(sigma0 > 0.0) || !(lambda0 > 0.0)) throw Error(ErrorCode::InvalidSpec, "sigma0 and lambda0 must be > 0");
    if (max_epochs < 0 || early_stop_patience < 1) throw Error(ErrorCode::InvalidSpec, "bad epoch limits");
}

ScgResult scg_train(const MlpModel& init, const LabeledBatch& train, const LabeledBatch* validation,
                    const ScgConfig& config) {
    config.validate();
    if (validation && validation->size() == 0) validation = nullptr;

    const auto P = static_cast<long long>(init.param_count());
    Eigen::VectorXd w = init.params();
    Eigen::VectorXd grad;
    double loss = evaluate_loss(init, w, train, &grad);
    require_finite(loss, grad);
    const auto val_loss_at = [&](const Eigen::VectorXd& params) {
        return validation ? evaluate_loss(init, params, *validation, nullptr)
                          : std::numeric_limits<double>::quiet_NaN();
    };

    ScgResult out;
    out.initial_train_loss = loss;
    out.history.push_back({0, loss, val_loss_at(w), true, config.lambda0});

    Eigen::VectorXd best_w = w;
    double best_val = out.history.back().val_loss;
    double best_train = loss;
    int best_epoch = 0;
    int stale = 0;

    Eigen::VectorXd r = -grad;
    Eigen::VectorXd p = r;
    Eigen::VectorXd trial_grad;
    bool success = true;
    double lambda = config.lambda0;
    double lambda_bar = 0.0;
    double delta = 0.0;
    long long accepted_steps = 0;
    out.stop_reason = "max_epochs";

    for (int epoch = 1; epoch <= config.max_epochs; ++epoch) {
        const double p2 = p.squaredNorm();
        if (r.norm() < config.min_grad || p2 == 0.0) {
            out.stop_reason = "min_grad";
            break;
        }
        if (success) {
            // Curvature along p from a gradient difference.
            const double sigma = config.sigma0 / std::sqrt(p2);
            evaluate_loss(init, w + sigma * p, train, &trial_grad);
            delta = p.dot((trial_grad - grad) / sigma);
        }
        delta += (lambda - lambda_bar) * p2;
        if (delta <= 0.0) {
            // Make the Hessian estimate positive definite.
            lambda_bar = 2.0 * (lambda - delta / p2);
            delta = -delta + lambda * p2;
            lambda = lambda_bar;
        }
        const double mu = p.dot(r);
        const double alpha = mu / delta;
        const Eigen::VectorXd w_trial = w + alpha * p;
        const double trial_loss = evaluate_loss(init, w_trial, train, nullptr);
        double comparison = 2.0 * delta * (loss - trial_loss) / (mu * mu);
        if (!std::isfinite(comparison)) comparison = -1.0;

        const bool accepted = comparison > 0.0;
        if (accepted) {
            w = w_trial;
            loss = trial_loss;
            evaluate_loss(init, w, train, &grad);
            require_finite(loss, grad);
            const Eigen::VectorXd r_new = -grad;
            lambda_bar = 0.0;
            success = true;
            ++accepted_steps;
            if (accepted_steps % P == 0) {
                p = r_new;
            } else {
                const double beta = (r_new.squaredNorm() - r_new.dot(r)) / mu;
                p = r_new + beta * p;
            }
            r = r_new;
            if (comparison >= 0.75) lambda *= 0.25;
        } else {
            lambda_bar = lambda;
            success = false;
        }
        if (comparison < 0.25) lambda += delta * (1.0 - comparison) / p2;

        const double val = accepted ? val_loss_at(w) : out.history.back().val_loss;
        out.history.push_back({epoch, loss, val, accepted, lambda});

        if (accepted) {
            const bool improved = validation ? val < best_val : loss < best_train;
            if (improved) {
                best_w = w;
                best_val = val;
                best_train = loss;
                best_epoch = epoch;
                stale = 0;
            } else if (++stale >= config.early_stop_patience) {
                out.stop_reason = "validation";
                break;
            }
        }
        if (!std::isfinite(lambda) || lambda > kLambdaMax) {
            out.stop_reason = "lambda_max";
            break;
        }
    }

    out.model = init;
    out.model.set_params(std::move(best_w));
    out.best_epoch = best_epoch;
    out.best_train_loss = best_train;
    out.best_val_loss = best_val;
    return out;
}

void SplitSpec::validate() const {
    if (train < 0.0 || validation < 0.0 || test < 0.0 || std::abs(train + validation + test - 1.0) > 1e-9) {
        throw Error(ErrorCode::InvalidSpec, "split fractions must be non-negative and sum to 1");
    }
}

SplitIndices stratified_split(std::span<const std::string> labels, const SplitSpec& spec) {
    spec.validate();
    std::map<std::string, std::vector<std::size_t>> by_class;
    for (std::size_t i = 0; i < labels.size(); ++i) by_class[labels[i]].push_back(i);

    std::mt19937_64 rng(spec.seed);
    SplitIndices out;
    for (auto& [label, idx] : by_class) {
        std::shuffle(idx.begin(), idx.end(), rng);
        const auto n = idx.size();
        const auto n_train = std::min(n, static_cast<std::size_t>(std::llround(spec.train * double(n))));
        const auto n_val = std::min(n - n_train, static_cast<std::size_t>(std::llround(spec.validation * double(n))));
        out.train.insert(out.train.end(), idx.begin(), idx.begin() + std::ptrdiff_t(n_train));
        out.validation.insert(out.validation.end(), idx.begin() + std::ptrdiff_t(n_train),
                              idx.begin() + std::ptrdiff_t(n_train + n_val));
        out.test.insert(out.test.end(), idx.begin() + std::ptrdiff_t(n_train + n_val), idx.end());
    }
    std::sort(out.train.begin(), out.train.end());
    std::sort(out.validation.begin(), out.validation.end());
    std::sort(out.test.begin(), out.test.end());
    return out;
}

LabeledBatch make_batch(const FeatureMatrix& matrix, std::span<const std::size_t> indices,
                        std::span<const std::string> classes) {
    LabeledBatch batch;
    batch.inputs.resize(Eigen::Index(indices.size()), Eigen::Index(matrix.dim()));
    batch.targets.reserve(indices.size());
    for (std::size_t r = 0; r < indices.size(); ++r) {
        const auto& row = matrix.rows.at(indices[r]);
        for (std::size_t c = 0; c < row.size(); ++c) batch.inputs(Eigen::Index(r), Eigen::Index(c)) = row[c];
        const auto& label = matrix.labels[indices[r]];
        const auto it = std::find(classes.begin(), classes.end(), label);
        if (it == classes.end()) throw Error(ErrorCode::DegenerateSplit, "label " + label + " not in class list");
        batch.targets.push_back(static_cast<int>(it - classes.begin()));
    }
    return batch;
}

AnnTraining train_ann_on(const FeatureMatrix& matrix, std::span<const std::size_t> train_rows,
                         std::span<const std::size_t> validation_rows, std::size_t hidden, const ScgConfig& config) {
    const std::set<std::string> all(matrix.labels.begin(), matrix.labels.end());
    const std::vector<std::string> classes(all.begin(), all.end());
    if (classes.size() < 2) throw Error(ErrorCode::DegenerateSplit, "need at least two classes");

    std::set<std::string> seen;
    for (auto i : train_rows) seen.insert(matrix.labels.at(i));
    for (const auto& c : classes) {
        if (!seen.count(c)) throw Error(ErrorCode::DegenerateSplit, "class " + c + " has no training rows");
    }

    const auto train = make_batch(matrix, train_rows, classes);
    const auto val = make_batch(matrix, validation_rows, classes);

    MlpModel init = mlp_init(matrix.dim(), hidden, classes.size(), config.seed);
    init.set_classes(classes);
    init.fit_input_map(train.inputs);

    AnnTraining out;
    out.result = scg_train(init, train, val.size() > 0 ? &val : nullptr, config);
    out.model = out.result.model;
    out.split.train.assign(train_rows.begin(), train_rows.end());
    out.split.validation.assign(validation_rows.begin(), validation_rows.end());
    return out;
}

AnnTraining train_ann(const FeatureMatrix& matrix, std::size_t hidden, const ScgConfig& config,
                      const SplitSpec& split) {
    const auto idx = stratified_split(matrix.labels, split);
    auto out = train_ann_on(matrix, idx.train, idx.validation, hidden, config);
    out.split = idx;
    return out;
}

}  // namespace touchsig

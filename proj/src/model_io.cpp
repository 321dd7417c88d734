#include "touchsig/model_io.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "touchsig/error.hpp"

namespace touchsig {

using nlohmann::json;

namespace {

constexpr const char* kFormat = "touchsig-model";
constexpr int kVersion = 1;

bool all_action_labels(const std::vector<std::string>& labels) {
    return std::all_of(labels.begin(), labels.end(), [](const std::string& l) {
        try {
            return Label::parse(l).is_action();
        } catch (const Error&) {
            return false;
        }
    });
}

std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

json knn_to_json(const KnnModel& m, const char* role) {
    json vectors = json::array();
    json labels = json::array();
    for (std::size_t i = 0; i < m.size(); ++i) {
        const auto v = m.vector(i);
        vectors.push_back(std::vector<double>(v.begin(), v.end()));
        labels.push_back(m.label(i));
    }
    return {{"role", role},       {"metric", to_string(m.metric())}, {"k", m.k()},
            {"dim", m.dim()},     {"labels", labels},                {"vectors", vectors}};
}

KnnModel knn_from_json(const json& j) {
    const auto vectors = j.at("vectors").get<std::vector<std::vector<double>>>();
    const auto labels = j.at("labels").get<std::vector<std::string>>();
    auto m = knn_fit(vectors, labels, j.at("k").get<int>(), parse_metric(j.at("metric").get<std::string>()));
    if (m.dim() != j.at("dim").get<std::size_t>()) throw Error(ErrorCode::BadModelFile, "stored dim disagrees");
    return m;
}

json vec_to_json(const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

Eigen::VectorXd vec_from_json(const json& j) {
    const auto v = j.get<std::vector<double>>();
    return Eigen::Map<const Eigen::VectorXd>(v.data(), Eigen::Index(v.size()));
}

}  // namespace

std::string StoredModel::kind() const { return ann ? "ann" : "knn"; }

StoredModel fit_knn_model(const FeatureMatrix& matrix, const TwoStageConfig& config) {
    StoredModel out;
    out.phase = matrix.phase;
    out.layout_hash = layout_hash(matrix.layout);
    out.dim = matrix.dim();
    if (!matrix.labels.empty() && all_action_labels(matrix.labels)) {
        out.two_stage = two_stage_fit(matrix.rows, matrix.labels, config);
    } else {
        out.flat = knn_fit(matrix.rows, matrix.labels, config.stage1_k, config.stage1_metric);
    }
    return out;
}

StoredModel fit_ann_model(const FeatureMatrix& matrix, std::size_t hidden, const ScgConfig& config,
                          const SplitSpec& split) {
    auto trained = train_ann(matrix, hidden, config, split);
    StoredModel out;
    out.phase = matrix.phase;
    out.layout_hash = layout_hash(matrix.layout);
    out.dim = matrix.dim();
    out.ann = std::move(trained.model);
    out.ann_hidden = hidden;
    out.scg = config;
    out.split = split;
    out.best_epoch = trained.result.best_epoch;
    out.stop_reason = trained.result.stop_reason;
    return out;
}

std::string encode_model(const StoredModel& model) {
    json j{{"format", kFormat},
           {"version", kVersion},
           {"kind", model.kind()},
           {"phase", to_string(model.phase)},
           {"layout_hash", hex64(model.layout_hash)},
           {"dim", model.dim}};
    if (model.ann) {
        const auto& m = *model.ann;
        j["layers"] = json::array({json{{"in", m.in_dim()}, {"out", m.hidden()}, {"activation", "tanh"}},
                                   json{{"in", m.hidden()}, {"out", m.out_dim()}, {"activation", "softmax"}}});
        j["loss"] = "cross-entropy";
        j["weight_order"] = "W1 row-major, b1, W2 row-major, b2";
        j["weights"] = vec_to_json(m.params());
        j["input_map"] = {{"centre", vec_to_json(m.input_centre())}, {"gain", vec_to_json(m.input_gain())}};
        j["classes"] = m.classes();
        j["training"] = {{"optimizer", "scg"},
                         {"sigma0", model.scg.sigma0},
                         {"lambda0", model.scg.lambda0},
                         {"max_epochs", model.scg.max_epochs},
                         {"early_stop_patience", model.scg.early_stop_patience},
                         {"min_grad", model.scg.min_grad},
                         {"seed", model.scg.seed},
                         {"split",
                          {{"train", model.split.train},
                           {"validation", model.split.validation},
                           {"test", model.split.test},
                           {"seed", model.split.seed}}},
                         {"best_epoch", model.best_epoch},
                         {"stop_reason", model.stop_reason}};
    } else if (model.two_stage) {
        j["scheme"] = "two-stage";
        json stages = json::array({knn_to_json(model.two_stage->stage1, "stage1")});
        if (model.two_stage->stage2) stages.push_back(knn_to_json(*model.two_stage->stage2, "stage2"));
        j["stages"] = std::move(stages);
    } else if (model.flat) {
        j["scheme"] = "flat";
        j["stages"] = json::array({knn_to_json(*model.flat, "flat")});
    } else {
        throw Error(ErrorCode::BadModelFile, "model holds no classifier");
    }
    return j.dump() + "\n";
}

StoredModel decode_model(const std::string& text) {
    try {
        const auto j = json::parse(text);
        if (j.at("format").get<std::string>() != kFormat) throw Error(ErrorCode::BadModelFile, "not a model file");
        if (j.at("version").get<int>() != kVersion) throw Error(ErrorCode::BadModelFile, "unsupported version");
        StoredModel out;
        out.phase = parse_phase(j.at("phase").get<std::string>());
        out.layout_hash = std::stoull(j.at("layout_hash").get<std::string>(), nullptr, 16);
        out.dim = j.at("dim").get<std::size_t>();
        const auto kind = j.at("kind").get<std::string>();
        if (kind == "ann") {
            const auto& layers = j.at("layers");
            if (layers.size() != 2 || layers[0].at("activation") != "tanh" || layers[1].at("activation") != "softmax") {
                throw Error(ErrorCode::BadModelFile, "unsupported layer stack");
            }
            MlpModel m(layers[0].at("in").get<std::size_t>(), layers[0].at("out").get<std::size_t>(),
                       layers[1].at("out").get<std::size_t>());
            auto weights = vec_from_json(j.at("weights"));
            if (std::size_t(weights.size()) != m.param_count()) throw Error(ErrorCode::BadModelFile, "weight count");
            m.set_params(std::move(weights));
            m.set_input_map(vec_from_json(j.at("input_map").at("centre")), vec_from_json(j.at("input_map").at("gain")));
            m.set_classes(j.at("classes").get<std::vector<std::string>>());
            const auto& t = j.at("training");
            out.scg.sigma0 = t.at("sigma0").get<double>();
            out.scg.lambda0 = t.at("lambda0").get<double>();
            out.scg.max_epochs = t.at("max_epochs").get<int>();
            out.scg.early_stop_patience = t.at("early_stop_patience").get<int>();
            out.scg.min_grad = t.at("min_grad").get<double>();
            out.scg.seed = t.at("seed").get<std::uint64_t>();
            const auto& s = t.at("split");
            out.split = {s.at("train").get<double>(), s.at("validation").get<double>(), s.at("test").get<double>(),
                         s.at("seed").get<std::uint64_t>()};
            out.best_epoch = t.at("best_epoch").get<int>();
            out.stop_reason = t.at("stop_reason").get<std::string>();
            out.ann_hidden = m.hidden();
            if (m.in_dim() != out.dim) throw Error(ErrorCode::BadModelFile, "input width disagrees with dim");
            out.ann = std::move(m);
        } else if (kind == "knn") {
            const auto scheme = j.at("scheme").get<std::string>();
            const auto& stages = j.at("stages");
            if (scheme == "two-stage" && (stages.size() == 1 || stages.size() == 2)) {
                TwoStageModel ts;
                ts.stage1 = knn_from_json(stages[0]);
                if (stages.size() == 2) ts.stage2 = knn_from_json(stages[1]);
                out.two_stage = std::move(ts);
            } else if (scheme == "flat" && stages.size() == 1) {
                out.flat = knn_from_json(stages[0]);
            } else {
                throw Error(ErrorCode::BadModelFile, "unknown k-NN scheme " + scheme);
            }
        } else {
            throw Error(ErrorCode::BadModelFile, "unknown model kind " + kind);
        }
        return out;
    } catch (const json::exception& e) {
        throw Error(ErrorCode::BadModelFile, e.what());
    } catch (const std::invalid_argument& e) {
        throw Error(ErrorCode::BadModelFile, e.what());
    } catch (const std::out_of_range& e) {
        throw Error(ErrorCode::BadModelFile, e.what());
    } catch (const Error& e) {
        if (e.code() == ErrorCode::BadModelFile) throw;
        throw Error(ErrorCode::BadModelFile, e.what());
    }
}

void save_model(const std::filesystem::path& path, const StoredModel& model) {
    const auto text = encode_model(model);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::StorageFailure, "cannot write " + path.string());
    out << text;
    out.flush();
    if (!out) throw Error(ErrorCode::StorageFailure, "write failed for " + path.string());
}

StoredModel load_model(const std::filesystem::path& path) {
    std::error_code ec;
    if (!std::filesystem::is_regular_file(path, ec)) throw Error(ErrorCode::ModelNotFound, "model not found: " + path.string());
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::ModelNotFound, "model not found: " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return decode_model(buf.str());
}

std::vector<std::vector<std::string>> predict_rows(const StoredModel& model, const FeatureMatrix& matrix) {
    if (matrix.phase != model.phase || matrix.dim() != model.dim || layout_hash(matrix.layout) != model.layout_hash) {
        throw Error(ErrorCode::DimensionMismatch, "matrix layout does not match the model's");
    }
    std::vector<std::vector<std::string>> out;
    out.reserve(matrix.size());
    for (const auto& row : matrix.rows) {
        if (model.ann) {
            std::vector<std::string> ranked;
            for (auto& r : predict_ranked(*model.ann, row)) ranked.push_back(std::move(r.label));
            out.push_back(std::move(ranked));
        } else if (model.two_stage) {
            out.push_back({Label(two_stage_predict(*model.two_stage, row)).str()});
        } else {
            out.push_back({knn_predict(*model.flat, row)});
        }
    }
    return out;
}

}  // namespace touchsig

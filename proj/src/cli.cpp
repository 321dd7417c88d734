#include "touchsig/cli.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <csignal>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "touchsig/error.hpp"
#include "touchsig/eval.hpp"
#include "touchsig/matrix.hpp"
#include "touchsig/model_io.hpp"
#include "touchsig/report.hpp"
#include "touchsig/server.hpp"
#include "touchsig/session.hpp"
#include "touchsig/store.hpp"
#include "touchsig/synth.hpp"

namespace touchsig {

namespace {

std::atomic<bool> g_interrupted{false};

extern "C" void on_signal(int) { g_interrupted.store(true); }

std::vector<std::string> read_lines(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::StorageFailure, "cannot read " + path);
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        lines.push_back(std::move(line));
    }
    return lines;
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::StorageFailure, "cannot write " + path);
    out << text;
    out.flush();
    if (!out) throw Error(ErrorCode::StorageFailure, "write failed for " + path);
}

std::string counters_text(const IngestCounters& c) {
    std::ostringstream s;
    s << "traces=" << c.traces << " malformed=" << c.malformed_records << " out_of_order=" << c.out_of_order
      << " empty_segments=" << c.empty_segments << " no_open_segment=" << c.no_open_segment
      << " unbalanced_markers=" << c.unbalanced_markers << " ragged_groups=" << c.ragged_groups
      << " disconnect_mid_segment=" << c.disconnect_mid_segment;
    return s.str();
}

bool action_labels(const std::vector<std::string>& labels) {
    return !labels.empty() && std::all_of(labels.begin(), labels.end(), [](const std::string& l) {
        return l.rfind("action:", 0) == 0;
    });
}

struct ServeOpts {
    std::string host = "127.0.0.1";
    int port = 8765;
    std::string out;
    std::string raw_log;
    std::string port_file;
    std::size_t max_sessions = 0;
};

struct SynthOpts {
    std::string classes = "actions";
    int per_class = 30;
    double separation = 16.0;
    std::uint64_t seed = 1;
    std::string profile = "nexus5";
    std::string out;
};

struct ExtractOpts {
    std::string phase = "1";
    std::string in;
    std::string out;
};

struct TrainOpts {
    std::string model = "knn";
    std::string in;
    std::string out;
    std::size_t hidden = 100;
    std::uint64_t seed = 1;
    int k = 1;
    std::string metric = "euclidean";
    int max_epochs = 1000;
};

struct PredictOpts {
    std::string model;
    std::string in;
    std::string out;
};

struct EvalOpts {
    std::string model = "knn";
    std::string model_file;
    std::string protocol;
    std::size_t folds = 10;
    std::uint64_t seed = 1;
    std::string in;
    std::string report;
    std::size_t hidden = 100;
    int max_epochs = 1000;
    std::string profile = "nexus5";
};

struct ReportOpts {
    std::string in;
    std::string out;
    std::string profile;
};

struct ReplayOpts {
    std::string host = "127.0.0.1";
    int port = 8765;
    std::string in;
};

struct AssembleOpts {
    std::string in;
    std::string out;
};

int cmd_serve(const ServeOpts& o, std::ostream& out, std::ostream& err) {
    ServerConfig cfg;
    cfg.host = o.host;
    cfg.port = static_cast<std::uint16_t>(o.port);
    cfg.out = o.out;
    cfg.raw_log = o.raw_log;

    g_interrupted.store(false);
    auto prev_int = std::signal(SIGINT, on_signal);
    auto prev_term = std::signal(SIGTERM, on_signal);

    auto server = serve(cfg);
    out << "listening on " << o.host << ':' << server->port() << std::endl;
    if (!o.port_file.empty()) write_text(o.port_file, std::to_string(server->port()) + "\n");
    while (!g_interrupted.load()) {
        if (o.max_sessions > 0 && server->wait_for_sessions(o.max_sessions, std::chrono::milliseconds(100))) break;
        if (o.max_sessions == 0) std::this_thread::sleep_for(std::chrono::milliseconds(100));
    }
    server->stop();
    std::signal(SIGINT, prev_int);
    std::signal(SIGTERM, prev_term);
    out << "sessions=" << server->sessions_closed() << " persisted=" << server->traces_persisted() << '\n';
    err << counters_text(server->counters()) << '\n';
    return 0;
}

int cmd_replay(const ReplayOpts& o, std::ostream& out) {
    const auto lines = read_lines(o.in);
    send_session(o.host, static_cast<std::uint16_t>(o.port), lines);
    out << "sent " << lines.size() << " records to " << o.host << ':' << o.port << '\n';
    return 0;
}

int cmd_assemble(const AssembleOpts& o, std::ostream& out, std::ostream& err) {
    const auto lines = read_lines(o.in);
    IngestCounters counters;
    const auto traces = assemble_session(lines, &counters);
    write_dataset(o.out, traces);
    out << "assembled " << traces.size() << " traces into " << o.out << '\n';
    err << counters_text(counters) << '\n';
    return 0;
}

int cmd_synth(const SynthOpts& o, std::ostream& out) {
    auto spec = GenSpec::for_family(o.classes == "digits" ? ClassFamily::Digits : ClassFamily::Actions);
    spec.per_class = o.per_class;
    spec.separation = o.separation;
    spec.seed = o.seed;
    spec.profile = DeviceProfile::by_name(o.profile);
    const auto traces = gen_dataset(spec);
    write_dataset(o.out, traces);
    out << "synth: " << traces.size() << " traces (" << o.classes << ", separation " << o.separation << ", profile "
        << o.profile << ", seed " << o.seed << ") -> " << o.out << '\n';
    return 0;
}

int cmd_extract(const ExtractOpts& o, std::ostream& out) {
    const auto phase = parse_phase(o.phase);
    const auto traces = load_dataset(o.in);
    const auto matrix = build_matrix(traces, phase);
    write_matrix(o.out, matrix);
    out << "extract: " << matrix.size() << " rows x " << matrix.dim() << " features (phase " << o.phase << ") -> "
        << o.out << '\n';
    return 0;
}

int cmd_train(const TrainOpts& o, std::ostream& out) {
    const auto matrix = read_matrix(o.in);
    StoredModel model;
    if (o.model == "knn") {
        TwoStageConfig cfg;
        cfg.stage1_k = o.k;
        if (!action_labels(matrix.labels)) cfg.stage1_metric = parse_metric(o.metric);
        model = fit_knn_model(matrix, cfg);
        out << "train: k-NN (" << (model.two_stage ? "two-stage" : "flat") << ") over " << matrix.size() << " rows";
    } else {
        ScgConfig cfg;
        cfg.seed = o.seed;
        cfg.max_epochs = o.max_epochs;
        SplitSpec split;
        split.seed = o.seed;
        model = fit_ann_model(matrix, o.hidden, cfg, split);
        out << "train: ANN hidden " << o.hidden << ", seed " << o.seed << ", best epoch " << model.best_epoch
            << " (" << model.stop_reason << ")";
    }
    save_model(o.out, model);
    out << " -> " << o.out << '\n';
    return 0;
}

int cmd_predict(const PredictOpts& o, std::ostream& out) {
    const auto model = load_model(o.model);
    const auto matrix = read_matrix(o.in);
    const auto ranked = predict_rows(model, matrix);
    std::ostringstream text;
    for (std::size_t i = 0; i < ranked.size(); ++i) {
        nlohmann::json j{{"index", i}, {"label", matrix.labels[i]}, {"predicted", ranked[i].front()}};
        if (ranked[i].size() > 1) j["ranking"] = ranked[i];
        text << j.dump() << '\n';
    }
    if (o.out.empty()) {
        out << text.str();
    } else {
        write_text(o.out, text.str());
    }
    return 0;
}

EvalReport eval_stored(const EvalOpts& o, const FeatureMatrix& matrix) {
    const auto model = load_model(o.model_file);
    const auto ranked = predict_rows(model, matrix);
    std::vector<std::string> all = matrix.labels;
    for (const auto& r : ranked) all.push_back(r.front());
    EvalReport report;
    report.model = model.kind();
    report.protocol = "stored model on " + std::to_string(matrix.size()) + " rows";
    report.seed = model.ann ? model.scg.seed : 0;
    report.confusion = ConfusionMatrix(class_order(all));
    for (std::size_t i = 0; i < ranked.size(); ++i) report.confusion.add(matrix.labels[i], ranked[i].front());
    if (model.ann) report.guess = guess_curve(*model.ann, matrix);
    return report;
}

EvalReport eval_split(const EvalOpts& o, const FeatureMatrix& matrix) {
    ScgConfig cfg;
    cfg.seed = o.seed;
    cfg.max_epochs = o.max_epochs;
    SplitSpec spec;
    spec.seed = o.seed;
    EvalReport report;
    report.model = o.model;
    report.protocol = "70/15/15 split";
    report.seed = o.seed;
    report.confusion = ConfusionMatrix(class_order(matrix.labels));
    const auto split = stratified_split(matrix.labels, spec);
    const auto test = matrix.subset(split.test);
    if (o.model == "ann") {
        const auto trained = train_ann_on(matrix, split.train, split.validation, o.hidden, cfg);
        for (std::size_t i = 0; i < test.size(); ++i) {
            report.confusion.add(test.labels[i], predict_ranked(trained.model, test.rows[i]).front().label);
        }
        report.guess = guess_curve(trained.model, test);
    } else {
        const auto train = matrix.subset(split.train);
        const auto model = fit_knn_model(train);
        const auto ranked = predict_rows(model, test);
        for (std::size_t i = 0; i < test.size(); ++i) report.confusion.add(test.labels[i], ranked[i].front());
    }
    return report;
}

EvalReport eval_cv(const EvalOpts& o, const FeatureMatrix& matrix) {
    Trainer trainer;
    if (o.model == "ann") {
        ScgConfig cfg;
        cfg.seed = o.seed;
        cfg.max_epochs = o.max_epochs;
        trainer = ann_trainer(o.hidden, cfg);
    } else if (action_labels(matrix.labels)) {
        trainer = two_stage_trainer();
    } else {
        trainer = knn_trainer(1, Metric::Euclidean);
    }
    auto cv = cross_validate(matrix, trainer, o.folds, o.seed);
    EvalReport report;
    report.model = o.model;
    report.protocol = std::to_string(o.folds) + "-fold cross-validation";
    report.seed = o.seed;
    report.folds = o.folds;
    report.confusion = std::move(cv.confusion);
    report.guess = std::move(cv.guess);
    return report;
}

int cmd_eval(const EvalOpts& o, std::ostream& out) {
    // A stored model is checked first so a missing one fails before any work.
    if (!o.model_file.empty()) load_model(o.model_file);
    const auto matrix = read_matrix(o.in);
    EvalReport report;
    if (!o.model_file.empty()) {
        report = eval_stored(o, matrix);
    } else {
        const auto protocol = o.protocol.empty() ? (o.model == "ann" ? "split" : "cv") : o.protocol;
        report = protocol == "split" ? eval_split(o, matrix) : eval_cv(o, matrix);
    }
    report.profile = o.profile;
    const auto text = render_text(report);
    if (!o.report.empty()) {
        write_text(o.report, render_records(report));
        write_text(o.report + ".txt", text);
        if (report.guess) write_text(o.report + ".curve.csv", render_curve_csv(*report.guess));
    }
    out << text;
    return 0;
}

int cmd_report(const ReportOpts& o, std::ostream& out) {
    std::ifstream in(o.in, std::ios::binary);
    if (!in) throw Error(ErrorCode::StorageFailure, "cannot read " + o.in);
    std::ostringstream buf;
    buf << in.rdbuf();
    auto report = parse_report_records(buf.str());
    if (!o.profile.empty()) report.profile = o.profile;
    const auto text = render_text(report);
    if (o.out.empty()) {
        out << text;
    } else {
        write_text(o.out, text);
        if (report.guess) write_text(o.out + ".curve.csv", render_curve_csv(*report.guess));
    }
    return 0;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"touchsig: motion-sensor touch-action and PIN-digit identification toolkit", "touchsig"};
    app.set_config("--config", "", "Config file (TOML/INI); sections are named after subcommands")
        ->envname("TOUCHSIG_CONFIG");
    app.require_subcommand(1, 1);
    app.fallthrough();

    const auto profile_check = CLI::IsMember({"iphone5", "nexus5"});

    ServeOpts serve_o;
    auto* serve_cmd = app.add_subcommand("serve", "Run the ingest server (plain TCP or WebSocket)");
    serve_cmd->add_option("--host", serve_o.host, "Listen address")->capture_default_str();
    serve_cmd->add_option("--port", serve_o.port, "Listen port (0 picks a free port)")
        ->check(CLI::Range(0, 65535))
        ->capture_default_str();
    serve_cmd->add_option("--out", serve_o.out, "Dataset file to append traces to")->required();
    serve_cmd->add_option("--raw-log", serve_o.raw_log, "Also append every received record here");
    serve_cmd->add_option("--port-file", serve_o.port_file, "Write the bound port to this file");
    serve_cmd->add_option("--max-sessions", serve_o.max_sessions, "Exit after this many sessions (0: run until signalled)")
        ->capture_default_str();

    ReplayOpts replay_o;
    auto* replay_cmd = app.add_subcommand("replay", "Send a recorded wire session to a running server");
    replay_cmd->add_option("--host", replay_o.host, "Server address")->capture_default_str();
    replay_cmd->add_option("--port", replay_o.port, "Server port")->check(CLI::Range(1, 65535))->capture_default_str();
    replay_cmd->add_option("--in", replay_o.in, "Session file (one wire record per line)")->required();

    AssembleOpts assemble_o;
    auto* assemble_cmd = app.add_subcommand("assemble", "Assemble a recorded wire session offline");
    assemble_cmd->add_option("--in", assemble_o.in, "Session file (one wire record per line)")->required();
    assemble_cmd->add_option("--out", assemble_o.out, "Dataset file to write")->required();

    SynthOpts synth_o;
    auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic dataset");
    synth_cmd->add_option("--classes", synth_o.classes, "Class family")
        ->check(CLI::IsMember({"actions", "digits"}))
        ->capture_default_str();
    synth_cmd->add_option("--per-class", synth_o.per_class, "Traces per class")->capture_default_str();
    synth_cmd->add_option("--separation", synth_o.separation, "Signature amplitude in noise units")->capture_default_str();
    synth_cmd->add_option("--seed", synth_o.seed, "Generator seed")->capture_default_str();
    synth_cmd->add_option("--profile", synth_o.profile, "Device profile")->check(profile_check)->capture_default_str();
    synth_cmd->add_option("--out", synth_o.out, "Dataset file to write")->required();

    ExtractOpts extract_o;
    auto* extract_cmd = app.add_subcommand("extract", "Turn a dataset into a feature matrix");
    extract_cmd->add_option("--phase", extract_o.phase, "1: touch actions (164 features), 2: digits (150)")
        ->check(CLI::IsMember({"1", "2"}))
        ->capture_default_str();
    extract_cmd->add_option("--in", extract_o.in, "Dataset file")->required();
    extract_cmd->add_option("--out", extract_o.out, "Matrix file to write")->required();

    TrainOpts train_o;
    auto* train_cmd = app.add_subcommand("train", "Fit a classifier and save it");
    train_cmd->add_option("--model", train_o.model, "Classifier kind")
        ->check(CLI::IsMember({"knn", "ann"}))
        ->capture_default_str();
    train_cmd->add_option("--in", train_o.in, "Matrix file")->required();
    train_cmd->add_option("--out", train_o.out, "Model file to write")->required();
    train_cmd->add_option("--hidden", train_o.hidden, "ANN hidden width")->capture_default_str();
    train_cmd->add_option("--seed", train_o.seed, "ANN weight and split seed")->capture_default_str();
    train_cmd->add_option("--max-epochs", train_o.max_epochs, "ANN epoch limit")->capture_default_str();
    train_cmd->add_option("--k", train_o.k, "Neighbours (first stage for touch actions)")->capture_default_str();
    train_cmd->add_option("--metric", train_o.metric, "k-NN metric for non-action labels")
        ->check(CLI::IsMember({"euclidean", "cityblock"}))
        ->capture_default_str();

    PredictOpts predict_o;
    auto* predict_cmd = app.add_subcommand("predict", "Label every row of a matrix with a saved model");
    predict_cmd->add_option("--model", predict_o.model, "Model file")->required();
    predict_cmd->add_option("--in", predict_o.in, "Matrix file")->required();
    predict_cmd->add_option("--out", predict_o.out, "Prediction file (default: stdout)");

    EvalOpts eval_o;
    auto* eval_cmd = app.add_subcommand("eval", "Evaluate a classifier and write a report");
    eval_cmd->add_option("--model", eval_o.model, "Classifier kind")
        ->check(CLI::IsMember({"knn", "ann"}))
        ->capture_default_str();
    eval_cmd->add_option("--model-file", eval_o.model_file, "Evaluate this saved model instead of training");
    eval_cmd->add_option("--protocol", eval_o.protocol, "cv (k-fold) or split (70/15/15); default cv for knn, split for ann")
        ->check(CLI::IsMember({"cv", "split"}));
    eval_cmd->add_option("--folds", eval_o.folds, "Cross-validation folds")->capture_default_str();
    eval_cmd->add_option("--seed", eval_o.seed, "Fold, split and weight seed")->capture_default_str();
    eval_cmd->add_option("--in", eval_o.in, "Matrix file")->required();
    eval_cmd->add_option("--report", eval_o.report, "Write records here, text to <path>.txt, curve to <path>.curve.csv");
    eval_cmd->add_option("--hidden", eval_o.hidden, "ANN hidden width")->capture_default_str();
    eval_cmd->add_option("--max-epochs", eval_o.max_epochs, "ANN epoch limit")->capture_default_str();
    eval_cmd->add_option("--profile", eval_o.profile, "Keypad for the digit grid")->check(profile_check)->capture_default_str();

    ReportOpts report_o;
    auto* report_cmd = app.add_subcommand("report", "Render a report record file as text");
    report_cmd->add_option("--in", report_o.in, "Report record file")->required();
    report_cmd->add_option("--out", report_o.out, "Text file (default: stdout)");
    report_cmd->add_option("--profile", report_o.profile, "Keypad for the digit grid")->check(profile_check);

    if (!args.empty() && !args.front().starts_with("-") && app.get_subcommand_no_throw(args.front()) == nullptr) {
        err << "usage error: unknown subcommand '" << args.front() << "'\n\n" << app.help("", CLI::AppFormatMode::All);
        return 2;
    }
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return 0;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "usage error: " << e.what() << "\n\n" << app.help("", CLI::AppFormatMode::All);
        return 2;
    }

    try {
        if (serve_cmd->parsed()) return cmd_serve(serve_o, out, err);
        if (replay_cmd->parsed()) return cmd_replay(replay_o, out);
        if (assemble_cmd->parsed()) return cmd_assemble(assemble_o, out, err);
        if (synth_cmd->parsed()) return cmd_synth(synth_o, out);
        if (extract_cmd->parsed()) return cmd_extract(extract_o, out);
        if (train_cmd->parsed()) return cmd_train(train_o, out);
        if (predict_cmd->parsed()) return cmd_predict(predict_o, out);
        if (eval_cmd->parsed()) return cmd_eval(eval_o, out);
        if (report_cmd->parsed()) return cmd_report(report_o, out);
    } catch (const Error& e) {
        if (e.code() == ErrorCode::ModelNotFound) {
            err << "error: model not found (" << e.what() << ")\n";
        } else {
            err << "error: " << e.what() << '\n';
        }
        return e.code() == ErrorCode::UsageError ? 2 : 1;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }
    err << app.help();
    return 2;
}

int run(int argc, const char* const* argv) {
    std::vector<std::string> args;
    for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
    return run(args, std::cout, std::cerr);
}

}  // namespace touchsig

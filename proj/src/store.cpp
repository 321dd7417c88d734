#include "touchsig/store.hpp"

#include <string>

#include "touchsig/codec.hpp"
#include "touchsig/error.hpp"

namespace touchsig {

namespace {

std::size_t count_lines(const std::filesystem::path& path) {
    std::ifstream in(path);
    std::size_t n = 0;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty()) ++n;
    }
    return n;
}

}  // namespace

DatasetStore::DatasetStore(std::filesystem::path path) : path_(std::move(path)) {
    std::error_code ec;
    if (std::filesystem::is_directory(path_, ec)) {
        throw Error(ErrorCode::StorageFailure, path_.string() + " is a directory");
    }
    records_ = count_lines(path_);
    out_.open(path_, std::ios::app);
    if (!out_) throw Error(ErrorCode::StorageFailure, "cannot open " + path_.string() + " for appending");
}

std::size_t DatasetStore::persist(const LabeledTrace& trace) {
    const auto line = encode_trace(trace);
    out_ << line << '\n';
    out_.flush();
    if (!out_) throw Error(ErrorCode::StorageFailure, "write to " + path_.string() + " failed");
    return records_++;
}

std::vector<LabeledTrace> load_dataset(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::StorageFailure, "cannot read " + path.string());
    std::vector<LabeledTrace> traces;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        try {
            traces.push_back(decode_trace(line));
        } catch (const Error& e) {
            throw Error(e.code(), path.string() + ":" + std::to_string(lineno) + ": " + e.what());
        }
    }
    return traces;
}

void write_dataset(const std::filesystem::path& path, std::span<const LabeledTrace> traces) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw Error(ErrorCode::StorageFailure, "cannot open " + path.string() + " for writing");
    for (const auto& t : traces) out << encode_trace(t) << '\n';
    if (!out) throw Error(ErrorCode::StorageFailure, "write to " + path.string() + " failed");
}

}  // namespace touchsig

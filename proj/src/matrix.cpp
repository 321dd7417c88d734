#include "touchsig/matrix.hpp"

#include <fstream>

#include <json.hpp>

#include "touchsig/error.hpp"

namespace touchsig {

using nlohmann::json;

FeatureMatrix FeatureMatrix::subset(std::span<const std::size_t> indices) const {
    FeatureMatrix out{phase, layout, {}, {}};
    out.labels.reserve(indices.size());
    out.rows.reserve(indices.size());
    for (auto i : indices) {
        out.labels.push_back(labels.at(i));
        out.rows.push_back(rows.at(i));
    }
    return out;
}

FeatureMatrix build_matrix(std::span<const LabeledTrace> traces, Phase phase) {
    FeatureMatrix m{phase, FeatureLayout::of(phase).names, {}, {}};
    m.labels.reserve(traces.size());
    m.rows.reserve(traces.size());
    for (const auto& t : traces) {
        m.labels.push_back(t.label.str());
        m.rows.push_back(extract(t, phase).values);
    }
    return m;
}

void write_matrix(const std::filesystem::path& path, const FeatureMatrix& matrix) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw Error(ErrorCode::StorageFailure, "cannot open " + path.string() + " for writing");
    out << json{{"phase", to_string(matrix.phase)}, {"layout", matrix.layout}}.dump() << '\n';
    for (std::size_t i = 0; i < matrix.size(); ++i) {
        out << json{{"label", matrix.labels[i]}, {"features", matrix.rows[i]}}.dump() << '\n';
    }
    if (!out) throw Error(ErrorCode::StorageFailure, "write to " + path.string() + " failed");
}

FeatureMatrix read_matrix(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::StorageFailure, "cannot read " + path.string());
    FeatureMatrix m;
    std::string line;
    bool header = false;
    std::size_t lineno = 0;
    try {
        while (std::getline(in, line)) {
            ++lineno;
            if (line.empty()) continue;
            const auto j = json::parse(line);
            if (!header) {
                m.phase = parse_phase(j.at("phase").get<std::string>());
                m.layout = j.at("layout").get<std::vector<std::string>>();
                header = true;
                continue;
            }
            auto row = j.at("features").get<std::vector<double>>();
            if (row.size() != m.layout.size()) {
                throw Error(ErrorCode::InconsistentDimensions,
                            "row has " + std::to_string(row.size()) + " features, layout has " +
                                std::to_string(m.layout.size()));
            }
            m.labels.push_back(j.at("label").get<std::string>());
            m.rows.push_back(std::move(row));
        }
    } catch (const json::exception& e) {
        throw Error(ErrorCode::MalformedRecord, path.string() + ":" + std::to_string(lineno) + ": " + e.what());
    }
    if (!header) throw Error(ErrorCode::MalformedRecord, path.string() + " has no header record");
    return m;
}

std::uint64_t layout_hash(std::span<const std::string> names) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    const auto mix = [&](unsigned char c) {
        h ^= c;
        h *= 0x100000001b3ULL;
    };
    for (std::size_t i = 0; i < names.size(); ++i) {
        if (i > 0) mix('\n');
        for (unsigned char c : names[i]) mix(c);
    }
    return h;
}

}  // namespace touchsig

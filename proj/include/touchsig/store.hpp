#pragma once

#include <cstddef>
#include <filesystem>
#include <fstream>
#include <span>
#include <vector>

#include "touchsig/model.hpp"

namespace touchsig {

/// Append-only dataset file, one encoded LabeledTrace per line. Record ids
/// are 0-based line numbers. Not thread-safe; the server funnels all writes
/// through a single appender.
class DatasetStore {
public:
    /// Opens (creating if needed) for appending. Throws Error(StorageFailure).
    explicit DatasetStore(std::filesystem::path path);

    std::size_t persist(const LabeledTrace& trace);
    std::size_t size() const noexcept { return records_; }
    const std::filesystem::path& path() const noexcept { return path_; }

private:
    std::filesystem::path path_;
    std::ofstream out_;
    std::size_t records_ = 0;
};

std::vector<LabeledTrace> load_dataset(const std::filesystem::path& path);

/// Replaces the file's content with `traces`.
void write_dataset(const std::filesystem::path& path, std::span<const LabeledTrace> traces);

}  // namespace touchsig

#pragma once

#include <json.hpp>

#include <filesystem>
#include <string>
#include <vector>

namespace reflectforge {

/// Reads a JSONL file, skipping blank lines. A malformed line raises a
/// validation error that names the file and 1-based line number.
std::vector<nlohmann::ordered_json> read_jsonl(const std::filesystem::path& path);

/// Buffers lines and writes the whole file atomically on close (or
/// destruction). dump() output is key-order preserving, so emitted files are
/// byte-stable for a fixed input sequence.
class JsonlWriter {
public:
    explicit JsonlWriter(std::filesystem::path path) : path_(std::move(path)) {}
    ~JsonlWriter();

    JsonlWriter(const JsonlWriter&) = delete;
    JsonlWriter& operator=(const JsonlWriter&) = delete;

    void write(const nlohmann::ordered_json& obj);
    std::size_t lines() const { return lines_; }
    void close();

private:
    std::filesystem::path path_;
    std::string buffer_;
    std::size_t lines_ = 0;
    bool closed_ = false;
};

}  // namespace reflectforge

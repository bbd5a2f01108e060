#include "reflectforge/jsonl.hpp"

#include "reflectforge/errors.hpp"
#include "reflectforge/util.hpp"

#include <fstream>

namespace reflectforge {

std::vector<nlohmann::ordered_json> read_jsonl(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open " + path.string());
    }
    std::vector<nlohmann::ordered_json> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (line.find_first_not_of(" \t") == std::string::npos) {
            continue;
        }
        try {
            out.push_back(nlohmann::ordered_json::parse(line));
        } catch (const nlohmann::json::parse_error& e) {
            throw ValidationError(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
        }
    }
    return out;
}

JsonlWriter::~JsonlWriter() {
    if (!closed_) {
        try {
            close();
        } catch (...) {
            // destructor must not throw; callers that care invoke close()
        }
    }
}

void JsonlWriter::write(const nlohmann::ordered_json& obj) {
    buffer_ += obj.dump();
    buffer_ += '\n';
    ++lines_;
}

void JsonlWriter::close() {
    if (closed_) return;
    closed_ = true;
    write_text_file_atomic(path_, buffer_);
}

}  // namespace reflectforge

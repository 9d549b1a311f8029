#include "flowtriage/io.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

#include "flowtriage/errors.hpp"

namespace flowtriage {

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open file for reading: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_file(const std::string& path, const std::string& content) {
    const auto parent = std::filesystem::path(path).parent_path();
    if (!parent.empty()) std::filesystem::create_directories(parent);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot open file for writing: " + path);
    out << content;
    if (!out) throw Error("write failed: " + path);
}

void ensure_dir(const std::string& path) { std::filesystem::create_directories(path); }

bool file_exists(const std::string& path) { return std::filesystem::exists(path); }

}  // namespace flowtriage

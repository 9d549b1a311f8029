#pragma once

#include <string>

namespace flowtriage {

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& content);
void ensure_dir(const std::string& path);
bool file_exists(const std::string& path);

}  // namespace flowtriage

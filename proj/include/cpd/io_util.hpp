#pragma once

#include <filesystem>
#include <string>

namespace cpd {

// Write via a sibling temp file and rename, so readers never observe a
// partially written file.
void write_text_atomically(const std::filesystem::path& path, const std::string& content);

}  // namespace cpd

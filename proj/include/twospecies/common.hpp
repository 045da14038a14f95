#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>

namespace twospecies {

/// Thrown when a structural guarantee of the dynamics fails at runtime.
/// `invariant()` names the violated guarantee; the message adds context.
class invariant_violation : public std::runtime_error {
public:
    invariant_violation(std::string invariant, const std::string& detail)
        : std::runtime_error(invariant + ": " + detail),
          invariant_(std::move(invariant)) {}

    [[nodiscard]] const std::string& invariant() const noexcept { return invariant_; }

private:
    std::string invariant_;
};

/// Format a double with enough digits to round-trip exactly.
inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

/// Write `content` to `path` atomically (temp file in the same directory,
/// then rename), so interrupted runs never leave truncated files.
inline void atomic_write(const std::filesystem::path& path, const std::string& content) {
    namespace fs = std::filesystem;
    fs::path dir = path.parent_path();
    if (!dir.empty()) fs::create_directories(dir);
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot open for writing: " + tmp.string());
        out << content;
        if (!out) throw std::runtime_error("write failed: " + tmp.string());
    }
    fs::rename(tmp, path);
}

}  // namespace twospecies

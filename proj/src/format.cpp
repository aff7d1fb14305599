#include "conelab/format.hpp"

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>

#include "conelab/errors.hpp"

namespace conelab {

std::string fmt_real(double x)
{
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, res.ptr);
}

void write_file_atomic(const std::string& path, const std::string& contents)
{
    namespace fs = std::filesystem;
    const fs::path target(path);
    if (target.has_parent_path()) fs::create_directories(target.parent_path());
    const fs::path tmp = target.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw InvalidArgument("cannot open " + tmp.string() + " for writing");
        out << contents;
        if (!out) throw InvalidArgument("write failed for " + tmp.string());
    }
    fs::rename(tmp, target);
}

} // namespace conelab

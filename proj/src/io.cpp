#include "eqfree/io.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace eqfree {

std::string fmt_real(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.15e", v);
    return buf;
}

void write_text_file(const std::string& path, const std::string& content) {
    namespace fs = std::filesystem;
    const fs::path p(path);
    std::error_code ec;
    if (p.has_parent_path()) fs::create_directories(p.parent_path(), ec);
    std::ofstream out(p, std::ios::binary);
    if (!out) throw ConfigError("path", "cannot open '" + path + "' for writing");
    out << content;
    if (!out) throw ConfigError("path", "failed writing '" + path + "'");
}

void write_json_file(const std::string& path, const nlohmann::json& j) {
    write_text_file(path, j.dump(2) + "\n");
}

std::string trajectory_csv(const Trajectory& traj, const std::vector<std::string>& names) {
    std::ostringstream os;
    const std::size_t n = traj.empty() ? names.size() : static_cast<std::size_t>(traj.states[0].size());
    os << 't';
    for (std::size_t c = 0; c < n; ++c) {
        os << ',' << (c < names.size() ? names[c] : "u" + std::to_string(c));
    }
    os << '\n';
    for (std::size_t s = 0; s < traj.size(); ++s) {
        os << fmt_real(traj.times[s]);
        for (Eigen::Index c = 0; c < traj.states[s].size(); ++c) os << ',' << fmt_real(traj.states[s][c]);
        os << '\n';
    }
    return os.str();
}

}  // namespace eqfree

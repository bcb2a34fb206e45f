#include "sova/report.hpp"

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <stdexcept>

namespace sova {

const char* const kOutputDirVariable = "SOVA_OUTPUT_DIR";

void Report::add_residual(const std::string& id, double value, double tolerance) {
    add(id, value, tolerance, std::isfinite(value) && value <= tolerance);
}

void Report::add_exact(const std::string& id, double value, double target) {
    add(id, value, target, value == target);
}

void Report::add(const std::string& id, double value, double tolerance, bool pass) {
    checks.push_back({id, value, tolerance, pass});
}

bool Report::all_pass() const {
    for (const auto& c : checks)
        if (!c.pass) return false;
    return true;
}

std::string Report::to_json() const {
    nlohmann::ordered_json j;
    j["schema_version"] = kSchemaVersion;
    j["subcommand"] = subcommand;
    j["seed"] = seed;
    j["checks"] = nlohmann::ordered_json::array();
    for (const auto& c : checks) {
        nlohmann::ordered_json e;
        e["check_id"] = c.check_id;
        e["value"] = c.value;
        e["tolerance"] = c.tolerance;
        e["pass"] = c.pass;
        j["checks"].push_back(std::move(e));
    }
    return j.dump(2) + "\n";
}

std::string default_output_dir() {
    const char* dir = std::getenv(kOutputDirVariable);
    if (dir != nullptr && dir[0] != '\0') return dir;
    return ".";
}

void write_text_file(const std::string& path, const std::string& content) {
    const auto parent = std::filesystem::path(path).parent_path();
    if (!parent.empty()) {
        std::error_code ec;
        std::filesystem::create_directories(parent, ec);
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << content;
    if (!out) throw std::runtime_error("write failed: " + path);
}

}  // namespace sova

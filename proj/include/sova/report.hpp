#pragma once

#include <string>
#include <vector>

namespace sova {

// One certified quantity. pass is decided when the check is added; value and
// tolerance document the decision for downstream consumers.
struct Check {
    std::string check_id;
    double value = 0.0;
    double tolerance = 0.0;
    bool pass = false;
};

// Flat, machine-readable certification record. Serialization is fully
// deterministic: no timestamps, no environment state, insertion order kept.
struct Report {
    static constexpr int kSchemaVersion = 1;

    std::string subcommand;
    std::uint64_t seed = 0;
    std::vector<Check> checks;

    // pass iff value is finite and value <= tolerance
    void add_residual(const std::string& id, double value, double tolerance);
    // pass iff value equals target exactly (ranks, counts)
    void add_exact(const std::string& id, double value, double target);
    void add(const std::string& id, double value, double tolerance, bool pass);

    bool all_pass() const;
    std::string to_json() const;
};

// Default directory for report and export files: the override environment
// variable when set and non-empty, otherwise the current directory.
extern const char* const kOutputDirVariable;
std::string default_output_dir();

void write_text_file(const std::string& path, const std::string& content);

}  // namespace sova

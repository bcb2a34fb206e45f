#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <limits>

#include "sova/report.hpp"

using namespace sova;

TEST_CASE("check semantics") {
    Report r;
    r.add_residual("small_residual", 1e-9, 1e-6);
    r.add_residual("boundary_residual", 1e-6, 1e-6);
    r.add_residual("large_residual", 2e-6, 1e-6);
    r.add_residual("non_finite", std::numeric_limits<double>::quiet_NaN(), 1e-6);
    r.add_exact("rank", 4.0, 4.0);
    r.add_exact("wrong_rank", 5.0, 4.0);

    REQUIRE(r.checks[0].pass);
    REQUIRE(r.checks[1].pass);
    REQUIRE_FALSE(r.checks[2].pass);
    REQUIRE_FALSE(r.checks[3].pass);
    REQUIRE(r.checks[4].pass);
    REQUIRE_FALSE(r.checks[5].pass);
    REQUIRE_FALSE(r.all_pass());

    Report ok;
    ok.add_residual("only", 0.0, 1.0);
    REQUIRE(ok.all_pass());
    REQUIRE(Report{}.all_pass());
}

TEST_CASE("serialization is deterministic and carries the schema") {
    Report r;
    r.subcommand = "flow";
    r.seed = 7;
    r.add_residual("energy_drift", 4.09e-9, 1e-8);
    r.add_exact("rank", 4.0, 4.0);

    const std::string a = r.to_json();
    const std::string b = r.to_json();
    REQUIRE(a == b);

    const auto j = nlohmann::json::parse(a);
    REQUIRE(j.at("schema_version").get<int>() == Report::kSchemaVersion);
    REQUIRE(j.at("subcommand").get<std::string>() == "flow");
    REQUIRE(j.at("seed").get<std::uint64_t>() == 7);
    REQUIRE(j.at("checks").is_array());
    REQUIRE(j.at("checks").size() == 2);
    const auto& c0 = j.at("checks").at(0);
    REQUIRE(c0.at("check_id").get<std::string>() == "energy_drift");
    REQUIRE(c0.at("value").get<double>() == 4.09e-9);
    REQUIRE(c0.at("tolerance").get<double>() == 1e-8);
    REQUIRE(c0.at("pass").get<bool>());
    // field order inside a check is part of the contract
    REQUIRE(a.find("\"check_id\"") < a.find("\"value\""));
    REQUIRE(a.find("\"value\"") < a.find("\"tolerance\""));
    REQUIRE(a.find("\"tolerance\"") < a.find("\"pass\""));
    REQUIRE(a.find("timestamp") == std::string::npos);
}

TEST_CASE("output directory default and override") {
    unsetenv(kOutputDirVariable);
    REQUIRE(default_output_dir() == ".");
    setenv(kOutputDirVariable, "/tmp/sova-out", 1);
    REQUIRE(default_output_dir() == "/tmp/sova-out");
    setenv(kOutputDirVariable, "", 1);
    REQUIRE(default_output_dir() == ".");
    unsetenv(kOutputDirVariable);
}

TEST_CASE("writing creates missing report directories") {
    namespace fs = std::filesystem;
    const fs::path root = fs::temp_directory_path() / "sova-report-test";
    fs::remove_all(root);
    const fs::path target = root / "nested" / "run_report.json";
    write_text_file(target.string(), "{}\n");
    REQUIRE(fs::exists(target));
    std::ifstream in(target);
    std::string line;
    std::getline(in, line);
    REQUIRE(line == "{}");
    fs::remove_all(root);
}

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "cli.hpp"

using json = nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct Result {
    int code;
    std::string out;
    std::string err;
};

Result invoke(const std::vector<std::string>& args) {
    std::ostringstream out, err;
    const int code = casimir::cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
    const fs::path dir = fs::path(CASIMIR_TEST_TMPDIR) / "cli_scratch";
    fs::create_directories(dir);
    return dir / name;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

TEST_CASE("simulate writes a JSON moment report") {
    const auto r = invoke({"simulate", "--alpha-over-v", "0.1", "--delta-l", "0.6931", "--cutoff", "64"});
    REQUIRE(r.code == casimir::cli::kExitOk);
    const json j = json::parse(r.out);
    CHECK(j["version"] == "casimir 0.1.0");
    CHECK(j["config"]["cutoff"] == 64);
    CHECK(j["config"]["theta0"] == 0.0);
    CHECK(j["moments"]["mean_w"]["unit"] == "pi*v/l_final");
    CHECK(j["moments"]["mean_w"]["method"] == "analytic");
    CHECK(j["moments"]["mean_n"]["value"].get<double>() > 0.0);
}

TEST_CASE("oracle-check passes at small L") {
    const auto r = invoke({"oracle-check", "--cutoff", "2", "--alpha-over-v", "2", "--delta-l", "0.6931"});
    CHECK(r.code == casimir::cli::kExitOk);
    const json j = json::parse(r.out);
    CHECK(j["pass"] == true);
    CHECK(j["max_abs_diff"].get<double>() <= 1e-8);
}

TEST_CASE("validation errors exit with code 2") {
    const auto zero = invoke({"simulate", "--alpha-over-v", "0", "--delta-l", "0.5"});
    CHECK(zero.code == casimir::cli::kExitValidation);
    CHECK(zero.err.find("alpha/v = 0 requires delta_l = 0") != std::string::npos);

    CHECK(invoke({"simulate", "--bogus", "1"}).code == casimir::cli::kExitValidation);
    CHECK(invoke({"simulate", "--delta-l", "0.5", "--l-ratio", "2"}).code == casimir::cli::kExitValidation);
    CHECK(invoke({"simulate", "--alpha-over-v", "0.5", "--delta-l", "-0.5"}).code ==
          casimir::cli::kExitValidation);
    CHECK(invoke({"distribution", "--cutoff", "80"}).code == casimir::cli::kExitValidation);
    CHECK(invoke({"oracle-check", "--cutoff", "7"}).code == casimir::cli::kExitValidation);
    CHECK(invoke({}).code == casimir::cli::kExitValidation);
}

TEST_CASE("l-ratio is the exponential of delta-l") {
    const auto a = json::parse(invoke({"simulate", "--cutoff", "6", "--l-ratio", "2"}).out);
    const auto b = json::parse(invoke({"simulate", "--cutoff", "6", "--delta-l", std::to_string(std::log(2.0))}).out);
    CHECK(a["config"]["delta-l"].get<double>() == doctest::Approx(std::log(2.0)));
    CHECK(a["moments"]["mean_w"]["value"].get<double>() ==
          doctest::Approx(b["moments"]["mean_w"]["value"].get<double>()).epsilon(1e-9));
}

TEST_CASE("JSON config file with flag precedence") {
    const fs::path cfg = scratch("config.json");
    {
        std::ofstream out(cfg);
        out << R"({"alpha-over-v": 0.7, "cutoff": 5, "delta-l": 0.4})";
    }
    const auto from_file = json::parse(invoke({"simulate", "--config", cfg.string()}).out);
    CHECK(from_file["config"]["alpha-over-v"] == 0.7);
    CHECK(from_file["config"]["cutoff"] == 5);

    const auto overridden = json::parse(invoke({"simulate", "--config", cfg.string(), "--cutoff", "7"}).out);
    CHECK(overridden["config"]["cutoff"] == 7);
    CHECK(overridden["config"]["alpha-over-v"] == 0.7);

    const fs::path bad = scratch("bad.json");
    {
        std::ofstream out(bad);
        out << R"({"speed": 0.7})";
    }
    CHECK(invoke({"simulate", "--config", bad.string()}).code == casimir::cli::kExitValidation);
    CHECK(invoke({"simulate", "--config", scratch("missing.json").string()}).code == casimir::cli::kExitValidation);
}

TEST_CASE("tables, files and idempotence") {
    const fs::path a = scratch("sweep_a.csv");
    const fs::path b = scratch("sweep_b.csv");
    const std::vector<std::string> base{"sweep-l", "--cutoffs", "4,8,16,24,32", "--alpha-over-v", "0.9"};
    auto args = base;
    args.insert(args.end(), {"--output", a.string()});
    REQUIRE(invoke(args).code == 0);
    args = base;
    args.insert(args.end(), {"-o", b.string()});
    REQUIRE(invoke(args).code == 0);
    const std::string text = slurp(a);
    CHECK(text == slurp(b));
    CHECK(text.find("# version: casimir 0.1.0") != std::string::npos);
    CHECK(text.find("L,alpha_over_v,delta_l,mean_w[pi*v/l_final]") != std::string::npos);

    const auto fit = invoke({"fit", "--input", a.string(), "--min-cutoff", "4"});
    REQUIRE(fit.code == 0);
    const json j = json::parse(fit.out);
    CHECK(j["fits"].size() == 2);
    CHECK(j["fits"][0]["rows_used"] == 5);

    const auto json_table = invoke({"sweep-l", "--cutoffs", "4,8", "--format", "json"});
    REQUIRE(json_table.code == 0);
    CHECK(json::parse(json_table.out)["rows"].size() == 2);

    CHECK(invoke({"fit", "--input", a.string(), "--min-cutoff", "16"}).code == casimir::cli::kExitNumerical);
}

TEST_CASE("chi and distribution outputs") {
    const auto chi = invoke({"chi", "--cutoff", "3", "--alpha-over-v", "1", "--format", "json", "--u-grid", "0,0.5"});
    REQUIRE(chi.code == 0);
    const json j = json::parse(chi.out);
    REQUIRE(j["chi"].size() == 2);
    CHECK(j["chi"][0]["re"] == 1.0);
    CHECK(j["chi"][0]["im"] == 0.0);

    const auto dist = invoke({"distribution", "--which", "number", "--cutoff", "3", "--alpha-over-v", "1"});
    REQUIRE(dist.code == 0);
    CHECK(dist.out.find("N,probability") != std::string::npos);
}

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "cli.hpp"
#include "config.hpp"
#include "matchnet/error.hpp"
#include "matchnet/large_market.hpp"
#include "output.hpp"

using namespace matchnet;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct Result {
    int code;
    std::string out;
    std::string err;
};

fs::path write_config(const std::string& name, const json& doc) {
    const fs::path dir = fs::temp_directory_path() / "matchnet_cli_tests";
    fs::create_directories(dir);
    const fs::path p = dir / name;
    std::ofstream(p) << doc.dump();
    return p;
}

Result run_cli(std::vector<std::string> args) {
    std::ostringstream out, err;
    const int code = cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

Result run_doc(const std::string& command, const json& doc, std::vector<std::string> extra = {}) {
    const auto path = write_config(command + "_" + std::to_string(std::hash<std::string>{}(doc.dump())) + ".json", doc);
    std::vector<std::string> args = {command, "--config", path.string()};
    args.insert(args.end(), extra.begin(), extra.end());
    return run_cli(args);
}

json exponential(double mean) { return {{"family", "exponential"}, {"params", {{"mean", mean}}}}; }

}  // namespace

TEST_CASE("eval prints the large-market value") {
    const json doc = {{"command", "eval"},
                      {"market", {{"theta", 1.0}, {"G", exponential(3.0)}}},
                      {"model", {{"quantity", "f_large"}}}};
    const auto r = run_doc("eval", doc);
    REQUIRE(r.code == cli::kExitOk);
    const auto out = json::parse(r.out);
    CHECK(out["value"].get<double>() == doctest::Approx(f_large(IntensityModel::exponential(3.0), 1.0)).epsilon(1e-15));

    const auto csv = run_doc("eval", doc, {"--format", "csv"});
    REQUIRE(csv.code == cli::kExitOk);
    CHECK(csv.out.find("0.48723547886481366") != std::string::npos);
}

TEST_CASE("numbers in csv keep 17 significant digits") {
    CHECK(cli::format_number(0.1) == "0.10000000000000001");
    CHECK(std::stod(cli::format_number(1.0 / 3.0)) == 1.0 / 3.0);
    CHECK(cli::format_number(NAN) == "nan");
    cli::Table t{{"a", "b"}, {}};
    t.add({std::string("x,y"), 2.5});
    std::ostringstream os;
    t.write_csv(os);
    CHECK(os.str() == "a,b\n\"x,y\",2.5\n");
    CHECK(t.to_json()[0]["b"] == 2.5);
}

TEST_CASE("config errors exit 2 and name the key") {
    const json unknown = {{"command", "eval"},
                          {"market", {{"theta", 1.0}, {"G", exponential(1.0)}, {"tightnes", 2.0}}},
                          {"model", {{"quantity", "f_large"}}}};
    auto r = run_doc("eval", unknown);
    CHECK(r.code == cli::kExitConfig);
    CHECK(r.err.find("tightnes") != std::string::npos);

    const json bad_model = {{"command", "eval"},
                            {"market", {{"theta", 1.0}, {"G", exponential(1.0)}}},
                            {"model", {{"quantity", "f_large"}, {"precision", 3}}}};
    r = run_doc("eval", bad_model);
    CHECK(r.code == cli::kExitConfig);
    CHECK(r.err.find("precision") != std::string::npos);

    const json wrong_type = {{"command", "eval"}, {"market", {{"theta", "one"}}}, {"model", {{"quantity", "f_large"}}}};
    r = run_doc("eval", wrong_type);
    CHECK(r.code == cli::kExitConfig);
    CHECK(r.err.find("theta") != std::string::npos);

    const json mismatch = {{"command", "simulate"}, {"market", {{"theta", 1.0}}}, {"model", {{"quantity", "f_large"}}}};
    CHECK(run_doc("eval", mismatch).code == cli::kExitConfig);

    CHECK(run_cli({"eval", "--config", "/nonexistent/cfg.json"}).code == cli::kExitConfig);
    CHECK(run_cli({"frobnicate"}).code == cli::kExitConfig);
    CHECK(run_cli({"eval"}).code == cli::kExitConfig);

    const json bad_law = {{"command", "eval"},
                          {"market", {{"theta", 1.0}, {"G", {{"family", "pareto"}, {"params", {{"scale", 1.0}, {"shape", 0.5}}}}}}},
                          {"model", {{"quantity", "f_large"}}}};
    CHECK(run_doc("eval", bad_law).code == cli::kExitConfig);
}

TEST_CASE("numeric domain errors exit 3") {
    const json doc = {{"command", "eval"}, {"market", {{"theta", 1.0}}}, {"model", {{"quantity", "ces"}, {"gamma", 5.0}}}};
    const auto r = run_doc("eval", doc);
    CHECK(r.code == cli::kExitNumeric);
    CHECK(r.err.find("gamma=5") != std::string::npos);
}

TEST_CASE("validation failures exit 1") {
    // At d = 100 the scaled and unscaled values agree to double precision, so the
    // expected strict increase cannot be observed.
    const json doc = {{"command", "sweep"},
                      {"market", {{"theta", 1.0}, {"G", {{"family", "degenerate"}, {"params", {{"value", 100.0}}}}}}},
                      {"model", {{"preset", "scaling"}, {"rhos", {2.0}}}}};
    const auto r = run_doc("sweep", doc);
    CHECK(r.code == cli::kExitValidation);
    CHECK(json::parse(r.out)["summary"]["sign_pattern_ok"] == false);
}

TEST_CASE("sweep csv writes a summary sidecar") {
    const auto out = fs::temp_directory_path() / "matchnet_cli_tests" / "mps.csv";
    const json doc = {{"command", "sweep"}, {"market", json::object()}, {"model", {{"preset", "mps"}, {"variant", "theorem2"}}}};
    const auto r = run_doc("sweep", doc, {"--format", "csv", "--out", out.string()});
    REQUIRE(r.code == cli::kExitOk);
    std::ifstream side(out.string() + ".summary.json");
    REQUIRE(side);
    CHECK(json::parse(side)["all_pass"] == true);
    std::ifstream csv(out);
    std::string header;
    std::getline(csv, header);
    CHECK(header == "pair,theta,base,spread,margin,strict,pass");
}

TEST_CASE("simulate is reproducible and worker-independent") {
    const json doc = {{"command", "simulate"},
                      {"market", {{"theta", 1.0}, {"applicants", 500}, {"G", exponential(3.0)}}},
                      {"model", {{"estimate", "f"}}},
                      {"options", {{"seed", 7}, {"replications", 30}}}};
    const auto base = run_doc("simulate", doc, {"--workers", "1"});
    REQUIRE(base.code == cli::kExitOk);
    for (const char* w : {"1", "4", "8"}) CHECK(run_doc("simulate", doc, {"--workers", w}).out == base.out);

    const auto other = run_doc("simulate", doc, {"--seed", "8"});
    REQUIRE(other.code == cli::kExitOk);
    const auto a = json::parse(base.out), b = json::parse(other.out);
    CHECK(a["seed"] == 7);
    CHECK(b["seed"] == 8);
    CHECK(a["estimate"] != b["estimate"]);
    CHECK(std::abs(a["estimate"].get<double>() - b["estimate"].get<double>()) < 6.0 * a["std_error"].get<double>());
}

TEST_CASE("validate oracle suite") {
    const json doc = {{"command", "validate"}, {"model", {{"suite", "oracle"}}}};
    const auto r = run_doc("validate", doc);
    CHECK(r.code == cli::kExitOk);
    CHECK(json::parse(r.out)["pass"] == true);
    CHECK(run_doc("validate", json{{"command", "validate"}, {"model", {{"suite", "everything"}}}}).code ==
          cli::kExitConfig);
}

TEST_CASE("finite markets from json") {
    const auto spec = cli::finite_market_from_json({{"kind", "applicant_links"}, {"p", {0.5, 0.2}}, {"vacancies", 3}});
    CHECK(std::get<ApplicantLinks>(spec).vacancies == 3);
    // Parsing only checks types; probabilities are checked by validate.
    const auto bad = cli::finite_market_from_json({{"kind", "applicant_links"}, {"p", {1.5}}, {"vacancies", 3}});
    CHECK_THROWS_AS(validate(bad), DomainError);
    CHECK_THROWS_AS(cli::finite_market_from_json({{"kind", "mystery"}}), SchemaError);
}

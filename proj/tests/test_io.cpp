#include <catch2/catch_amalgamated.hpp>

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "diffrec/experiment.hpp"
#include "diffrec/io.hpp"
#include "support.hpp"

using namespace diffrec;
namespace fs = std::filesystem;

namespace {

std::string temp_path(const char* name) {
    return (fs::temp_directory_path() / name).string();
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

TEST_CASE("format_double round-trips exactly", "[io]") {
    for (const double v : {0.1, 1.0 / 3.0, 1e-300, 12345.678901234567, 0.0, -2.5e17}) {
        const std::string s = format_double(v);
        double back = 0;
        std::from_chars(s.data(), s.data() + s.size(), back);
        CHECK(back == v);
    }
    CHECK(format_double(0.5) == "0.5");
    CHECK(format_double(1.0) == "1");
}

TEST_CASE("links file round trip", "[io]") {
    const std::string path = temp_path("diffrec_links_test.tsv");
    const std::vector<Link> links = {{0, 5}, {3, 1}, {942, 1681}};
    write_links_file(path, links);
    CHECK(read_links_file(path) == links);
    fs::remove(path);
}

TEST_CASE("links reader rejects malformed rows", "[io]") {
    const std::string path = temp_path("diffrec_badlinks_test.tsv");
    std::ofstream(path) << "1\t2\nbroken\n";
    CHECK_THROWS_WITH(read_links_file(path), Catch::Matchers::ContainsSubstring("line 2"));
    fs::remove(path);
}

TEST_CASE("json sidecar round trip", "[io]") {
    const std::string path = temp_path("diffrec_json_test.json");
    nlohmann::ordered_json j;
    j["seed"] = 42;
    j["fraction"] = 0.1;
    j["nested"] = {{"a", 1}};
    write_json_file(path, j);
    CHECK(read_json_file(path) == j);
    fs::remove(path);
}

TEST_CASE("recommendation dump layout", "[io]") {
    const std::string path = temp_path("diffrec_recs_test.tsv");
    std::vector<RecommendationList> lists(2);
    lists[0] = {0, {4, 2}, {0.75, 0.5}};
    lists[1] = {1, {}, {}};
    write_recommendations(path, lists);
    CHECK(slurp(path) == "0\t4\t0.75\t1\n0\t2\t0.5\t2\n");
    fs::remove(path);
}

TEST_CASE("fnv1a digest matches the reference vector", "[io]") {
    CHECK(fnv1a_hex("abc") == "e71fa2190541574b");
    CHECK(fnv1a_hex("") == "cbf29ce484222325");
}

TEST_CASE("canonical config is stable and sensitive", "[io][config]") {
    ExperimentConfig a;
    a.normalize();
    ExperimentConfig b = a;
    CHECK(canonical_config(a) == canonical_config(b));
    CHECK(config_digest(a) == config_digest(b));
    b.threshold = 4;
    CHECK(config_digest(a) != config_digest(b));
}

TEST_CASE("delimiter names resolve", "[io][config]") {
    CHECK(resolve_delimiter("tab") == '\t');
    CHECK(resolve_delimiter("comma") == ',');
    CHECK(resolve_delimiter("|") == '|');
    CHECK_THROWS_AS(resolve_delimiter("nonsense"), std::invalid_argument);
}

TEST_CASE("csv writer emits the declared header and rows", "[io]") {
    const std::string path = temp_path("diffrec_csv_test.csv");
    {
        CsvWriter csv(path, {"x", "y"});
        csv.row({"1", format_double(0.25)});
    }
    CHECK(slurp(path) == "x,y\n1,0.25\n");
    fs::remove(path);
}

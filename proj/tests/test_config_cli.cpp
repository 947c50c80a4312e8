#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "dimcons/dimcons.hpp"

using namespace dimcons;
namespace fs = std::filesystem;

namespace {

std::string expect_config_error(const std::string& text) {
    try {
        parse_config(text);
    } catch (const ConfigError& e) {
        return e.what();
    }
    ADD_FAILURE() << "no ConfigError for " << text;
    return {};
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

class Scratch {
public:
    Scratch() : dir_(fs::temp_directory_path() / ("dimcons_test_" + std::to_string(::getpid()))) {
        fs::create_directories(dir_);
    }
    ~Scratch() { fs::remove_all(dir_); }
    const fs::path& dir() const { return dir_; }
    fs::path write(const std::string& name, const std::string& text) const {
        const auto p = dir_ / name;
        std::ofstream(p) << text;
        return p;
    }

private:
    fs::path dir_;
};

int run_cli(const std::string& args, const std::string& env = "") {
    const std::string cmd = env + " " + DIMCONS_CLI_PATH + " " + args + " > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

} // namespace

TEST(Config, DefaultsAndRoundTrip) {
    const auto c = parse_config(R"({"experiment": "entropy", "measure": {"variant": "noise-mixture", "rho": 0.25}})");
    EXPECT_EQ(c.experiment, "entropy");
    EXPECT_EQ(c.measure.variant, "noise-mixture");
    EXPECT_DOUBLE_EQ(c.measure.rho, 0.25);
    EXPECT_EQ(c.n, ExperimentConfig{}.n);
    EXPECT_EQ(parse_config(serialize_config(c)), c);

    ExperimentConfig all;
    all.experiment = "pivotal";
    all.measure.factor = {3, 0.2};
    all.pivotal_times = {100, 300};
    all.alpha = 0.75;
    all.out = "some, \"odd\" dir";
    EXPECT_EQ(parse_config(serialize_config(all)), all);
}

TEST(Config, FieldErrorsNameTheField) {
    EXPECT_NE(expect_config_error(R"({"experiment": "drift", "trails": 5})").find("config.trails: unknown field"),
              std::string::npos);
    EXPECT_NE(expect_config_error(R"({"measure": {"factor": {"rank": 2, "lazy": 1}}})").find("measure.factor.lazy"),
              std::string::npos);
    EXPECT_NE(expect_config_error(R"({"n": "many"})").find("config.n: has the wrong type"), std::string::npos);
    EXPECT_NE(expect_config_error(R"({"measure": {"factor": {"rank": 40}}})").find("measure.factor.rank"),
              std::string::npos);
    EXPECT_NE(expect_config_error(R"({"measure": {"variant": "mixture"}})").find("measure.variant"), std::string::npos);
    EXPECT_NE(expect_config_error(R"({"experiment": "speed"})").find("config.experiment"), std::string::npos);
    EXPECT_NE(expect_config_error(R"({"alpha": 0})").find("config.alpha"), std::string::npos);
    EXPECT_NE(expect_config_error(R"({"trials": 0})").find("config.trials"), std::string::npos);
    EXPECT_NE(expect_config_error("{not json").find("not valid JSON"), std::string::npos);
    EXPECT_NE(expect_config_error("[1, 2]").find("must be an object"), std::string::npos);
}

TEST(Config, ShippedConfigsParse) {
    std::size_t count = 0;
    for (const auto& e : fs::directory_iterator(fs::path(DIMCONS_SOURCE_DIR) / "configs")) {
        if (e.path().extension() != ".json") continue;
        EXPECT_NO_THROW(load_config(e.path().string())) << e.path();
        ++count;
    }
    EXPECT_GE(count, 7u);
}

TEST(Output, CsvQuotingAndNumbers) {
    EXPECT_EQ(csv_field("plain"), "plain");
    EXPECT_EQ(csv_field("a,b"), "\"a,b\"");
    EXPECT_EQ(csv_field("say \"hi\""), "\"say \"\"hi\"\"\"");
    EXPECT_EQ(csv_field("two\nlines"), "\"two\nlines\"");
    EXPECT_EQ(format_number(0.5), "0.5");
    EXPECT_EQ(format_number(-0.0), "0");
    EXPECT_EQ(format_number(1.0 / 3.0), "0.333333333333");
    EXPECT_EQ(format_number(std::nan("")), "nan");

    ResultTable t;
    t.add({"summary", "x, y", 3, 1.5, 0.25, std::nullopt, "closed form", "note \"q\""});
    EXPECT_EQ(to_csv(t), "section,name,index,value,std_error,reference,provenance,note\r\n"
                         "summary,\"x, y\",3,1.5,0.25,,closed form,\"note \"\"q\"\"\"\r\n");
}

TEST(Experiment, DriftRowsCarryProvenance) {
    auto c = parse_config(R"({"experiment": "drift", "measure": {"factor": {"rank": 3}}, "n": 500, "trials": 40})");
    const auto t = run_experiment(c);
    ASSERT_FALSE(t.rows.empty());
    bool referenced = false;
    for (const auto& r : t.rows) {
        EXPECT_FALSE(r.provenance.empty()) << r.name;
        if (r.reference) referenced = true;
    }
    EXPECT_TRUE(referenced);
}

TEST(Experiment, NoiseMixturePivotalReportsNoCertificate) {
    auto c = parse_config(R"({"experiment": "pivotal", "measure": {"variant": "noise-mixture", "rho": 0.5}, "trials": 5})");
    EXPECT_THROW(run_experiment(c), NoCertificate);
}

TEST(Cli, RunIsByteIdenticalAcrossRunsAndThreads) {
    Scratch s;
    const auto cfg = s.write("cfg.json", R"({"experiment": "entropy", "method": "mc-plugin",
        "measure": {"variant": "noise-mixture", "rho": 0.5}, "n": 6, "trials": 300, "seed": 4})");
    const std::string base = "run --config " + cfg.string() + " --out ";
    ASSERT_EQ(run_cli(base + (s.dir() / "a").string(), "DIMCONS_THREADS=1"), 0);
    ASSERT_EQ(run_cli(base + (s.dir() / "b").string(), "DIMCONS_THREADS=1"), 0);
    ASSERT_EQ(run_cli(base + (s.dir() / "c").string(), "DIMCONS_THREADS=3"), 0);
    const auto a = slurp(s.dir() / "a" / "entropy.csv");
    EXPECT_FALSE(a.empty());
    EXPECT_EQ(a, slurp(s.dir() / "b" / "entropy.csv"));
    EXPECT_EQ(a, slurp(s.dir() / "c" / "entropy.csv"));
    const auto meta = nlohmann::json::parse(slurp(s.dir() / "a" / "entropy.json"));
    EXPECT_EQ(meta.at("config").at("seed"), 4);
    EXPECT_EQ(meta.at("version"), kToolVersion);
}

TEST(Cli, SeedOverrideChangesResults) {
    Scratch s;
    const auto cfg = s.write("cfg.json", R"({"experiment": "drift", "n": 200, "trials": 50})");
    ASSERT_EQ(run_cli("run --config " + cfg.string() + " --out " + (s.dir() / "a").string()), 0);
    ASSERT_EQ(run_cli("run --config " + cfg.string() + " --seed 9 --out " + (s.dir() / "b").string()), 0);
    EXPECT_NE(slurp(s.dir() / "a" / "drift.csv"), slurp(s.dir() / "b" / "drift.csv"));
}

TEST(Cli, ExitCodes) {
    Scratch s;
    EXPECT_EQ(run_cli("run --config " + s.write("bad.json", R"({"bogus": 1})").string()), 2);
    EXPECT_EQ(run_cli("run --config " + s.write("pv.json", R"({"experiment": "pivotal",
        "measure": {"variant": "noise-mixture"}, "trials": 2, "out": ")" + (s.dir() / "pv").string() + "\"}").string()), 3);
    EXPECT_NE(run_cli("run --config /nonexistent/file.json"), 0);
    EXPECT_NE(run_cli("frobnicate"), 0);
}

TEST(SelfTest, FastSuitePasses) {
    const auto r = fast_self_test();
    for (const auto& c : r.checks) EXPECT_TRUE(c.passed) << c.name << ": " << c.detail;
    EXPECT_TRUE(r.passed());
}

TEST(SelfTest, CorruptedCylinderMassIsCaught) {
    const CylinderMassFn corrupted = [](int rank, const Word& w) {
        return exact_cylinder_mass(rank, w) * (w.length() > 3 ? 1.01 : 1.0);
    };
    const auto r = fast_self_test(corrupted);
    EXPECT_FALSE(r.passed());
    EXPECT_FALSE(r.checks.front().passed) << r.checks.front().detail;
}

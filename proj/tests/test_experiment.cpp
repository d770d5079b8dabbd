#include <twistlab/experiment.hpp>

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace twistlab;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in.good());
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

fs::path fresh_dir(const std::string& name) {
    fs::path dir = fs::temp_directory_path() / "twistlab_test" / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

} // namespace

TEST_SUITE("experiment") {

    TEST_CASE("config parsing and schema validation") {
        auto cfgs = parse_experiment_configs(demo_config("axioms"));
        REQUIRE(cfgs.size() == 1);
        CHECK(cfgs[0].kind == "axioms");
        CHECK(cfgs[0].seed == 1);
        CHECK(cfgs[0].strings.at("map") == "kp");
        CHECK(cfgs[0].numbers.at("samples") == 10000.0);

        // defaults fill in
        auto short_cfg = parse_experiment_configs(
            "kind = \"axioms\"\nseed = 3\noutput_dir = \"x\"\n[parameters]\nmap = \"kp\"\n");
        CHECK(short_cfg[0].numbers.at("dim_in") == 2.0);

        // seed is mandatory
        CHECK_THROWS_AS(parse_experiment_configs("kind = \"axioms\"\noutput_dir = \"x\"\n"),
                        ConfigError);
        // unknown parameter
        CHECK_THROWS_AS(
            parse_experiment_configs("kind = \"axioms\"\nseed = 1\noutput_dir = \"x\"\n"
                                     "[parameters]\nmap = \"kp\"\nbogus = 3\n"),
            ConfigError);
        // unknown kind
        CHECK_THROWS_AS(
            parse_experiment_configs("kind = \"frobnicate\"\nseed = 1\noutput_dir = \"x\"\n"),
            ConfigError);

        // batch form
        auto batch = parse_experiment_configs(
            "[[experiment]]\nkind = \"axioms\"\nseed = 1\noutput_dir = \"a\"\n"
            "[experiment.parameters]\nmap = \"kp\"\n"
            "[[experiment]]\nkind = \"ext_algebra\"\nseed = 2\noutput_dir = \"b\"\n"
            "[experiment.parameters]\ntrials = 2\npairs = 1\n");
        REQUIRE(batch.size() == 2);
        CHECK(batch[1].numbers.at("trials") == 2.0);

        for (const char* kind :
             {"axioms", "twisted_norm", "ext_algebra", "enflo_growth", "grouprep_roundtrip"})
            CHECK(parse_experiment_configs(demo_config(kind)).size() == 1);
    }

    TEST_CASE("axioms experiment writes reproducible, verifiable artifacts") {
        fs::path dir = fresh_dir("axioms");
        ExperimentConfig cfg;
        cfg.kind = "axioms";
        cfg.seed = 5;
        cfg.output_dir = dir.string();
        cfg.strings["map"] = "kp";
        cfg.numbers["samples"] = 500;
        run_experiment(cfg);

        CHECK(fs::exists(dir / "results.csv"));
        CHECK(fs::exists(dir / "manifest.json"));
        CHECK(fs::exists(dir / "axiom_scan.json"));
        CHECK(fs::exists(dir / "plot.svg"));

        std::string csv1 = slurp(dir / "results.csv");
        CHECK(csv1.rfind("experiment,parameters,value,certificate\n", 0) == 0);

        run_experiment(cfg); // byte-identical on re-run
        CHECK(slurp(dir / "results.csv") == csv1);

        std::string msg;
        CHECK(verify_certificate_file((dir / "axiom_scan.json").string(), &msg) == 0);

        // tampering is caught
        std::string cert = slurp(dir / "axiom_scan.json");
        auto pos = cert.find("\"axiom5_ratio\":");
        REQUIRE(pos != std::string::npos);
        cert.insert(cert.find(':', pos) + 2, "9");
        std::ofstream(dir / "tampered.json") << cert;
        CHECK(verify_certificate_file((dir / "tampered.json").string(), &msg) == 4);
    }

    TEST_CASE("ext_algebra experiment produces congruence certificates") {
        fs::path dir = fresh_dir("ext");
        ExperimentConfig cfg;
        cfg.kind = "ext_algebra";
        cfg.seed = 7;
        cfg.output_dir = dir.string();
        cfg.numbers["trials"] = 2;
        cfg.numbers["pairs"] = 1;
        cfg.numbers["dim_max"] = 4;
        run_experiment(cfg);

        std::string msg;
        CHECK(verify_certificate_file((dir / "pushout_identity_0.json").string(), &msg) == 0);
        CHECK(verify_certificate_file((dir / "baer_commutativity_0.json").string(), &msg) == 0);
    }

    TEST_CASE("batch run executes all experiments") {
        fs::path a = fresh_dir("batch_a"), b = fresh_dir("batch_b");
        std::ostringstream toml;
        toml << "[[experiment]]\nkind = \"axioms\"\nseed = 1\noutput_dir = \"" << a.string()
             << "\"\n[experiment.parameters]\nmap = \"kp\"\nsamples = 200\n"
             << "[[experiment]]\nkind = \"twisted_norm\"\nseed = 2\noutput_dir = \"" << b.string()
             << "\"\n[experiment.parameters]\nmap = \"kp\"\nsamples = 20\n";
        auto cfgs = parse_experiment_configs(toml.str());
        run_experiments(cfgs);
        CHECK(fs::exists(a / "results.csv"));
        CHECK(fs::exists(b / "results.csv"));

        std::string msg;
        CHECK(verify_certificate_file((b / "twisted_norm_check.json").string(), &msg) == 0);
    }

    TEST_CASE("grouprep experiment round trips and verifies") {
        fs::path dir = fresh_dir("grouprep");
        ExperimentConfig cfg;
        cfg.kind = "grouprep_roundtrip";
        cfg.seed = 9;
        cfg.output_dir = dir.string();
        cfg.numbers["samples"] = 16;
        run_experiment(cfg);

        std::string csv = slurp(dir / "results.csv");
        CHECK(csv.find("equivalence_residual") != std::string::npos);
        std::string msg;
        CHECK(verify_certificate_file((dir / "roundtrip_rerun.json").string(), &msg) == 0);
    }

    TEST_CASE("run_config_file maps failures to exit codes") {
        fs::path dir = fresh_dir("codes");
        fs::path good = dir / "good.toml";
        std::ofstream(good) << "kind = \"axioms\"\nseed = 1\noutput_dir = \"" << (dir / "out").string()
                            << "\"\n[parameters]\nmap = \"kp\"\nsamples = 100\n";
        std::string msg;
        CHECK(run_config_file(good.string(), &msg) == 0);

        fs::path bad = dir / "bad.toml";
        std::ofstream(bad) << "kind = \"axioms\"\nseed = 1\n";
        CHECK(run_config_file(bad.string(), &msg) == 2);

        fs::path broken_map = dir / "broken.toml";
        std::ofstream(broken_map) << "kind = \"axioms\"\nseed = 1\noutput_dir = \""
                                  << (dir / "out2").string()
                                  << "\"\n[parameters]\nmap = \"linear([[1,2,3]])\"\n";
        CHECK(run_config_file(broken_map.string(), &msg) == 3);

        CHECK(run_config_file((dir / "missing.toml").string(), &msg) == 2);
    }
}

// twistlab command line: runs declarative experiments, re-verifies stored
// certificates, and inspects map DSL expressions.
//
// Exit codes: 0 success, 2 config error, 3 numerical failure,
// 4 verification mismatch.

#include <twistlab/experiment.hpp>

#include <CLI11.hpp>

#include <iostream>

using namespace twistlab;

int main(int argc, char** argv) {
    CLI::App app{"twistlab: finite-dimensional laboratory for twisted sums of normed spaces"};
    app.require_subcommand(1);

    std::string run_path;
    auto* run_cmd = app.add_subcommand("run", "run experiments from a TOML config (single or batch)");
    run_cmd->add_option("config", run_path, "config file")->required();

    std::string verify_path;
    auto* verify_cmd = app.add_subcommand("verify", "re-check a stored certificate");
    verify_cmd->add_option("certificate", verify_path, "certificate JSON file")->required();

    std::string map_text, domain_json, codomain_json;
    int dim_in = 2, dim_out = 2;
    auto* print_cmd = app.add_subcommand("print-map", "parse, validate and pretty-print a map");
    print_cmd->add_option("map", map_text, "map DSL text")->required();
    print_cmd->add_option("--domain", domain_json, "domain space JSON");
    print_cmd->add_option("--codomain", codomain_json, "codomain space JSON");
    print_cmd->add_option("--dim-in", dim_in, "domain dimension (plain l2), default 2");
    print_cmd->add_option("--dim-out", dim_out, "codomain dimension (plain l2), default 2");

    std::string demo_kind;
    auto* demo_cmd = app.add_subcommand("demo", "emit a reference config for an experiment kind");
    demo_cmd->add_option("kind", demo_kind,
                         "axioms | twisted_norm | ext_algebra | enflo_growth | grouprep_roundtrip")
        ->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (*run_cmd) {
            std::string message;
            int code = run_config_file(run_path, &message);
            if (code != 0) std::cerr << "error: " << message << "\n";
            return code;
        }
        if (*verify_cmd) {
            std::string message;
            int code = verify_certificate_file(verify_path, &message);
            std::cout << message << "\n";
            return code;
        }
        if (*print_cmd) {
            NormedSpace dom = domain_json.empty() ? NormedSpace::l2(dim_in)
                                                  : NormedSpace::from_json(domain_json);
            NormedSpace cod = codomain_json.empty() ? NormedSpace::l2(dim_out)
                                                    : NormedSpace::from_json(codomain_json);
            HomMap h = parse_map(map_text, dom, cod);
            std::cout << h.print() << "\n";
            std::cout << "domain:   " << dom.to_json() << "\n";
            std::cout << "codomain: " << cod.to_json() << "\n";
            std::cout << "linear:   " << (h.is_linear() ? "yes" : "no") << "\n";
            std::cout << "norm est: " << map_norm(h, 2000, 1) << " (2000 sphere samples)\n";
            return 0;
        }
        if (*demo_cmd) {
            std::cout << demo_config(demo_kind);
            return 0;
        }
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const ParseError& e) {
        std::cerr << "parse error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
    return 0;
}

#include <cstdlib>
#include <filesystem>
#include <functional>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "bundled.hpp"
#include "scorelab/app/runner.hpp"
#include "scorelab/app/svg.hpp"
#include "scorelab/core/parallel.hpp"

namespace fs = std::filesystem;
using namespace scorelab;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitOther = 1;
constexpr int kExitValidation = 2;
constexpr int kExitNumeric = 3;

// A config argument is a file path or the name of a bundled scenario.
Scenario resolve_scenario(const std::string& arg) {
    if (fs::exists(arg)) return load_scenario(arg);
    for (const auto& b : bundled::scenarios())
        if (b.name == arg) {
            Json doc;
            try {
                doc = Json::parse(b.json);
            } catch (const Json::parse_error& e) {
                throw ParseError(0, std::string(b.name) + ": " + e.what());
            }
            return parse_scenario(doc, ".");
        }
    throw ParseError(0, "'" + arg + "' is neither a file nor a bundled scenario (see list-scenarios)");
}

fs::path output_root(const std::string& flag) {
    if (!flag.empty()) return flag;
    if (const char* env = std::getenv("SCORELAB_OUTPUT_DIR"); env && *env) return env;
    return fs::current_path();
}

std::optional<Vector> parse_direction(const std::string& text) {
    if (text.empty()) return std::nullopt;
    std::vector<double> v;
    std::stringstream ss(text);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
        try {
            v.push_back(std::stod(cell));
        } catch (const std::exception&) {
            throw ParseError(0, "--direction: '" + cell + "' is not a number");
        }
    }
    Vector out(static_cast<Eigen::Index>(v.size()));
    for (std::size_t i = 0; i < v.size(); ++i) out(static_cast<Eigen::Index>(i)) = v[i];
    return out;
}

int guarded(const std::function<void()>& body) {
    try {
        body();
        return kExitOk;
    } catch (const ValidationError& e) {
        std::cerr << "validation failed:\n";
        for (const auto& p : e.problems()) std::cerr << "  " << p << '\n';
        return kExitValidation;
    } catch (const ParseError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitValidation;
    } catch (const DomainError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitValidation;
    } catch (const UnsupportedError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitValidation;
    } catch (const NumericError& e) {
        std::cerr << "numeric failure: " << e.what() << '\n';
        return kExitNumeric;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitOther;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Exact-score diffusion laboratory: entropy rates, fixed-point trees, divergence and games"};
    app.require_subcommand(1);
    unsigned threads = 0;
    app.add_option("--threads", threads, "Worker threads (default: hardware concurrency)")->check(CLI::Range(1u, 1024u));
    app.set_version_flag("--version", std::string(kVersion));

    std::string config, out_dir, input, output, direction;
    auto* run = app.add_subcommand("run", "Run a scenario file or bundled scenario");
    run->add_option("config", config, "Config path or bundled scenario name")->required();
    run->add_option("-o,--output-dir", out_dir, "Output root (default: $SCORELAB_OUTPUT_DIR or cwd)");

    auto* render = app.add_subcommand("render", "Render a profile CSV or tree JSON as SVG");
    render->add_option("input", input, "profile .csv or tree .json produced by run")->required();
    render->add_option("output", output, "SVG path")->required();
    render->add_option("--direction", direction, "Projection direction for trees, comma separated");

    auto* list = app.add_subcommand("list-scenarios", "List bundled scenarios");
    auto* validate = app.add_subcommand("validate", "Validate a config without running it");
    validate->add_option("config", config, "Config path or bundled scenario name")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitValidation;
    }
    if (threads > 0) set_thread_count(threads);

    if (*list)
        return guarded([] {
            for (const auto& b : bundled::scenarios()) std::cout << b.name << '\n';
        });
    if (*validate)
        return guarded([&] {
            const Scenario sc = resolve_scenario(config);
            std::cout << sc.name << ": ok (" << sc.outputs.size() << " outputs, config hash "
                      << hex64(config_hash(sc)) << ")\n";
        });
    if (*run)
        return guarded([&] {
            const Scenario sc = resolve_scenario(config);
            const RunResult r = run_scenario(sc, output_root(out_dir));
            for (const auto& f : r.files) std::cout << f.string() << '\n';
        });
    if (*render)
        return guarded([&] {
            const std::string svg = render_svg_file(input, parse_direction(direction));
            const fs::path target(output);
            OutputSet files(target.has_parent_path() ? target.parent_path() : fs::path("."));
            files.write(target.filename().string(), svg);
            files.commit();
        });
    return kExitOther;
}

#include <cstdio>
#include <exception>
#include <string>

#include <CLI11.hpp>

#include "bls/harness.hpp"

namespace {

constexpr const char* kExperiments[] = {"thermo",  "soup",     "conditioned",
                                        "capacity", "interlace", "theorem1",
                                        "bigjump", "hitting"};

int run_experiment(const std::string& name, const std::string& config_path,
                   uint64_t seed, bool seed_set, const std::string& out_dir) {
    bls::ExperimentConfig cfg;
    cfg.experiment = name;
    if (!config_path.empty())
        cfg.kv = bls::ExperimentConfig::parse_kv_file(config_path);
    cfg.seed = seed_set ? seed : static_cast<uint64_t>(cfg.get_long("seed", 1));
    cfg.out_dir = out_dir;

    const bls::ResultRecord rec = bls::run(cfg);
    std::printf("experiment %s  config %016llx\n", rec.experiment.c_str(),
                static_cast<unsigned long long>(rec.config_hash));
    for (const auto& cr : rec.criteria)
        std::printf("  [%s] %s: value=%.6g expected=%.6g  (%s)\n",
                    cr.passed ? "pass" : "FAIL", cr.name.c_str(), cr.value,
                    cr.expected, cr.detail.c_str());
    if (!rec.summary_json.empty()) std::printf("%s\n", rec.summary_json.c_str());
    return rec.all_passed() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Bosonic loop soup / random interlacements experiment runner"};
    app.require_subcommand(1);

    std::string config_path, out_dir;
    uint64_t seed = 1;
    bool seed_set = false;
    std::string chosen;
    for (const char* name : kExperiments) {
        CLI::App* sub = app.add_subcommand(name, std::string("run the ") + name +
                                                     " experiment");
        sub->add_option("--config", config_path, "flat key=value config file");
        sub->add_option("--seed", seed, "master seed (overrides the config)")
            ->each([&](const std::string&) { seed_set = true; });
        sub->add_option("--out", out_dir, "output directory for CSV/JSON");
        sub->callback([&, name] { chosen = name; });
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        return run_experiment(chosen, config_path, seed, seed_set, out_dir);
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "configuration error: %s\n", e.what());
        return 2;
    } catch (const std::domain_error& e) {
        std::fprintf(stderr, "configuration error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
}

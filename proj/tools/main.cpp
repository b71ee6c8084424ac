#include "popdyn/runner.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

namespace {

std::string read_file(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("cannot read config file " + path);
    std::stringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

struct CommonArgs {
    std::string config;
    std::string out_dir = "out";
    bool svg = false;
    bool events = false;
    std::uint64_t seed = 0;
    bool seed_set = false;
    int replicas = 0;
    double t_end = 0.0;
    std::string vessel;
};

void add_common(CLI::App* cmd, CommonArgs& args, bool needs_config) {
    auto* copt = cmd->add_option("--config", args.config, "scenario config file");
    if (needs_config) copt->required();
    cmd->add_option("--out", args.out_dir, "output directory");
    cmd->add_flag("--svg", args.svg, "emit a self-contained SVG plot");
    cmd->add_flag("--events", args.events, "emit events.csv (ibm only)");
    cmd->add_option("--seed", args.seed, "override the scenario seed")
        ->each([&args](const std::string&) { args.seed_set = true; });
    cmd->add_option("--replicas", args.replicas, "override the replica count (ibm)");
    cmd->add_option("--t-end", args.t_end, "override the final time");
    cmd->add_option("--vessel", args.vessel, "override the counting interval lo:hi (ibm)");
}

int run_with(popdyn::Scenario scenario, const CommonArgs& args) {
    if (args.replicas > 0) scenario.replicas = args.replicas;
    if (args.t_end > 0.0) scenario.t_end = args.t_end;
    if (!args.vessel.empty()) {
        const auto colon = args.vessel.find(':');
        if (colon == std::string::npos)
            throw std::runtime_error("--vessel expects lo:hi");
        scenario.vessel_lo = std::stod(args.vessel.substr(0, colon));
        scenario.vessel_hi = std::stod(args.vessel.substr(colon + 1));
    }
    popdyn::RunOptions opt;
    opt.svg = args.svg;
    opt.events = args.events;
    if (args.seed_set) opt.seed_override = args.seed;
    const int code = popdyn::run_scenario(scenario, args.out_dir, opt);
    if (code == popdyn::kExitDiverged)
        std::cerr << "note: scenario '" << scenario.name
                  << "' diverged (documented regime); outputs and metadata written\n";
    return code;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"popdyn: spatial birth-death population dynamics toolkit"};
    app.require_subcommand(1);

    const std::vector<std::pair<std::string, popdyn::ScenarioKind>> kinds = {
        {"riccati", popdyn::ScenarioKind::Riccati},
        {"kinetic", popdyn::ScenarioKind::Kinetic},
        {"ibm", popdyn::ScenarioKind::Ibm},
        {"pair", popdyn::ScenarioKind::Pair},
        {"occupation", popdyn::ScenarioKind::Occupation},
    };

    std::vector<std::unique_ptr<CommonArgs>> arg_blocks;
    for (const auto& [name, kind] : kinds) {
        auto* cmd = app.add_subcommand(name, "run a " + name + " scenario from --config");
        arg_blocks.push_back(std::make_unique<CommonArgs>());
        CommonArgs* args = arg_blocks.back().get();
        add_common(cmd, *args, true);
        const popdyn::ScenarioKind expected = kind;
        cmd->callback([args, expected]() {
            popdyn::Scenario s = popdyn::parse_scenario(read_file(args->config));
            if (s.kind != expected)
                throw std::runtime_error("config kind '" + popdyn::to_string(s.kind) +
                                         "' does not match the subcommand");
            std::exit(run_with(s, *args));
        });
    }

    auto* preset = app.add_subcommand("preset", "named scenario presets");
    preset->require_subcommand(1);
    preset->add_subcommand("list", "list available presets")->callback([]() {
        for (const auto& name : popdyn::preset_names()) std::cout << name << "\n";
        std::exit(0);
    });
    auto* preset_run = preset->add_subcommand("run", "run a preset by name");
    std::string preset_name;
    preset_run->add_option("name", preset_name, "preset name")->required();
    auto preset_args = std::make_unique<CommonArgs>();
    add_common(preset_run, *preset_args, false);
    CommonArgs* pargs = preset_args.get();
    preset_run->callback([pargs, &preset_name]() {
        popdyn::Scenario s = popdyn::make_preset(preset_name);
        std::exit(run_with(s, *pargs));
    });

    try {
        CLI11_PARSE(app, argc, argv);
    } catch (const std::exception& ex) {
        std::cerr << "error: " << ex.what() << "\n";
        return 1;
    }
    return 0;
}

// Command-line front end wiring the toolkit into reproducible pipelines.
//
//   stmid simulate --config presets/sim.json --out runs/sim --noise
//   stmid pretrain --config presets/sim.json --out runs/sim --ratio 0.3
//   stmid finetune --config presets/sim.json --out runs/sim
//   stmid denoise  --config presets/noisy.json --out runs/noisy
//   stmid evaluate --config presets/sim.json --out runs/sim
//   stmid tune     --config presets/sim.json --out runs/sim --trials 4
//   stmid sweep-forces --config presets/sim.json --out runs/sim

#include <cstdint>
#include <iostream>
#include <string>

#include "CLI11.hpp"

#include "stmid/pipeline.hpp"

namespace {

struct CommonArgs {
    std::string config_path;
    std::string out_dir;
    std::uint64_t seed = 0;
    bool seed_set = false;
    double ratio = 0.0;
    bool ratio_set = false;
    bool with_noise = false;
    int trials = 0;
    bool trials_set = false;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
    cmd->add_option("--config", args.config_path, "Experiment config JSON")->required();
    cmd->add_option("--out", args.out_dir, "Output directory (overrides the config)");
    cmd->add_option("--seed", args.seed, "Global seed (overrides the config)")
        ->each([&](const std::string&) { args.seed_set = true; });
    cmd->add_option("--ratio", args.ratio, "Training-set ratio in (0, 1]")
        ->each([&](const std::string&) { args.ratio_set = true; });
    cmd->add_flag("--noise", args.with_noise, "Also write a noise-injected dataset");
    cmd->add_option("--trials", args.trials, "Random-search trial count")
        ->each([&](const std::string&) { args.trials_set = true; });
}

stmid::pipeline::ExperimentConfig resolve(const CommonArgs& args) {
    auto cfg = stmid::pipeline::load_config(args.config_path);
    stmid::pipeline::Overrides o;
    if (args.seed_set) o.seed = args.seed;
    if (!args.out_dir.empty()) o.out_dir = args.out_dir;
    if (args.ratio_set) o.ratio = args.ratio;
    if (args.trials_set) o.trials = args.trials;
    o.with_noise = args.with_noise;
    stmid::pipeline::apply(cfg, o);
    std::cout << "resolved config: " << stmid::pipeline::describe(cfg) << "\n";
    return cfg;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Single-track model parameter estimation toolkit"};
    app.require_subcommand(1);

    CommonArgs args;
    using Runner = void (*)(const stmid::pipeline::ExperimentConfig&);
    struct Cmd {
        const char* name;
        const char* help;
        Runner run;
    };
    const Cmd cmds[] = {
        {"simulate", "Generate a dataset with known ground truth", stmid::pipeline::cmd_simulate},
        {"pretrain", "Supervised pretraining of the estimator", stmid::pipeline::cmd_pretrain},
        {"finetune", "Layer-frozen hybrid fine-tuning", stmid::pipeline::cmd_finetune},
        {"denoise", "Train the covariance-emitting filter and export the filtered dataset",
         stmid::pipeline::cmd_denoise},
        {"evaluate", "Metrics, coefficient estimates and force curves",
         stmid::pipeline::cmd_evaluate},
        {"tune", "Seeded random hyperparameter search", stmid::pipeline::cmd_tune},
        {"sweep-forces", "Lateral force response over a slip-angle grid",
         stmid::pipeline::cmd_sweep_forces},
    };

    Runner selected = nullptr;
    for (const auto& c : cmds) {
        CLI::App* sub = app.add_subcommand(c.name, c.help);
        add_common(sub, args);
        sub->callback([&selected, &c]() { selected = c.run; });
    }

    CLI11_PARSE(app, argc, argv);

    try {
        selected(resolve(args));
    } catch (const stmid::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "unexpected error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}

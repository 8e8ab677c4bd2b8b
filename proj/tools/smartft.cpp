// Copyright (c) 2026 The smartft Authors
// SPDX-License-Identifier: Apache-2.0

#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "smart/commands.hpp"
#include "smart/config.hpp"

namespace {

struct CommonFlags {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::string out;
    std::vector<std::string> set;
};

void add_common(CLI::App* cmd, CommonFlags& flags) {
    cmd->add_option("--config", flags.config, "sectioned key=value config file");
    cmd->add_option("--seed", flags.seed, "run seed (smart.seed)");
    cmd->add_option("--out", flags.out, "output directory (run.out)");
    cmd->add_option("--set", flags.set, "override, section.key=value; repeatable");
}

smart::RunConfig resolve(const CommonFlags& flags) {
    smart::Overrides overrides;
    for (const auto& s : flags.set) overrides.push_back(smart::parse_override(s));
    if (flags.seed) overrides.emplace_back("smart.seed", std::to_string(*flags.seed));
    if (!flags.out.empty()) overrides.emplace_back("run.out", flags.out);
    std::optional<std::filesystem::path> file;
    if (!flags.config.empty()) file = flags.config;
    return smart::load_run_config(file, overrides);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"smartft: adversarially regularized fine-tuning with a proximal trust region"};
    app.require_subcommand(1);

    CommonFlags flags;
    std::string checkpoint;
    std::string resume;

    auto* gen = app.add_subcommand("gen-data", "write the configured train/test datasets");
    auto* train = app.add_subcommand("train", "train one run");
    train->add_option("--resume", resume, "continue from a checkpoint with training state");
    auto* eval = app.add_subcommand("eval", "accuracy and agreement of a checkpoint");
    auto* probe = app.add_subcommand("probe", "local smoothness probe of a checkpoint");
    auto* boundary = app.add_subcommand("boundary", "decision-boundary grid of a 2-input checkpoint");
    auto* sweep = app.add_subcommand("sweep", "method x lambda_s x mu x split x seed grid");
    for (auto* cmd : {gen, train, eval, probe, boundary, sweep}) add_common(cmd, flags);
    for (auto* cmd : {eval, probe, boundary}) cmd->add_option("--checkpoint", checkpoint, "checkpoint file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& err) {
        return app.exit(err);
    }

    try {
        const smart::RunConfig config = resolve(flags);
        if (*gen) {
            smart::cmd_gen_data(config);
        } else if (*train) {
            std::optional<std::filesystem::path> from;
            if (!resume.empty()) from = resume;
            smart::cmd_train(config, from);
        } else if (*eval) {
            smart::cmd_eval(config, checkpoint);
        } else if (*probe) {
            smart::cmd_probe(config, checkpoint);
        } else if (*boundary) {
            smart::cmd_boundary(config, checkpoint);
        } else if (*sweep) {
            smart::cmd_sweep(config);
        }
    } catch (const std::exception& err) {
        std::cerr << smart::error_line(err) << '\n';
        return smart::exit_code_for(err);
    }
    return 0;
}

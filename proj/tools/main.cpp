#include <CLI11.hpp>
#include <functional>
#include <iostream>
#include <map>

#include "tcpvad/error.hpp"
#include "tcpvad/pipeline.hpp"

using namespace tcpvad;

namespace {

struct Options {
    std::string config;
    std::string run_dir = "run";
    std::vector<std::string> overrides;
    bool json = false;
};

PipelineConfig build_config(const Options& opt) {
    auto cfg = opt.config.empty() ? PipelineConfig{} : PipelineConfig::load(opt.config);
    for (const auto& kv : opt.overrides) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos) throw Error(Errc::ConfigParseError, "--set expects key=value, got '" + kv + "'");
        cfg.set(kv.substr(0, eq), kv.substr(eq + 1));
    }
    cfg.validate();
    return cfg;
}

void print_metrics(const pipeline::Metrics& m, bool json) {
    if (json)
        std::cout << m.to_json() << "\n";
    else
        std::cout << m.to_text();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Video anomaly detection with temporal CNN patterns"};
    app.require_subcommand(1);
    Options opt;

    using Stage = std::function<void(const PipelineConfig&, const std::filesystem::path&)>;
    const std::vector<std::tuple<std::string, std::string, Stage>> stages = {
        {"synth", "generate the synthetic video and ground truth", pipeline::stage_synth},
        {"features", "extract per-frame feature maps", pipeline::stage_features},
        {"itq-train", "learn the hash model (or k-means codebook)", pipeline::stage_itq_train},
        {"encode", "binary-quantize feature maps into codes", pipeline::stage_encode},
        {"tcp", "score blocks with the TCP measure", pipeline::stage_tcp},
        {"flow", "compute optical-flow block scores", pipeline::stage_flow},
        {"fuse", "fuse flow and TCP maps", pipeline::stage_fuse},
    };

    std::map<CLI::App*, Stage> handlers;
    auto add_common = [&](CLI::App* sub) {
        sub->add_option("-c,--config", opt.config, "config file (flat key = value)");
        sub->add_option("-r,--run-dir", opt.run_dir, "run directory for artifacts");
        sub->add_option("-s,--set", opt.overrides, "override a config key (key=value)")->allow_extra_args(false);
        sub->add_flag("--json", opt.json, "print a JSON summary");
    };
    for (const auto& [name, help, fn] : stages) {
        auto* sub = app.add_subcommand(name, help);
        add_common(sub);
        handlers[sub] = fn;
    }
    auto* eval_cmd = app.add_subcommand("eval", "frame- and pixel-level ROC evaluation");
    add_common(eval_cmd);
    auto* run_cmd = app.add_subcommand("run", "run every stage in order");
    add_common(run_cmd);
    auto* config_cmd = app.add_subcommand("config", "print the effective configuration");
    add_common(config_cmd);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 1;
    }

    try {
        const auto cfg = build_config(opt);
        if (config_cmd->parsed()) {
            std::cout << cfg.to_text();
            return 0;
        }
        pipeline::RunDirLock lock(opt.run_dir);
        if (run_cmd->parsed()) {
            print_metrics(pipeline::run_all(cfg, opt.run_dir), opt.json);
        } else if (eval_cmd->parsed()) {
            print_metrics(pipeline::stage_eval(cfg, opt.run_dir), opt.json);
        } else {
            for (const auto& [sub, fn] : handlers) {
                if (sub->parsed()) fn(cfg, opt.run_dir);
            }
        }
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return is_io_error(e.code()) ? 2 : 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}

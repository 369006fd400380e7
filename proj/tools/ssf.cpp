// Command-line front end for the story-frame pipeline.

#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <spdlog/spdlog.h>

#include "ssf/config.hpp"
#include "ssf/errors.hpp"
#include "ssf/pipeline.hpp"

namespace fs = std::filesystem;

namespace {

struct Options {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::string out;
    std::string gateway;
    std::string stage;
    std::string record;
    bool force = false;
    bool verbose = false;
    bool quiet = false;
};

int run(const std::string& command, const Options& o) {
    if (o.verbose) spdlog::set_level(spdlog::level::debug);
    if (o.quiet) spdlog::set_level(spdlog::level::warn);

    const fs::path config_path = o.config;
    if (!fs::exists(config_path)) throw ssf::ValidationError("config file not found: " + o.config);
    auto doc = ssf::read_json(config_path);
    if (o.seed) doc["rng_seed"] = *o.seed;
    if (!o.gateway.empty()) doc["gateway"]["kind"] = o.gateway;
    auto cfg = ssf::run_config_from_json(doc, fs::absolute(config_path).parent_path());
    const fs::path out = o.out.empty() ? cfg.resolve(cfg.output_dir) : fs::path(o.out);

    ssf::Pipeline pipeline(cfg, out);
    if (command == "run") {
        if (o.stage.empty()) pipeline.run_all(o.force);
        else pipeline.run_stage(o.stage, o.force);
    } else {
        pipeline.run_stage(command, o.force);
    }
    if (!o.record.empty()) {
        if (!pipeline.mock()) throw ssf::ValidationError("--record-transcript needs the mock gateway");
        auto served = pipeline.mock()->served();
        ssf::write_transcript(o.record, served);
        spdlog::info("recorded {} transcript entries to {}", served.size(), o.record);
    }
    spdlog::info("backend attempts this run: {}", pipeline.backend_attempts());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Story frame pipeline: ingest, curate, summarize, generate, classify, analyze, validate, report"};
    app.require_subcommand(1);
    Options o;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", o.config, "Run config (JSON)")->required();
        sub->add_option("--seed", o.seed, "Override rng_seed");
        sub->add_option("--out", o.out, "Output directory (default: output_dir from the config)");
        sub->add_option("--gateway", o.gateway, "Backend kind")->check(CLI::IsMember({"mock", "http"}));
        sub->add_option("--record-transcript", o.record, "Write the mock replies served to this JSONL file");
        sub->add_flag("--force", o.force, "Re-run even when the stage is up to date");
        sub->add_flag("-v,--verbose", o.verbose, "Debug logging");
        sub->add_flag("-q,--quiet", o.quiet, "Warnings and errors only");
    };

    const std::vector<std::pair<std::string, std::string>> stages{
        {"ingest", "Build and validate conversation graphs"},
        {"curate", "Apply story filters and build splits"},
        {"summarize", "Summarize conversation and community context"},
        {"generate", "Generate templated inferences"},
        {"classify", "Label inferences with sublabels"},
        {"analyze", "Distributions, NPMI, entropy and community similarity"},
        {"validate", "Quality-filter ratings and score agreement"},
        {"report", "Bundle a run summary"},
    };
    for (const auto& [name, help] : stages) add_common(app.add_subcommand(name, help));
    auto* all = app.add_subcommand("run", "Run every enabled stage, or one with --stage");
    add_common(all);
    all->add_option("--stage", o.stage, "Only this stage")->check(CLI::IsMember(ssf::stage_names()));

    CLI11_PARSE(app, argc, argv);
    const std::string command = app.get_subcommands().front()->get_name();

    try {
        return run(command, o);
    } catch (const ssf::ValidationError& e) {
        spdlog::error("{}", e.what());
        for (const auto& v : e.violations()) spdlog::error("  - {}", v);
        return 2;
    } catch (const ssf::MissingArtifactError& e) {
        spdlog::error("{}", e.what());
        return 3;
    } catch (const ssf::TransportError& e) {
        spdlog::error("backend failure: {}", e.what());
        return 4;
    } catch (const ssf::ProtocolError& e) {
        spdlog::error("backend failure: {}", e.what());
        return 4;
    } catch (const std::exception& e) {
        spdlog::error("{}", e.what());
        return 1;
    }
}

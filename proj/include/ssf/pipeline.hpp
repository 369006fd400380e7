#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "ssf/config.hpp"
#include "ssf/gateway.hpp"
#include "ssf/mock_backend.hpp"
#include "ssf/taxonomy.hpp"

namespace ssf {

struct StageReport {
    std::string stage;
    /// Inputs and config unchanged since the last run; nothing was redone.
    bool cache_hit = false;
    std::vector<std::string> outputs;
};

/// Runs the stages against files under an output directory. Each stage reads
/// the artifacts of earlier stages and records a stamp so that a re-run with
/// unchanged inputs does nothing.
class Pipeline {
public:
    /// Backends default to what the config asks for.
    Pipeline(RunConfig config, std::filesystem::path out_dir, std::shared_ptr<TextBackend> backend = nullptr,
             std::shared_ptr<EmbeddingBackend> embedder = nullptr);

    StageReport run_stage(const std::string& stage, bool force = false);
    /// Every enabled stage in order.
    std::vector<StageReport> run_all(bool force = false);

    const RunConfig& config() const noexcept { return config_; }
    const std::filesystem::path& out_dir() const noexcept { return out_; }
    /// The mock backend when the config selects it, else null.
    std::shared_ptr<MockBackend> mock() const noexcept { return mock_; }
    std::size_t backend_attempts() const;

private:
    std::vector<std::string> ingest();
    std::vector<std::string> curate();
    std::vector<std::string> summarize();
    std::vector<std::string> generate();
    std::vector<std::string> classify();
    std::vector<std::string> analyze();
    std::vector<std::string> validate();
    std::vector<std::string> report();

    std::vector<std::filesystem::path> stage_inputs(const std::string& stage) const;
    const TaxonomyRegistry& registry();
    json provenance(const std::string& stage) const;
    std::vector<std::string> csv_comments(const std::string& stage) const;
    std::filesystem::path artifact(const std::string& rel) const { return out_ / rel; }
    /// Throws MissingArtifactError naming `producer` when `rel` is absent.
    std::filesystem::path require(const std::string& rel, const std::string& producer) const;

    RunConfig config_;
    std::filesystem::path out_;
    std::string config_hash_;
    std::shared_ptr<MockBackend> mock_;
    std::unique_ptr<Gateway> generator_;
    std::unique_ptr<Gateway> classifier_;
    std::shared_ptr<EmbeddingBackend> embedder_;
    std::optional<TaxonomyRegistry> registry_;
};

/// sha256 over every regular file below `dir` (relative path and content),
/// in path order.
std::string directory_hash(const std::filesystem::path& dir);

}  // namespace ssf

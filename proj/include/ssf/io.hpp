#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace ssf {

using json = nlohmann::json;

inline constexpr std::string_view kEngineVersion = "0.3.0";

std::string sha256_hex(std::string_view data);

/// Reads a JSONL file; blank lines and provenance header lines are skipped.
std::vector<json> read_jsonl(const std::filesystem::path& path);
void write_jsonl(const std::filesystem::path& path, const std::vector<json>& rows,
                 const std::optional<json>& provenance = std::nullopt);

json read_json(const std::filesystem::path& path);
void write_json(const std::filesystem::path& path, const json& doc);

std::string read_text(const std::filesystem::path& path);
void write_text(const std::filesystem::path& path, std::string_view text);

/// RFC 4180 style CSV. Lines starting with '#' before the header are comments.
struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    std::optional<std::size_t> column(std::string_view name) const;
};

CsvTable read_csv(const std::filesystem::path& path);
std::string to_csv(const CsvTable& table, const std::vector<std::string>& comments = {});
void write_csv(const std::filesystem::path& path, const CsvTable& table,
               const std::vector<std::string>& comments = {});

/// Fixed-precision formatting used in every CSV so outputs are byte-stable.
std::string format_number(double value, int precision = 6);

/// Seeded generator with platform-independent draws (std distributions are not).
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    /// Uniform integer in [0, n). n must be positive.
    std::uint64_t index(std::uint64_t n);
    /// Uniform double in [0, 1).
    double unit();

    template <typename T>
    void shuffle(std::vector<T>& items) {
        for (std::size_t i = items.size(); i > 1; --i) {
            std::swap(items[i - 1], items[index(i)]);
        }
    }

    std::uint64_t next() { return engine_(); }

private:
    std::mt19937_64 engine_;
};

/// Derives an independent child seed for a named sub-stream.
std::uint64_t derive_seed(std::uint64_t seed, std::string_view stream);

}  // namespace ssf

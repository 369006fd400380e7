#include "ssf/io.hpp"

#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

#include <openssl/evp.h>

#include "ssf/errors.hpp"

namespace ssf {

std::string sha256_hex(std::string_view data) {
    std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
    unsigned int len = 0;
    if (EVP_Digest(data.data(), data.size(), digest.data(), &len, EVP_sha256(), nullptr) != 1) {
        throw Error("sha256 failed");
    }
    static constexpr char kHex[] = "0123456789abcdef";
    std::string out;
    out.reserve(len * 2);
    for (unsigned int i = 0; i < len; ++i) {
        out.push_back(kHex[digest[i] >> 4]);
        out.push_back(kHex[digest[i] & 0xF]);
    }
    return out;
}

std::string read_text(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text(const std::filesystem::path& path, std::string_view text) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + path.string());
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
}

std::vector<json> read_jsonl(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot open " + path.string());
    std::vector<json> rows;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        json row = json::parse(line, nullptr, false);
        if (row.is_discarded()) {
            throw ValidationError(path.string() + ":" + std::to_string(lineno) + ": invalid JSON");
        }
        if (row.is_object() && row.contains("_provenance") && row.size() == 1) continue;
        rows.push_back(std::move(row));
    }
    return rows;
}

void write_jsonl(const std::filesystem::path& path, const std::vector<json>& rows,
                 const std::optional<json>& provenance) {
    std::string text;
    if (provenance) text += json{{"_provenance", *provenance}}.dump() + "\n";
    for (const auto& row : rows) {
        text += row.dump();
        text.push_back('\n');
    }
    write_text(path, text);
}

json read_json(const std::filesystem::path& path) {
    json doc = json::parse(read_text(path), nullptr, false);
    if (doc.is_discarded()) throw ValidationError(path.string() + ": invalid JSON");
    return doc;
}

void write_json(const std::filesystem::path& path, const json& doc) {
    write_text(path, doc.dump(2) + "\n");
}

std::optional<std::size_t> CsvTable::column(std::string_view name) const {
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (header[i] == name) return i;
    }
    return std::nullopt;
}

namespace {

std::vector<std::vector<std::string>> parse_csv_records(std::string_view text) {
    std::vector<std::vector<std::string>> records;
    std::vector<std::string> record;
    std::string field;
    bool quoted = false;
    bool field_started = false;
    for (std::size_t i = 0; i < text.size(); ++i) {
        char c = text[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < text.size() && text[i + 1] == '"') {
                    field.push_back('"');
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                field.push_back(c);
            }
            continue;
        }
        switch (c) {
            case '"':
                quoted = true;
                field_started = true;
                break;
            case ',':
                record.push_back(std::move(field));
                field.clear();
                field_started = true;
                break;
            case '\r':
                break;
            case '\n':
                if (field_started || !field.empty() || !record.empty()) {
                    record.push_back(std::move(field));
                    records.push_back(std::move(record));
                }
                record.clear();
                field.clear();
                field_started = false;
                break;
            default:
                field.push_back(c);
                field_started = true;
        }
    }
    if (field_started || !field.empty() || !record.empty()) {
        record.push_back(std::move(field));
        records.push_back(std::move(record));
    }
    return records;
}

std::string quote_field(const std::string& field) {
    if (field.find_first_of(",\"\n\r") == std::string::npos) return field;
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out.push_back('"');
        out.push_back(c);
    }
    out.push_back('"');
    return out;
}

}  // namespace

CsvTable read_csv(const std::filesystem::path& path) {
    std::string text = read_text(path);
    // strip leading comment lines
    std::size_t pos = 0;
    while (pos < text.size() && text[pos] == '#') {
        std::size_t nl = text.find('\n', pos);
        pos = nl == std::string::npos ? text.size() : nl + 1;
    }
    auto records = parse_csv_records(std::string_view(text).substr(pos));
    CsvTable table;
    if (records.empty()) return table;
    table.header = std::move(records.front());
    for (std::size_t i = 1; i < records.size(); ++i) {
        if (records[i].size() != table.header.size()) {
            throw ValidationError(path.string() + ": row " + std::to_string(i) + " has " +
                                  std::to_string(records[i].size()) + " fields, expected " +
                                  std::to_string(table.header.size()));
        }
        table.rows.push_back(std::move(records[i]));
    }
    return table;
}

std::string to_csv(const CsvTable& table, const std::vector<std::string>& comments) {
    std::string out;
    for (const auto& c : comments) out += "# " + c + "\n";
    auto append_row = [&out](const std::vector<std::string>& row) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i) out.push_back(',');
            out += quote_field(row[i]);
        }
        out.push_back('\n');
    };
    append_row(table.header);
    for (const auto& row : table.rows) append_row(row);
    return out;
}

void write_csv(const std::filesystem::path& path, const CsvTable& table,
               const std::vector<std::string>& comments) {
    write_text(path, to_csv(table, comments));
}

std::string format_number(double value, int precision) {
    if (std::isnan(value)) return "NA";
    if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
    std::ostringstream ss;
    ss.imbue(std::locale::classic());
    ss << std::fixed << std::setprecision(precision) << value;
    std::string s = ss.str();
    if (s.find_first_not_of("-0.") == std::string::npos) s = std::string("0.") + std::string(precision, '0');
    return s;
}

std::uint64_t Rng::index(std::uint64_t n) {
    if (n == 0) throw Error("Rng::index: empty range");
    // rejection sampling keeps the draw unbiased and reproducible
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                std::numeric_limits<std::uint64_t>::max() % n;
    std::uint64_t x = engine_();
    while (x >= limit) x = engine_();
    return x % n;
}

double Rng::unit() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

std::uint64_t derive_seed(std::uint64_t seed, std::string_view stream) {
    std::string digest = sha256_hex(std::to_string(seed) + "/" + std::string(stream));
    return std::stoull(digest.substr(0, 16), nullptr, 16);
}

}  // namespace ssf

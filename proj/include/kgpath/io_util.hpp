#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace kgpath {

inline constexpr std::string_view kToolVersion = "kgpath 0.1.0";

// FNV-1a, used for vocabulary and config hashes.
std::uint64_t fnv1a(std::string_view data, std::uint64_t seed = 0xcbf29ce484222325ULL);

std::string hex64(std::uint64_t v);

// Splits on '\t' without collapsing empty fields.
std::vector<std::string> split_tsv(std::string_view line);

std::vector<std::string> split_on(std::string_view s, char sep);

// Writes content to path via a sibling temp file + rename.
void atomic_write(const std::filesystem::path& path, const std::string& content);

std::string read_file(const std::filesystem::path& path);

// `# kgpath ... config=...` header line placed at the top of every output file.
std::string output_header(std::uint64_t config_hash);

// key=value per line, '#' comments, whitespace trimmed around key and value.
// Later keys override earlier ones.
struct KeyValueConfig {
    std::vector<std::pair<std::string, std::string>> entries;

    bool has(const std::string& key) const;
    const std::string& get(const std::string& key) const;
    std::string get_or(const std::string& key, const std::string& fallback) const;
    // Hash of the canonicalized (sorted, deduplicated) contents.
    std::uint64_t hash() const;

    static KeyValueConfig parse_file(const std::filesystem::path& path);
    static KeyValueConfig parse(std::string_view text, const std::string& origin);
};

double parse_double(const std::string& s, const std::string& what);
std::int64_t parse_int(const std::string& s, const std::string& what);

} // namespace kgpath

#include "kgpath/io_util.hpp"
#include "kgpath/error.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>

namespace kgpath {

std::uint64_t fnv1a(std::string_view data, std::uint64_t seed) {
    std::uint64_t h = seed;
    for (unsigned char c : data) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string hex64(std::uint64_t v) {
    static const char* digits = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[i] = digits[v & 0xf];
        v >>= 4;
    }
    return out;
}

std::vector<std::string> split_tsv(std::string_view line) {
    return split_on(line, '\t');
}

std::vector<std::string> split_on(std::string_view s, char sep) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        std::size_t pos = s.find(sep, start);
        if (pos == std::string_view::npos) {
            out.emplace_back(s.substr(start));
            break;
        }
        out.emplace_back(s.substr(start, pos - start));
        start = pos + 1;
    }
    return out;
}

void atomic_write(const std::filesystem::path& path, const std::string& content) {
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
        if (!os) throw Error("cannot open for writing: " + tmp.string());
        os.write(content.data(), static_cast<std::streamsize>(content.size()));
        if (!os) throw Error("write failed: " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw Error("cannot open: " + path.string());
    std::ostringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

std::string output_header(std::uint64_t config_hash) {
    std::string out = "# ";
    out += kToolVersion;
    out += " config=";
    out += hex64(config_hash);
    out += "\n";
    return out;
}

namespace {

std::string trim(std::string_view s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return std::string(s.substr(b, e - b));
}

} // namespace

bool KeyValueConfig::has(const std::string& key) const {
    return std::any_of(entries.begin(), entries.end(),
                       [&](const auto& kv) { return kv.first == key; });
}

const std::string& KeyValueConfig::get(const std::string& key) const {
    const std::string* found = nullptr;
    for (const auto& kv : entries)
        if (kv.first == key) found = &kv.second;
    if (!found) throw Error("missing config key: " + key);
    return *found;
}

std::string KeyValueConfig::get_or(const std::string& key, const std::string& fallback) const {
    return has(key) ? get(key) : fallback;
}

std::uint64_t KeyValueConfig::hash() const {
    // Last value per key wins; order-independent.
    std::vector<std::pair<std::string, std::string>> canon;
    for (const auto& kv : entries) {
        auto it = std::find_if(canon.begin(), canon.end(),
                               [&](const auto& c) { return c.first == kv.first; });
        if (it == canon.end())
            canon.push_back(kv);
        else
            it->second = kv.second;
    }
    std::sort(canon.begin(), canon.end());
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (const auto& [k, v] : canon) {
        h = fnv1a(k, h);
        h = fnv1a("=", h);
        h = fnv1a(v, h);
        h = fnv1a("\n", h);
    }
    return h;
}

KeyValueConfig KeyValueConfig::parse_file(const std::filesystem::path& path) {
    return parse(read_file(path), path.string());
}

KeyValueConfig KeyValueConfig::parse(std::string_view text, const std::string& origin) {
    KeyValueConfig cfg;
    std::size_t lineno = 0;
    for (const auto& raw : split_on(text, '\n')) {
        ++lineno;
        std::string line = trim(raw);
        if (line.empty() || line[0] == '#') continue;
        auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ParseError(origin, lineno, "expected key=value, got: " + line);
        cfg.entries.emplace_back(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
    return cfg;
}

double parse_double(const std::string& s, const std::string& what) {
    try {
        std::size_t pos = 0;
        double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw ParseError("invalid number for " + what + ": '" + s + "'");
    }
}

std::int64_t parse_int(const std::string& s, const std::string& what) {
    std::int64_t v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size())
        throw ParseError("invalid integer for " + what + ": '" + s + "'");
    return v;
}

} // namespace kgpath

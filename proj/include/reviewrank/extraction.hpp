#pragma once
// Import-statement extraction and token-bag construction.
//
// A pull request is represented as a bag of lowercase name segments mined
// from the import statements of its changed files. Three line-oriented
// grammars are supported (Python, Java, Ruby); anything else contributes
// nothing. Dotted and underscored names are decomposed into segments, and
// segments are kept or dropped according to an ExtractionConfig.

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <regex>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace reviewrank {

enum class Grammar { python, java, ruby, unknown };

// Which token class participates in a similarity computation.
enum class TokenClassMode { library_only, technology_only, combined };

inline std::string to_string(TokenClassMode mode) {
    switch (mode) {
        case TokenClassMode::library_only: return "library";
        case TokenClassMode::technology_only: return "technology";
        case TokenClassMode::combined: return "combined";
    }
    return "combined";
}

inline TokenClassMode token_class_mode_from_string(std::string_view s) {
    if (s == "library" || s == "library-only") return TokenClassMode::library_only;
    if (s == "technology" || s == "technology-only") return TokenClassMode::technology_only;
    if (s == "combined") return TokenClassMode::combined;
    throw std::invalid_argument("unknown mode: " + std::string(s) +
                                " (expected library, technology or combined)");
}

class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

namespace detail {

inline std::string ascii_lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

inline std::vector<std::string> split_on(std::string_view s, std::string_view separators) {
    std::vector<std::string> parts;
    std::string current;
    for (char c : s) {
        if (separators.find(c) != std::string_view::npos) {
            if (!current.empty()) parts.push_back(std::move(current));
            current.clear();
        } else {
            current.push_back(c);
        }
    }
    if (!current.empty()) parts.push_back(std::move(current));
    return parts;
}

inline bool line_starts_with(std::string_view line, std::string_view prefix) {
    const std::string_view t = trim(line);
    return t.substr(0, prefix.size()) == prefix;
}

}  // namespace detail

// Frequency multiset of normalized library/technology name segments.
struct TokenBag {
    std::map<std::string, std::int64_t> counts;

    bool empty() const { return counts.empty(); }

    void add(const std::string& token, std::int64_t n = 1) {
        if (n <= 0) return;
        counts[token] += n;
    }

    void merge(const TokenBag& other) {
        for (const auto& [token, n] : other.counts) counts[token] += n;
    }

    std::int64_t count(const std::string& token) const {
        auto it = counts.find(token);
        return it == counts.end() ? 0 : it->second;
    }

    bool operator==(const TokenBag&) const = default;
};

// Token classification lists. An empty library_allowlist selects open mode:
// every segment that survives the stdlib denylist is kept. A non-empty
// allowlist keeps only segments that are listed libraries or technologies.
struct ExtractionConfig {
    std::set<std::string> library_allowlist;
    std::set<std::string> technology_list;
    std::set<std::string> stdlib_denylist;
    bool decompose = true;
    std::vector<std::string> bot_suffixes = {"[bot]"};

    bool open_mode() const { return library_allowlist.empty(); }

    void validate() const {
        for (const auto& name : library_allowlist)
            if (stdlib_denylist.contains(name))
                throw ConfigError("library '" + name + "' also appears in stdlib_denylist");
        for (const auto& name : technology_list)
            if (stdlib_denylist.contains(name))
                throw ConfigError("technology '" + name + "' also appears in stdlib_denylist");
    }

    // The ten libraries and ten technologies used by the reference
    // commercial-project setup.
    static ExtractionConfig abc_defaults() {
        ExtractionConfig cfg;
        cfg.library_allowlist = {"vapi",  "vpubsub",  "vform",  "vtest",    "vbackup",
                                 "vauth", "vlogs",    "vmonitor", "vautil", "vpipeline"};
        cfg.technology_list = {"taskqueue", "deferred", "mapreduce", "blobstore", "urlfetch",
                               "jinja2",    "search",   "modules",   "ndb",       "socket"};
        return cfg;
    }

    bool operator==(const ExtractionConfig&) const = default;
};

inline Grammar grammar_from_path(std::string_view path) {
    const auto dot = path.find_last_of('.');
    if (dot == std::string_view::npos) return Grammar::unknown;
    const std::string ext = detail::ascii_lower(path.substr(dot + 1));
    if (ext == "py") return Grammar::python;
    if (ext == "java") return Grammar::java;
    if (ext == "rb") return Grammar::ruby;
    return Grammar::unknown;
}

namespace detail {

inline void parse_python_import_line(std::string_view line, std::vector<std::string>& names) {
    static const std::regex from_re(R"(^\s*from\s+([A-Za-z0-9_.]+)\s+import\s+(.*)$)");
    static const std::regex import_re(R"(^\s*import\s+(.+)$)");
    static const std::regex ident_re(R"(^([A-Za-z_][A-Za-z0-9_]*(?:\.[A-Za-z_][A-Za-z0-9_]*)*))");

    const std::string text(line);
    std::smatch m;
    if (std::regex_match(text, m, from_re)) {
        std::string base = m[1].str();
        std::size_t dots = 0;
        while (dots < base.size() && base[dots] == '.') ++dots;
        if (dots > 0) {
            // Relative import: keep the leaf of whatever path remains.
            const auto segments = split_on(base.substr(dots), ".");
            if (!segments.empty()) names.push_back(segments.back());
            return;
        }
        if (base.find('.') == std::string_view::npos) {
            // `from lib import X`: the base names the imported unit.
            names.push_back(base);
            return;
        }
        // `from pkg.path import X`: the imported leaf is itself a module or
        // capability, so record the full dotted path per imported name.
        bool any = false;
        for (const auto& raw_item : split_on(m[2].str(), ",")) {
            std::string_view item = trim(raw_item);
            while (!item.empty() && (item.front() == '(' || item.front() == ')'))
                item = trim(item.substr(1));
            if (item.empty()) continue;
            if (item.front() == '*') {
                names.push_back(base);
                any = true;
                continue;
            }
            std::smatch im;
            const std::string item_str(item);
            if (std::regex_search(item_str, im, ident_re)) {
                names.push_back(base + "." + im[1].str());
                any = true;
            }
        }
        if (!any) names.push_back(base);
        return;
    }
    if (std::regex_match(text, m, import_re)) {
        for (const auto& raw_item : split_on(m[1].str(), ",")) {
            const std::string item_str(trim(raw_item));
            std::smatch im;
            if (std::regex_search(item_str, im, ident_re)) names.push_back(im[1].str());
        }
    }
}

inline void parse_java_import_line(std::string_view line, std::vector<std::string>& names) {
    static const std::regex java_re(
        R"(^\s*import\s+(?:static\s+)?([A-Za-z_$][A-Za-z0-9_$]*(?:\.[A-Za-z_$][A-Za-z0-9_$]*)*(?:\.\*)?)\s*;)");
    const std::string text(line);
    std::smatch m;
    if (!std::regex_search(text, m, java_re)) return;
    std::string name = m[1].str();
    if (name.size() >= 2 && name.ends_with(".*")) name.resize(name.size() - 2);
    if (!name.empty()) names.push_back(std::move(name));
}

inline void parse_ruby_require_line(std::string_view line, std::vector<std::string>& names) {
    static const std::regex ruby_re(R"!(^\s*require(_relative)?\s*\(?\s*['"]([^'"]+)['"])!");
    const std::string text(line);
    std::smatch m;
    if (!std::regex_search(text, m, ruby_re)) return;
    std::string path = m[2].str();
    if (m[1].matched) {
        // require_relative: project-internal path, keep the leaf.
        const auto slash = path.find_last_of('/');
        if (slash != std::string::npos) path = path.substr(slash + 1);
        if (!path.empty()) names.push_back(std::move(path));
        return;
    }
    // Treat feature paths like dotted module paths.
    std::replace(path.begin(), path.end(), '/', '.');
    if (!path.empty()) names.push_back(std::move(path));
}

}  // namespace detail

// Mine raw import names from source text, one physical line at a time.
// Lines commented out with the grammar's line-comment marker are skipped.
inline std::vector<std::string> extract_import_names(std::string_view content, Grammar grammar) {
    std::vector<std::string> names;
    if (grammar == Grammar::unknown) return names;

    std::size_t pos = 0;
    while (pos <= content.size()) {
        const auto eol = content.find('\n', pos);
        const std::string_view line =
            content.substr(pos, eol == std::string_view::npos ? content.size() - pos : eol - pos);
        switch (grammar) {
            case Grammar::python:
                if (!detail::line_starts_with(line, "#")) detail::parse_python_import_line(line, names);
                break;
            case Grammar::java:
                if (!detail::line_starts_with(line, "//")) detail::parse_java_import_line(line, names);
                break;
            case Grammar::ruby:
                if (!detail::line_starts_with(line, "#")) detail::parse_ruby_require_line(line, names);
                break;
            case Grammar::unknown:
                break;
        }
        if (eol == std::string_view::npos) break;
        pos = eol + 1;
    }
    return names;
}

// Normalize raw import names into a token bag: lowercase, split dotted and
// underscored structures, drop denylisted segments, and apply the allowlist
// when one is configured. Counting keeps multiplicity.
inline TokenBag classify_and_tokenize(const std::vector<std::string>& raw_names,
                                      const ExtractionConfig& config) {
    TokenBag bag;
    for (const auto& raw : raw_names) {
        const std::string lowered = detail::ascii_lower(raw);
        std::vector<std::string> segments;
        if (config.decompose) {
            segments = detail::split_on(lowered, "._");
        } else if (!lowered.empty()) {
            segments.push_back(lowered);
        }
        for (auto& segment : segments) {
            if (config.stdlib_denylist.contains(segment)) continue;
            if (!config.open_mode() && !config.library_allowlist.contains(segment) &&
                !config.technology_list.contains(segment))
                continue;
            bag.add(segment);
        }
    }
    return bag;
}

inline TokenBag file_token_bag(std::string_view content, Grammar grammar,
                               const ExtractionConfig& config) {
    return classify_and_tokenize(extract_import_names(content, grammar), config);
}

// Restrict a combined bag to one token class. In open mode every kept
// segment that is not a listed technology counts as library experience.
inline TokenBag filter_bag(const TokenBag& bag, const ExtractionConfig& config,
                           TokenClassMode mode) {
    if (mode == TokenClassMode::combined) return bag;
    TokenBag out;
    for (const auto& [token, n] : bag.counts) {
        const bool is_technology = config.technology_list.contains(token);
        const bool keep = mode == TokenClassMode::technology_only
                              ? is_technology
                              : (config.open_mode() ? !is_technology
                                                    : config.library_allowlist.contains(token));
        if (keep) out.add(token, n);
    }
    return out;
}

// Config file schema:
//   {"libraries": [...], "technologies": [...], "stdlib_denylist": [...],
//    "decompose": true, "stdlib_denylist_files": ["stdlib/python.txt"],
//    "bot_suffixes": ["[bot]"]}
// Denylist files are resolved relative to the config file and hold one name
// per line; `#` starts a comment.
inline ExtractionConfig load_config(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) throw ConfigError("cannot open config file: " + file.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("invalid config JSON in " + file.string() + ": " + e.what());
    }
    if (!j.is_object()) throw ConfigError("config root must be a JSON object: " + file.string());

    ExtractionConfig cfg;
    auto read_names = [&](const char* key, auto& target) {
        if (!j.contains(key)) return;
        if (!j[key].is_array()) throw ConfigError(std::string(key) + " must be an array");
        for (const auto& item : j[key]) {
            if (!item.is_string()) throw ConfigError(std::string(key) + " entries must be strings");
            target.insert(target.end(), detail::ascii_lower(item.get<std::string>()));
        }
    };
    read_names("libraries", cfg.library_allowlist);
    read_names("technologies", cfg.technology_list);
    read_names("stdlib_denylist", cfg.stdlib_denylist);
    if (j.contains("decompose")) {
        if (!j["decompose"].is_boolean()) throw ConfigError("decompose must be a boolean");
        cfg.decompose = j["decompose"].get<bool>();
    }
    if (j.contains("bot_suffixes")) {
        if (!j["bot_suffixes"].is_array()) throw ConfigError("bot_suffixes must be an array");
        cfg.bot_suffixes.clear();
        for (const auto& item : j["bot_suffixes"])
            cfg.bot_suffixes.push_back(detail::ascii_lower(item.get<std::string>()));
    }
    if (j.contains("stdlib_denylist_files")) {
        for (const auto& item : j["stdlib_denylist_files"]) {
            const auto path = file.parent_path() / item.get<std::string>();
            std::ifstream list(path);
            if (!list) throw ConfigError("cannot open denylist file: " + path.string());
            std::string line;
            while (std::getline(list, line)) {
                auto name = detail::trim(line);
                const auto hash = name.find('#');
                if (hash != std::string_view::npos) name = detail::trim(name.substr(0, hash));
                if (!name.empty()) cfg.stdlib_denylist.insert(detail::ascii_lower(name));
            }
        }
    }
    cfg.validate();
    return cfg;
}

}  // namespace reviewrank

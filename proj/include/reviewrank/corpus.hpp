#pragma once
// Pull-request data model and corpus I/O.
//
// A corpus is the closed pull-request history of one project, stored as
// UTF-8 JSON lines, one request per line:
//
//   {"index": 42, "author": "alice", "body": "please review @bob",
//    "state": "merged", "reviewers": ["bob"], "commenters": ["bob", "carol"],
//    "files": [{"path": "src/app/views.py", "content": "import vform\n"}]}
//
// The gold reviewer set is computed at load time as the union of @-mentions
// in the body, the commenter list and the explicit reviewer list, minus the
// author. Handles are case-insensitive and stored lowercase; handles on the
// bot deny-list are stripped.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <regex>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "reviewrank/extraction.hpp"

namespace reviewrank {

enum class RequestState { merged, rejected, open };

inline std::string to_string(RequestState s) {
    switch (s) {
        case RequestState::merged: return "merged";
        case RequestState::rejected: return "rejected";
        case RequestState::open: return "open";
    }
    return "merged";
}

class CorpusError : public std::runtime_error {
public:
    enum class Kind { io, parse, duplicate_index };

    CorpusError(Kind kind, const std::string& msg, std::int64_t line = -1)
        : std::runtime_error(line >= 0 ? "line " + std::to_string(line) + ": " + msg : msg),
          kind_(kind),
          line_(line) {}

    Kind kind() const { return kind_; }
    std::int64_t line() const { return line_; }

private:
    Kind kind_;
    std::int64_t line_;
};

struct ChangedFile {
    std::string path;     // repository-relative, `/` separators only
    std::string content;  // post-change source text, may be empty
    Grammar grammar = Grammar::unknown;

    bool operator==(const ChangedFile&) const = default;
};

struct PullRequest {
    std::int64_t index = 0;  // project-local, positive, unique within a corpus
    std::string author;
    std::string body;
    std::vector<ChangedFile> files;
    std::set<std::string> gold_reviewers;
    RequestState state = RequestState::merged;

    bool operator==(const PullRequest&) const = default;
};

struct Corpus {
    std::string project_name;
    std::vector<PullRequest> requests;  // strictly ascending by index
    ExtractionConfig config;

    bool empty() const { return requests.empty(); }

    std::int64_t max_index() const { return requests.empty() ? 0 : requests.back().index; }
    std::int64_t min_index() const { return requests.empty() ? 0 : requests.front().index; }

    bool operator==(const Corpus&) const = default;
};

namespace detail {

inline bool is_bot_handle(std::string_view handle, const std::vector<std::string>& bot_suffixes) {
    for (const auto& suffix : bot_suffixes)
        if (handle.size() >= suffix.size() && handle.ends_with(suffix)) return true;
    return false;
}

}  // namespace detail

// `@handle` references in a request body; handles are the maximal token
// after `@` drawn from [A-Za-z0-9-], lowercased.
inline std::set<std::string> extract_mentions(std::string_view body) {
    static const std::regex mention_re(R"(@([A-Za-z0-9-]+))");
    std::set<std::string> handles;
    const std::string text(body);
    for (std::sregex_iterator it(text.begin(), text.end(), mention_re), end; it != end; ++it)
        handles.insert(detail::ascii_lower((*it)[1].str()));
    return handles;
}

// Gold reviewer set: mentions in the body plus the commenter list, minus the
// author, compared case-insensitively. Bot handles are stripped.
inline std::set<std::string> build_gold_set(std::string_view body,
                                            const std::vector<std::string>& commenters,
                                            std::string_view author,
                                            const std::vector<std::string>& bot_suffixes = {
                                                "[bot]"}) {
    std::set<std::string> gold = extract_mentions(body);
    for (const auto& commenter : commenters) gold.insert(detail::ascii_lower(commenter));
    gold.erase(detail::ascii_lower(author));
    for (auto it = gold.begin(); it != gold.end();)
        it = detail::is_bot_handle(*it, bot_suffixes) ? gold.erase(it) : std::next(it);
    return gold;
}

// Parse one pull-request record. `allow_open` is true only for incoming
// query requests; stored corpora hold closed requests exclusively.
inline PullRequest parse_pull_request(const nlohmann::json& j, const ExtractionConfig& config,
                                      bool allow_open) {
    if (!j.is_object()) throw std::invalid_argument("pull request record must be a JSON object");
    if (!j.contains("index") || !j["index"].is_number_integer())
        throw std::invalid_argument("missing or non-integer 'index'");
    if (!j.contains("author") || !j["author"].is_string())
        throw std::invalid_argument("missing or non-string 'author'");

    PullRequest pr;
    pr.index = j["index"].get<std::int64_t>();
    if (pr.index <= 0) throw std::invalid_argument("'index' must be a positive integer");
    pr.author = detail::ascii_lower(j["author"].get<std::string>());
    if (pr.author.empty()) throw std::invalid_argument("'author' must be non-empty");
    pr.body = j.value("body", std::string{});

    const std::string state = j.value("state", allow_open ? "open" : "");
    if (state == "merged") {
        pr.state = RequestState::merged;
    } else if (state == "rejected") {
        pr.state = RequestState::rejected;
    } else if (state == "open") {
        if (!allow_open)
            throw std::invalid_argument("state 'open' is not allowed in a stored corpus");
        pr.state = RequestState::open;
    } else {
        throw std::invalid_argument("unknown state '" + state + "'");
    }

    std::vector<std::string> commenters;
    auto append_handles = [&](const char* key) {
        if (!j.contains(key)) return;
        if (!j[key].is_array()) throw std::invalid_argument(std::string("'") + key + "' must be an array");
        for (const auto& item : j[key]) {
            if (!item.is_string())
                throw std::invalid_argument(std::string("'") + key + "' entries must be strings");
            commenters.push_back(item.get<std::string>());
        }
    };
    append_handles("commenters");
    append_handles("reviewers");
    pr.gold_reviewers = build_gold_set(pr.body, commenters, pr.author, config.bot_suffixes);

    if (j.contains("files")) {
        if (!j["files"].is_array()) throw std::invalid_argument("'files' must be an array");
        for (const auto& jf : j["files"]) {
            if (!jf.is_object() || !jf.contains("path") || !jf["path"].is_string())
                throw std::invalid_argument("file entries need a string 'path'");
            ChangedFile file;
            file.path = jf["path"].get<std::string>();
            if (file.path.empty()) throw std::invalid_argument("file 'path' must be non-empty");
            if (file.path.find('\\') != std::string::npos)
                throw std::invalid_argument("file 'path' must use '/' separators: " + file.path);
            file.content = jf.value("content", std::string{});
            file.grammar = grammar_from_path(file.path);
            pr.files.push_back(std::move(file));
        }
    }
    return pr;
}

// Read a JSON-lines corpus from a stream. Records may arrive in any order
// and are sorted by index; duplicate indices and malformed lines abort the
// load with the offending line number.
inline Corpus parse_corpus(std::istream& in, std::string project_name, ExtractionConfig config) {
    config.validate();
    Corpus corpus;
    corpus.project_name = std::move(project_name);
    corpus.config = std::move(config);

    std::string line;
    std::int64_t line_number = 0;
    while (std::getline(in, line)) {
        ++line_number;
        if (detail::trim(line).empty()) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw CorpusError(CorpusError::Kind::parse, std::string("invalid JSON: ") + e.what(),
                              line_number);
        }
        try {
            corpus.requests.push_back(parse_pull_request(j, corpus.config, /*allow_open=*/false));
        } catch (const std::invalid_argument& e) {
            throw CorpusError(CorpusError::Kind::parse, e.what(), line_number);
        }
    }

    std::stable_sort(corpus.requests.begin(), corpus.requests.end(),
                     [](const PullRequest& a, const PullRequest& b) { return a.index < b.index; });
    for (std::size_t i = 1; i < corpus.requests.size(); ++i)
        if (corpus.requests[i].index == corpus.requests[i - 1].index)
            throw CorpusError(CorpusError::Kind::duplicate_index,
                              "duplicate index " + std::to_string(corpus.requests[i].index));
    return corpus;
}

inline Corpus load_corpus(const std::filesystem::path& path, ExtractionConfig config) {
    std::ifstream in(path);
    if (!in)
        throw CorpusError(CorpusError::Kind::io, "cannot open corpus file: " + path.string());
    return parse_corpus(in, path.stem().string(), std::move(config));
}

inline nlohmann::json pull_request_to_json(const PullRequest& pr) {
    nlohmann::json j;
    j["index"] = pr.index;
    j["author"] = pr.author;
    j["body"] = pr.body;
    j["state"] = to_string(pr.state);
    j["reviewers"] = pr.gold_reviewers;
    auto& files = j["files"] = nlohmann::json::array();
    for (const auto& file : pr.files) files.push_back({{"path", file.path}, {"content", file.content}});
    return j;
}

inline void write_corpus(const Corpus& corpus, std::ostream& out) {
    for (const auto& pr : corpus.requests) out << pull_request_to_json(pr).dump() << '\n';
}

inline std::string corpus_to_jsonl(const Corpus& corpus) {
    std::ostringstream out;
    write_corpus(corpus, out);
    return out.str();
}

// Multiset sum of per-file token bags; files with an unknown grammar
// contribute nothing.
inline TokenBag request_token_bag(const PullRequest& pr, const ExtractionConfig& config) {
    TokenBag bag;
    for (const auto& file : pr.files) bag.merge(file_token_bag(file.content, file.grammar, config));
    return bag;
}

inline std::set<std::string> changed_paths(const PullRequest& pr) {
    std::set<std::string> paths;
    for (const auto& file : pr.files) paths.insert(file.path);
    return paths;
}

}  // namespace reviewrank

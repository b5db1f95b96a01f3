#pragma once
// Reviewer ranking: select the recent-history window, score each past
// request against the query, propagate scores to that request's reviewers,
// and sort.
//
// A reviewer's score is the sum of the relevance scores of the window
// requests they reviewed. Reviewers with zero accumulated score are
// omitted. Ties break by the most recent request the reviewer reviewed in
// the window (higher index first), then by identifier.

#include <algorithm>
#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "reviewrank/corpus.hpp"
#include "reviewrank/extraction.hpp"
#include "reviewrank/similarity.hpp"

namespace reviewrank {

struct RankedEntry {
    std::string reviewer;
    double score = 0.0;

    bool operator==(const RankedEntry&) const = default;
};

struct RankedRecommendation {
    std::vector<RankedEntry> entries;   // sorted best-first
    std::size_t window_used = 0;        // past requests actually consulted

    bool operator==(const RankedRecommendation&) const = default;
};

// The up-to-`window` requests with the largest indices strictly below
// `query_index`, most recent first. Short or empty results near the start
// of a project are legal.
inline std::vector<const PullRequest*> select_window(const Corpus& corpus,
                                                     std::int64_t query_index,
                                                     std::size_t window = 30) {
    std::vector<const PullRequest*> history;
    auto first_at_or_after = std::lower_bound(
        corpus.requests.begin(), corpus.requests.end(), query_index,
        [](const PullRequest& pr, std::int64_t idx) { return pr.index < idx; });
    while (first_at_or_after != corpus.requests.begin() && history.size() < window) {
        --first_at_or_after;
        history.push_back(&*first_at_or_after);
    }
    return history;
}

// Scores one history request's relevance to the query.
using RelevanceScorer = std::function<double(const PullRequest&)>;

// Score propagation core shared by every recommender flavour.
inline RankedRecommendation rank_by_relevance(const PullRequest& query,
                                              std::span<const PullRequest* const> history,
                                              const RelevanceScorer& scorer) {
    struct Accumulator {
        double score = 0.0;
        std::int64_t last_reviewed = 0;
    };
    std::map<std::string, Accumulator> scores;
    for (const PullRequest* past : history) {
        const double relevance = scorer(*past);
        for (const auto& reviewer : past->gold_reviewers) {
            if (reviewer == query.author) continue;
            auto& acc = scores[reviewer];
            acc.score += relevance;
            acc.last_reviewed = std::max(acc.last_reviewed, past->index);
        }
    }

    RankedRecommendation result;
    result.window_used = history.size();
    struct Candidate {
        const std::string* reviewer;
        Accumulator acc;
    };
    std::vector<Candidate> candidates;
    for (const auto& [reviewer, acc] : scores)
        if (acc.score > 0.0) candidates.push_back({&reviewer, acc});
    std::sort(candidates.begin(), candidates.end(), [](const Candidate& a, const Candidate& b) {
        if (a.acc.score != b.acc.score) return a.acc.score > b.acc.score;
        if (a.acc.last_reviewed != b.acc.last_reviewed)
            return a.acc.last_reviewed > b.acc.last_reviewed;
        return *a.reviewer < *b.reviewer;
    });
    result.entries.reserve(candidates.size());
    for (const auto& c : candidates) result.entries.push_back({*c.reviewer, c.acc.score});
    return result;
}

// Cosine-similarity ranking over mode-filtered token bags.
inline RankedRecommendation rank_reviewers(const PullRequest& query,
                                           std::span<const PullRequest* const> history,
                                           const ExtractionConfig& config,
                                           TokenClassMode mode = TokenClassMode::combined) {
    const TokenBag query_bag = filter_bag(request_token_bag(query, config), config, mode);
    return rank_by_relevance(query, history, [&](const PullRequest& past) {
        return cosine_similarity(query_bag,
                                 filter_bag(request_token_bag(past, config), config, mode));
    });
}

inline void truncate(RankedRecommendation& recommendation, std::size_t k) {
    if (recommendation.entries.size() > k) recommendation.entries.resize(k);
}

// Full pipeline for a single incoming request: window selection, ranking,
// truncation to the top k.
inline RankedRecommendation recommend(const Corpus& corpus, const PullRequest& query,
                                      std::size_t k = 5, std::size_t window = 30,
                                      TokenClassMode mode = TokenClassMode::combined) {
    const auto history = select_window(corpus, query.index, window);
    auto recommendation = rank_reviewers(query, history, corpus.config, mode);
    truncate(recommendation, k);
    return recommendation;
}

// Recommender interface used by the evaluation harness: the harness owns
// window selection and passes the history in, most recent first.
using Recommender = std::function<RankedRecommendation(
    const PullRequest& query, std::span<const PullRequest* const> history, std::size_t k)>;

// Cosine recommender with per-request bag caching, for corpus replays where
// each request's bag is consulted many times.
inline Recommender make_correct_recommender(const Corpus& corpus,
                                            TokenClassMode mode = TokenClassMode::combined) {
    auto bags = std::make_shared<std::map<std::int64_t, TokenBag>>();
    for (const auto& pr : corpus.requests)
        (*bags)[pr.index] = filter_bag(request_token_bag(pr, corpus.config), corpus.config, mode);
    const ExtractionConfig config = corpus.config;
    return [bags, config, mode](const PullRequest& query,
                                std::span<const PullRequest* const> history, std::size_t k) {
        auto it = bags->find(query.index);
        const TokenBag query_bag = it != bags->end()
                                       ? it->second
                                       : filter_bag(request_token_bag(query, config), config, mode);
        auto recommendation = rank_by_relevance(query, history, [&](const PullRequest& past) {
            const auto hit = bags->find(past.index);
            return cosine_similarity(
                query_bag, hit != bags->end()
                               ? hit->second
                               : filter_bag(request_token_bag(past, config), config, mode));
        });
        truncate(recommendation, k);
        return recommendation;
    };
}

// File-path-similarity baseline recommender with cached path sets.
inline Recommender make_fps_recommender(const Corpus& corpus) {
    auto paths = std::make_shared<std::map<std::int64_t, std::set<std::string>>>();
    for (const auto& pr : corpus.requests) (*paths)[pr.index] = changed_paths(pr);
    return [paths](const PullRequest& query, std::span<const PullRequest* const> history,
                   std::size_t k) {
        auto it = paths->find(query.index);
        const std::set<std::string> query_paths =
            it != paths->end() ? it->second : changed_paths(query);
        auto recommendation = rank_by_relevance(query, history, [&](const PullRequest& past) {
            const auto hit = paths->find(past.index);
            return fps_similarity(query_paths,
                                  hit != paths->end() ? hit->second : changed_paths(past));
        });
        truncate(recommendation, k);
        return recommendation;
    };
}

}  // namespace reviewrank

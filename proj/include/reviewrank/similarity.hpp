#pragma once
// Request-relevance measures: cosine similarity over token bags and the
// file-path-similarity baseline. Both score in [0, 1].

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "reviewrank/extraction.hpp"

namespace reviewrank {

// Cosine similarity over the combined token set of two bags. Integer
// frequencies keep the dot product and squared norms exact, so identical
// bags score exactly 1 and disjoint bags exactly 0. Either bag empty
// scores 0.
inline double cosine_similarity(const TokenBag& a, const TokenBag& b) {
    if (a.empty() || b.empty()) return 0.0;
    double dot = 0.0;
    for (const auto& [token, count] : a.counts) {
        const auto it = b.counts.find(token);
        if (it != b.counts.end()) dot += static_cast<double>(count) * static_cast<double>(it->second);
    }
    if (dot == 0.0) return 0.0;
    double norm_a_sq = 0.0;
    for (const auto& [token, count] : a.counts)
        norm_a_sq += static_cast<double>(count) * static_cast<double>(count);
    double norm_b_sq = 0.0;
    for (const auto& [token, count] : b.counts)
        norm_b_sq += static_cast<double>(count) * static_cast<double>(count);
    return std::min(1.0, dot / std::sqrt(norm_a_sq * norm_b_sq));
}

// Two requests are relevant to each other when they share at least one
// library or technology token.
inline bool is_relevant(const TokenBag& a, const TokenBag& b) {
    const TokenBag& small = a.counts.size() <= b.counts.size() ? a : b;
    const TokenBag& large = a.counts.size() <= b.counts.size() ? b : a;
    for (const auto& [token, count] : small.counts)
        if (large.counts.contains(token)) return true;
    return false;
}

namespace detail {

inline std::vector<std::string> path_components(std::string_view path) {
    return split_on(path, "/");
}

// Shared leading components over the longer of the two paths.
inline double path_pair_score(std::string_view a, std::string_view b) {
    const auto ca = path_components(a);
    const auto cb = path_components(b);
    if (ca.empty() || cb.empty()) return 0.0;
    std::size_t shared = 0;
    while (shared < ca.size() && shared < cb.size() && ca[shared] == cb[shared]) ++shared;
    return static_cast<double>(shared) / static_cast<double>(std::max(ca.size(), cb.size()));
}

}  // namespace detail

// File-path similarity, the baseline relevance measure: mean pair score
// over the cross product of the two path sets, 0 when either is empty.
inline double fps_similarity(const std::set<std::string>& paths_a,
                             const std::set<std::string>& paths_b) {
    if (paths_a.empty() || paths_b.empty()) return 0.0;
    double total = 0.0;
    for (const auto& a : paths_a)
        for (const auto& b : paths_b) total += detail::path_pair_score(a, b);
    return total / (static_cast<double>(paths_a.size()) * static_cast<double>(paths_b.size()));
}

}  // namespace reviewrank

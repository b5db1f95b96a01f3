#pragma once
// Corpus replay and measurement.
//
// evaluate() walks a project history in index order and, for every closed
// request with a non-empty gold set and at least one preceding request,
// asks the recommender for top-k reviewers using only the preceding
// window. Four aggregates are reported:
//
//   Top-K Accuracy  percentage of queries with >= 1 gold reviewer in top-k
//   MRR             mean reciprocal rank of the first gold hit (0 on miss)
//   Mean Precision  mean of 100 * hits / returned (0 when nothing returned)
//   Mean Recall     mean of 100 * hits / |gold|
//
// Also houses the exploratory-study counters (library/technology usage)
// and the Mann-Whitney U / Cohen's d machinery used to compare recommenders.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "reviewrank/corpus.hpp"
#include "reviewrank/ranking.hpp"

namespace reviewrank {

class EvaluationError : public std::runtime_error {
public:
    explicit EvaluationError(const std::string& msg) : std::runtime_error(msg) {}
};

struct QueryOutcome {
    std::int64_t index = 0;
    std::optional<std::size_t> rank_of_first_hit;  // 1-based, within the top-k list
    std::size_t hits_in_top_k = 0;
    std::size_t gold_size = 0;
    std::size_t returned = 0;
};

struct EvaluationReport {
    std::string project_name;
    std::string recommender_name;
    std::size_t k = 5;
    std::size_t window = 30;
    std::size_t queries_evaluated = 0;
    std::size_t skipped_empty_gold = 0;
    std::size_t skipped_no_history = 0;
    double top_k_accuracy = 0.0;  // percent
    double mrr = 0.0;             // [0, 1]
    double mean_precision = 0.0;  // percent
    double mean_recall = 0.0;     // percent
    std::vector<QueryOutcome> per_query;
};

inline EvaluationReport evaluate(const Corpus& corpus, const Recommender& recommender,
                                 std::size_t k, std::size_t window,
                                 std::string recommender_name = "correct") {
    if (k < 1) throw std::invalid_argument("k must be >= 1");
    EvaluationReport report;
    report.project_name = corpus.project_name;
    report.recommender_name = std::move(recommender_name);
    report.k = k;
    report.window = window;

    double accuracy_sum = 0.0, rr_sum = 0.0, precision_sum = 0.0, recall_sum = 0.0;
    for (const auto& query : corpus.requests) {
        if (query.gold_reviewers.empty()) {
            ++report.skipped_empty_gold;
            continue;
        }
        const auto history = select_window(corpus, query.index, window);
        if (history.empty()) {
            ++report.skipped_no_history;
            continue;
        }
        const auto recommendation = recommender(query, history, k);

        QueryOutcome outcome;
        outcome.index = query.index;
        outcome.gold_size = query.gold_reviewers.size();
        outcome.returned = recommendation.entries.size();
        for (std::size_t rank = 0; rank < recommendation.entries.size(); ++rank) {
            if (query.gold_reviewers.contains(recommendation.entries[rank].reviewer)) {
                ++outcome.hits_in_top_k;
                if (!outcome.rank_of_first_hit) outcome.rank_of_first_hit = rank + 1;
            }
        }

        accuracy_sum += outcome.rank_of_first_hit ? 100.0 : 0.0;
        rr_sum += outcome.rank_of_first_hit
                      ? 1.0 / static_cast<double>(*outcome.rank_of_first_hit)
                      : 0.0;
        precision_sum += outcome.returned > 0 ? 100.0 * static_cast<double>(outcome.hits_in_top_k) /
                                                    static_cast<double>(outcome.returned)
                                              : 0.0;
        recall_sum += 100.0 * static_cast<double>(outcome.hits_in_top_k) /
                      static_cast<double>(outcome.gold_size);
        report.per_query.push_back(outcome);
        ++report.queries_evaluated;
    }

    if (report.queries_evaluated == 0)
        throw EvaluationError("no evaluable query request in corpus '" + corpus.project_name +
                              "' (every request lacks a gold set or preceding history)");
    const double n = static_cast<double>(report.queries_evaluated);
    report.top_k_accuracy = accuracy_sum / n;
    report.mrr = rr_sum / n;
    report.mean_precision = precision_sum / n;
    report.mean_recall = recall_sum / n;
    return report;
}

inline nlohmann::json report_to_json(const EvaluationReport& report) {
    nlohmann::json j;
    j["project_name"] = report.project_name;
    j["recommender"] = report.recommender_name;
    j["k"] = report.k;
    j["window"] = report.window;
    j["queries_evaluated"] = report.queries_evaluated;
    j["queries_skipped_empty_gold"] = report.skipped_empty_gold;
    j["queries_skipped_no_history"] = report.skipped_no_history;
    j["top_k_accuracy"] = report.top_k_accuracy;
    j["mrr"] = report.mrr;
    j["mean_precision"] = report.mean_precision;
    j["mean_recall"] = report.mean_recall;
    auto& rows = j["per_query"] = nlohmann::json::array();
    for (const auto& q : report.per_query) {
        nlohmann::json row;
        row["index"] = q.index;
        if (q.rank_of_first_hit) row["rank_of_first_hit"] = *q.rank_of_first_hit;
        else row["rank_of_first_hit"] = nullptr;
        row["hits_in_top_k"] = q.hits_in_top_k;
        row["gold_size"] = q.gold_size;
        row["returned"] = q.returned;
        rows.push_back(std::move(row));
    }
    return j;
}

inline std::string report_to_csv(const EvaluationReport& report) {
    std::ostringstream out;
    out << "index,rank_of_first_hit,hits_in_top_k,gold_size,returned\n";
    for (const auto& q : report.per_query) {
        out << q.index << ',';
        if (q.rank_of_first_hit) out << *q.rank_of_first_hit;
        out << ',' << q.hits_in_top_k << ',' << q.gold_size << ',' << q.returned << '\n';
    }
    return out.str();
}

// ---------------------------------------------------------------------------
// Exploratory-study statistics

// Latest version of every changed file across the history: for each path,
// the content from the highest-index request touching it.
inline std::vector<ChangedFile> snapshot_files(const Corpus& corpus) {
    std::map<std::string, const ChangedFile*> latest;
    for (const auto& pr : corpus.requests)  // ascending index
        for (const auto& file : pr.files) latest[file.path] = &file;
    std::vector<ChangedFile> files;
    files.reserve(latest.size());
    for (const auto& [path, file] : latest) files.push_back(*file);
    return files;
}

// Number of files whose extracted token set contains each watched name.
inline std::map<std::string, std::size_t> token_file_frequency(
    std::span<const ChangedFile> files, const ExtractionConfig& config,
    const std::set<std::string>& watched) {
    std::map<std::string, std::size_t> freq;
    for (const auto& name : watched) freq[name] = 0;
    for (const auto& file : files) {
        const TokenBag bag = file_token_bag(file.content, file.grammar, config);
        for (const auto& name : watched)
            if (bag.counts.contains(name)) ++freq[name];
    }
    return freq;
}

inline std::map<std::string, std::size_t> library_usage_frequency(
    std::span<const ChangedFile> files, const ExtractionConfig& config) {
    return token_file_frequency(files, config, config.library_allowlist);
}

inline std::map<std::string, std::size_t> library_usage_frequency(const Corpus& corpus) {
    const auto files = snapshot_files(corpus);
    return library_usage_frequency(files, corpus.config);
}

inline std::map<std::string, std::size_t> technology_usage_frequency(
    std::span<const ChangedFile> files, const ExtractionConfig& config) {
    return token_file_frequency(files, config, config.technology_list);
}

// Percentage of requests whose token bag intersects `watched`.
inline double pr_usage_ratio(const Corpus& corpus, const std::set<std::string>& watched) {
    if (corpus.requests.empty()) return 0.0;
    std::size_t using_count = 0;
    for (const auto& pr : corpus.requests) {
        const TokenBag bag = request_token_bag(pr, corpus.config);
        for (const auto& name : watched) {
            if (bag.counts.contains(name)) {
                ++using_count;
                break;
            }
        }
    }
    return 100.0 * static_cast<double>(using_count) / static_cast<double>(corpus.requests.size());
}

// Gold reviewers of every request whose bag contains `token`.
inline std::set<std::string> reviewers_of_requests_using(const Corpus& corpus,
                                                         const std::string& token) {
    std::set<std::string> reviewers;
    for (const auto& pr : corpus.requests) {
        if (request_token_bag(pr, corpus.config).counts.contains(token))
            reviewers.insert(pr.gold_reviewers.begin(), pr.gold_reviewers.end());
    }
    return reviewers;
}

// Percentage of library authors who later appear as reviewers of requests
// using that library.
inline double author_reviewer_overlap(const std::set<std::string>& library_authors,
                                      const std::set<std::string>& relevant_request_reviewers) {
    if (library_authors.empty())
        throw std::invalid_argument("author_reviewer_overlap: empty author set");
    std::size_t overlap = 0;
    for (const auto& author : library_authors)
        if (relevant_request_reviewers.contains(author)) ++overlap;
    return 100.0 * static_cast<double>(overlap) / static_cast<double>(library_authors.size());
}

// ---------------------------------------------------------------------------
// Significance tests

namespace detail {

// U statistic for sample a against sample b, ties counted half.
inline double mwu_statistic(std::span<const double> a, std::span<const double> b) {
    double u = 0.0;
    for (double x : a)
        for (double y : b) {
            if (x > y) u += 1.0;
            else if (x == y) u += 0.5;
        }
    return u;
}

inline double normal_two_sided_p(double z) { return std::erfc(std::abs(z) / std::sqrt(2.0)); }

}  // namespace detail

// Two-sided Mann-Whitney U test. Samples with at most 8 elements each are
// handled by exact enumeration over all label assignments; larger samples
// use the normal approximation with tie correction and a continuity
// correction of 0.5.
inline double mann_whitney_u(std::span<const double> sample_a, std::span<const double> sample_b) {
    if (sample_a.empty() || sample_b.empty())
        throw std::invalid_argument("mann_whitney_u: empty sample");
    const std::size_t n = sample_a.size();
    const std::size_t m = sample_b.size();
    const double mean_u = static_cast<double>(n) * static_cast<double>(m) / 2.0;
    const double observed = detail::mwu_statistic(sample_a, sample_b);

    if (n <= 8 && m <= 8) {
        // Enumerate every way of choosing which pooled values form sample A
        // and count assignments at least as extreme as the observed split.
        std::vector<double> pool(sample_a.begin(), sample_a.end());
        pool.insert(pool.end(), sample_b.begin(), sample_b.end());
        const std::size_t total = pool.size();
        const double threshold = std::abs(observed - mean_u) - 1e-12;
        std::uint64_t extreme = 0, count = 0;
        std::vector<std::size_t> pick(n);
        for (std::size_t i = 0; i < n; ++i) pick[i] = i;
        while (true) {
            std::vector<bool> in_a(total, false);
            for (std::size_t i : pick) in_a[i] = true;
            double u = 0.0;
            for (std::size_t i = 0; i < total; ++i) {
                if (!in_a[i]) continue;
                for (std::size_t j = 0; j < total; ++j) {
                    if (in_a[j]) continue;
                    if (pool[i] > pool[j]) u += 1.0;
                    else if (pool[i] == pool[j]) u += 0.5;
                }
            }
            ++count;
            if (std::abs(u - mean_u) >= threshold) ++extreme;
            // next combination
            std::size_t slot = n;
            while (slot > 0 && pick[slot - 1] == total - n + slot - 1) --slot;
            if (slot == 0) break;
            ++pick[slot - 1];
            for (std::size_t i = slot; i < n; ++i) pick[i] = pick[i - 1] + 1;
        }
        return static_cast<double>(extreme) / static_cast<double>(count);
    }

    // Tie correction over the pooled sample.
    std::vector<double> pool(sample_a.begin(), sample_a.end());
    pool.insert(pool.end(), sample_b.begin(), sample_b.end());
    std::sort(pool.begin(), pool.end());
    const double big_n = static_cast<double>(pool.size());
    double tie_term = 0.0;
    for (std::size_t i = 0; i < pool.size();) {
        std::size_t j = i;
        while (j < pool.size() && pool[j] == pool[i]) ++j;
        const double t = static_cast<double>(j - i);
        tie_term += t * t * t - t;
        i = j;
    }
    const double variance = (static_cast<double>(n) * static_cast<double>(m) / 12.0) *
                            ((big_n + 1.0) - tie_term / (big_n * (big_n - 1.0)));
    if (variance <= 0.0) return 1.0;
    const double diff = observed - mean_u;
    const double continuity = diff > 0.0 ? 0.5 : (diff < 0.0 ? -0.5 : 0.0);
    const double z = (diff - continuity) / std::sqrt(variance);
    return std::min(1.0, detail::normal_two_sided_p(z));
}

struct EffectSize {
    double cohens_d = 0.0;
    double glass_delta = 0.0;
};

// Cohen's d against the pooled standard deviation, Glass delta against the
// second sample's standard deviation.
inline EffectSize cohens_d(std::span<const double> sample_a, std::span<const double> sample_b) {
    const std::size_t n_a = sample_a.size();
    const std::size_t n_b = sample_b.size();
    if (n_a < 2 || n_b < 2)
        throw std::invalid_argument("cohens_d: each sample needs at least 2 elements");
    auto mean = [](std::span<const double> s) {
        double sum = 0.0;
        for (double v : s) sum += v;
        return sum / static_cast<double>(s.size());
    };
    auto sample_variance = [&](std::span<const double> s, double mu) {
        double sum = 0.0;
        for (double v : s) sum += (v - mu) * (v - mu);
        return sum / static_cast<double>(s.size() - 1);
    };
    const double mean_a = mean(sample_a);
    const double mean_b = mean(sample_b);
    const double var_a = sample_variance(sample_a, mean_a);
    const double var_b = sample_variance(sample_b, mean_b);
    const double pooled =
        std::sqrt((static_cast<double>(n_a - 1) * var_a + static_cast<double>(n_b - 1) * var_b) /
                  static_cast<double>(n_a + n_b - 2));
    if (pooled == 0.0 || var_b == 0.0)
        throw std::invalid_argument("cohens_d: degenerate variance");
    return {(mean_a - mean_b) / pooled, (mean_a - mean_b) / std::sqrt(var_b)};
}

// ---------------------------------------------------------------------------
// Two-recommender comparison over per-project metric vectors

struct MetricVectors {
    std::vector<double> top_k_accuracy;
    std::vector<double> mrr;
    std::vector<double> mean_precision;
    std::vector<double> mean_recall;

    void append(const EvaluationReport& report) {
        top_k_accuracy.push_back(report.top_k_accuracy);
        mrr.push_back(report.mrr);
        mean_precision.push_back(report.mean_precision);
        mean_recall.push_back(report.mean_recall);
    }
};

struct ComparisonReport {
    std::vector<std::string> projects;
    std::size_t k = 5;
    std::size_t window = 30;
    std::string system_a = "correct";
    std::string system_b = "fps";
    MetricVectors vectors_a;
    MetricVectors vectors_b;
};

inline nlohmann::json comparison_to_json(const ComparisonReport& report) {
    auto metric_block = [](const std::vector<double>& a, const std::vector<double>& b) {
        nlohmann::json j;
        j["system_a"] = a;
        j["system_b"] = b;
        j["mwu_p_value"] = nullptr;
        j["cohens_d"] = nullptr;
        j["glass_delta"] = nullptr;
        if (!a.empty() && !b.empty()) j["mwu_p_value"] = mann_whitney_u(a, b);
        try {
            const EffectSize effect = cohens_d(a, b);
            j["cohens_d"] = effect.cohens_d;
            j["glass_delta"] = effect.glass_delta;
        } catch (const std::invalid_argument&) {
            // degenerate or undersized samples: effect sizes stay null
        }
        return j;
    };
    nlohmann::json j;
    j["projects"] = report.projects;
    j["k"] = report.k;
    j["window"] = report.window;
    j["system_a"] = report.system_a;
    j["system_b"] = report.system_b;
    j["metrics"]["top_k_accuracy"] = metric_block(report.vectors_a.top_k_accuracy,
                                                  report.vectors_b.top_k_accuracy);
    j["metrics"]["mrr"] = metric_block(report.vectors_a.mrr, report.vectors_b.mrr);
    j["metrics"]["mean_precision"] = metric_block(report.vectors_a.mean_precision,
                                                  report.vectors_b.mean_precision);
    j["metrics"]["mean_recall"] = metric_block(report.vectors_a.mean_recall,
                                               report.vectors_b.mean_recall);
    return j;
}

// Replays every corpus with both recommenders at the same k/window/mode.
inline ComparisonReport compare_recommenders(std::span<const Corpus> corpora, std::size_t k,
                                             std::size_t window,
                                             TokenClassMode mode = TokenClassMode::combined) {
    ComparisonReport report;
    report.k = k;
    report.window = window;
    for (const auto& corpus : corpora) {
        report.projects.push_back(corpus.project_name);
        report.vectors_a.append(
            evaluate(corpus, make_correct_recommender(corpus, mode), k, window, "correct"));
        report.vectors_b.append(evaluate(corpus, make_fps_recommender(corpus), k, window, "fps"));
    }
    return report;
}

}  // namespace reviewrank

#pragma once

#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "qexp/corpus_io.hpp"

namespace qexp {

// Rank-order metrics over one ranked list. Judgments map doc_id -> grade;
// unjudged documents count as grade 0. Only row order matters, not scores.

/// Linear-gain nDCG with a log2(rank + 1) discount (trec_eval ndcg_cut).
double ndcg_at_k(std::span<const RunRow> rows, const Qrels::Judgments& judgments, std::size_t k);
/// Relevant-in-top-k over k, with k fixed in the denominator.
double precision_at_k(std::span<const RunRow> rows, const Qrels::Judgments& judgments, std::size_t k,
                      int rel_threshold = 1);
/// Relevant-in-top-k over all relevant; 0 when nothing is relevant.
double recall_at_k(std::span<const RunRow> rows, const Qrels::Judgments& judgments, std::size_t k,
                   int rel_threshold = 1);

struct EvalOptions {
    std::size_t ndcg_k = 10;
    std::size_t precision_k = 10;
    std::size_t recall_k = 100;
    int rel_threshold = 1;

    std::vector<std::string> metric_names() const;
};

struct MetricReport {
    std::string run_tag;
    std::vector<std::string> metrics;
    /// Ids in qrels order; per_query[m][i] belongs to query_ids[i].
    std::vector<std::string> query_ids;
    std::map<std::string, std::vector<double>> per_query;
    std::map<std::string, double> mean;
    /// Run and qrels shared no query.
    bool disjoint = false;

    std::size_t num_queries() const noexcept { return query_ids.size(); }
    const std::vector<double>& values(const std::string& metric) const;
};

/// Evaluates every query with judgments. Queries missing from the run score
/// 0 on every metric.
MetricReport evaluate(const RunList& run, const Qrels& qrels, const EvalOptions& options = {});

/// Aligned text table, one row per report.
std::string format_report_table(std::span<const MetricReport> reports);
/// One line per query with every metric, then an "all" line with the means.
void write_report_jsonl(const MetricReport& report, const std::filesystem::path& path);
/// trec_eval style `metric<TAB>qid<TAB>value` lines.
void write_per_query(const MetricReport& report, const std::filesystem::path& path);

}  // namespace qexp

#include "qexp/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <json.hpp>
#include <spdlog/spdlog.h>

namespace qexp {

using nlohmann::json;

namespace {

int grade_of(const Qrels::Judgments& judgments, const std::string& doc_id)
{
    auto it = judgments.find(doc_id);
    return it == judgments.end() ? 0 : it->second;
}

}  // namespace

double ndcg_at_k(std::span<const RunRow> rows, const Qrels::Judgments& judgments, std::size_t k)
{
    std::vector<int> ideal;
    for (const auto& [_, g] : judgments) {
        if (g > 0) {
            ideal.push_back(g);
        }
    }
    std::sort(ideal.begin(), ideal.end(), std::greater<>());
    double idcg = 0.0;
    for (std::size_t i = 0; i < std::min(k, ideal.size()); ++i) {
        idcg += ideal[i] / std::log2(static_cast<double>(i) + 2.0);
    }
    if (idcg <= 0.0) {
        return 0.0;
    }
    double dcg = 0.0;
    for (std::size_t i = 0; i < std::min(k, rows.size()); ++i) {
        int g = grade_of(judgments, rows[i].doc_id);
        if (g > 0) {
            dcg += g / std::log2(static_cast<double>(i) + 2.0);
        }
    }
    return dcg / idcg;
}

double precision_at_k(std::span<const RunRow> rows, const Qrels::Judgments& judgments, std::size_t k,
                      int rel_threshold)
{
    if (k == 0) {
        return 0.0;
    }
    std::size_t hits = 0;
    for (std::size_t i = 0; i < std::min(k, rows.size()); ++i) {
        if (grade_of(judgments, rows[i].doc_id) >= rel_threshold) {
            ++hits;
        }
    }
    return static_cast<double>(hits) / static_cast<double>(k);
}

double recall_at_k(std::span<const RunRow> rows, const Qrels::Judgments& judgments, std::size_t k,
                   int rel_threshold)
{
    std::size_t relevant = 0;
    for (const auto& [_, g] : judgments) {
        if (g >= rel_threshold) {
            ++relevant;
        }
    }
    if (relevant == 0) {
        return 0.0;
    }
    std::size_t hits = 0;
    for (std::size_t i = 0; i < std::min(k, rows.size()); ++i) {
        if (grade_of(judgments, rows[i].doc_id) >= rel_threshold) {
            ++hits;
        }
    }
    return static_cast<double>(hits) / static_cast<double>(relevant);
}

std::vector<std::string> EvalOptions::metric_names() const
{
    return {"ndcg@" + std::to_string(ndcg_k), "p@" + std::to_string(precision_k),
            "recall@" + std::to_string(recall_k)};
}

const std::vector<double>& MetricReport::values(const std::string& metric) const
{
    auto it = per_query.find(metric);
    if (it == per_query.end()) {
        throw ValidationError("report has no metric '" + metric + "'");
    }
    return it->second;
}

MetricReport evaluate(const RunList& run, const Qrels& qrels, const EvalOptions& options)
{
    MetricReport report;
    report.run_tag = run.tag();
    report.metrics = options.metric_names();
    report.query_ids = qrels.query_ids();
    for (const auto& m : report.metrics) {
        report.per_query[m].reserve(report.query_ids.size());
    }
    std::size_t matched = 0;
    static const std::vector<RunRow> kEmpty;
    for (const auto& qid : report.query_ids) {
        const auto& judgments = *qrels.judgments(qid);
        const auto* entry = run.find(qid);
        matched += entry != nullptr ? 1 : 0;
        const auto& rows = entry != nullptr ? entry->rows : kEmpty;
        report.per_query[report.metrics[0]].push_back(ndcg_at_k(rows, judgments, options.ndcg_k));
        report.per_query[report.metrics[1]].push_back(
            precision_at_k(rows, judgments, options.precision_k, options.rel_threshold));
        report.per_query[report.metrics[2]].push_back(
            recall_at_k(rows, judgments, options.recall_k, options.rel_threshold));
    }
    report.disjoint = matched == 0;
    if (report.disjoint) {
        spdlog::warn("run '{}' shares no query with the qrels; every metric is 0", run.tag());
    }
    for (const auto& m : report.metrics) {
        const auto& v = report.per_query[m];
        double sum = 0.0;
        for (double x : v) {
            sum += x;
        }
        report.mean[m] = v.empty() ? 0.0 : sum / static_cast<double>(v.size());
    }
    return report;
}

std::string format_report_table(std::span<const MetricReport> reports)
{
    if (reports.empty()) {
        return {};
    }
    std::size_t tag_width = 3;
    for (const auto& r : reports) {
        tag_width = std::max(tag_width, r.run_tag.size());
    }
    const auto& metrics = reports.front().metrics;
    std::ostringstream out;
    out << std::left << std::setw(static_cast<int>(tag_width)) << "run" << "  " << std::right << std::setw(8)
        << "queries";
    for (const auto& m : metrics) {
        out << "  " << std::setw(10) << m;
    }
    out << '\n';
    for (const auto& r : reports) {
        out << std::left << std::setw(static_cast<int>(tag_width)) << r.run_tag << "  " << std::right
            << std::setw(8) << r.num_queries();
        for (const auto& m : metrics) {
            out << "  " << std::setw(10) << std::fixed << std::setprecision(4) << r.mean.at(m);
        }
        out << '\n';
    }
    return out.str();
}

void write_report_jsonl(const MetricReport& report, const std::filesystem::path& path)
{
    if (path.has_parent_path()) {
        std::filesystem::create_directories(path.parent_path());
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    for (std::size_t i = 0; i < report.query_ids.size(); ++i) {
        json line = {{"run", report.run_tag}, {"query_id", report.query_ids[i]}};
        for (const auto& m : report.metrics) {
            line[m] = report.per_query.at(m)[i];
        }
        out << line.dump() << '\n';
    }
    json all = {{"run", report.run_tag}, {"query_id", "all"}, {"num_queries", report.num_queries()}};
    for (const auto& m : report.metrics) {
        all[m] = report.mean.at(m);
    }
    out << all.dump() << '\n';
}

void write_per_query(const MetricReport& report, const std::filesystem::path& path)
{
    if (path.has_parent_path()) {
        std::filesystem::create_directories(path.parent_path());
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << std::fixed << std::setprecision(6);
    for (const auto& m : report.metrics) {
        const auto& v = report.per_query.at(m);
        for (std::size_t i = 0; i < report.query_ids.size(); ++i) {
            out << m << '\t' << report.query_ids[i] << '\t' << v[i] << '\n';
        }
        out << m << "\tall\t" << report.mean.at(m) << '\n';
    }
}

}  // namespace qexp

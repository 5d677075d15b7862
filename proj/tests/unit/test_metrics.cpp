#include <cmath>
#include <fstream>

#include <gtest/gtest.h>
#include <json.hpp>

#include "qexp/metrics.hpp"
#include "test_support.hpp"

using namespace qexp;

namespace {

std::vector<RunRow> rows_of(std::initializer_list<const char*> ids)
{
    std::vector<RunRow> rows;
    int rank = 1;
    double score = 100.0;
    for (const char* id : ids) {
        rows.push_back({id, score, rank++});
        score -= 1.0;
    }
    return rows;
}

}  // namespace

TEST(Ndcg, HandComputed)
{
    Qrels::Judgments j{{"a", 2}, {"c", 1}, {"d", 3}};
    auto rows = rows_of({"a", "b", "c"});
    double dcg = 2.0 + 1.0 / 2.0;
    double idcg = 3.0 + 2.0 / std::log2(3.0) + 1.0 / 2.0;
    EXPECT_NEAR(ndcg_at_k(rows, j, 10), dcg / idcg, 1e-12);
    EXPECT_NEAR(ndcg_at_k(rows, j, 1), 2.0 / 3.0, 1e-12);
}

TEST(Ndcg, PerfectAndEmpty)
{
    Qrels::Judgments j{{"a", 3}, {"b", 1}};
    EXPECT_DOUBLE_EQ(ndcg_at_k(rows_of({"a", "b", "x"}), j, 10), 1.0);
    EXPECT_DOUBLE_EQ(ndcg_at_k({}, j, 10), 0.0);
    Qrels::Judgments none{{"a", 0}};
    EXPECT_DOUBLE_EQ(ndcg_at_k(rows_of({"a"}), none, 10), 0.0);
}

TEST(Precision, FixedDenominator)
{
    Qrels::Judgments j{{"a", 2}, {"c", 1}, {"d", 3}};
    auto rows = rows_of({"a", "b", "c"});
    EXPECT_DOUBLE_EQ(precision_at_k(rows, j, 10), 0.2);
    EXPECT_DOUBLE_EQ(precision_at_k(rows, j, 10, 2), 0.1);
    EXPECT_DOUBLE_EQ(precision_at_k(rows, j, 2), 0.5);
}

TEST(Recall, OverAllRelevant)
{
    Qrels::Judgments j{{"a", 2}, {"c", 1}, {"d", 3}};
    auto rows = rows_of({"a", "b", "c"});
    EXPECT_DOUBLE_EQ(recall_at_k(rows, j, 100), 2.0 / 3.0);
    EXPECT_DOUBLE_EQ(recall_at_k(rows, j, 100, 2), 0.5);
    EXPECT_DOUBLE_EQ(recall_at_k(rows, j, 1), 1.0 / 3.0);
    Qrels::Judgments zero{{"a", 0}};
    EXPECT_DOUBLE_EQ(recall_at_k(rows, zero, 100), 0.0);
}

TEST(Evaluate, MissingQueriesScoreZero)
{
    Qrels qrels;
    qrels.add("q1", "a", 1);
    qrels.add("q2", "b", 1);
    RunList run("t");
    run.add({"q1", rows_of({"a"})});
    run.add({"q9", rows_of({"b"})});
    auto r = evaluate(run, qrels);
    ASSERT_EQ(r.num_queries(), 2u);
    EXPECT_DOUBLE_EQ(r.values("ndcg@10")[0], 1.0);
    EXPECT_DOUBLE_EQ(r.values("ndcg@10")[1], 0.0);
    EXPECT_DOUBLE_EQ(r.mean.at("recall@100"), 0.5);
    EXPECT_FALSE(r.disjoint);
    EXPECT_THROW(r.values("map"), ValidationError);

    RunList other("u");
    other.add({"zz", rows_of({"a"})});
    EXPECT_TRUE(evaluate(other, qrels).disjoint);
}

TEST(Evaluate, MatchesTrecEvalFixture)
{
    auto run = read_run(qexp::testing::fixture("trec_run.txt"));
    auto qrels = load_qrels(qexp::testing::fixture("trec_qrels.txt"));
    auto report = evaluate(run, qrels);
    std::ifstream in(qexp::testing::fixture("trec_expected.jsonl"));
    std::string line;
    std::size_t checked = 0;
    while (std::getline(in, line)) {
        auto obj = nlohmann::json::parse(line);
        auto qid = obj["query_id"].get<std::string>();
        auto it = std::find(report.query_ids.begin(), report.query_ids.end(), qid);
        ASSERT_NE(it, report.query_ids.end()) << qid;
        auto i = static_cast<std::size_t>(it - report.query_ids.begin());
        for (const auto& m : report.metrics) {
            EXPECT_NEAR(report.values(m)[i], obj[m].get<double>(), 1e-9) << qid << " " << m;
        }
        ++checked;
    }
    EXPECT_EQ(checked, 50u);
}

TEST(Report, TableAndFiles)
{
    Qrels qrels;
    qrels.add("q1", "a", 1);
    RunList run("mytag");
    run.add({"q1", rows_of({"a"})});
    std::vector<MetricReport> reports{evaluate(run, qrels)};
    auto table = format_report_table(reports);
    EXPECT_NE(table.find("mytag"), std::string::npos);
    EXPECT_NE(table.find("1.0000"), std::string::npos);

    qexp::testing::TempDir dir;
    write_per_query(reports[0], dir / "pq.tsv");
    auto pq = qexp::testing::slurp(dir / "pq.tsv");
    EXPECT_NE(pq.find("ndcg@10\tq1\t1.000000\n"), std::string::npos);
    EXPECT_NE(pq.find("recall@100\tall\t1.000000\n"), std::string::npos);
    write_report_jsonl(reports[0], dir / "r.jsonl");
    EXPECT_NE(qexp::testing::slurp(dir / "r.jsonl").find("\"query_id\":\"all\""), std::string::npos);
}

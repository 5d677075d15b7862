#include <algorithm>
#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "qexp/dense.hpp"
#include "test_support.hpp"

using namespace qexp;

namespace {

std::vector<Embedding> random_rows(std::size_t n, std::size_t d, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g;
    std::vector<Embedding> rows;
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<double> v(d);
        for (auto& x : v) {
            x = g(rng);
        }
        rows.emplace_back(std::move(v));
    }
    return rows;
}

std::vector<std::string> ids(std::size_t n)
{
    std::vector<std::string> out;
    for (std::size_t i = 0; i < n; ++i) {
        out.push_back("doc" + std::to_string(i));
    }
    return out;
}

}  // namespace

TEST(Dense, RowsAreUnitNorm)
{
    auto rows = random_rows(30, 8, 1);
    auto index = DenseIndex::build(ids(30), rows);
    EXPECT_EQ(index.size(), 30u);
    EXPECT_EQ(index.dim(), 8u);
    for (std::size_t i = 0; i < index.size(); ++i) {
        double n = 0;
        for (double v : index.row(i)) {
            n += v * v;
        }
        EXPECT_NEAR(std::sqrt(n), 1.0, 1e-12);
    }
}

TEST(Dense, TopKMatchesBruteForceCosine)
{
    auto rows = random_rows(200, 16, 2);
    auto index = DenseIndex::build(ids(200), rows);
    auto queries = random_rows(10, 16, 3);
    for (const auto& q : queries) {
        auto got = dense_retrieve(index, q, 10);
        std::vector<std::pair<double, std::string>> oracle;
        for (std::size_t i = 0; i < rows.size(); ++i) {
            double c = dot(q.values(), rows[i].values()) / (q.norm() * rows[i].norm());
            oracle.emplace_back(-c, "doc" + std::to_string(i));
        }
        std::sort(oracle.begin(), oracle.end());
        ASSERT_EQ(got.size(), 10u);
        for (std::size_t i = 0; i < got.size(); ++i) {
            EXPECT_EQ(got[i].doc_id, oracle[i].second);
            EXPECT_NEAR(got[i].score, -oracle[i].first, 1e-12);
            EXPECT_EQ(got[i].rank, static_cast<int>(i + 1));
        }
    }
}

TEST(Dense, TiesByDocId)
{
    std::vector<Embedding> rows{Embedding({1, 0}), Embedding({2, 0}), Embedding({0, 1})};
    auto index = DenseIndex::build({"b", "a", "c"}, rows);
    auto got = dense_retrieve(index, Embedding({1, 0}), 3);
    EXPECT_EQ(got[0].doc_id, "a");
    EXPECT_EQ(got[1].doc_id, "b");
    EXPECT_EQ(got[2].doc_id, "c");
}

TEST(Dense, RejectsBadInput)
{
    std::vector<Embedding> mixed{Embedding({1, 0}), Embedding({1, 0, 0})};
    EXPECT_THROW(DenseIndex::build({"a", "b"}, mixed), ValidationError);
    std::vector<Embedding> zero{Embedding({0, 0})};
    EXPECT_THROW(DenseIndex::build({"a"}, zero), ValidationError);
    std::vector<Embedding> one{Embedding({1, 0})};
    EXPECT_THROW(DenseIndex::build({"a", "b"}, one), ValidationError);
    auto index = DenseIndex::build({"a"}, one);
    EXPECT_THROW(dense_retrieve(index, Embedding({1, 0, 0}), 1), ValidationError);
    EXPECT_THROW(Embedding({std::nan(""), 1.0}), ValidationError);
}

TEST(Dense, SaveLoadRoundTrip)
{
    auto rows = random_rows(12, 5, 4);
    auto index = DenseIndex::build(ids(12), rows);
    qexp::testing::TempDir dir;
    index.save(dir / "dense.jsonl");
    auto back = DenseIndex::load(dir / "dense.jsonl");
    ASSERT_EQ(back.size(), index.size());
    for (std::size_t i = 0; i < index.size(); ++i) {
        auto a = index.row(i);
        auto b = back.row(i);
        EXPECT_TRUE(std::equal(a.begin(), a.end(), b.begin()));
    }
    EXPECT_EQ(back.doc_ids(), index.doc_ids());
}

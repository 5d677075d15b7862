#include <algorithm>
#include <fstream>

#include <gtest/gtest.h>

#include "qexp/tokenize.hpp"
#include "test_support.hpp"

using namespace qexp;

TEST(Porter, MatchesReferenceStems)
{
    std::ifstream in(qexp::testing::fixture("porter_words.tsv"));
    ASSERT_TRUE(in);
    std::string word;
    std::string stem;
    std::size_t n = 0;
    std::vector<std::string> mismatches;
    while (in >> word >> stem) {
        ++n;
        if (porter_stem(word) != stem) {
            mismatches.push_back(word + " -> " + porter_stem(word) + " (want " + stem + ")");
        }
    }
    EXPECT_GT(n, 1000u);
    for (std::size_t i = 0; i < std::min<std::size_t>(mismatches.size(), 20); ++i) {
        ADD_FAILURE() << mismatches[i];
    }
}

TEST(Porter, ClassicExamples)
{
    EXPECT_EQ(porter_stem("caresses"), "caress");
    EXPECT_EQ(porter_stem("ponies"), "poni");
    EXPECT_EQ(porter_stem("relational"), "relat");
    EXPECT_EQ(porter_stem("conditional"), "condit");
    EXPECT_EQ(porter_stem("hopping"), "hop");
    EXPECT_EQ(porter_stem("generalizations"), "gener");
    EXPECT_EQ(porter_stem("retrieval"), "retriev");
    EXPECT_EQ(porter_stem("archaeology"), "archaeolog");
    EXPECT_EQ(porter_stem("as"), "as");
    EXPECT_EQ(porter_stem(""), "");
}

TEST(Stopwords, LuceneSet)
{
    auto sw = english_stopwords();
    EXPECT_EQ(sw.size(), 33u);
    EXPECT_TRUE(std::is_sorted(sw.begin(), sw.end()));
    EXPECT_TRUE(is_stopword("the"));
    EXPECT_TRUE(is_stopword("with"));
    EXPECT_FALSE(is_stopword("what"));
}

TEST(Tokenize, LowercasesSplitsStems)
{
    auto t = tokenize("The Cats, running-fast; in 2024!");
    std::vector<std::string> want{"cat", "run", "fast", "2024"};
    EXPECT_EQ(t, want);
}

TEST(Tokenize, KeepsNonAsciiBytesUnstemmed)
{
    auto t = tokenize("Caf\xc3\xa9s na\xc3\xafve");
    ASSERT_EQ(t.size(), 2u);
    EXPECT_EQ(t[0], "caf\xc3\xa9s");
    EXPECT_EQ(t[1], "na\xc3\xafve");
}

TEST(Tokenize, OnlyStopwordsGivesNothing)
{
    EXPECT_TRUE(tokenize("the and of").empty());
    EXPECT_TRUE(tokenize("  ...  ").empty());
}

TEST(Tokenize, Deterministic)
{
    std::string text = "Vitamin D deficiency is linked to weak bones";
    EXPECT_EQ(tokenize(text), tokenize(text));
}

TEST(CountWords, Whitespace)
{
    EXPECT_EQ(count_words(""), 0u);
    EXPECT_EQ(count_words("  one\ttwo\n three  "), 3u);
}

#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

namespace qexp::cli {

/// Bad or missing command-line input. The message names the flag.
class UsageError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitDegraded = 3;
inline constexpr int kExitInterrupted = 130;

/// Every knob of an experiment. Path fields are empty when unset.
struct Manifest {
    std::string corpus;
    std::string queries;
    std::string qrels;
    std::string seeds;
    std::string pool;
    std::string exemplars;
    std::string expansions;
    std::string run;
    std::vector<std::string> runs;
    std::string index_dir;
    std::string output_dir = "qexp-out";
    std::string templates;
    std::string cassette;
    std::string cassette_mode = "auto";

    std::string mode = "none";
    std::string retriever = "bm25";
    std::size_t k_exemplars = 4;
    std::size_t copies = 5;
    std::size_t top_k = 100;
    std::size_t workers = 4;
    std::size_t harvest_top_n = 100;
    std::size_t keep_per_query = 1;
    std::size_t restarts = 1;

    int max_new_tokens = 64;
    int refine_max_new_tokens = 128;
    int num_beams = 4;
    double repetition_penalty = 1.1;
    int no_repeat_ngram = 2;
    int context_budget = 1024;

    double k1 = 0.9;
    double b = 0.4;
    double rocchio_alpha = 1.0;
    double rocchio_beta = 0.75;
    std::size_t fb_docs = 10;
    std::size_t fb_terms = 10;

    std::string llm1_url;
    std::string llm2_url;
    std::string refiner_url;
    std::string embed_url;
    std::string rerank_url;

    std::uint64_t seed = 42;
    int rel_threshold = 1;
    std::string metric = "ndcg@10";
    double alpha = 0.05;
    double failure_budget = 0.0;
    std::string tag;

    /// Options plus content hashes of the input files; output locations are
    /// left out so the same experiment hashes the same wherever it is written.
    nlohmann::json to_json() const;
    std::string hash() const;
};

int cmd_index(const Manifest& m);
int cmd_harvest(const Manifest& m);
int cmd_select(const Manifest& m);
int cmd_expand(const Manifest& m);
int cmd_retrieve(const Manifest& m);
int cmd_eval(const Manifest& m);
int cmd_compare(const Manifest& m);
int cmd_run_all(const Manifest& m);

/// `<artifact>.meta.json` next to a file or directory artifact.
std::filesystem::path meta_path(const std::filesystem::path& artifact);

}  // namespace qexp::cli

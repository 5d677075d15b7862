#include <csignal>
#include <iostream>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "commands.hpp"
#include "qexp/concurrency.hpp"
#include "qexp/error.hpp"

namespace {

extern "C" void on_sigint(int)
{
    qexp::interrupt_flag().store(true);
}

void add_options(CLI::App& app, qexp::cli::Manifest& m)
{
    app.add_option("--corpus", m.corpus, "Corpus (.jsonl or .tsv)");
    app.add_option("--queries", m.queries, "Test queries (qid<TAB>text or jsonl)");
    app.add_option("--qrels", m.qrels, "Relevance judgments");
    app.add_option("--seeds", m.seeds, "Unlabeled seed queries for harvesting");
    app.add_option("--pool", m.pool, "Exemplar pool (jsonl)");
    app.add_option("--exemplars", m.exemplars, "Selected exemplars (jsonl)");
    app.add_option("--expansions", m.expansions, "Expansion records (jsonl)");
    app.add_option("--run", m.run, "Run file");
    app.add_option("--index-dir", m.index_dir, "BM25 index directory");
    app.add_option("--output-dir", m.output_dir, "Where artifacts are written")->capture_default_str();
    app.add_option("--templates", m.templates, "Prompt templates (json)");
    app.add_option("--cassette", m.cassette, "Record/replay file for model calls");
    app.add_option("--cassette-mode", m.cassette_mode, "record, replay or auto")
        ->check(CLI::IsMember({"record", "replay", "auto"}))
        ->capture_default_str();

    app.add_option("--mode", m.mode, "none, rocchio, zeroshot, fewshot-fixed, cluster-icl, concat, refine")
        ->capture_default_str();
    app.add_option("--retriever", m.retriever, "bm25 or dense")->check(CLI::IsMember({"bm25", "dense"}))
        ->capture_default_str();
    app.add_option("--k-exemplars", m.k_exemplars)->capture_default_str();
    app.add_option("--copies", m.copies, "Query repetitions in the augmented query")->capture_default_str();
    app.add_option("--top-k", m.top_k, "Run depth")->capture_default_str();
    app.add_option("--workers", m.workers)->check(CLI::PositiveNumber)->capture_default_str();
    app.add_option("--harvest-top-n", m.harvest_top_n)->capture_default_str();
    app.add_option("--keep-per-query", m.keep_per_query)->capture_default_str();
    app.add_option("--restarts", m.restarts, "k-means restarts")->capture_default_str();

    app.add_option("--max-new-tokens", m.max_new_tokens)->capture_default_str();
    app.add_option("--refine-max-new-tokens", m.refine_max_new_tokens)->capture_default_str();
    app.add_option("--num-beams", m.num_beams)->capture_default_str();
    app.add_option("--repetition-penalty", m.repetition_penalty)->capture_default_str();
    app.add_option("--no-repeat-ngram", m.no_repeat_ngram)->capture_default_str();
    app.add_option("--context-budget", m.context_budget)->capture_default_str();

    app.add_option("--k1", m.k1)->capture_default_str();
    app.add_option("--b", m.b)->capture_default_str();
    app.add_option("--rocchio-alpha", m.rocchio_alpha)->capture_default_str();
    app.add_option("--rocchio-beta", m.rocchio_beta)->capture_default_str();
    app.add_option("--fb-docs", m.fb_docs)->capture_default_str();
    app.add_option("--fb-terms", m.fb_terms)->capture_default_str();

    app.add_option("--llm1-url", m.llm1_url)->envname("QEXP_LLM1_URL");
    app.add_option("--llm2-url", m.llm2_url)->envname("QEXP_LLM2_URL");
    app.add_option("--refiner-url", m.refiner_url)->envname("QEXP_REFINER_URL");
    app.add_option("--embed-url", m.embed_url)->envname("QEXP_EMBED_URL");
    app.add_option("--rerank-url", m.rerank_url)->envname("QEXP_RERANK_URL");

    app.add_option("--seed", m.seed)->capture_default_str();
    app.add_option("--rel-threshold", m.rel_threshold)->capture_default_str();
    app.add_option("--metric", m.metric)->capture_default_str();
    app.add_option("--alpha", m.alpha, "Significance level")->capture_default_str();
    app.add_option("--failure-budget", m.failure_budget, "Tolerated degraded fraction")
        ->check(CLI::Range(0.0, 1.0))
        ->capture_default_str();
    app.add_option("--tag", m.tag, "Run tag");
}

}  // namespace

int main(int argc, char** argv)
{
    using namespace qexp::cli;

    CLI::App app{"qexp: label-free query expansion workbench"};
    app.set_config("--config", "", "TOML config; flags override it");
    app.require_subcommand(1);
    Manifest m;
    add_options(app, m);
    bool verbose = false;
    bool quiet = false;
    app.add_flag("-v,--verbose", verbose);
    app.add_flag("-q,--quiet", quiet);

    auto sub = [&](const char* name, const char* help) {
        auto* s = app.add_subcommand(name, help);
        s->fallthrough();
        return s;
    };
    auto* index = sub("index", "Build a BM25 (and optionally dense) index");
    auto* harvest = sub("harvest", "Harvest a pseudo-relevant exemplar pool");
    auto* select = sub("select", "Pick cluster-medoid exemplars from a pool");
    auto* expand = sub("expand", "Generate query expansions");
    auto* retrieve = sub("retrieve", "Retrieve with (expanded) queries");
    auto* eval = sub("eval", "Evaluate runs against qrels");
    auto* compare = sub("compare", "Paired t-test between two runs");
    auto* run_all = sub("run-all", "Run every stage, reusing cached outputs");
    eval->add_option("runs", m.runs, "Additional run files");
    compare->add_option("runs", m.runs, "Two run files")->expected(2);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : kExitUsage;
    }

    auto logger = spdlog::stderr_color_mt("qexp");
    spdlog::set_default_logger(logger);
    spdlog::set_pattern("[%l] %v");
    spdlog::set_level(quiet ? spdlog::level::warn : verbose ? spdlog::level::debug : spdlog::level::info);

    std::signal(SIGINT, on_sigint);

    try {
        if (index->parsed()) {
            return cmd_index(m);
        }
        if (harvest->parsed()) {
            return cmd_harvest(m);
        }
        if (select->parsed()) {
            return cmd_select(m);
        }
        if (expand->parsed()) {
            return cmd_expand(m);
        }
        if (retrieve->parsed()) {
            return cmd_retrieve(m);
        }
        if (eval->parsed()) {
            return cmd_eval(m);
        }
        if (compare->parsed()) {
            return cmd_compare(m);
        }
        if (run_all->parsed()) {
            return cmd_run_all(m);
        }
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        spdlog::error("{}", e.what());
        return qexp::interrupted() ? kExitInterrupted : kExitFailure;
    }
    return kExitUsage;
}

// xcoqa command-line pipeline: indexing, retrieval, ensembling, QA
// filtering, augmentation, generation, evaluation, and loss checking.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <map>
#include <random>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "xcoqa/augment.hpp"
#include "xcoqa/contrastive.hpp"
#include "xcoqa/corpus.hpp"
#include "xcoqa/dense.hpp"
#include "xcoqa/evaluate.hpp"
#include "xcoqa/generate.hpp"
#include "xcoqa/lexical.hpp"
#include "xcoqa/ranking.hpp"
#include "xcoqa/tokenize.hpp"

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitInternal = 3;

void write_or_print(const std::string& out_path, const std::string& content) {
    if (out_path.empty()) {
        std::cout << content << '\n';
        return;
    }
    std::ofstream out(out_path);
    if (!out) throw xcoqa::parse_error("cannot open output file: " + out_path);
    out << content << '\n';
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"cross-lingual open-retrieval QA pipeline"};
    app.require_subcommand(1);
    app.set_config("--config", "", "key=value config file; flags win");
    app.allow_config_extras(true);

    std::uint64_t seed = 0;
    app.add_option("--seed", seed, "global random seed")->capture_default_str();

    // ---- index ----
    auto* cmd_index = app.add_subcommand("index", "build a per-language BM25 index");
    std::string idx_corpus, idx_lang, idx_out;
    xcoqa::Bm25Params bm25;
    cmd_index->add_option("--corpus", idx_corpus, "passage JSONL")->required();
    cmd_index->add_option("--lang", idx_lang, "language code")->required();
    cmd_index->add_option("--k1", bm25.k1)->capture_default_str();
    cmd_index->add_option("--b", bm25.b)->capture_default_str();
    cmd_index->add_option("--out", idx_out, "output index file")->required();

    // ---- retrieve ----
    auto* cmd_retrieve = app.add_subcommand("retrieve", "BM25 or dense retrieval");
    std::string ret_index, ret_queries, ret_out, ret_mode = "question";
    std::string ret_embeddings, ret_query_embeddings;
    std::size_t ret_k = 100;
    cmd_retrieve->add_option("--index", ret_index, "BM25 index file");
    cmd_retrieve->add_option("--queries", ret_queries, "QA JSONL of queries");
    cmd_retrieve->add_option("--mode", ret_mode, "question|oracle")
        ->check(CLI::IsMember({"question", "oracle"}));
    cmd_retrieve->add_option("--embeddings", ret_embeddings, "passage embedding JSONL");
    cmd_retrieve->add_option("--query-embeddings", ret_query_embeddings,
                             "query embedding JSONL");
    cmd_retrieve->add_option("--k", ret_k)->capture_default_str();
    cmd_retrieve->add_option("--out", ret_out, "ranked-list JSONL")->required();

    // ---- ensemble ----
    auto* cmd_ensemble = app.add_subcommand("ensemble", "average-rank fusion");
    std::vector<std::string> ens_inputs;
    std::string ens_out;
    std::size_t ens_k = 100;
    cmd_ensemble->add_option("--inputs", ens_inputs, "ranked-list JSONL files")
        ->required()
        ->expected(-1);
    cmd_ensemble->add_option("--k", ens_k)->capture_default_str();
    cmd_ensemble->add_option("--out", ens_out)->required();

    // ---- filter-qa ----
    auto* cmd_filter = app.add_subcommand("filter-qa", "heuristic QA-pair filter");
    std::string flt_qa, flt_out;
    cmd_filter->add_option("--qa", flt_qa, "QA JSONL")->required();
    cmd_filter->add_option("--out", flt_out)->required();

    // ---- build-aug ----
    auto* cmd_aug = app.add_subcommand("build-aug", "assemble AUG-QA / AUG-QAP data");
    std::string aug_qa, aug_corpus, aug_out, aug_variant = "aug-qa", aug_placement = "shuffle";
    std::size_t aug_negatives = 3;
    cmd_aug->add_option("--qa", aug_qa, "filtered QA JSONL")->required();
    cmd_aug->add_option("--corpus", aug_corpus, "seed passage JSONL")->required();
    cmd_aug->add_option("--variant", aug_variant, "aug-qa|aug-qap")
        ->check(CLI::IsMember({"aug-qa", "aug-qap"}));
    cmd_aug->add_option("--negatives", aug_negatives)->capture_default_str();
    cmd_aug->add_option("--placement", aug_placement, "shuffle|top")
        ->check(CLI::IsMember({"shuffle", "top"}));
    cmd_aug->add_option("--out", aug_out)->required();

    // ---- eval ----
    auto* cmd_eval = app.add_subcommand("eval", "token-level F1 evaluation");
    std::string ev_pred, ev_gold, ev_out, ev_name = "dataset";
    std::string ev_pred2, ev_gold2, ev_name2 = "dataset2";
    cmd_eval->add_option("--pred", ev_pred)->required();
    cmd_eval->add_option("--gold", ev_gold)->required();
    cmd_eval->add_option("--dataset", ev_name)->capture_default_str();
    cmd_eval->add_option("--pred2", ev_pred2, "second dataset predictions");
    cmd_eval->add_option("--gold2", ev_gold2, "second dataset golds");
    cmd_eval->add_option("--dataset2", ev_name2)->capture_default_str();
    cmd_eval->add_option("--out", ev_out, "report path (default: stdout)");

    // ---- loss-check ----
    auto* cmd_loss = app.add_subcommand("loss-check", "finite-difference gradient check");
    std::string loss_name = "mdpr", loss_out;
    std::size_t loss_seeds = 100, loss_dim = 8, loss_negs = 4;
    double loss_eps = 1e-5, loss_lambda = 0.2, loss_tau = 0.05;
    cmd_loss->add_option("--loss", loss_name, "mdpr|mixcse")
        ->check(CLI::IsMember({"mdpr", "mixcse"}));
    cmd_loss->add_option("--seeds", loss_seeds)->capture_default_str();
    cmd_loss->add_option("--dim", loss_dim)->capture_default_str();
    cmd_loss->add_option("--negs", loss_negs)->capture_default_str();
    cmd_loss->add_option("--epsilon", loss_eps)->capture_default_str();
    cmd_loss->add_option("--lambda", loss_lambda)->capture_default_str();
    cmd_loss->add_option("--tau", loss_tau)->capture_default_str();
    cmd_loss->add_option("--out", loss_out, "report path (default: stdout)");

    // ---- generate ----
    auto* cmd_gen = app.add_subcommand("generate", "run a baseline generator");
    std::string gen_requests, gen_out, gen_gold, gen_name = "echo";
    std::size_t gen_top = 15, gen_truncate = 16000;
    cmd_gen->add_option("--requests", gen_requests, "GenerationRequest JSONL")->required();
    cmd_gen->add_option("--generator", gen_name, "echo|oracle-extractive")
        ->check(CLI::IsMember({"echo", "oracle-extractive"}));
    cmd_gen->add_option("--gold", gen_gold, "gold JSONL (oracle-extractive)");
    cmd_gen->add_option("--top", gen_top, "passages per request")->capture_default_str();
    cmd_gen->add_option("--truncate", gen_truncate, "input token limit")
        ->capture_default_str();
    cmd_gen->add_option("--out", gen_out)->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return e.get_exit_code() == 0 ? 0 : kExitUsage;
    }

    try {
        if (*cmd_index) {
            auto passages = xcoqa::load_passages(idx_corpus);
            auto index = xcoqa::build_index(passages, idx_lang, bm25);
            xcoqa::save_index(index, idx_out);
        } else if (*cmd_retrieve) {
            std::vector<xcoqa::RankedList> lists;
            if (!ret_index.empty()) {
                if (ret_queries.empty())
                    throw xcoqa::argument_error("retrieve: --queries required with --index");
                auto index = xcoqa::load_index(ret_index);
                const auto mode = ret_mode == "oracle" ? xcoqa::QueryMode::OracleAnswer
                                                       : xcoqa::QueryMode::Question;
                for (const auto& qa : xcoqa::load_qa_pairs(ret_queries)) {
                    const std::string& text =
                        mode == xcoqa::QueryMode::OracleAnswer ? qa.answer : qa.question;
                    lists.push_back(xcoqa::query(index, text, mode, ret_k, qa.id));
                }
            } else if (!ret_embeddings.empty()) {
                if (ret_query_embeddings.empty())
                    throw xcoqa::argument_error(
                        "retrieve: --query-embeddings required with --embeddings");
                auto store = xcoqa::load_embeddings(ret_embeddings);
                auto queries = xcoqa::load_embeddings(ret_query_embeddings);
                for (const auto& [qid, qvec] : queries.vectors)
                    lists.push_back(xcoqa::cosine_top_k(store, qvec, ret_k, qid));
            } else {
                throw xcoqa::argument_error("retrieve: need --index or --embeddings");
            }
            xcoqa::save_ranked_lists(lists, ret_out);
        } else if (*cmd_ensemble) {
            std::vector<std::map<std::string, xcoqa::RankedList>> by_query;
            for (const auto& path : ens_inputs) {
                std::map<std::string, xcoqa::RankedList> m;
                for (auto& rl : xcoqa::load_ranked_lists(path)) m[rl.query_id] = rl;
                by_query.push_back(std::move(m));
            }
            std::vector<xcoqa::RankedList> fused;
            for (const auto& [qid, first] : by_query.front()) {
                std::vector<xcoqa::RankedList> lists;
                for (const auto& m : by_query) {
                    auto it = m.find(qid);
                    if (it == m.end())
                        throw xcoqa::conflict_error("ensemble: query \"" + qid +
                                                    "\" missing from an input file");
                    lists.push_back(it->second);
                }
                fused.push_back(xcoqa::ensemble_rank(lists, ens_k));
            }
            xcoqa::save_ranked_lists(fused, ens_out);
        } else if (*cmd_filter) {
            std::vector<xcoqa::QAPair> kept;
            for (auto& qa : xcoqa::load_qa_pairs(flt_qa)) {
                auto label = xcoqa::filter_qa_pair(qa.question, qa.answer);
                if (!label) continue;
                qa.label = label;
                kept.push_back(std::move(qa));
            }
            xcoqa::save_qa_pairs(kept, flt_out);
        } else if (*cmd_aug) {
            auto pairs = xcoqa::load_qa_pairs(aug_qa);
            std::map<std::string, xcoqa::Passage> seeds;
            for (auto& p : xcoqa::load_passages(aug_corpus)) seeds[p.id] = std::move(p);
            const auto variant = aug_variant == "aug-qap" ? xcoqa::AugVariant::AugQAP
                                                          : xcoqa::AugVariant::AugQA;
            const auto placement = aug_placement == "top"
                                       ? xcoqa::PositivePlacement::Top
                                       : xcoqa::PositivePlacement::Shuffle;
            auto examples = xcoqa::build_aug_dataset(pairs, seeds, xcoqa::identity_translator(),
                                                     variant, aug_negatives, placement, seed);
            xcoqa::save_aug_dataset(examples, aug_out);
        } else if (*cmd_eval) {
            auto report = xcoqa::evaluate_predictions(xcoqa::load_predictions(ev_pred),
                                                      xcoqa::load_golds(ev_gold), ev_name);
            if (!ev_pred2.empty()) {
                if (ev_gold2.empty())
                    throw xcoqa::argument_error("eval: --gold2 required with --pred2");
                auto second = xcoqa::evaluate_predictions(
                    xcoqa::load_predictions(ev_pred2), xcoqa::load_golds(ev_gold2), ev_name2);
                for (const auto& [lang, f1] : second.per_language)
                    report.per_language[ev_name2 + ":" + lang] = f1;
                report.dataset_macro[ev_name2] = second.dataset_macro.at(ev_name2);
                report.overall = xcoqa::overall_score(report.dataset_macro.at(ev_name),
                                                      second.dataset_macro.at(ev_name2));
            }
            write_or_print(ev_out, xcoqa::to_json(report).dump(2));
        } else if (*cmd_loss) {
            std::mt19937_64 rng(seed);
            double max_rel = 0.0;
            for (std::size_t s = 0; s < loss_seeds; ++s) {
                double err;
                if (loss_name == "mdpr") {
                    auto batch = xcoqa::random_unit_batch(rng, loss_dim, loss_negs);
                    err = xcoqa::finite_diff_check_mdpr(batch, loss_eps);
                } else {
                    // clustered draws keep every softmax term resolvable by
                    // central differences at small tau
                    auto batch = xcoqa::clustered_unit_batch(rng, loss_dim, loss_negs);
                    xcoqa::MixParams params{loss_lambda, loss_tau,
                                            static_cast<std::size_t>(rng() % loss_negs)};
                    err = xcoqa::finite_diff_check_mixcse(batch, params, loss_eps);
                }
                max_rel = std::max(max_rel, err);
            }
            nlohmann::json report{{"loss", loss_name},
                                  {"seeds", loss_seeds},
                                  {"max_rel_err", max_rel},
                                  {"pass", max_rel <= 1e-4}};
            write_or_print(loss_out, report.dump());
        } else if (*cmd_gen) {
            xcoqa::GeneratorContract generator;
            if (gen_name == "oracle-extractive") {
                if (gen_gold.empty())
                    throw xcoqa::argument_error("generate: oracle-extractive needs --gold");
                std::map<std::string, std::vector<std::string>> golds;
                for (const auto& g : xcoqa::load_golds(gen_gold)) golds[g.id] = g.answers;
                generator = xcoqa::oracle_extractive_generator(std::move(golds));
            } else {
                generator = xcoqa::echo_generator();
            }
            std::ofstream out(gen_out);
            if (!out) throw xcoqa::parse_error("cannot open output file: " + gen_out);
            for (auto req : xcoqa::load_requests(gen_requests)) {
                if (req.passages.size() > gen_top) req.passages.resize(gen_top);
                req = xcoqa::truncate_input(req, gen_truncate);
                const std::string answer = xcoqa::generate(req, generator);
                out << nlohmann::json{{"id", req.id}, {"lang", req.lang},
                                      {"prediction", answer}}.dump()
                    << '\n';
            }
        }
    } catch (const xcoqa::argument_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitData;
    } catch (...) {
        std::cerr << "error: internal invariant violation\n";
        return kExitInternal;
    }
    return 0;
}

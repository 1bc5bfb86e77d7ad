#include "kgpath/error.hpp"
#include "kgpath/experiments.hpp"
#include "kgpath/io_util.hpp"
#include "kgpath/kg.hpp"
#include "kgpath/metrics.hpp"
#include "kgpath/mining.hpp"
#include "kgpath/model.hpp"
#include "kgpath/path_builder.hpp"
#include "kgpath/scoring.hpp"
#include "kgpath/synth.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

namespace {

using namespace kgpath;

KnowledgeGraph load_graph_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open graph file: " + path);
    return KnowledgeGraph::load(in);
}

std::vector<QueryType> parse_query_types(const std::string& spec, const KnowledgeGraph& g) {
    std::vector<QueryType> out;
    for (const auto& part : split_on(spec, ','))
        if (!part.empty()) out.push_back(parse_query_type(part, g));
    if (out.empty()) throw ValidationError("no query types given");
    return out;
}

std::vector<std::size_t> parse_size_list(const std::string& spec, const std::string& what) {
    std::vector<std::size_t> out;
    for (const auto& part : split_on(spec, ','))
        if (!part.empty()) out.push_back(static_cast<std::size_t>(parse_int(part, what)));
    if (out.empty()) throw ValidationError(what + " list is empty");
    return out;
}

// Canonical flag snapshot used as the recorded config for flag-driven commands.
std::uint64_t flags_hash(std::initializer_list<std::pair<const char*, std::string>> kv) {
    KeyValueConfig cfg;
    for (const auto& [k, v] : kv) cfg.entries.emplace_back(k, v);
    return cfg.hash();
}

Hyperparams hyperparams_from_config(const KeyValueConfig& cfg) {
    Hyperparams hp;
    hp.dim = static_cast<std::uint32_t>(parse_int(cfg.get_or("dim", "32"), "dim"));
    hp.epochs = static_cast<std::uint32_t>(parse_int(cfg.get_or("epochs", "30"), "epochs"));
    hp.learning_rate = parse_double(cfg.get_or("lr", "0.01"), "lr");
    hp.batch_size = static_cast<std::uint32_t>(parse_int(cfg.get_or("batch_size", "128"), "batch_size"));
    hp.dropout_rate = parse_double(cfg.get_or("dropout", "0.5"), "dropout");
    hp.l2_weight = parse_double(cfg.get_or("l2", "0.0001"), "l2");
    hp.neg_rate = parse_double(cfg.get_or("neg_rate", "0.25"), "neg_rate");
    hp.seed = static_cast<std::uint64_t>(parse_int(cfg.get("seed"), "seed"));
    hp.validate();
    return hp;
}

int cmd_ingest(const std::string& triples, const std::string& out) {
    std::ifstream in(triples);
    if (!in) throw Error("cannot open triple file: " + triples);
    KnowledgeGraph g = KnowledgeGraph::load_triples(in, triples);
    std::ostringstream buf;
    g.save(buf, flags_hash({{"cmd", "ingest"}, {"triples", triples}, {"out", out}}));
    atomic_write(out, buf.str());
    std::cerr << "ingested " << g.triple_count() << " triples, " << g.entity_count()
              << " entities, " << g.relation_count() << " relation types\n";
    return 0;
}

int cmd_synth(std::uint64_t seed, const std::string& out_dir, const SynthConfig& base) {
    SynthConfig cfg = base;
    cfg.seed = seed;
    SynthOutput out = generate_synthetic_kg(cfg);
    std::filesystem::create_directories(out_dir);
    std::uint64_t h = flags_hash({{"cmd", "synth"},
                                  {"seed", std::to_string(seed)},
                                  {"pair_count", std::to_string(cfg.pair_count)},
                                  {"paths_per_pair", std::to_string(cfg.paths_per_pair)}});
    atomic_write(std::filesystem::path(out_dir) / "triples.tsv", output_header(h) + out.triples_tsv);
    atomic_write(std::filesystem::path(out_dir) / "docs.tsv", output_header(h) + out.docs_tsv);
    return 0;
}

int cmd_mine(const std::string& graph, const std::string& docs, const std::string& qts,
             std::uint64_t min_freq, std::size_t min_paths, std::size_t max_pairs,
             const std::string& out) {
    KnowledgeGraph g = load_graph_file(graph);
    auto query_types = parse_query_types(qts, g);
    std::ifstream din(docs);
    if (!din) throw Error("cannot open doc-triple file: " + docs);
    auto doc_triples = load_doc_triples(din, docs, g);
    auto freq = mine_one_hop_paths(doc_triples, g);
    GroundTruthSet gt = build_ground_truth(freq, query_types, g, min_freq, min_paths, max_pairs);
    std::ostringstream buf;
    save_ground_truth(buf, gt, g,
                      flags_hash({{"cmd", "mine"},
                                  {"graph", graph},
                                  {"docs", docs},
                                  {"query_types", qts},
                                  {"min_freq", std::to_string(min_freq)},
                                  {"min_paths", std::to_string(min_paths)},
                                  {"max_pairs", std::to_string(max_pairs)}}));
    atomic_write(out, buf.str());
    std::cerr << "mined " << freq.size() << " distinct paths; kept " << gt.pairs.size()
              << " pairs\n";
    return 0;
}

int cmd_split(const std::string& graph, const std::string& gt_path, std::uint64_t seed,
              const std::string& out_prefix) {
    KnowledgeGraph g = load_graph_file(graph);
    std::ifstream gin(gt_path);
    if (!gin) throw Error("cannot open ground-truth file: " + gt_path);
    GroundTruthSet gt = load_ground_truth(gin, gt_path, g, {});
    LeaveOneOutSplit split = make_leave_one_out(g, gt, seed);
    std::uint64_t h = flags_hash({{"cmd", "split"},
                                  {"graph", graph},
                                  {"gt", gt_path},
                                  {"seed", std::to_string(seed)}});
    std::ostringstream train_buf, held_buf;
    save_split(train_buf, held_buf, split, g, h);
    atomic_write(out_prefix + ".train.tsv", train_buf.str());
    atomic_write(out_prefix + ".heldout.tsv", held_buf.str());
    std::cerr << "split: " << split.train.size() << " train triples, " << split.held_out.size()
              << " held-out pairs\n";
    return 0;
}

int cmd_train(const std::string& graph, const Hyperparams& hp, const std::string& out) {
    KnowledgeGraph g = load_graph_file(graph);
    std::vector<double> losses;
    TrainOptions opts;
    opts.epoch_losses = &losses;
    EmbeddingModel model = train(g, hp, opts);
    std::uint64_t h = flags_hash({{"cmd", "train"},
                                  {"graph", graph},
                                  {"dim", std::to_string(hp.dim)},
                                  {"epochs", std::to_string(hp.epochs)},
                                  {"seed", std::to_string(hp.seed)}});
    save_model_file(out, model, h);
    if (!losses.empty())
        std::cerr << "trained: first-epoch loss " << losses.front() << ", last-epoch loss "
                  << losses.back() << "\n";
    return 0;
}

int cmd_build(const std::string& model_path, const std::string& graph, const std::string& pair,
              const std::string& qts, std::size_t n_pred, const std::string& scorer_str,
              const std::string& out) {
    KnowledgeGraph g = load_graph_file(graph);
    EmbeddingModel model = load_model_file(model_path, g.vocab_hash());
    auto query_types = parse_query_types(qts, g);
    auto parts = split_on(pair, ':');
    if (parts.size() != 2) throw ValidationError("pair must be 'source:target'");
    EntityId e1 = g.entity_id(parts[0]);
    EntityId e2 = g.entity_id(parts[1]);
    Scorer scorer = scorer_from_name(scorer_str);

    std::uint64_t h = flags_hash({{"cmd", "build"},
                                  {"model", model_path},
                                  {"graph", graph},
                                  {"pair", pair},
                                  {"query_types", qts},
                                  {"n_pred", std::to_string(n_pred)},
                                  {"scorer", scorer_str}});
    RankedPathList ranked;
    if (scorer == Scorer::Baseline) {
        ranked = baseline_rank(model, g, e1, e2, query_types, n_pred);
    } else {
        CandidateGraph cg = build_candidate_graph(model, g, e1, e2, query_types, n_pred);
        std::vector<Path> paths = enumerate_one_hop_paths(cg);
        ranked = rank_paths(paths, scorer, &cg, &model, e1, e2);
    }
    std::ostringstream buf;
    save_ranked_paths(buf, ranked, g, h);
    atomic_write(out, buf.str());
    std::cerr << "built " << ranked.entries.size() << " ranked paths\n";
    return 0;
}

int cmd_eval_exp1(const std::string& config_path, std::size_t threads) {
    KeyValueConfig cfg = KeyValueConfig::parse_file(config_path);
    KnowledgeGraph g = load_graph_file(cfg.get("graph"));
    auto query_types = parse_query_types(cfg.get("query_types"), g);
    std::ifstream gin(cfg.get("gt"));
    if (!gin) throw Error("cannot open ground-truth file: " + cfg.get("gt"));
    GroundTruthSet gt = load_ground_truth(gin, cfg.get("gt"), g, query_types);

    std::ifstream tin(cfg.get("train"));
    if (!tin) throw Error("cannot open train file: " + cfg.get("train"));
    std::ifstream hin(cfg.get("heldout"));
    if (!hin) throw Error("cannot open heldout file: " + cfg.get("heldout"));
    LeaveOneOutSplit split = load_split(tin, hin, cfg.get("train"), g);

    Hyperparams hp = hyperparams_from_config(cfg);
    auto n_preds = parse_size_list(cfg.get_or("n_preds", "100,300,500"), "n_preds");
    auto cutoffs = parse_size_list(cfg.get_or("cutoffs", "1,10,25,100"), "cutoffs");

    ExperimentOptions opts;
    opts.threads = threads;
    Exp1Report report = run_experiment1(g, gt, split, hp, n_preds, cutoffs, opts);

    std::ostringstream buf;
    save_exp1_rows(buf, report, cfg.hash());
    atomic_write(cfg.get("out_report"), buf.str());
    std::cout << format_exp1_table(report);
    return 0;
}

int cmd_eval_exp2(const std::string& config_path, std::size_t threads) {
    KeyValueConfig cfg = KeyValueConfig::parse_file(config_path);
    KnowledgeGraph g = load_graph_file(cfg.get("graph"));
    auto query_types = parse_query_types(cfg.get("query_types"), g);
    std::ifstream gin(cfg.get("gt"));
    if (!gin) throw Error("cannot open ground-truth file: " + cfg.get("gt"));
    GroundTruthSet gt = load_ground_truth(gin, cfg.get("gt"), g, query_types);

    Hyperparams hp = hyperparams_from_config(cfg);
    std::size_t n_pred = static_cast<std::size_t>(parse_int(cfg.get_or("n_pred", "1500"), "n_pred"));
    auto cohorts = parse_size_list(cfg.get_or("cohorts", "10,20"), "cohorts");
    std::uint64_t perm_seed = static_cast<std::uint64_t>(parse_int(cfg.get("perm_seed"), "perm_seed"));

    ExperimentOptions opts;
    opts.threads = threads;
    Exp2Report report = run_experiment2(g, gt, hp, n_pred, cohorts, perm_seed, opts);

    std::ostringstream buf;
    save_exp2_rows(buf, report, cfg.hash());
    atomic_write(cfg.get("out_report"), buf.str());
    std::cout << format_exp2_table(report);
    for (const auto& w : report.warnings) std::cerr << "warning: " << w << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"knowledge-graph path building, ranking and evaluation"};
    app.require_subcommand(1);

    std::size_t threads = 1;
    app.add_option("--threads", threads, "worker threads for per-pair evaluation")
        ->capture_default_str();

    std::string triples, graph, docs, qts, out, out_prefix, gt_path, model_path, pair, config_path;
    std::string scorer_str = "cosine";
    std::uint64_t seed = 1, min_freq = 2;
    std::size_t min_paths = 2, max_pairs = 100, n_pred = 100;
    Hyperparams hp;
    hp.dim = 32;
    hp.epochs = 30;
    hp.learning_rate = 0.01;
    SynthConfig synth_cfg;

    auto* ingest = app.add_subcommand("ingest", "load and validate a triple file");
    ingest->add_option("--triples", triples)->required();
    ingest->add_option("--out", out)->required();

    auto* synth = app.add_subcommand("synth", "generate a seeded synthetic knowledge graph");
    synth->add_option("--seed", seed)->capture_default_str();
    synth->add_option("--out-dir", out)->required();
    synth->add_option("--pairs", synth_cfg.pair_count)->capture_default_str();
    synth->add_option("--paths-per-pair", synth_cfg.paths_per_pair)->capture_default_str();
    synth->add_option("--knn", synth_cfg.knn)->capture_default_str();
    synth->add_option("--decoys", synth_cfg.decoys)->capture_default_str();

    auto* mine = app.add_subcommand("mine", "mine 1-hop paths and build ground truth");
    mine->add_option("--graph", graph)->required();
    mine->add_option("--docs", docs)->required();
    mine->add_option("--query-types", qts)->required();
    mine->add_option("--min-freq", min_freq)->capture_default_str();
    mine->add_option("--min-paths", min_paths)->capture_default_str();
    mine->add_option("--max-pairs", max_pairs)->capture_default_str();
    mine->add_option("--out", out)->required();

    auto* split = app.add_subcommand("split", "build the leave-one-out split");
    split->add_option("--graph", graph)->required();
    split->add_option("--gt", gt_path)->required();
    split->add_option("--seed", seed)->capture_default_str();
    split->add_option("--out-prefix", out_prefix)->required();

    auto* train_cmd = app.add_subcommand("train", "train the embedding model");
    train_cmd->add_option("--graph", graph)->required();
    train_cmd->add_option("--dim", hp.dim)->capture_default_str();
    train_cmd->add_option("--epochs", hp.epochs)->capture_default_str();
    train_cmd->add_option("--lr", hp.learning_rate)->capture_default_str();
    train_cmd->add_option("--batch-size", hp.batch_size)->capture_default_str();
    train_cmd->add_option("--dropout", hp.dropout_rate)->capture_default_str();
    train_cmd->add_option("--l2", hp.l2_weight)->capture_default_str();
    train_cmd->add_option("--neg-rate", hp.neg_rate)->capture_default_str();
    train_cmd->add_option("--seed", hp.seed)->capture_default_str();
    train_cmd->add_option("--out", out)->required();

    auto* build = app.add_subcommand("build", "build and rank paths for one entity pair");
    build->add_option("--model", model_path)->required();
    build->add_option("--graph", graph)->required();
    build->add_option("--pair", pair, "source:target surfaces")->required();
    build->add_option("--query-types", qts)->required();
    build->add_option("--n-pred", n_pred)->capture_default_str();
    build->add_option("--scorer", scorer_str, "predrank|cosine|baseline")->capture_default_str();
    build->add_option("--out", out)->required();

    auto* exp1 = app.add_subcommand("eval-exp1", "path recovery evaluation");
    exp1->add_option("--config", config_path)->required();

    auto* exp2 = app.add_subcommand("eval-exp2", "known-path ranking evaluation");
    exp2->add_option("--config", config_path)->required();

    for (auto* sub : app.get_subcommands({})) sub->fallthrough();

    CLI11_PARSE(app, argc, argv);

    try {
        if (ingest->parsed()) return cmd_ingest(triples, out);
        if (synth->parsed()) return cmd_synth(seed, out, synth_cfg);
        if (mine->parsed()) return cmd_mine(graph, docs, qts, min_freq, min_paths, max_pairs, out);
        if (split->parsed()) return cmd_split(graph, gt_path, seed, out_prefix);
        if (train_cmd->parsed()) return cmd_train(graph, hp, out);
        if (build->parsed())
            return cmd_build(model_path, graph, pair, qts, n_pred, scorer_str, out);
        if (exp1->parsed()) return cmd_eval_exp1(config_path, threads);
        if (exp2->parsed()) return cmd_eval_exp2(config_path, threads);
    } catch (const kgpath::ParseError& e) {
        std::cerr << "error\tparse\t" << e.what() << "\n";
        return 1;
    } catch (const kgpath::ValidationError& e) {
        std::cerr << "error\tvalidation\t" << e.what() << "\n";
        return 1;
    } catch (const kgpath::LookupError& e) {
        std::cerr << "error\tlookup\t" << e.what() << "\n";
        return 1;
    } catch (const kgpath::IncompatibilityError& e) {
        std::cerr << "error\tincompatible\t" << e.what() << "\n";
        return 1;
    } catch (const kgpath::Error& e) {
        std::cerr << "error\truntime\t" << e.what() << "\n";
        return 1;
    }
    return 0;
}

// Acceptance suite: one pass/fail line per criterion. The path to the CLI
// binary is expected as argv[1] (used by the determinism criterion).

#include "kgpath/experiments.hpp"
#include "kgpath/io_util.hpp"
#include "kgpath/metrics.hpp"
#include "kgpath/mining.hpp"
#include "kgpath/model.hpp"
#include "kgpath/path_builder.hpp"
#include "kgpath/scoring.hpp"
#include "kgpath/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <thread>

using namespace kgpath;
namespace fs = std::filesystem;

namespace {

int g_failures = 0;

void report(int criterion, bool pass, const std::string& detail) {
    std::cout << (pass ? "[PASS]" : "[FAIL]") << " criterion " << criterion << ": " << detail
              << std::endl;
    if (!pass) ++g_failures;
}

std::size_t eval_threads() {
    unsigned hc = std::thread::hardware_concurrency();
    return hc ? hc : 1;
}

// ---------------------------------------------------------------- criterion 1

RankedPathList list_of_mids(const std::vector<EntityId>& mids) {
    RankedPathList list{0, 1, Scorer::Cosine, {}};
    double score = static_cast<double>(mids.size());
    for (EntityId mid : mids)
        list.entries.push_back({Path{0, 0, mid, 0, 1}, score--, Scorer::Cosine, {}, {}});
    return list;
}

double ap_oracle(const std::vector<EntityId>& ranked, const std::set<EntityId>& relevant,
                 std::size_t n) {
    double sum = 0.0;
    std::size_t hits = 0;
    for (std::size_t i = 0; i < std::min(n, ranked.size()); ++i) {
        if (relevant.count(ranked[i])) {
            ++hits;
            sum += static_cast<double>(hits) / static_cast<double>(i + 1);
        }
    }
    return sum / static_cast<double>(std::min(relevant.size(), n));
}

std::vector<double> rank_oracle(const std::vector<double>& v) {
    // fractional (average) ranks by direct counting
    std::vector<double> r(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
        std::size_t less = 0, equal = 0;
        for (double x : v) {
            if (x < v[i]) ++less;
            if (x == v[i]) ++equal;
        }
        r[i] = static_cast<double>(less) + (static_cast<double>(equal) + 1.0) / 2.0;
    }
    return r;
}

double spearman_oracle(const std::vector<double>& a, const std::vector<double>& b) {
    auto ra = rank_oracle(a), rb = rank_oracle(b);
    double n = static_cast<double>(a.size());
    double ma = 0, mb = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        ma += ra[i];
        mb += rb[i];
    }
    ma /= n;
    mb /= n;
    double cov = 0, va = 0, vb = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        cov += (ra[i] - ma) * (rb[i] - mb);
        va += (ra[i] - ma) * (ra[i] - ma);
        vb += (rb[i] - mb) * (rb[i] - mb);
    }
    return cov / std::sqrt(va * vb);
}

bool criterion1() {
    std::mt19937_64 rng(1001);
    for (int iter = 0; iter < 1000; ++iter) {
        std::size_t len = 1 + rng() % 50;
        std::vector<EntityId> mids(len);
        for (std::size_t i = 0; i < len; ++i) mids[i] = static_cast<EntityId>(i + 2);
        std::shuffle(mids.begin(), mids.end(), rng);
        auto list = list_of_mids(mids);

        std::set<EntityId> rel_set;
        std::vector<Path> relevant;
        for (std::size_t i = 0; i < len; ++i)
            if (rng() % 3 == 0) {
                rel_set.insert(static_cast<EntityId>(i + 2));
                relevant.push_back(Path{0, 0, static_cast<EntityId>(i + 2), 0, 1});
            }
        if (relevant.empty()) {
            rel_set.insert(2);
            relevant.push_back(Path{0, 0, 2, 0, 1});
        }
        std::size_t n = 1 + rng() % 60;

        // hits: exact
        EntityId probe = static_cast<EntityId>(2 + rng() % len);
        std::size_t pos =
            std::find(mids.begin(), mids.end(), probe) - mids.begin();
        if (hits_at_n(list, Path{0, 0, probe, 0, 1}, n) != (pos < n ? 1 : 0)) return false;

        if (std::abs(average_precision_at_n(list, relevant, n) - ap_oracle(mids, rel_set, n)) >
            1e-12)
            return false;
    }
    for (int iter = 0; iter < 1000; ++iter) {
        std::size_t len = 2 + rng() % 48;
        std::vector<double> a(len), b(len);
        for (auto& x : a) x = static_cast<double>(rng() % (len / 2 + 2)); // ties likely
        for (auto& x : b) x = static_cast<double>(rng() % (len / 2 + 2));
        bool ca = std::all_of(a.begin(), a.end(), [&](double x) { return x == a[0]; });
        bool cb = std::all_of(b.begin(), b.end(), [&](double x) { return x == b[0]; });
        if (ca || cb) continue;
        if (std::abs(spearman(a, b) - spearman_oracle(a, b)) > 1e-12) return false;
    }
    return true;
}

// ---------------------------------------------------------------- criterion 2

bool criterion2() {
    std::mt19937_64 rng(2002);
    for (int iter = 0; iter < 500; ++iter) {
        const EntityId n_vertices = 40;
        CandidateGraph cg;
        cg.source = static_cast<EntityId>(rng() % n_vertices);
        do {
            cg.target = static_cast<EntityId>(rng() % n_vertices);
        } while (cg.target == cg.source);
        std::set<std::pair<EntityId, EntityId>> used;
        std::size_t n_edges = 1 + rng() % 200;
        for (std::size_t e = 0; e < n_edges; ++e) {
            EntityId a = static_cast<EntityId>(rng() % n_vertices);
            EntityId b = static_cast<EntityId>(rng() % n_vertices);
            if (a == b) continue;
            auto key = std::minmax(a, b);
            if (!used.insert({key.first, key.second}).second) continue;
            cg.edges.push_back({a, b, static_cast<RelationId>(rng() % 4),
                                static_cast<std::uint32_t>(1 + rng() % 50), 0.1,
                                AttachSide::Source});
        }

        // independent oracle: linear scan of the edge list per unordered pair
        auto scan = [&](EntityId x, EntityId y) -> const CandidateEdge* {
            for (const auto& e : cg.edges)
                if ((e.a == x && e.b == y) || (e.a == y && e.b == x)) return &e;
            return nullptr;
        };
        std::vector<Path> expected;
        for (EntityId x = 0; x < n_vertices; ++x) {
            if (x == cg.source || x == cg.target) continue;
            const auto* e1 = scan(cg.source, x);
            const auto* e2 = scan(x, cg.target);
            if (e1 && e2)
                expected.push_back(Path{cg.source, e1->relation, x, e2->relation, cg.target});
        }
        if (enumerate_one_hop_paths(cg) != expected) return false;
    }
    return true;
}

// ---------------------------------------------------------------- criterion 3

bool criterion3(double& worst_err) {
    std::mt19937_64 rng(3003);
    const std::uint32_t dim = 8;
    const std::size_t entities = 5, relations = 2;
    std::normal_distribution<double> norm(0.0, 0.5);
    worst_err = 0.0;

    for (int draw = 0; draw < 20; ++draw) {
        ModelParams p;
        p.dim = dim;
        p.entity_emb.resize(entities * dim);
        p.relation_emb.resize(relations * dim);
        p.combine_entity_scale.resize(dim);
        p.combine_relation_scale.resize(dim);
        p.combine_bias.resize(dim);
        for (auto* v : {&p.entity_emb, &p.relation_emb, &p.combine_entity_scale,
                        &p.combine_relation_scale, &p.combine_bias})
            for (auto& x : *v) x = norm(rng);
        p.projection_bias = norm(rng);

        std::vector<TrainQuery> batch;
        for (int q = 0; q < 3; ++q) {
            TrainQuery tq;
            tq.query_entity = static_cast<EntityId>(rng() % entities);
            tq.relation = static_cast<RelationId>(rng() % relations);
            tq.candidates = {static_cast<EntityId>((tq.query_entity + 1) % entities),
                             static_cast<EntityId>((tq.query_entity + 2) % entities),
                             static_cast<EntityId>((tq.query_entity + 3) % entities)};
            batch.push_back(std::move(tq));
        }

        ModelParams grads;
        batch_loss_and_grads(p, batch, 0.0001, {}, grads);

        const double h = 1e-5;
        auto fd_check = [&](auto get, auto set, double analytic) {
            ModelParams up = p, down = p;
            set(up, get(p) + h);
            set(down, get(p) - h);
            double fd = (batch_loss(up, batch, 0.0001) - batch_loss(down, batch, 0.0001)) / (2 * h);
            double denom = std::max({std::abs(fd), std::abs(analytic), 1e-8});
            worst_err = std::max(worst_err, std::abs(fd - analytic) / denom);
        };

        auto check_vec = [&](std::vector<double> ModelParams::* field) {
            for (std::size_t i = 0; i < (p.*field).size(); ++i)
                fd_check([&](const ModelParams& mp) { return (mp.*field)[i]; },
                         [&](ModelParams& mp, double v) { (mp.*field)[i] = v; },
                         (grads.*field)[i]);
        };
        check_vec(&ModelParams::entity_emb);
        check_vec(&ModelParams::relation_emb);
        check_vec(&ModelParams::combine_entity_scale);
        check_vec(&ModelParams::combine_relation_scale);
        check_vec(&ModelParams::combine_bias);
        fd_check([](const ModelParams& mp) { return mp.projection_bias; },
                 [](ModelParams& mp, double v) { mp.projection_bias = v; },
                 grads.projection_bias);
    }
    return worst_err < 1e-4;
}

// ---------------------------------------------------------------- criterion 4

bool criterion4() {
    std::vector<std::pair<std::string, std::string>> extras;
    for (int i = 0; i < 20; ++i) extras.push_back({"distractor" + std::to_string(i), "T"});
    auto g = KnowledgeGraph::build({{"A", "T", "T_T", "B", "T", 1}}, extras);
    Hyperparams hp;
    hp.dim = 8;
    hp.epochs = 200;
    hp.learning_rate = 0.05;
    hp.batch_size = 8;
    hp.dropout_rate = 0.0;
    hp.l2_weight = 0.0001;
    hp.neg_rate = 0.5;
    hp.seed = 4;
    auto m = train(g, hp);
    auto top = m.predict_tails(g.entity_id("A"), g.relation_id("T_T"), 1);
    return top.size() == 1 && top[0].entity == g.entity_id("B") && top[0].rank == 1;
}

// ------------------------------------------------------- synthetic pipeline

struct SynthRun {
    KnowledgeGraph g;
    GroundTruthSet gt;
    LeaveOneOutSplit split;
    Hyperparams hp;
};

SynthRun make_synth_run(std::uint64_t seed) {
    SynthConfig sc;
    sc.seed = seed;
    auto out = generate_synthetic_kg(sc);
    std::istringstream tin(out.triples_tsv);
    SynthRun run;
    run.g = KnowledgeGraph::load_triples(tin, "synth-triples");
    std::istringstream din(out.docs_tsv);
    auto docs = load_doc_triples(din, "synth-docs", run.g);
    auto freq = mine_one_hop_paths(docs, run.g);
    auto qt = parse_query_type("Gene-Phenotype-Disease", run.g);
    run.gt = build_ground_truth(freq, {qt}, run.g, 2, 2, 50);
    run.split = make_leave_one_out(run.g, run.gt, seed);

    run.hp.dim = 32;
    run.hp.epochs = 75;
    run.hp.learning_rate = 0.003;
    run.hp.batch_size = 128;
    run.hp.dropout_rate = 0.2;
    run.hp.l2_weight = 0.0001;
    run.hp.neg_rate = 0.25;
    run.hp.seed = seed;
    return run;
}

// --------------------------------------------------------- criteria 5, 6, 7

bool criterion5(std::string& detail) {
    ExperimentOptions opts{eval_threads()};
    double cos_hits = 0, base_hits = 0, cos_map = 0, rank_map = 0;
    const std::vector<std::uint64_t> seeds = {1, 2, 3};
    for (auto seed : seeds) {
        auto run = make_synth_run(seed);
        auto r = run_experiment1(run.g, run.gt, run.split, run.hp, {100}, {10}, opts);
        cos_hits += r.at(100, Scorer::Cosine, 10).hits;
        base_hits += r.at(100, Scorer::Baseline, 10).hits;
        cos_map += r.at(100, Scorer::Cosine, 10).map;
        rank_map += r.at(100, Scorer::PredRank, 10).map;
    }
    double n = static_cast<double>(seeds.size());
    cos_hits /= n;
    base_hits /= n;
    cos_map /= n;
    rank_map /= n;
    std::ostringstream ss;
    ss.precision(4);
    ss << "cosine Hits@10 " << cos_hits << " vs baseline " << base_hits << "; cosine MAP@10 "
       << cos_map << " vs predrank " << rank_map << " (3-seed means, n_pred=100)";
    detail = ss.str();
    return cos_hits > base_hits && cos_map >= rank_map;
}

bool criterion6and7(std::string& detail6, bool& pass7, std::string& detail7) {
    ExperimentOptions opts{eval_threads()};
    double rs_pt = 0, rs_pr = 0;
    const std::vector<std::uint64_t> seeds = {1, 2, 3};
    bool monotone = true;
    std::size_t checked_pairs = 0;

    for (auto seed : seeds) {
        auto run = make_synth_run(seed);
        EmbeddingModel model = train(run.g, run.hp);
        auto r = run_experiment2_with_model(run.g, run.gt, model, 300, {10}, seed, opts);
        if (r.cohorts.empty()) return false;
        rs_pt += r.cohorts[0].rs_pred_truth;
        rs_pr += r.cohorts[0].rs_pred_random;

        if (seed == 1) {
            // criterion 7 rides on the seed-1 model: 20 random gene-disease
            // pairs, path sets nested across prediction depths.
            std::vector<EntityId> genes, diseases;
            for (EntityId e = 0; e < run.g.entity_count(); ++e) {
                const auto& tn = run.g.entity_type_name(run.g.entity(e).etype);
                if (tn == "Gene") genes.push_back(e);
                if (tn == "Disease") diseases.push_back(e);
            }
            auto qt = parse_query_type("Gene-Phenotype-Disease", run.g);
            std::mt19937_64 rng(7);
            for (int i = 0; i < 20; ++i) {
                EntityId s = genes[rng() % genes.size()];
                EntityId t = diseases[rng() % diseases.size()];
                std::set<Path> prev;
                for (std::size_t n : {100, 300, 500}) {
                    auto cg = build_candidate_graph(model, run.g, s, t, {qt}, n);
                    auto paths = enumerate_one_hop_paths(cg);
                    std::set<Path> cur(paths.begin(), paths.end());
                    if (!std::includes(cur.begin(), cur.end(), prev.begin(), prev.end()))
                        monotone = false;
                    prev = std::move(cur);
                }
                ++checked_pairs;
            }
        }
    }

    double n = static_cast<double>(seeds.size());
    rs_pt /= n;
    rs_pr /= n;

    // Monte-Carlo control: random permutations against a fixed 20-element
    // ranking average out to ~0.
    std::vector<double> truth(20);
    for (std::size_t i = 0; i < truth.size(); ++i) truth[i] = static_cast<double>(i + 1);
    std::mt19937_64 rng(606);
    double mc = 0;
    for (int i = 0; i < 1000; ++i) {
        auto perm = truth;
        std::shuffle(perm.begin(), perm.end(), rng);
        mc += spearman(truth, perm);
    }
    mc /= 1000.0;

    std::ostringstream ss;
    ss.precision(4);
    ss << "mean r_s(Rp,Rt) " << rs_pt << " vs r_s(Rp,Rr) " << rs_pr
       << " (margin >= 0.1 required); Monte-Carlo mean r_s(Rt,Rr) " << mc;
    detail6 = ss.str();

    pass7 = monotone && checked_pairs == 20;
    detail7 = "path sets nested across n_pred {100,300,500} on " +
              std::to_string(checked_pairs) + " random pairs";
    return rs_pt > rs_pr + 0.1 && std::abs(mc) <= 0.05;
}

// --------------------------------------------------------- criteria 8 and 9

std::string g_cli_log; // stderr of the most recent CLI invocation

int run_cli(const std::string& cli, const std::string& args) {
    fs::path errfile = fs::temp_directory_path() / "kgpath_acceptance_stderr.txt";
    std::string cmd = cli + " " + args + " >/dev/null 2>" + errfile.string();
    int rc = std::system(cmd.c_str());
    std::ifstream in(errfile);
    std::stringstream ss;
    ss << in.rdbuf();
    g_cli_log = ss.str();
    if (!g_cli_log.empty() && g_cli_log.back() == '\n') g_cli_log.pop_back();
    return rc;
}

bool same_bytes(const fs::path& a, const fs::path& b) {
    std::ifstream fa(a, std::ios::binary), fb(b, std::ios::binary);
    if (!fa || !fb) return false;
    std::stringstream sa, sb;
    sa << fa.rdbuf();
    sb << fb.rdbuf();
    return sa.str() == sb.str();
}

bool criterion8and9(const std::string& cli, bool& pass9, std::string& detail9,
                    std::string& detail8) {
    fs::path dir = fs::temp_directory_path() / "kgpath_acceptance";
    fs::remove_all(dir);
    fs::create_directories(dir);

    auto p = [&](const std::string& name) { return (dir / name).string(); };

    // Each command runs twice with identical arguments; the outputs of the
    // first run are set aside and must match the second run byte for byte.
    auto run_twice = [&](const std::string& name, const std::string& args,
                         const std::vector<std::string>& outputs) {
        if (run_cli(cli, args) != 0) {
            detail8 = "command failed: " + name + " (" + g_cli_log + ")";
            return false;
        }
        for (const auto& out : outputs)
            fs::rename(dir / out, dir / (out + ".run1"));
        if (run_cli(cli, args) != 0) {
            detail8 = "re-run failed: " + name + " (" + g_cli_log + ")";
            return false;
        }
        for (const auto& out : outputs) {
            if (!same_bytes(dir / out, dir / (out + ".run1"))) {
                detail8 = "output differs after re-run: " + name + " (" + out + ")";
                return false;
            }
        }
        return true;
    };

    bool ok = true;
    ok = ok && run_twice("synth", "synth --seed 1 --out-dir " + dir.string(),
                         {"triples.tsv", "docs.tsv"});
    ok = ok && run_twice("ingest",
                         "ingest --triples " + p("triples.tsv") + " --out " + p("graph.kg"),
                         {"graph.kg"});
    ok = ok && run_twice("mine",
                         "mine --graph " + p("graph.kg") + " --docs " + p("docs.tsv") +
                             " --query-types Gene-Phenotype-Disease --min-freq 2 --min-paths 2"
                             " --max-pairs 50 --out " + p("gt.tsv"),
                         {"gt.tsv"});
    ok = ok && run_twice("split",
                         "split --graph " + p("graph.kg") + " --gt " + p("gt.tsv") +
                             " --seed 1 --out-prefix " + p("split"),
                         {"split.train.tsv", "split.heldout.tsv"});
    ok = ok && run_twice("train",
                         "train --graph " + p("graph.kg") +
                             " --dim 16 --epochs 5 --lr 0.003 --dropout 0.2 --seed 1 --out " +
                             p("model.bin"),
                         {"model.bin"});

    // Any ground-truth pair works for the build step; read one from gt.tsv.
    std::string pair;
    {
        std::ifstream gt(dir / "gt.tsv");
        std::string line;
        while (std::getline(gt, line)) {
            if (line.empty() || line[0] == '#') continue;
            auto fields = split_tsv(line);
            pair = fields[0] + ":" + fields[1];
            break;
        }
    }
    if (ok && pair.empty()) {
        detail8 = "no ground-truth pair available for the build step";
        ok = false;
    }
    ok = ok && run_twice("build",
                         "build --model " + p("model.bin") + " --graph " + p("graph.kg") +
                             " --pair " + pair +
                             " --query-types Gene-Phenotype-Disease --n-pred 100 --scorer cosine"
                             " --out " + p("ranked.tsv"),
                         {"ranked.tsv"});

    std::string common_cfg = "graph = " + p("graph.kg") + "\ngt = " + p("gt.tsv") +
                             "\nquery_types = Gene-Phenotype-Disease\n"
                             "dim = 16\nepochs = 5\nlr = 0.003\nbatch_size = 128\ndropout = 0.2\n"
                             "l2 = 0.0001\nneg_rate = 0.25\nseed = 1\n";
    atomic_write(dir / "exp1.cfg",
                 common_cfg + "train = " + p("split.train.tsv") + "\nheldout = " +
                     p("split.heldout.tsv") +
                     "\nn_preds = 100,300,500\ncutoffs = 1,10\nout_report = " + p("exp1.tsv") + "\n");
    ok = ok && run_twice("eval-exp1", "eval-exp1 --threads 1 --config " + p("exp1.cfg"),
                         {"exp1.tsv"});

    atomic_write(dir / "exp2.cfg",
                 common_cfg + "n_pred = 300\ncohorts = 10\nperm_seed = 9\nout_report = " +
                     p("exp2.tsv") + "\n");
    ok = ok && run_twice("eval-exp2", "eval-exp2 --threads 1 --config " + p("exp2.cfg"),
                         {"exp2.tsv"});

    if (ok) detail8 = "all eight CLI commands re-ran byte-identically at --threads 1";

    // criterion 9: baseline rows in the exp1 report are identical across
    // n_pred values (exact string comparison of the emitted values).
    pass9 = false;
    detail9 = "baseline rows unavailable";
    {
        std::ifstream rep(dir / "exp1.tsv");
        std::map<std::string, std::map<std::string, std::string>> rows; // n_pred -> metric@cutoff -> value
        std::string line;
        while (std::getline(rep, line)) {
            if (line.empty() || line[0] == '#') continue;
            auto f = split_tsv(line);
            if (f.size() == 6 && f[2] == "baseline") rows[f[1]][f[3] + "@" + f[4]] = f[5];
        }
        if (rows.size() == 3) {
            pass9 = true;
            auto& first = rows.begin()->second;
            for (auto& [n, m] : rows)
                if (m != first) pass9 = false;
            detail9 = pass9 ? "baseline hits/map rows exactly equal across n_pred {100,300,500}"
                            : "baseline rows differ across n_pred";
        }
    }
    return ok;
}

} // namespace

int main(int argc, char** argv) {
    if (argc < 2) {
        std::cerr << "usage: kgpath_acceptance <path-to-kgpath-cli>" << std::endl;
        return 2;
    }
    std::string cli = argv[1];

    report(1, criterion1(),
           "hits/AP/Spearman match brute-force oracles on 1000 randomized instances (<=1e-12)");
    report(2, criterion2(),
           "1-hop enumeration equals exhaustive adjacency search on 500 random graphs");

    double worst = 0.0;
    bool g_ok = criterion3(worst);
    {
        std::ostringstream ss;
        ss.precision(3);
        ss << "analytic gradients vs central differences, max relative error " << worst
           << " (< 1e-4)";
        report(3, g_ok, ss.str());
    }

    report(4, criterion4(), "single fact (A,r,B) with 20 distractors recovered at rank 1");

    std::string detail;
    report(5, criterion5(detail), detail);

    std::string detail6, detail7;
    bool pass7 = false;
    bool pass6 = criterion6and7(detail6, pass7, detail7);
    report(6, pass6, detail6);
    report(7, pass7, detail7);

    std::string detail8, detail9;
    bool pass9 = false;
    bool pass8 = criterion8and9(cli, pass9, detail9, detail8);
    report(8, pass8, detail8);
    report(9, pass9, detail9);

    if (g_failures) {
        std::cout << g_failures << " criterion(s) failed" << std::endl;
        return 1;
    }
    std::cout << "all 9 criteria passed" << std::endl;
    return 0;
}

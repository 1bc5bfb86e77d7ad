#include "kgpath/experiments.hpp"
#include "kgpath/error.hpp"
#include "kgpath/io_util.hpp"
#include "kgpath/path_builder.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <random>
#include <sstream>
#include <thread>

namespace kgpath {

namespace {

// Deterministic parallel map: slot i always receives the result for pair i.
template <typename Fn>
void parallel_for(std::size_t count, std::size_t threads, Fn&& fn) {
    if (threads <= 1 || count <= 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::vector<std::thread> pool;
    std::size_t nt = std::min(threads, count);
    for (std::size_t t = 0; t < nt; ++t) {
        pool.emplace_back([&, t] {
            for (std::size_t i = t; i < count; i += nt) fn(i);
        });
    }
    for (auto& th : pool) th.join();
}

} // namespace

const Exp1Cell& Exp1Report::at(std::size_t n_pred, Scorer s, std::size_t cutoff) const {
    auto it = cells.find({n_pred, s, cutoff});
    if (it == cells.end()) throw LookupError("no such report cell");
    return it->second;
}

Exp1Report run_experiment1(const KnowledgeGraph& g, const GroundTruthSet& gt,
                           const LeaveOneOutSplit& split, const Hyperparams& hp,
                           const std::vector<std::size_t>& n_preds,
                           const std::vector<std::size_t>& cutoffs, ExperimentOptions opts) {
    KnowledgeGraph train_graph = g.with_triples(split.train);
    EmbeddingModel model = train(train_graph, hp);
    return run_experiment1_with_model(g, gt, split, model, n_preds, cutoffs, opts);
}

Exp1Report run_experiment1_with_model(const KnowledgeGraph& g, const GroundTruthSet& gt,
                                      const LeaveOneOutSplit& split, const KbcBackend& model,
                                      const std::vector<std::size_t>& n_preds,
                                      const std::vector<std::size_t>& cutoffs,
                                      ExperimentOptions opts) {
    if (gt.pairs.empty()) throw ValidationError("ground truth has no pairs");
    if (n_preds.empty() || cutoffs.empty())
        throw ValidationError("n_preds and cutoffs must be non-empty");

    // Held-out top path per pair; the split must cover every pair.
    std::vector<const HeldOutEntry*> held(gt.pairs.size(), nullptr);
    for (std::size_t i = 0; i < gt.pairs.size(); ++i) {
        for (const auto& h : split.held_out)
            if (h.source == gt.pairs[i].source && h.target == gt.pairs[i].target) held[i] = &h;
        if (!held[i])
            throw ValidationError("split has no held-out entry for pair " +
                                  g.entity(gt.pairs[i].source).surface + ":" +
                                  g.entity(gt.pairs[i].target).surface);
    }

    std::size_t max_n = *std::max_element(n_preds.begin(), n_preds.end());
    std::size_t max_cut = *std::max_element(cutoffs.begin(), cutoffs.end());

    struct PairResult {
        // hits[n_pred index][scorer][cutoff index], scorer 0=predrank 1=cosine
        std::vector<std::array<std::vector<int>, 2>> hits;
        std::vector<std::array<std::vector<double>, 2>> ap;
        std::vector<int> baseline_hits;
        std::vector<double> baseline_ap;
    };
    std::vector<PairResult> results(gt.pairs.size());

    parallel_for(gt.pairs.size(), opts.threads, [&](std::size_t pi) {
        const GroundTruthPair& pair = gt.pairs[pi];
        const Path& p1 = held[pi]->top_path;
        std::vector<Path> relevant;
        for (const auto& [p, f] : pair.ranked_paths) relevant.push_back(p);

        auto fetched = fetch_endpoint_predictions(model, g, pair.source, pair.target,
                                                  pair.query_types, max_n);
        PairResult res;
        res.hits.resize(n_preds.size());
        res.ap.resize(n_preds.size());
        for (std::size_t ni = 0; ni < n_preds.size(); ++ni) {
            CandidateGraph cg =
                assemble_candidate_graph(g, pair.source, pair.target, fetched, n_preds[ni]);
            std::vector<Path> paths = enumerate_one_hop_paths(cg);
            RankedPathList by_rank =
                rank_paths(paths, Scorer::PredRank, &cg, nullptr, pair.source, pair.target);
            RankedPathList by_cos =
                rank_paths(paths, Scorer::Cosine, nullptr, &model, pair.source, pair.target);
            for (const RankedPathList* list : {&by_rank, &by_cos}) {
                std::size_t si = list->scorer == Scorer::PredRank ? 0 : 1;
                for (std::size_t cutoff : cutoffs) {
                    res.hits[ni][si].push_back(hits_at_n(*list, p1, cutoff));
                    res.ap[ni][si].push_back(average_precision_at_n(*list, relevant, cutoff));
                }
            }
        }

        RankedPathList baseline = baseline_rank(model, g, pair.source, pair.target,
                                                pair.query_types, max_cut);
        for (std::size_t cutoff : cutoffs) {
            res.baseline_hits.push_back(hits_at_n(baseline, p1, cutoff));
            res.baseline_ap.push_back(average_precision_at_n(baseline, relevant, cutoff));
        }
        results[pi] = std::move(res);
    });

    Exp1Report report;
    report.n_preds = n_preds;
    report.cutoffs = cutoffs;
    report.pair_count = gt.pairs.size();
    const double np = static_cast<double>(gt.pairs.size());
    for (std::size_t ni = 0; ni < n_preds.size(); ++ni) {
        for (std::size_t si = 0; si < 2; ++si) {
            Scorer s = si == 0 ? Scorer::PredRank : Scorer::Cosine;
            for (std::size_t ci = 0; ci < cutoffs.size(); ++ci) {
                Exp1Cell cell;
                for (const auto& r : results) {
                    cell.hits += r.hits[ni][si][ci];
                    cell.map += r.ap[ni][si][ci];
                }
                cell.hits /= np;
                cell.map /= np;
                report.cells[{n_preds[ni], s, cutoffs[ci]}] = cell;
            }
        }
        // The baseline does not depend on the prediction depth; its row is
        // replicated per n_pred.
        for (std::size_t ci = 0; ci < cutoffs.size(); ++ci) {
            Exp1Cell cell;
            for (const auto& r : results) {
                cell.hits += r.baseline_hits[ci];
                cell.map += r.baseline_ap[ci];
            }
            cell.hits /= np;
            cell.map /= np;
            report.cells[{n_preds[ni], Scorer::Baseline, cutoffs[ci]}] = cell;
        }
    }
    return report;
}

Exp2Report run_experiment2(const KnowledgeGraph& g, const GroundTruthSet& gt,
                           const Hyperparams& hp, std::size_t n_pred,
                           const std::vector<std::size_t>& min_paths_cohorts,
                           std::uint64_t perm_seed, ExperimentOptions opts) {
    EmbeddingModel model = train(g, hp);
    return run_experiment2_with_model(g, gt, model, n_pred, min_paths_cohorts, perm_seed, opts);
}

Exp2Report run_experiment2_with_model(const KnowledgeGraph& g, const GroundTruthSet& gt,
                                      const KbcBackend& model, std::size_t n_pred,
                                      const std::vector<std::size_t>& min_paths_cohorts,
                                      std::uint64_t perm_seed, ExperimentOptions opts) {
    if (gt.pairs.empty()) throw ValidationError("ground truth has no pairs");
    std::size_t effective_n = std::min(n_pred, g.entity_count() > 0 ? g.entity_count() - 1 : 0);
    if (effective_n == 0) throw ValidationError("graph too small for predictions");

    // One permutation per pair, drawn in pair order so results are a pure
    // function of (gt, perm_seed).
    std::mt19937_64 perm_rng(perm_seed);
    std::vector<std::vector<double>> permutations(gt.pairs.size());
    for (std::size_t pi = 0; pi < gt.pairs.size(); ++pi) {
        std::vector<double> perm(gt.pairs[pi].ranked_paths.size());
        std::iota(perm.begin(), perm.end(), 1.0);
        std::shuffle(perm.begin(), perm.end(), perm_rng);
        permutations[pi] = std::move(perm);
    }

    struct PairStats {
        bool covered = false;
        bool degenerate = false;
        double rs_pt = 0.0, rs_pr = 0.0, rs_tr = 0.0;
    };
    std::vector<PairStats> stats(gt.pairs.size());

    parallel_for(gt.pairs.size(), opts.threads, [&](std::size_t pi) {
        const GroundTruthPair& pair = gt.pairs[pi];
        CandidateGraph cg = build_candidate_graph(model, g, pair.source, pair.target,
                                                  pair.query_types, effective_n);
        std::vector<Path> paths = enumerate_one_hop_paths(cg);
        RankedPathList ranked =
            rank_paths(paths, Scorer::Cosine, nullptr, &model, pair.source, pair.target);

        // Position of each ground-truth path in the model's full ranked list;
        // relative ranking keeps only the order of appearance.
        std::vector<double> positions;
        std::vector<double> neg_freq;
        bool all_found = true;
        for (const auto& [p, freq] : pair.ranked_paths) {
            std::size_t pos = 0;
            bool found = false;
            for (std::size_t i = 0; i < ranked.entries.size(); ++i) {
                if (same_path(ranked.entries[i].path, p)) {
                    pos = i;
                    found = true;
                    break;
                }
            }
            if (!found) {
                all_found = false;
                break;
            }
            positions.push_back(static_cast<double>(pos));
            neg_freq.push_back(-static_cast<double>(freq));
        }
        if (!all_found) return; // uncovered pair

        PairStats s;
        s.covered = true;
        try {
            s.rs_pt = spearman(positions, neg_freq);
            s.rs_pr = spearman(positions, permutations[pi]);
            s.rs_tr = spearman(neg_freq, permutations[pi]);
        } catch (const ValidationError&) {
            s.degenerate = true;
        }
        stats[pi] = s;
    });

    Exp2Report report;
    report.n_pred = n_pred;
    report.scorer = Scorer::Cosine;
    for (std::size_t min_paths : min_paths_cohorts) {
        Exp2Cohort cohort;
        cohort.min_paths = min_paths;
        std::size_t used = 0;
        for (std::size_t pi = 0; pi < gt.pairs.size(); ++pi) {
            if (gt.pairs[pi].ranked_paths.size() < min_paths) continue;
            ++cohort.pairs_total;
            if (!stats[pi].covered) continue;
            ++cohort.pairs_covered;
            if (stats[pi].degenerate) {
                ++cohort.pairs_skipped;
                continue;
            }
            cohort.rs_pred_truth += stats[pi].rs_pt;
            cohort.rs_pred_random += stats[pi].rs_pr;
            cohort.rs_truth_random += stats[pi].rs_tr;
            ++used;
        }
        if (used == 0) {
            report.warnings.push_back("cohort min_paths=" + std::to_string(min_paths) +
                                      " has no usable pairs; omitted");
            continue;
        }
        cohort.rs_pred_truth /= static_cast<double>(used);
        cohort.rs_pred_random /= static_cast<double>(used);
        cohort.rs_truth_random /= static_cast<double>(used);
        report.cohorts.push_back(cohort);
    }
    return report;
}

namespace {
std::string fmt_value(double v) {
    std::ostringstream ss;
    ss.precision(17);
    ss << v;
    return ss.str();
}
} // namespace

void save_exp1_rows(std::ostream& out, const Exp1Report& r, std::uint64_t config_hash) {
    out << output_header(config_hash);
    for (std::size_t n : r.n_preds) {
        for (Scorer s : {Scorer::PredRank, Scorer::Cosine, Scorer::Baseline}) {
            for (std::size_t c : r.cutoffs) {
                const Exp1Cell& cell = r.at(n, s, c);
                out << "exp1\t" << n << "\t" << scorer_name(s) << "\thits\t" << c << "\t"
                    << fmt_value(cell.hits) << "\n";
                out << "exp1\t" << n << "\t" << scorer_name(s) << "\tmap\t" << c << "\t"
                    << fmt_value(cell.map) << "\n";
            }
        }
    }
}

void save_exp2_rows(std::ostream& out, const Exp2Report& r, std::uint64_t config_hash) {
    out << output_header(config_hash);
    for (const auto& c : r.cohorts) {
        out << "exp2\t" << r.n_pred << "\t" << scorer_name(r.scorer) << "\tpairs\t" << c.min_paths
            << "\t" << c.pairs_total << "\n";
        out << "exp2\t" << r.n_pred << "\t" << scorer_name(r.scorer) << "\tcoverage\t"
            << c.min_paths << "\t" << c.pairs_covered << "\n";
        out << "exp2\t" << r.n_pred << "\t" << scorer_name(r.scorer) << "\trs_pred_truth\t"
            << c.min_paths << "\t" << fmt_value(c.rs_pred_truth) << "\n";
        out << "exp2\t" << r.n_pred << "\t" << scorer_name(r.scorer) << "\trs_pred_random\t"
            << c.min_paths << "\t" << fmt_value(c.rs_pred_random) << "\n";
        out << "exp2\t" << r.n_pred << "\t" << scorer_name(r.scorer) << "\trs_truth_random\t"
            << c.min_paths << "\t" << fmt_value(c.rs_truth_random) << "\n";
    }
    for (const auto& w : r.warnings) out << "# warning: " << w << "\n";
}

std::string format_exp1_table(const Exp1Report& r) {
    std::ostringstream out;
    out << "# pred  scoring         ";
    for (std::size_t c : r.cutoffs) {
        char buf[64];
        std::snprintf(buf, sizeof(buf), "Hits@%-4zu MAP@%-5zu", c, c);
        out << buf;
    }
    out << "\n";
    for (std::size_t n : r.n_preds) {
        for (Scorer s : {Scorer::PredRank, Scorer::Cosine, Scorer::Baseline}) {
            char head[64];
            std::snprintf(head, sizeof(head), "%-7zu %-15s ", n, scorer_name(s));
            out << head;
            for (std::size_t c : r.cutoffs) {
                const Exp1Cell& cell = r.at(n, s, c);
                char buf[64];
                std::snprintf(buf, sizeof(buf), "%-9.3f %-9.3f", cell.hits, cell.map);
                out << buf;
            }
            out << "\n";
        }
    }
    return out.str();
}

std::string format_exp2_table(const Exp2Report& r) {
    std::ostringstream out;
    out << "# paths  pairs  covered  rank-pair  r_s\n";
    for (const auto& c : r.cohorts) {
        char buf[128];
        std::snprintf(buf, sizeof(buf), ">=%-6zu %-6zu %-8zu Rp-Rt      %.4f\n", c.min_paths,
                      c.pairs_total, c.pairs_covered, c.rs_pred_truth);
        out << buf;
        std::snprintf(buf, sizeof(buf), ">=%-6zu %-6zu %-8zu Rp-Rr      %.4f\n", c.min_paths,
                      c.pairs_total, c.pairs_covered, c.rs_pred_random);
        out << buf;
        std::snprintf(buf, sizeof(buf), ">=%-6zu %-6zu %-8zu Rt-Rr      %.4f\n", c.min_paths,
                      c.pairs_total, c.pairs_covered, c.rs_truth_random);
        out << buf;
    }
    for (const auto& w : r.warnings) out << "# warning: " << w << "\n";
    return out.str();
}

} // namespace kgpath

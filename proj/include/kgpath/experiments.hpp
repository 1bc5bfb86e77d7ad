#pragma once

#include "kgpath/kg.hpp"
#include "kgpath/metrics.hpp"
#include "kgpath/mining.hpp"
#include "kgpath/model.hpp"
#include "kgpath/scoring.hpp"

#include <iosfwd>
#include <map>
#include <vector>

namespace kgpath {

struct Exp1Cell {
    double hits = 0.0;
    double map = 0.0;
};

struct Exp1Report {
    std::vector<std::size_t> n_preds;
    std::vector<std::size_t> cutoffs;
    std::size_t pair_count = 0;
    // (n_pred, scorer, cutoff) -> mean Hits@cutoff and MAP@cutoff over pairs
    std::map<std::tuple<std::size_t, Scorer, std::size_t>, Exp1Cell> cells;

    const Exp1Cell& at(std::size_t n_pred, Scorer s, std::size_t cutoff) const;
};

struct Exp2Cohort {
    std::size_t min_paths = 0;
    std::size_t pairs_total = 0;     // qualifying pairs
    std::size_t pairs_covered = 0;   // all ground-truth paths found in model output
    std::size_t pairs_skipped = 0;   // degenerate (constant) rank vectors
    double rs_pred_truth = 0.0;      // mean r_s(R_p, R_t)
    double rs_pred_random = 0.0;     // mean r_s(R_p, R_r)
    double rs_truth_random = 0.0;    // mean r_s(R_t, R_r)
};

struct Exp2Report {
    std::size_t n_pred = 0;
    Scorer scorer = Scorer::Cosine;
    std::vector<Exp2Cohort> cohorts;
    std::vector<std::string> warnings;
};

struct ExperimentOptions {
    std::size_t threads = 1;
};

// Trains on split.train (full vocabulary retained) and measures recovery of
// each pair's held-out top path across prediction depths, scorers and the
// cosine baseline. Baseline rows are computed once and replicated per n_pred.
Exp1Report run_experiment1(const KnowledgeGraph& g, const GroundTruthSet& gt,
                           const LeaveOneOutSplit& split, const Hyperparams& hp,
                           const std::vector<std::size_t>& n_preds,
                           const std::vector<std::size_t>& cutoffs,
                           ExperimentOptions opts = {});

// Same, but with an already trained model (vocabulary must match g).
Exp1Report run_experiment1_with_model(const KnowledgeGraph& g, const GroundTruthSet& gt,
                                      const LeaveOneOutSplit& split, const KbcBackend& model,
                                      const std::vector<std::size_t>& n_preds,
                                      const std::vector<std::size_t>& cutoffs,
                                      ExperimentOptions opts = {});

// Trains on the whole graph and correlates the model's relative ranking of
// each pair's known paths with the frequency ground truth, against seeded
// random-permutation controls.
Exp2Report run_experiment2(const KnowledgeGraph& g, const GroundTruthSet& gt,
                           const Hyperparams& hp, std::size_t n_pred,
                           const std::vector<std::size_t>& min_paths_cohorts,
                           std::uint64_t perm_seed, ExperimentOptions opts = {});

Exp2Report run_experiment2_with_model(const KnowledgeGraph& g, const GroundTruthSet& gt,
                                      const KbcBackend& model, std::size_t n_pred,
                                      const std::vector<std::size_t>& min_paths_cohorts,
                                      std::uint64_t perm_seed, ExperimentOptions opts = {});

// Machine-readable rows: experiment TAB n_pred TAB scorer TAB metric TAB cutoff TAB value.
void save_exp1_rows(std::ostream& out, const Exp1Report& r, std::uint64_t config_hash);
void save_exp2_rows(std::ostream& out, const Exp2Report& r, std::uint64_t config_hash);

// Aligned human-readable tables.
std::string format_exp1_table(const Exp1Report& r);
std::string format_exp2_table(const Exp2Report& r);

} // namespace kgpath

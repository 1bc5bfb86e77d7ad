#pragma once

#include "kgpath/kg.hpp"
#include "kgpath/mining.hpp"
#include "kgpath/model.hpp"
#include "kgpath/path_builder.hpp"

#include <span>
#include <vector>

namespace kgpath {

enum class Scorer { PredRank, Cosine, Baseline };

const char* scorer_name(Scorer s);
Scorer scorer_from_name(const std::string& name);

struct HopDetail {
    std::uint32_t pred_rank = 0;
    double cosine = 0.0;
};

struct ScoredPath {
    Path path;
    double score;
    Scorer scorer;
    HopDetail hop1;
    HopDetail hop2;
};

struct RankedPathList {
    EntityId source;
    EntityId target;
    Scorer scorer;
    std::vector<ScoredPath> entries; // position i holds rank i+1
};

// cos of the two vectors; a zero vector scores 0 against anything.
double cosine_similarity(std::span<const double> a, std::span<const double> b);

// Sum of the two hops' prediction ranks; lower is better.
double score_predrank(const Path& p, const CandidateGraph& cg);

// Sum of the two adjacent-entity cosine similarities; higher is better.
double score_cosine(const Path& p, const KbcBackend& m);

// Sorts ascending for PredRank, descending otherwise; ties by mid id then
// relation ids. `cg` may be null for the Cosine scorer.
RankedPathList rank_paths(const std::vector<Path>& paths, Scorer scorer, const CandidateGraph* cg,
                          const KbcBackend* m, EntityId source, EntityId target);

// Cosine-neighbor baseline: every type-compatible mid entity is scored by
// cos(e1, x) + cos(x, e2); top k kept, relations assigned by endpoint-type
// match (smallest matching relation id). Independent of n_pred.
RankedPathList baseline_rank(const KbcBackend& m, const KnowledgeGraph& g, EntityId e1, EntityId e2,
                             const std::vector<QueryType>& query_types, std::size_t k);

// Ranked output rows: src TAB tgt TAB rank TAB score TAB scorer TAB rel1 TAB mid TAB rel2.
void save_ranked_paths(std::ostream& out, const RankedPathList& ranked, const KnowledgeGraph& g,
                       std::uint64_t config_hash);

} // namespace kgpath

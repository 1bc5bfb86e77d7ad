#pragma once

#include "kgpath/kg.hpp"
#include "kgpath/mining.hpp"
#include "kgpath/model.hpp"

#include <vector>

namespace kgpath {

enum class AttachSide { Source, Target };

struct CandidateEdge {
    EntityId a; // the attachment endpoint (e1 or e2, or an intermediate)
    EntityId b; // the predicted entity
    RelationId relation;
    std::uint32_t pred_rank; // 1-based, smaller is better
    double pred_score;
    AttachSide origin;
};

struct CandidateGraph {
    EntityId source;
    EntityId target;
    // At most one edge per unordered entity pair; duplicates resolved by
    // keeping the smaller pred_rank, tie by smaller relation id.
    std::vector<CandidateEdge> edges;

    const CandidateEdge* find_edge(EntityId x, EntityId y) const;
};

struct QueryRelation {
    RelationId relation;
    AttachSide attach;

    bool operator==(const QueryRelation&) const = default;
};

// Resolves the query types against the relation vocabulary: for each query
// type S-M-T matching the pair's types, emits the S<->M relations attached to
// the source and the M<->T relations attached to the target. Query types whose
// outer types do not match the pair are skipped.
std::vector<QueryRelation> relations_for_query(EntityTypeId source_type, EntityTypeId target_type,
                                               const std::vector<QueryType>& query_types,
                                               const KnowledgeGraph& g);

// Prediction lists fetched once per (attachment entity, relation); the graph
// for a smaller n_pred is assembled from a prefix of the same lists.
struct EndpointPredictions {
    EntityId attach;
    RelationId relation;
    AttachSide side;
    std::vector<Prediction> predictions;
};

std::vector<EndpointPredictions> fetch_endpoint_predictions(const KbcBackend& m,
                                                            const KnowledgeGraph& g, EntityId e1,
                                                            EntityId e2,
                                                            const std::vector<QueryType>& query_types,
                                                            std::size_t n_pred);

CandidateGraph assemble_candidate_graph(const KnowledgeGraph& g, EntityId e1, EntityId e2,
                                        const std::vector<EndpointPredictions>& fetched,
                                        std::size_t n_pred);

// Queries the backend once per (attachment entity, relation), keeps the
// predictions whose entity type matches the relation's far endpoint, and
// resolves duplicate edges per the CandidateGraph invariant.
CandidateGraph build_candidate_graph(const KbcBackend& m, const KnowledgeGraph& g, EntityId e1,
                                     EntityId e2, const std::vector<QueryType>& query_types,
                                     std::size_t n_pred);

// Every entity adjacent to both endpoints yields one path, ascending mid id.
// Paths keep the candidate graph's orientation (source = cg.source).
std::vector<Path> enumerate_one_hop_paths(const CandidateGraph& cg);

struct MultiHopPath {
    std::vector<EntityId> nodes; // source ... target
    std::vector<RelationId> relations;

    bool operator==(const MultiHopPath&) const = default;
};

// Extension point, disabled by default in every pipeline. depth 1 reduces to
// enumerate_one_hop_paths; depth 2 re-applies the candidate construction from
// the source-side intermediates. Depth outside [1, 2] is rejected.
std::vector<MultiHopPath> extend_paths(const CandidateGraph& cg, const KbcBackend& m,
                                       const KnowledgeGraph& g,
                                       const std::vector<QueryType>& query_types,
                                       std::size_t n_pred, std::size_t depth);

} // namespace kgpath

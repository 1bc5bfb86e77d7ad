#include "kgpath/path_builder.hpp"
#include "kgpath/error.hpp"

#include <algorithm>
#include <map>

namespace kgpath {

const CandidateEdge* CandidateGraph::find_edge(EntityId x, EntityId y) const {
    for (const auto& e : edges)
        if ((e.a == x && e.b == y) || (e.a == y && e.b == x)) return &e;
    return nullptr;
}

std::vector<QueryRelation> relations_for_query(EntityTypeId source_type, EntityTypeId target_type,
                                               const std::vector<QueryType>& query_types,
                                               const KnowledgeGraph& g) {
    std::vector<QueryRelation> out;
    auto add_link = [&](EntityTypeId from, EntityTypeId mid, AttachSide side) {
        bool found = false;
        for (RelationId r = 0; r < g.relation_count(); ++r) {
            const RelationInfo& ri = g.relation(r);
            bool match = (ri.type_a == from && ri.type_b == mid) ||
                         (ri.type_a == mid && ri.type_b == from);
            if (!match) continue;
            found = true;
            QueryRelation qr{r, side};
            if (std::find(out.begin(), out.end(), qr) == out.end()) out.push_back(qr);
        }
        if (!found)
            throw ValidationError("no relation links types '" + g.entity_type_name(from) +
                                  "' and '" + g.entity_type_name(mid) + "'");
    };

    for (const auto& qt : query_types) {
        if (qt.outer_a == source_type && qt.outer_b == target_type) {
            add_link(source_type, qt.middle, AttachSide::Source);
            add_link(target_type, qt.middle, AttachSide::Target);
        } else if (qt.outer_a == target_type && qt.outer_b == source_type) {
            add_link(source_type, qt.middle, AttachSide::Source);
            add_link(target_type, qt.middle, AttachSide::Target);
        }
        // other query types do not apply to this pair
    }
    return out;
}

std::vector<EndpointPredictions> fetch_endpoint_predictions(const KbcBackend& m,
                                                            const KnowledgeGraph& g, EntityId e1,
                                                            EntityId e2,
                                                            const std::vector<QueryType>& query_types,
                                                            std::size_t n_pred) {
    if (n_pred < 1) throw ValidationError("n_pred must be >= 1");
    EntityTypeId t1 = g.entity(e1).etype;
    EntityTypeId t2 = g.entity(e2).etype;
    auto selected = relations_for_query(t1, t2, query_types, g);

    std::vector<EndpointPredictions> out;
    for (const auto& qr : selected) {
        EntityId attach = qr.attach == AttachSide::Source ? e1 : e2;
        bool seen = std::any_of(out.begin(), out.end(), [&](const EndpointPredictions& ep) {
            return ep.attach == attach && ep.relation == qr.relation;
        });
        if (seen) continue;
        // One query per (entity, relation); the reference backend answers head
        // and tail queries identically.
        out.push_back({attach, qr.relation, qr.attach, m.predict_tails(attach, qr.relation, n_pred)});
    }
    return out;
}

CandidateGraph assemble_candidate_graph(const KnowledgeGraph& g, EntityId e1, EntityId e2,
                                        const std::vector<EndpointPredictions>& fetched,
                                        std::size_t n_pred) {
    if (n_pred < 1) throw ValidationError("n_pred must be >= 1");
    CandidateGraph cg;
    cg.source = e1;
    cg.target = e2;

    // keyed by unordered entity pair
    std::map<std::pair<EntityId, EntityId>, CandidateEdge> best;
    for (const auto& ep : fetched) {
        const RelationInfo& ri = g.relation(ep.relation);
        EntityTypeId attach_type = g.entity(ep.attach).etype;
        // far endpoint type relative to the attachment entity
        EntityTypeId far_type = ri.type_a == attach_type ? ri.type_b : ri.type_a;

        for (const auto& pred : ep.predictions) {
            if (pred.rank > n_pred) break;
            if (g.entity(pred.entity).etype != far_type) continue;
            std::pair<EntityId, EntityId> key{std::min(ep.attach, pred.entity),
                                              std::max(ep.attach, pred.entity)};
            CandidateEdge edge{ep.attach, pred.entity, ep.relation, pred.rank, pred.score, ep.side};
            auto it = best.find(key);
            if (it == best.end()) {
                best.emplace(key, edge);
            } else if (edge.pred_rank < it->second.pred_rank ||
                       (edge.pred_rank == it->second.pred_rank &&
                        edge.relation < it->second.relation)) {
                it->second = edge;
            }
        }
    }

    cg.edges.reserve(best.size());
    for (const auto& [key, edge] : best) cg.edges.push_back(edge);
    return cg;
}

CandidateGraph build_candidate_graph(const KbcBackend& m, const KnowledgeGraph& g, EntityId e1,
                                     EntityId e2, const std::vector<QueryType>& query_types,
                                     std::size_t n_pred) {
    return assemble_candidate_graph(g, e1, e2,
                                    fetch_endpoint_predictions(m, g, e1, e2, query_types, n_pred),
                                    n_pred);
}

std::vector<Path> enumerate_one_hop_paths(const CandidateGraph& cg) {
    std::map<EntityId, const CandidateEdge*> from_source, from_target;
    for (const auto& e : cg.edges) {
        EntityId other;
        if (e.a == cg.source) other = e.b;
        else if (e.b == cg.source) other = e.a;
        else other = EntityId(-1);
        if (other != EntityId(-1) && other != cg.target) from_source[other] = &e;

        if (e.a == cg.target) other = e.b;
        else if (e.b == cg.target) other = e.a;
        else other = EntityId(-1);
        if (other != EntityId(-1) && other != cg.source) from_target[other] = &e;
    }

    std::vector<Path> out;
    for (const auto& [mid, edge1] : from_source) {
        auto it = from_target.find(mid);
        if (it == from_target.end()) continue;
        out.push_back(Path{cg.source, edge1->relation, mid, it->second->relation, cg.target});
    }
    // std::map iteration already yields ascending mid id
    return out;
}

std::vector<MultiHopPath> extend_paths(const CandidateGraph& cg, const KbcBackend& m,
                                       const KnowledgeGraph& g,
                                       const std::vector<QueryType>& query_types,
                                       std::size_t n_pred, std::size_t depth) {
    if (depth < 1 || depth > 2)
        throw ValidationError("extend_paths supports depth 1 or 2, got " + std::to_string(depth));

    std::vector<MultiHopPath> out;
    if (depth == 1) {
        for (const auto& p : enumerate_one_hop_paths(cg))
            out.push_back({{p.source, p.mid, p.target}, {p.rel1, p.rel2}});
        return out;
    }

    // depth 2: re-apply the construction from each source-side intermediate.
    for (const auto& e : cg.edges) {
        EntityId x;
        if (e.a == cg.source) x = e.b;
        else if (e.b == cg.source) x = e.a;
        else continue;
        if (x == cg.target) continue;

        EntityTypeId tx = g.entity(x).etype;
        EntityTypeId tt = g.entity(cg.target).etype;
        std::vector<QueryType> inner;
        for (const auto& qt : query_types)
            if ((qt.outer_a == tx && qt.outer_b == tt) || (qt.outer_a == tt && qt.outer_b == tx))
                inner.push_back(qt);
        if (inner.empty()) continue;

        CandidateGraph inner_cg = build_candidate_graph(m, g, x, cg.target, inner, n_pred);
        for (const auto& p : enumerate_one_hop_paths(inner_cg)) {
            if (p.mid == cg.source || p.mid == x) continue;
            // inner path may be stored either way round; orient from x
            EntityId a = p.source, b = p.target;
            RelationId ra = p.rel1, rb = p.rel2;
            if (a != x) {
                std::swap(a, b);
                std::swap(ra, rb);
            }
            out.push_back({{cg.source, x, p.mid, cg.target}, {e.relation, ra, rb}});
        }
    }
    std::sort(out.begin(), out.end(), [](const MultiHopPath& a, const MultiHopPath& b) {
        return std::tie(a.nodes, a.relations) < std::tie(b.nodes, b.relations);
    });
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

} // namespace kgpath

#include "kgpath/scoring.hpp"
#include "kgpath/error.hpp"
#include "kgpath/io_util.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <sstream>

namespace kgpath {

const char* scorer_name(Scorer s) {
    switch (s) {
        case Scorer::PredRank: return "predrank";
        case Scorer::Cosine: return "cosine";
        case Scorer::Baseline: return "baseline";
    }
    return "?";
}

Scorer scorer_from_name(const std::string& name) {
    if (name == "predrank") return Scorer::PredRank;
    if (name == "cosine") return Scorer::Cosine;
    if (name == "baseline") return Scorer::Baseline;
    throw ValidationError("unknown scorer '" + name + "' (expected predrank|cosine|baseline)");
}

double cosine_similarity(std::span<const double> a, std::span<const double> b) {
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        dot += a[i] * b[i];
        na += a[i] * a[i];
        nb += b[i] * b[i];
    }
    if (na == 0.0 || nb == 0.0) return 0.0;
    return dot / (std::sqrt(na) * std::sqrt(nb));
}

namespace {

const CandidateEdge& hop_edge(const Path& p, const CandidateGraph& cg, bool first) {
    const CandidateEdge* e =
        first ? cg.find_edge(p.source, p.mid) : cg.find_edge(p.mid, p.target);
    if (!e)
        throw LookupError(std::string("path hop ") + (first ? "1" : "2") +
                          " missing from candidate graph");
    return *e;
}

} // namespace

double score_predrank(const Path& p, const CandidateGraph& cg) {
    return static_cast<double>(hop_edge(p, cg, true).pred_rank) +
           static_cast<double>(hop_edge(p, cg, false).pred_rank);
}

double score_cosine(const Path& p, const KbcBackend& m) {
    return cosine_similarity(m.entity_embedding(p.source), m.entity_embedding(p.mid)) +
           cosine_similarity(m.entity_embedding(p.mid), m.entity_embedding(p.target));
}

namespace {

void sort_and_finalize(RankedPathList& list) {
    bool ascending = list.scorer == Scorer::PredRank;
    std::sort(list.entries.begin(), list.entries.end(),
              [&](const ScoredPath& a, const ScoredPath& b) {
                  if (a.score != b.score) return ascending ? a.score < b.score : a.score > b.score;
                  if (a.path.mid != b.path.mid) return a.path.mid < b.path.mid;
                  return std::tie(a.path.rel1, a.path.rel2) < std::tie(b.path.rel1, b.path.rel2);
              });
}

} // namespace

RankedPathList rank_paths(const std::vector<Path>& paths, Scorer scorer, const CandidateGraph* cg,
                          const KbcBackend* m, EntityId source, EntityId target) {
    RankedPathList list{source, target, scorer, {}};
    for (const auto& p : paths) {
        ScoredPath sp;
        sp.path = p;
        sp.scorer = scorer;
        switch (scorer) {
            case Scorer::PredRank: {
                if (!cg) throw ValidationError("predrank scoring requires a candidate graph");
                sp.hop1.pred_rank = hop_edge(p, *cg, true).pred_rank;
                sp.hop2.pred_rank = hop_edge(p, *cg, false).pred_rank;
                sp.score = static_cast<double>(sp.hop1.pred_rank) +
                           static_cast<double>(sp.hop2.pred_rank);
                break;
            }
            case Scorer::Cosine:
            case Scorer::Baseline: {
                if (!m) throw ValidationError("cosine scoring requires a model");
                sp.hop1.cosine =
                    cosine_similarity(m->entity_embedding(p.source), m->entity_embedding(p.mid));
                sp.hop2.cosine =
                    cosine_similarity(m->entity_embedding(p.mid), m->entity_embedding(p.target));
                sp.score = sp.hop1.cosine + sp.hop2.cosine;
                break;
            }
        }
        if (!std::isfinite(sp.score)) throw Error("non-finite path score");
        list.entries.push_back(sp);
    }
    sort_and_finalize(list);
    return list;
}

RankedPathList baseline_rank(const KbcBackend& m, const KnowledgeGraph& g, EntityId e1, EntityId e2,
                             const std::vector<QueryType>& query_types, std::size_t k) {
    if (k < 1) throw ValidationError("baseline k must be >= 1");
    EntityTypeId t1 = g.entity(e1).etype;
    EntityTypeId t2 = g.entity(e2).etype;

    // Middle types applicable to this pair.
    std::vector<EntityTypeId> mid_types;
    for (const auto& qt : query_types) {
        bool applies = (qt.outer_a == t1 && qt.outer_b == t2) ||
                       (qt.outer_a == t2 && qt.outer_b == t1);
        if (applies && std::find(mid_types.begin(), mid_types.end(), qt.middle) == mid_types.end())
            mid_types.push_back(qt.middle);
    }

    // Smallest relation id linking the two types, or nullopt.
    auto link_relation = [&](EntityTypeId x, EntityTypeId y) -> std::optional<RelationId> {
        for (RelationId r = 0; r < g.relation_count(); ++r) {
            const RelationInfo& ri = g.relation(r);
            if ((ri.type_a == x && ri.type_b == y) || (ri.type_a == y && ri.type_b == x)) return r;
        }
        return std::nullopt;
    };

    RankedPathList list{e1, e2, Scorer::Baseline, {}};
    for (EntityId x = 0; x < g.entity_count(); ++x) {
        if (x == e1 || x == e2) continue;
        EntityTypeId tx = g.entity(x).etype;
        if (std::find(mid_types.begin(), mid_types.end(), tx) == mid_types.end()) continue;
        auto r1 = link_relation(t1, tx);
        auto r2 = link_relation(tx, t2);
        if (!r1 || !r2) continue; // no type-compatible relation: mid skipped

        ScoredPath sp;
        sp.path = Path{e1, *r1, x, *r2, e2};
        sp.scorer = Scorer::Baseline;
        sp.hop1.cosine = cosine_similarity(m.entity_embedding(e1), m.entity_embedding(x));
        sp.hop2.cosine = cosine_similarity(m.entity_embedding(x), m.entity_embedding(e2));
        sp.score = sp.hop1.cosine + sp.hop2.cosine;
        list.entries.push_back(sp);
    }
    sort_and_finalize(list);
    if (list.entries.size() > k) list.entries.resize(k);
    return list;
}

void save_ranked_paths(std::ostream& out, const RankedPathList& ranked, const KnowledgeGraph& g,
                       std::uint64_t config_hash) {
    out << output_header(config_hash);
    std::size_t rank = 0;
    for (const auto& sp : ranked.entries) {
        ++rank;
        std::ostringstream score;
        score.precision(17);
        score << sp.score;
        out << g.entity(ranked.source).surface << "\t" << g.entity(ranked.target).surface << "\t"
            << rank << "\t" << score.str() << "\t" << scorer_name(sp.scorer) << "\t"
            << g.relation(sp.path.rel1).name << "\t" << g.entity(sp.path.mid).surface << "\t"
            << g.relation(sp.path.rel2).name << "\n";
    }
}

} // namespace kgpath

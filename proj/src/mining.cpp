#include "kgpath/mining.hpp"
#include "kgpath/error.hpp"
#include "kgpath/io_util.hpp"

#include <algorithm>
#include <istream>
#include <ostream>
#include <random>
#include <set>

namespace kgpath {

QueryType parse_query_type(const std::string& text, const KnowledgeGraph& g) {
    auto parts = split_on(text, '-');
    if (parts.size() != 3)
        throw ValidationError("query type '" + text + "' does not match TypeA-TypeB-TypeC");
    for (const auto& p : parts)
        if (!g.has_entity_type(p))
            throw ValidationError("query type '" + text + "' references unknown entity type '" + p + "'");
    return {g.entity_type_id(parts[0]), g.entity_type_id(parts[1]), g.entity_type_id(parts[2])};
}

std::string format_query_type(const QueryType& qt, const KnowledgeGraph& g) {
    return g.entity_type_name(qt.outer_a) + "-" + g.entity_type_name(qt.middle) + "-" +
           g.entity_type_name(qt.outer_b);
}

std::optional<Path> make_path(const KnowledgeGraph& g, EntityId end1, RelationId r1, EntityId mid,
                              RelationId r2, EntityId end2) {
    if (end1 == end2 || mid == end1 || mid == end2) return std::nullopt;
    const auto& e1 = g.entity(end1);
    const auto& e2 = g.entity(end2);
    auto key = [&](const EntityInfo& e) {
        return std::tie(g.entity_type_name(e.etype), e.surface);
    };
    if (key(e2) < key(e1)) {
        std::swap(end1, end2);
        std::swap(r1, r2);
    }
    return Path{end1, r1, mid, r2, end2};
}

std::vector<DocTriple> load_doc_triples(std::istream& in, const std::string& origin,
                                        const KnowledgeGraph& g) {
    std::vector<DocTriple> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        auto fields = split_tsv(line);
        if (fields.size() != 6)
            throw ParseError(origin, lineno, "expected 6 tab-separated fields");
        if (fields[0].empty()) throw ParseError(origin, lineno, "empty doc_id");
        DocTriple dt;
        dt.doc_id = fields[0];
        dt.head = g.entity_id(fields[1]);
        dt.relation = g.relation_id(fields[3]);
        dt.tail = g.entity_id(fields[4]);
        if (g.entity(dt.head).etype != g.entity_type_id(fields[2]) ||
            g.entity(dt.tail).etype != g.entity_type_id(fields[5]))
            throw ParseError(origin, lineno, "entity type disagrees with graph vocabulary");
        if (dt.head == dt.tail) throw ParseError(origin, lineno, "self-loop triple");
        out.push_back(std::move(dt));
    }
    return out;
}

std::map<Path, std::uint64_t> mine_one_hop_paths(const std::vector<DocTriple>& docs,
                                                 const KnowledgeGraph& g) {
    // Group by document, preserving nothing about order.
    std::map<std::string, std::vector<const DocTriple*>> by_doc;
    for (const auto& dt : docs) by_doc[dt.doc_id].push_back(&dt);

    std::map<Path, std::uint64_t> freq;
    for (const auto& [doc, triples] : by_doc) {
        for (std::size_t i = 0; i < triples.size(); ++i) {
            for (std::size_t j = i + 1; j < triples.size(); ++j) {
                const DocTriple& a = *triples[i];
                const DocTriple& b = *triples[j];
                // Exactly one shared entity; the shared one becomes the mid.
                bool hh = a.head == b.head, ht = a.head == b.tail;
                bool th = a.tail == b.head, tt = a.tail == b.tail;
                int shared = int(hh) + int(ht) + int(th) + int(tt);
                if (shared != 1) continue;
                EntityId mid, enda, endb;
                if (hh) { mid = a.head; enda = a.tail; endb = b.tail; }
                else if (ht) { mid = a.head; enda = a.tail; endb = b.head; }
                else if (th) { mid = a.tail; enda = a.head; endb = b.tail; }
                else { mid = a.tail; enda = a.head; endb = b.head; }
                auto p = make_path(g, enda, a.relation, mid, b.relation, endb);
                if (p) ++freq[*p];
            }
        }
    }
    return freq;
}

namespace {

// Tie key for ranked path lists: (rel1 name, mid surface, rel2 name).
std::tuple<const std::string&, const std::string&, const std::string&>
path_tie_key(const Path& p, const KnowledgeGraph& g) {
    return {g.relation(p.rel1).name, g.entity(p.mid).surface, g.relation(p.rel2).name};
}

bool path_matches_query_type(const Path& p, const QueryType& qt, const KnowledgeGraph& g) {
    EntityTypeId ts = g.entity(p.source).etype;
    EntityTypeId tm = g.entity(p.mid).etype;
    EntityTypeId tt = g.entity(p.target).etype;
    if (tm != qt.middle) return false;
    return (ts == qt.outer_a && tt == qt.outer_b) || (ts == qt.outer_b && tt == qt.outer_a);
}

} // namespace

GroundTruthSet build_ground_truth(const std::map<Path, std::uint64_t>& paths,
                                  const std::vector<QueryType>& query_types,
                                  const KnowledgeGraph& g, std::uint64_t min_freq,
                                  std::size_t min_paths, std::size_t max_pairs) {
    if (min_freq < 1) throw ValidationError("min_freq must be >= 1");
    if (min_paths < 1) throw ValidationError("min_paths must be >= 1");

    std::map<std::pair<EntityId, EntityId>, GroundTruthPair> grouped;
    for (const auto& [path, freq] : paths) {
        if (freq < min_freq) continue;
        std::vector<QueryType> matched;
        for (const auto& qt : query_types)
            if (path_matches_query_type(path, qt, g)) matched.push_back(qt);
        if (matched.empty()) continue;
        auto& pair = grouped[{path.source, path.target}];
        pair.source = path.source;
        pair.target = path.target;
        for (const auto& qt : matched)
            if (std::find(pair.query_types.begin(), pair.query_types.end(), qt) ==
                pair.query_types.end())
                pair.query_types.push_back(qt);
        pair.ranked_paths.emplace_back(path, freq);
    }

    std::vector<GroundTruthPair> survivors;
    for (auto& [key, pair] : grouped) {
        if (pair.ranked_paths.size() < min_paths) continue;
        std::sort(pair.ranked_paths.begin(), pair.ranked_paths.end(),
                  [&](const auto& a, const auto& b) {
                      if (a.second != b.second) return a.second > b.second;
                      return path_tie_key(a.first, g) < path_tie_key(b.first, g);
                  });
        survivors.push_back(std::move(pair));
    }

    std::sort(survivors.begin(), survivors.end(), [&](const GroundTruthPair& a, const GroundTruthPair& b) {
        if (a.ranked_paths.size() != b.ranked_paths.size())
            return a.ranked_paths.size() > b.ranked_paths.size();
        return std::tie(g.entity(a.source).surface, g.entity(a.target).surface) <
               std::tie(g.entity(b.source).surface, g.entity(b.target).surface);
    });
    if (survivors.size() > max_pairs) survivors.resize(max_pairs);

    return GroundTruthSet{std::move(survivors)};
}

namespace {

std::uint64_t triple_weight(const KnowledgeGraph& g, EntityId a, RelationId r, EntityId b) {
    if (a > b) std::swap(a, b);
    for (const auto& [nbr, w] : g.neighbors(a, r))
        if (nbr == b) return w;
    throw ValidationError("ground-truth path edge (" + g.entity(a).surface + ", " +
                          g.relation(r).name + ", " + g.entity(b).surface +
                          ") missing from graph");
}

Triple canonical_triple(const KnowledgeGraph& g, EntityId a, RelationId r, EntityId b) {
    std::uint64_t w = triple_weight(g, a, r, b);
    if (a > b) std::swap(a, b);
    return Triple{a, r, b, w};
}

} // namespace

LeaveOneOutSplit make_leave_one_out(const KnowledgeGraph& g, const GroundTruthSet& gt,
                                    std::uint64_t rng_seed) {
    std::mt19937_64 rng(rng_seed);
    std::uniform_int_distribution<int> coin(0, 1);

    std::set<std::tuple<EntityId, RelationId, EntityId>> removed;
    LeaveOneOutSplit split;
    for (const auto& pair : gt.pairs) {
        if (pair.ranked_paths.empty())
            throw ValidationError("ground-truth pair has no paths");
        const Path& top = pair.ranked_paths.front().first;
        Triple e1 = canonical_triple(g, top.source, top.rel1, top.mid);
        Triple e2 = canonical_triple(g, top.mid, top.rel2, top.target);
        const Triple& pick = coin(rng) == 0 ? e1 : e2;
        removed.insert({pick.head, pick.relation, pick.tail});
        split.held_out.push_back({pair.source, pair.target, pick, top});
    }

    for (const auto& t : g.triples())
        if (!removed.count({t.head, t.relation, t.tail})) split.train.push_back(t);
    return split;
}

void save_ground_truth(std::ostream& out, const GroundTruthSet& gt, const KnowledgeGraph& g,
                       std::uint64_t config_hash) {
    out << output_header(config_hash);
    for (const auto& pair : gt.pairs) {
        std::size_t rank = 0;
        for (const auto& [path, freq] : pair.ranked_paths) {
            ++rank;
            out << g.entity(pair.source).surface << "\t" << g.entity(pair.target).surface << "\t"
                << rank << "\t" << freq << "\t" << g.relation(path.rel1).name << "\t"
                << g.entity(path.mid).surface << "\t" << g.relation(path.rel2).name << "\n";
        }
    }
}

GroundTruthSet load_ground_truth(std::istream& in, const std::string& origin,
                                 const KnowledgeGraph& g,
                                 const std::vector<QueryType>& query_types) {
    GroundTruthSet gt;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        auto fields = split_tsv(line);
        if (fields.size() != 7)
            throw ParseError(origin, lineno, "expected 7 tab-separated fields");
        EntityId src = g.entity_id(fields[0]);
        EntityId tgt = g.entity_id(fields[1]);
        std::size_t rank = static_cast<std::size_t>(parse_int(fields[2], "rank"));
        std::uint64_t freq = static_cast<std::uint64_t>(parse_int(fields[3], "freq"));
        RelationId r1 = g.relation_id(fields[4]);
        EntityId mid = g.entity_id(fields[5]);
        RelationId r2 = g.relation_id(fields[6]);
        auto path = make_path(g, src, r1, mid, r2, tgt);
        if (!path || path->source != src || path->target != tgt)
            throw ParseError(origin, lineno, "ground-truth row is not in canonical orientation");

        if (gt.pairs.empty() || gt.pairs.back().source != src || gt.pairs.back().target != tgt) {
            if (rank != 1) throw ParseError(origin, lineno, "pair does not start at rank 1");
            GroundTruthPair pair;
            pair.source = src;
            pair.target = tgt;
            for (const auto& qt : query_types) {
                EntityTypeId ts = g.entity(src).etype, tt = g.entity(tgt).etype;
                if ((ts == qt.outer_a && tt == qt.outer_b) || (ts == qt.outer_b && tt == qt.outer_a))
                    pair.query_types.push_back(qt);
            }
            gt.pairs.push_back(std::move(pair));
        } else if (rank != gt.pairs.back().ranked_paths.size() + 1) {
            throw ParseError(origin, lineno, "rank gap in ground-truth file");
        }
        gt.pairs.back().ranked_paths.emplace_back(*path, freq);
    }
    return gt;
}

void save_split(std::ostream& train_out, std::ostream& heldout_out, const LeaveOneOutSplit& split,
                const KnowledgeGraph& g, std::uint64_t config_hash) {
    train_out << output_header(config_hash);
    for (const auto& t : split.train) {
        const auto& h = g.entity(t.head);
        const auto& ta = g.entity(t.tail);
        train_out << h.surface << "\t" << g.entity_type_name(h.etype) << "\t"
                  << g.relation(t.relation).name << "\t" << ta.surface << "\t"
                  << g.entity_type_name(ta.etype) << "\t" << t.weight << "\n";
    }
    heldout_out << output_header(config_hash);
    for (const auto& h : split.held_out) {
        heldout_out << g.entity(h.source).surface << "\t" << g.entity(h.target).surface << "\t"
                    << g.entity(h.removed.head).surface << "\t" << g.relation(h.removed.relation).name
                    << "\t" << g.entity(h.removed.tail).surface << "\t"
                    << g.relation(h.top_path.rel1).name << "\t" << g.entity(h.top_path.mid).surface
                    << "\t" << g.relation(h.top_path.rel2).name << "\n";
    }
}

LeaveOneOutSplit load_split(std::istream& train_in, std::istream& heldout_in,
                            const std::string& origin, const KnowledgeGraph& g) {
    LeaveOneOutSplit split;
    for (const auto& row : KnowledgeGraph::parse_triple_rows(train_in, origin + " (train)")) {
        EntityId h = g.entity_id(row.head);
        EntityId t = g.entity_id(row.tail);
        RelationId r = g.relation_id(row.relation);
        if (h > t) std::swap(h, t);
        split.train.push_back({h, r, t, row.weight});
    }
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(heldout_in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        auto fields = split_tsv(line);
        if (fields.size() != 8)
            throw ParseError(origin + " (heldout)", lineno, "expected 8 tab-separated fields");
        HeldOutEntry e;
        e.source = g.entity_id(fields[0]);
        e.target = g.entity_id(fields[1]);
        e.removed = canonical_triple(g, g.entity_id(fields[2]), g.relation_id(fields[3]),
                                     g.entity_id(fields[4]));
        auto path = make_path(g, e.source, g.relation_id(fields[5]), g.entity_id(fields[6]),
                              g.relation_id(fields[7]), e.target);
        if (!path) throw ParseError(origin + " (heldout)", lineno, "degenerate top path");
        e.top_path = *path;
        split.held_out.push_back(std::move(e));
    }
    return split;
}

} // namespace kgpath

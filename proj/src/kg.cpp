#include "kgpath/kg.hpp"
#include "kgpath/error.hpp"
#include "kgpath/io_util.hpp"

#include <algorithm>
#include <istream>
#include <map>
#include <ostream>
#include <set>

namespace kgpath {

std::pair<std::string, std::string> parse_relation_name(const std::string& name) {
    auto pos = name.find('_');
    if (pos == std::string::npos || pos == 0 || pos + 1 == name.size() ||
        name.find('_', pos + 1) != std::string::npos)
        throw ValidationError("relation name '" + name + "' does not match TypeA_TypeB");
    return {name.substr(0, pos), name.substr(pos + 1)};
}

KnowledgeGraph KnowledgeGraph::build(const std::vector<TripleRow>& rows,
                                     const std::vector<std::pair<std::string, std::string>>& extra_entities) {
    // Collect vocabularies.
    std::map<std::string, std::string> entity_type_of; // surface -> type name
    std::set<std::string> type_names;
    std::set<std::string> relation_names;

    auto note_entity = [&](const std::string& surface, const std::string& type) {
        if (surface.empty()) throw ValidationError("empty entity surface");
        if (type.empty()) throw ValidationError("empty entity type for '" + surface + "'");
        auto [it, inserted] = entity_type_of.emplace(surface, type);
        if (!inserted && it->second != type)
            throw ValidationError("entity '" + surface + "' seen with types '" + it->second +
                                  "' and '" + type + "'");
        type_names.insert(type);
    };

    for (const auto& [surface, type] : extra_entities) note_entity(surface, type);
    for (const auto& row : rows) {
        note_entity(row.head, row.head_type);
        note_entity(row.tail, row.tail_type);
        auto [ta, tb] = parse_relation_name(row.relation);
        type_names.insert(ta);
        type_names.insert(tb);
        relation_names.insert(row.relation);
    }

    KnowledgeGraph g;
    g.entity_types_.assign(type_names.begin(), type_names.end());
    std::unordered_map<std::string, EntityTypeId> type_id;
    for (EntityTypeId i = 0; i < g.entity_types_.size(); ++i) type_id[g.entity_types_[i]] = i;

    for (const auto& [surface, type] : entity_type_of)
        g.entities_.push_back({surface, type_id.at(type)});

    for (const auto& name : relation_names) {
        auto [ta, tb] = parse_relation_name(name);
        g.relations_.push_back({name, type_id.at(ta), type_id.at(tb)});
    }

    g.build_indexes();

    // Resolve, validate and merge the edges.
    std::map<std::tuple<EntityId, RelationId, EntityId>, std::uint64_t> merged;
    for (const auto& row : rows) {
        if (row.weight < 1)
            throw ValidationError("triple (" + row.head + ", " + row.relation + ", " + row.tail +
                                  ") has weight 0");
        EntityId h = g.entity_by_surface_.at(row.head);
        EntityId t = g.entity_by_surface_.at(row.tail);
        if (h == t)
            throw ValidationError("self-loop triple on entity '" + row.head + "'");
        RelationId r = g.relation_by_name_.at(row.relation);
        const RelationInfo& ri = g.relations_[r];
        EntityTypeId ht = g.entities_[h].etype, tt = g.entities_[t].etype;
        bool ok = (ht == ri.type_a && tt == ri.type_b) || (ht == ri.type_b && tt == ri.type_a);
        if (!ok)
            throw ValidationError("triple (" + row.head + ", " + row.relation + ", " + row.tail +
                                  "): endpoint types do not match relation '" + ri.name + "'");
        if (h > t) std::swap(h, t);
        merged[{h, r, t}] += row.weight;
    }

    g.triples_.reserve(merged.size());
    for (const auto& [key, w] : merged) {
        auto [h, r, t] = key;
        g.triples_.push_back({h, r, t, w});
    }
    std::sort(g.triples_.begin(), g.triples_.end(), [](const Triple& a, const Triple& b) {
        return std::tie(a.head, a.relation, a.tail) < std::tie(b.head, b.relation, b.tail);
    });

    g.adjacency_.assign(g.entities_.size(), {});
    for (const auto& tr : g.triples_) {
        g.adjacency_[tr.head].push_back({tr.relation, tr.tail, tr.weight});
        g.adjacency_[tr.tail].push_back({tr.relation, tr.head, tr.weight});
    }
    for (auto& adj : g.adjacency_) {
        std::sort(adj.begin(), adj.end(), [](const Adj& a, const Adj& b) {
            if (a.relation != b.relation) return a.relation < b.relation;
            if (a.weight != b.weight) return a.weight > b.weight;
            return a.neighbor < b.neighbor;
        });
    }
    return g;
}

void KnowledgeGraph::build_indexes() {
    entity_by_surface_.clear();
    relation_by_name_.clear();
    type_by_name_.clear();
    for (EntityId i = 0; i < entities_.size(); ++i) entity_by_surface_[entities_[i].surface] = i;
    for (RelationId i = 0; i < relations_.size(); ++i) relation_by_name_[relations_[i].name] = i;
    for (EntityTypeId i = 0; i < entity_types_.size(); ++i) type_by_name_[entity_types_[i]] = i;
}

std::vector<TripleRow> KnowledgeGraph::parse_triple_rows(std::istream& in, const std::string& origin) {
    std::vector<TripleRow> rows;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        auto fields = split_tsv(line);
        if (fields.size() != 5 && fields.size() != 6)
            throw ParseError(origin, lineno,
                             "expected 5 or 6 tab-separated fields, got " +
                                 std::to_string(fields.size()));
        TripleRow row;
        row.head = fields[0];
        row.head_type = fields[1];
        row.relation = fields[2];
        row.tail = fields[3];
        row.tail_type = fields[4];
        if (fields.size() == 6) {
            std::int64_t w = parse_int(fields[5], origin + ":" + std::to_string(lineno) + " weight");
            if (w < 1) throw ParseError(origin, lineno, "weight must be >= 1");
            row.weight = static_cast<std::uint64_t>(w);
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

KnowledgeGraph KnowledgeGraph::load_triples(std::istream& in, const std::string& origin) {
    return build(parse_triple_rows(in, origin));
}

namespace {
constexpr char kGraphMagic[] = "# kgpath-graph v1";
}

void KnowledgeGraph::save(std::ostream& out, std::uint64_t config_hash) const {
    out << kGraphMagic << "\n";
    if (config_hash != 0) out << output_header(config_hash);
    out << "T\t" << entity_types_.size() << "\n";
    for (const auto& t : entity_types_) out << t << "\n";
    out << "E\t" << entities_.size() << "\n";
    for (const auto& e : entities_) out << e.surface << "\t" << e.etype << "\n";
    out << "R\t" << relations_.size() << "\n";
    for (const auto& r : relations_) out << r.name << "\n";
    out << "X\t" << triples_.size() << "\n";
    for (const auto& t : triples_)
        out << t.head << "\t" << t.relation << "\t" << t.tail << "\t" << t.weight << "\n";
}

KnowledgeGraph KnowledgeGraph::load(std::istream& in) {
    std::string line;
    auto next = [&](const char* what) -> std::string {
        if (!std::getline(in, line)) throw ParseError(std::string("graph file truncated at ") + what);
        if (!line.empty() && line.back() == '\r') line.pop_back();
        return line;
    };
    if (next("header") != kGraphMagic)
        throw ParseError("bad graph file header (wrong format or version)");

    bool past_preamble = false;
    auto section_count = [&](char tag) -> std::size_t {
        std::string header = next("section header");
        // provenance comment lines may follow the magic line
        while (!past_preamble && !header.empty() && header[0] == '#')
            header = next("section header");
        past_preamble = true;
        auto fields = split_tsv(header);
        if (fields.size() != 2 || fields[0] != std::string(1, tag))
            throw ParseError(std::string("expected section '") + tag + "'");
        return static_cast<std::size_t>(parse_int(fields[1], "section count"));
    };

    KnowledgeGraph g;
    std::size_t nt = section_count('T');
    for (std::size_t i = 0; i < nt; ++i) g.entity_types_.push_back(next("type name"));

    std::size_t ne = section_count('E');
    for (std::size_t i = 0; i < ne; ++i) {
        auto fields = split_tsv(next("entity"));
        if (fields.size() != 2) throw ParseError("bad entity row in graph file");
        auto tid = parse_int(fields[1], "entity type id");
        if (tid < 0 || static_cast<std::size_t>(tid) >= nt)
            throw ParseError("entity type id out of range in graph file");
        g.entities_.push_back({fields[0], static_cast<EntityTypeId>(tid)});
    }

    std::size_t nr = section_count('R');
    for (std::size_t i = 0; i < nr; ++i) {
        std::string name = next("relation");
        auto [ta, tb] = parse_relation_name(name);
        auto find_type = [&](const std::string& t) -> EntityTypeId {
            auto it = std::find(g.entity_types_.begin(), g.entity_types_.end(), t);
            if (it == g.entity_types_.end())
                throw ParseError("relation '" + name + "' references unknown type '" + t + "'");
            return static_cast<EntityTypeId>(it - g.entity_types_.begin());
        };
        g.relations_.push_back({name, find_type(ta), find_type(tb)});
    }

    std::size_t nx = section_count('X');
    for (std::size_t i = 0; i < nx; ++i) {
        auto fields = split_tsv(next("triple"));
        if (fields.size() != 4) throw ParseError("bad triple row in graph file");
        Triple t;
        t.head = static_cast<EntityId>(parse_int(fields[0], "head id"));
        t.relation = static_cast<RelationId>(parse_int(fields[1], "relation id"));
        t.tail = static_cast<EntityId>(parse_int(fields[2], "tail id"));
        t.weight = static_cast<std::uint64_t>(parse_int(fields[3], "weight"));
        if (t.head >= ne || t.tail >= ne || t.relation >= nr || t.weight < 1 || t.head >= t.tail)
            throw ParseError("invalid triple row in graph file");
        g.triples_.push_back(t);
    }

    g.build_indexes();
    g.adjacency_.assign(g.entities_.size(), {});
    for (const auto& tr : g.triples_) {
        g.adjacency_[tr.head].push_back({tr.relation, tr.tail, tr.weight});
        g.adjacency_[tr.tail].push_back({tr.relation, tr.head, tr.weight});
    }
    for (auto& adj : g.adjacency_) {
        std::sort(adj.begin(), adj.end(), [](const Adj& a, const Adj& b) {
            if (a.relation != b.relation) return a.relation < b.relation;
            if (a.weight != b.weight) return a.weight > b.weight;
            return a.neighbor < b.neighbor;
        });
    }
    return g;
}

std::vector<std::pair<EntityId, std::uint64_t>> KnowledgeGraph::neighbors(EntityId e, RelationId r) const {
    if (e >= entities_.size()) throw LookupError("unknown entity id " + std::to_string(e));
    if (r >= relations_.size()) throw LookupError("unknown relation id " + std::to_string(r));
    std::vector<std::pair<EntityId, std::uint64_t>> out;
    for (const auto& a : adjacency_[e])
        if (a.relation == r) out.emplace_back(a.neighbor, a.weight);
    return out;
}

EntityId KnowledgeGraph::entity_id(const std::string& surface) const {
    auto it = entity_by_surface_.find(surface);
    if (it == entity_by_surface_.end()) throw LookupError("unknown entity '" + surface + "'");
    return it->second;
}

RelationId KnowledgeGraph::relation_id(const std::string& name) const {
    auto it = relation_by_name_.find(name);
    if (it == relation_by_name_.end()) throw LookupError("unknown relation '" + name + "'");
    return it->second;
}

EntityTypeId KnowledgeGraph::entity_type_id(const std::string& name) const {
    auto it = type_by_name_.find(name);
    if (it == type_by_name_.end()) throw LookupError("unknown entity type '" + name + "'");
    return it->second;
}

bool KnowledgeGraph::has_entity(const std::string& surface) const {
    return entity_by_surface_.count(surface) != 0;
}
bool KnowledgeGraph::has_relation(const std::string& name) const {
    return relation_by_name_.count(name) != 0;
}
bool KnowledgeGraph::has_entity_type(const std::string& name) const {
    return type_by_name_.count(name) != 0;
}

const EntityInfo& KnowledgeGraph::entity(EntityId e) const {
    if (e >= entities_.size()) throw LookupError("unknown entity id " + std::to_string(e));
    return entities_[e];
}
const RelationInfo& KnowledgeGraph::relation(RelationId r) const {
    if (r >= relations_.size()) throw LookupError("unknown relation id " + std::to_string(r));
    return relations_[r];
}
const std::string& KnowledgeGraph::entity_type_name(EntityTypeId t) const {
    if (t >= entity_types_.size()) throw LookupError("unknown entity type id " + std::to_string(t));
    return entity_types_[t];
}

bool KnowledgeGraph::has_triple(EntityId a, RelationId r, EntityId b) const {
    if (a > b) std::swap(a, b);
    Triple probe{a, r, b, 0};
    auto it = std::lower_bound(triples_.begin(), triples_.end(), probe,
                               [](const Triple& x, const Triple& y) {
                                   return std::tie(x.head, x.relation, x.tail) <
                                          std::tie(y.head, y.relation, y.tail);
                               });
    return it != triples_.end() && it->head == a && it->relation == r && it->tail == b;
}

std::size_t KnowledgeGraph::degree(EntityId e) const {
    if (e >= entities_.size()) throw LookupError("unknown entity id " + std::to_string(e));
    return adjacency_[e].size();
}

std::uint64_t KnowledgeGraph::vocab_hash() const {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (const auto& t : entity_types_) h = fnv1a(t + "\x1f", h);
    h = fnv1a("\x1e", h);
    for (const auto& e : entities_)
        h = fnv1a(e.surface + "\x1f" + std::to_string(e.etype) + "\x1f", h);
    h = fnv1a("\x1e", h);
    for (const auto& r : relations_) h = fnv1a(r.name + "\x1f", h);
    return h;
}

KnowledgeGraph KnowledgeGraph::with_triples(const std::vector<Triple>& triples) const {
    KnowledgeGraph g;
    g.entity_types_ = entity_types_;
    g.entities_ = entities_;
    g.relations_ = relations_;
    g.triples_ = triples;
    for (auto& t : g.triples_)
        if (t.head > t.tail) std::swap(t.head, t.tail);
    std::sort(g.triples_.begin(), g.triples_.end(), [](const Triple& a, const Triple& b) {
        return std::tie(a.head, a.relation, a.tail) < std::tie(b.head, b.relation, b.tail);
    });
    g.build_indexes();
    g.adjacency_.assign(g.entities_.size(), {});
    for (const auto& tr : g.triples_) {
        g.adjacency_[tr.head].push_back({tr.relation, tr.tail, tr.weight});
        g.adjacency_[tr.tail].push_back({tr.relation, tr.head, tr.weight});
    }
    for (auto& adj : g.adjacency_) {
        std::sort(adj.begin(), adj.end(), [](const Adj& a, const Adj& b) {
            if (a.relation != b.relation) return a.relation < b.relation;
            if (a.weight != b.weight) return a.weight > b.weight;
            return a.neighbor < b.neighbor;
        });
    }
    return g;
}

bool KnowledgeGraph::operator==(const KnowledgeGraph& other) const {
    if (entity_types_ != other.entity_types_) return false;
    if (entities_.size() != other.entities_.size()) return false;
    for (std::size_t i = 0; i < entities_.size(); ++i)
        if (entities_[i].surface != other.entities_[i].surface ||
            entities_[i].etype != other.entities_[i].etype)
            return false;
    if (relations_.size() != other.relations_.size()) return false;
    for (std::size_t i = 0; i < relations_.size(); ++i)
        if (relations_[i].name != other.relations_[i].name) return false;
    return triples_ == other.triples_;
}

} // namespace kgpath

#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <unordered_map>
#include <vector>

namespace kgpath {

// Dense handles into the graph vocabularies. Ids are assigned by
// lexicographic sort of the corresponding strings, so two ingestions of the
// same data (in any row order) produce identical graphs.
using EntityId = std::uint32_t;
using RelationId = std::uint32_t;
using EntityTypeId = std::uint32_t;

struct EntityInfo {
    std::string surface;
    EntityTypeId etype;
};

// Relation names follow the `TypeA_TypeB` grammar; endpoint types are parsed
// from the name.
struct RelationInfo {
    std::string name;
    EntityTypeId type_a;
    EntityTypeId type_b;
};

// Undirected edge stored canonically with head < tail. Weight is a document
// count, >= 1.
struct Triple {
    EntityId head;
    RelationId relation;
    EntityId tail;
    std::uint64_t weight;

    bool operator==(const Triple&) const = default;
};

// One raw input row before vocabulary resolution.
struct TripleRow {
    std::string head;
    std::string head_type;
    std::string relation;
    std::string tail;
    std::string tail_type;
    std::uint64_t weight = 1;
};

class KnowledgeGraph {
public:
    // Builds a canonical graph: vocabularies sorted, duplicate edges merged by
    // weight summation. `extra_entities` admits isolated vertices.
    static KnowledgeGraph build(const std::vector<TripleRow>& rows,
                                const std::vector<std::pair<std::string, std::string>>& extra_entities = {});

    // Parses the tab-separated triple format:
    //   head TAB head_type TAB relation TAB tail TAB tail_type [TAB weight]
    // '#' lines ignored. `origin` names the source in error messages.
    static KnowledgeGraph load_triples(std::istream& in, const std::string& origin);

    static std::vector<TripleRow> parse_triple_rows(std::istream& in, const std::string& origin);

    // Writes the format-version line, an optional provenance comment, then
    // the vocabulary and triple sections.
    void save(std::ostream& out, std::uint64_t config_hash = 0) const;
    static KnowledgeGraph load(std::istream& in);

    // All entities adjacent to e via r, descending weight then ascending id.
    std::vector<std::pair<EntityId, std::uint64_t>> neighbors(EntityId e, RelationId r) const;

    // Ids of all neighbors of e under r (same order as neighbors()).
    const std::vector<Triple>& triples() const { return triples_; }
    const std::vector<EntityInfo>& entities() const { return entities_; }
    const std::vector<RelationInfo>& relations() const { return relations_; }
    const std::vector<std::string>& entity_types() const { return entity_types_; }

    std::size_t entity_count() const { return entities_.size(); }
    std::size_t relation_count() const { return relations_.size(); }
    std::size_t triple_count() const { return triples_.size(); }

    EntityId entity_id(const std::string& surface) const;
    RelationId relation_id(const std::string& name) const;
    EntityTypeId entity_type_id(const std::string& name) const;
    bool has_entity(const std::string& surface) const;
    bool has_relation(const std::string& name) const;
    bool has_entity_type(const std::string& name) const;

    const EntityInfo& entity(EntityId e) const;
    const RelationInfo& relation(RelationId r) const;
    const std::string& entity_type_name(EntityTypeId t) const;

    bool has_triple(EntityId a, RelationId r, EntityId b) const;

    // Number of triples incident to e (any relation).
    std::size_t degree(EntityId e) const;

    // FNV hash over the full vocabulary; stored in model files to detect
    // graph/model mismatches.
    std::uint64_t vocab_hash() const;

    // Same vocabulary, different edge set. Rows reference existing entity and
    // relation ids. Used for leave-one-out training graphs.
    KnowledgeGraph with_triples(const std::vector<Triple>& triples) const;

    bool operator==(const KnowledgeGraph& other) const;

private:
    std::vector<std::string> entity_types_;
    std::vector<EntityInfo> entities_;
    std::vector<RelationInfo> relations_;
    std::vector<Triple> triples_;

    std::unordered_map<std::string, EntityId> entity_by_surface_;
    std::unordered_map<std::string, RelationId> relation_by_name_;
    std::unordered_map<std::string, EntityTypeId> type_by_name_;

    // adjacency_[e]: (relation, neighbor, weight), sorted by relation, then
    // descending weight, then ascending neighbor id.
    struct Adj {
        RelationId relation;
        EntityId neighbor;
        std::uint64_t weight;
    };
    std::vector<std::vector<Adj>> adjacency_;

    void build_indexes();
};

// Splits `TypeA_TypeB` into its two endpoint type names.
std::pair<std::string, std::string> parse_relation_name(const std::string& name);

} // namespace kgpath

#pragma once

#include "kgpath/kg.hpp"

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <vector>

namespace kgpath {

// One triple tagged with the document it was extracted from.
struct DocTriple {
    std::string doc_id;
    EntityId head;
    RelationId relation;
    EntityId tail;
};

// source - rel1 - mid - rel2 - target. Stored in canonical orientation:
// (source, target) ordered by (entity type name, surface string).
struct Path {
    EntityId source;
    RelationId rel1;
    EntityId mid;
    RelationId rel2;
    EntityId target;

    bool operator==(const Path&) const = default;
    auto operator<=>(const Path&) const = default;
};

// Ordered entity-type triple, e.g. Gene-Phenotype-Disease.
struct QueryType {
    EntityTypeId outer_a;
    EntityTypeId middle;
    EntityTypeId outer_b;

    bool operator==(const QueryType&) const = default;
};

struct GroundTruthPair {
    EntityId source;
    EntityId target;
    std::vector<QueryType> query_types;
    // Descending frequency; ties broken by canonical path key
    // (rel1 name, mid surface, rel2 name). Ranks are implicit 1..k.
    std::vector<std::pair<Path, std::uint64_t>> ranked_paths;
};

struct GroundTruthSet {
    std::vector<GroundTruthPair> pairs;
};

struct HeldOutEntry {
    EntityId source;
    EntityId target;
    Triple removed;
    Path top_path;
};

struct LeaveOneOutSplit {
    std::vector<Triple> train;
    std::vector<HeldOutEntry> held_out;
};

// Parses `TypeA-TypeB-TypeC` against the graph's type vocabulary.
QueryType parse_query_type(const std::string& text, const KnowledgeGraph& g);
std::string format_query_type(const QueryType& qt, const KnowledgeGraph& g);

// Canonicalizes a two-edge chain around `mid` into a Path. Returns nullopt if
// the endpoints coincide.
std::optional<Path> make_path(const KnowledgeGraph& g, EntityId end1, RelationId r1, EntityId mid,
                              RelationId r2, EntityId end2);

// Document-triple file: doc_id TAB head TAB head_type TAB relation TAB tail TAB tail_type.
// Entities and relations must resolve against g.
std::vector<DocTriple> load_doc_triples(std::istream& in, const std::string& origin,
                                        const KnowledgeGraph& g);

// Counts, per document, every pair of triples sharing exactly one entity.
std::map<Path, std::uint64_t> mine_one_hop_paths(const std::vector<DocTriple>& docs,
                                                 const KnowledgeGraph& g);

GroundTruthSet build_ground_truth(const std::map<Path, std::uint64_t>& paths,
                                  const std::vector<QueryType>& query_types,
                                  const KnowledgeGraph& g, std::uint64_t min_freq,
                                  std::size_t min_paths, std::size_t max_pairs);

// Removes one seeded-random edge of each pair's top path from the triple list.
LeaveOneOutSplit make_leave_one_out(const KnowledgeGraph& g, const GroundTruthSet& gt,
                                    std::uint64_t rng_seed);

// Ground-truth file: src TAB tgt TAB rank TAB freq TAB rel1 TAB mid TAB rel2.
void save_ground_truth(std::ostream& out, const GroundTruthSet& gt, const KnowledgeGraph& g,
                       std::uint64_t config_hash);
GroundTruthSet load_ground_truth(std::istream& in, const std::string& origin,
                                 const KnowledgeGraph& g,
                                 const std::vector<QueryType>& query_types);

void save_split(std::ostream& train_out, std::ostream& heldout_out, const LeaveOneOutSplit& split,
                const KnowledgeGraph& g, std::uint64_t config_hash);
LeaveOneOutSplit load_split(std::istream& train_in, std::istream& heldout_in,
                            const std::string& origin, const KnowledgeGraph& g);

} // namespace kgpath

#include <doctest.h>

#include "kgpath/error.hpp"
#include "kgpath/path_builder.hpp"

#include <algorithm>
#include <map>
#include <random>
#include <set>

using namespace kgpath;

namespace {

// Backend with hand-fixed prediction tables and embeddings.
class FixtureBackend : public KbcBackend {
public:
    explicit FixtureBackend(std::uint32_t dim = 2) : dim_(dim) {}

    void set_predictions(EntityId e, RelationId r, std::vector<EntityId> ranked) {
        std::vector<Prediction> preds;
        for (std::size_t i = 0; i < ranked.size(); ++i)
            preds.push_back({ranked[i], 1.0 - 0.01 * static_cast<double>(i),
                             static_cast<std::uint32_t>(i + 1)});
        table_[{e, r}] = std::move(preds);
    }

    void set_embedding(EntityId e, std::vector<double> v) {
        if (emb_.size() <= e) emb_.resize(e + 1);
        emb_[e] = std::move(v);
    }

    std::vector<Prediction> predict_tails(EntityId e, RelationId r, std::size_t n) const override {
        auto it = table_.find({e, r});
        if (it == table_.end()) return {};
        auto preds = it->second;
        if (preds.size() > n) preds.resize(n);
        return preds;
    }
    std::vector<Prediction> predict_heads(EntityId e, RelationId r, std::size_t n) const override {
        return predict_tails(e, r, n);
    }
    std::span<const double> entity_embedding(EntityId e) const override { return emb_.at(e); }
    std::uint32_t dim() const override { return dim_; }

private:
    std::uint32_t dim_;
    std::map<std::pair<EntityId, RelationId>, std::vector<Prediction>> table_;
    std::vector<std::vector<double>> emb_;
};

// Biomedical-flavored vocabulary with the four relations of the
// Drug-Gene/Drug-Phenotype query example, plus A/B/C helper types.
KnowledgeGraph builder_graph() {
    std::vector<TripleRow> rows = {
        {"aspirin", "Drug", "Drug_Gene", "BRCA1", "Gene", 1},
        {"aspirin", "Drug", "Drug_Phenotype", "fever", "Phenotype", 1},
        {"flu", "Disease", "Disease_Gene", "BRCA1", "Gene", 1},
        {"flu", "Disease", "Disease_Phenotype", "fever", "Phenotype", 1},
        {"BRCA2", "Gene", "Drug_Gene", "ibuprofen", "Drug", 1},
        {"chills", "Phenotype", "Disease_Phenotype", "cold", "Disease", 1},
    };
    return KnowledgeGraph::build(rows);
}

} // namespace

TEST_CASE("relations_for_query resolves the Drug/Disease example") {
    auto g = builder_graph();
    std::vector<QueryType> qts = {parse_query_type("Drug-Gene-Disease", g),
                                  parse_query_type("Drug-Phenotype-Disease", g)};
    auto drug = g.entity_type_id("Drug");
    auto disease = g.entity_type_id("Disease");

    auto rels = relations_for_query(drug, disease, qts, g);
    REQUIRE(rels.size() == 4);
    auto has = [&](const char* name, AttachSide side) {
        return std::find(rels.begin(), rels.end(), QueryRelation{g.relation_id(name), side}) !=
               rels.end();
    };
    CHECK(has("Drug_Gene", AttachSide::Source));
    CHECK(has("Drug_Phenotype", AttachSide::Source));
    CHECK(has("Disease_Gene", AttachSide::Target));
    CHECK(has("Disease_Phenotype", AttachSide::Target));

    // Reversed pair: same four relations with attach sides swapped.
    auto rev = relations_for_query(disease, drug, qts, g);
    REQUIRE(rev.size() == 4);
    auto has_rev = [&](const char* name, AttachSide side) {
        return std::find(rev.begin(), rev.end(), QueryRelation{g.relation_id(name), side}) !=
               rev.end();
    };
    CHECK(has_rev("Drug_Gene", AttachSide::Target));
    CHECK(has_rev("Drug_Phenotype", AttachSide::Target));
    CHECK(has_rev("Disease_Gene", AttachSide::Source));
    CHECK(has_rev("Disease_Phenotype", AttachSide::Source));
}

TEST_CASE("relations_for_query edge cases") {
    auto g = builder_graph();
    auto drug = g.entity_type_id("Drug");
    auto disease = g.entity_type_id("Disease");

    CHECK(relations_for_query(drug, disease, {}, g).empty());

    // Query types whose outer types do not match the pair are skipped.
    auto qt = parse_query_type("Gene-Drug-Phenotype", g);
    CHECK(relations_for_query(drug, disease, {qt}, g).empty());

    // A matching query type whose link relation is missing is an error.
    auto bad = parse_query_type("Drug-Disease-Disease", g); // no Drug_Disease relation
    CHECK_THROWS_AS(relations_for_query(drug, disease, {bad}, g), ValidationError);
}

TEST_CASE("build_candidate_graph: minimal construction and type filter") {
    auto g = builder_graph();
    auto aspirin = g.entity_id("aspirin");
    auto flu = g.entity_id("flu");
    auto fever = g.entity_id("fever");
    auto chills = g.entity_id("chills");
    auto qt = parse_query_type("Drug-Phenotype-Disease", g);

    FixtureBackend m;
    // Top prediction from both sides is fever; chills second; the gene and
    // drug entries must be filtered out (wrong type for the far endpoint).
    m.set_predictions(aspirin, g.relation_id("Drug_Phenotype"),
                      {fever, g.entity_id("BRCA1"), chills});
    m.set_predictions(flu, g.relation_id("Disease_Phenotype"),
                      {fever, g.entity_id("ibuprofen"), chills});

    auto cg1 = build_candidate_graph(m, g, aspirin, flu, {qt}, 1);
    REQUIRE(cg1.edges.size() == 2);
    CHECK(cg1.find_edge(aspirin, fever));
    CHECK(cg1.find_edge(flu, fever));
    CHECK(enumerate_one_hop_paths(cg1).size() == 1);

    auto cg3 = build_candidate_graph(m, g, aspirin, flu, {qt}, 3);
    REQUIRE(cg3.edges.size() == 4); // BRCA1 and ibuprofen filtered by type
    CHECK(cg3.find_edge(aspirin, chills)->pred_rank == 3);
    auto paths = enumerate_one_hop_paths(cg3);
    REQUIRE(paths.size() == 2);
    // ascending mid id
    CHECK(paths[0].mid < paths[1].mid);
}

TEST_CASE("duplicate unordered pairs keep the better prediction rank") {
    // Pair (a1:A, c1:C) with query types A-C-C and A-A-C. The edge {a1,c1} is
    // produced twice: c1 predicted from a1 under A_C at rank 7, and a1
    // predicted from c1 under A_C at rank 3.
    std::vector<TripleRow> rows = {
        {"a1", "A", "A_C", "c1", "C", 1}, {"a1", "A", "A_A", "a2", "A", 1},
        {"c1", "C", "C_C", "c2", "C", 1}, {"a3", "A", "A_C", "c3", "C", 1},
        {"a4", "A", "A_C", "c4", "C", 1}, {"a5", "A", "A_C", "c5", "C", 1},
        {"a6", "A", "A_C", "c6", "C", 1},
    };
    auto g = KnowledgeGraph::build(rows);
    auto a1 = g.entity_id("a1"), c1 = g.entity_id("c1");

    FixtureBackend m;
    auto cs = {g.entity_id("c2"), g.entity_id("c3"), g.entity_id("c4"),
               g.entity_id("c5"), g.entity_id("c6")};
    std::vector<EntityId> from_a1(cs.begin(), cs.end());
    from_a1.push_back(g.entity_id("a2")); // rank 6, filtered (wrong type)
    from_a1.push_back(c1);                // rank 7
    m.set_predictions(a1, g.relation_id("A_C"), from_a1);
    m.set_predictions(c1, g.relation_id("A_C"),
                      {g.entity_id("a3"), g.entity_id("a4"), a1, g.entity_id("a5")});
    m.set_predictions(a1, g.relation_id("A_A"), {g.entity_id("a2")});
    m.set_predictions(c1, g.relation_id("C_C"), {g.entity_id("c2")});

    std::vector<QueryType> qts = {parse_query_type("A-C-C", g), parse_query_type("A-A-C", g)};
    auto cg = build_candidate_graph(m, g, a1, c1, qts, 10);
    const auto* e = cg.find_edge(a1, c1);
    REQUIRE(e);
    CHECK(e->pred_rank == 3);
    CHECK(e->relation == g.relation_id("A_C"));
}

TEST_CASE("candidate graph matches a hand simulation") {
    auto g = builder_graph();
    auto aspirin = g.entity_id("aspirin");
    auto flu = g.entity_id("flu");
    std::vector<QueryType> qts = {parse_query_type("Drug-Gene-Disease", g),
                                  parse_query_type("Drug-Phenotype-Disease", g)};

    FixtureBackend m;
    m.set_predictions(aspirin, g.relation_id("Drug_Gene"),
                      {g.entity_id("BRCA1"), g.entity_id("BRCA2")});
    m.set_predictions(aspirin, g.relation_id("Drug_Phenotype"),
                      {g.entity_id("chills"), g.entity_id("fever")});
    m.set_predictions(flu, g.relation_id("Disease_Gene"), {g.entity_id("BRCA2")});
    m.set_predictions(flu, g.relation_id("Disease_Phenotype"),
                      {g.entity_id("fever"), g.entity_id("chills")});

    auto cg = build_candidate_graph(m, g, aspirin, flu, qts, 2);
    // Hand simulation: 4 queries, every prediction type-consistent, no
    // duplicate pairs -> 7 edges.
    REQUIRE(cg.edges.size() == 7);
    CHECK(cg.find_edge(aspirin, g.entity_id("BRCA1"))->pred_rank == 1);
    CHECK(cg.find_edge(aspirin, g.entity_id("BRCA2"))->pred_rank == 2);
    CHECK(cg.find_edge(aspirin, g.entity_id("chills"))->pred_rank == 1);
    CHECK(cg.find_edge(aspirin, g.entity_id("fever"))->pred_rank == 2);
    CHECK(cg.find_edge(flu, g.entity_id("BRCA2"))->pred_rank == 1);
    CHECK(cg.find_edge(flu, g.entity_id("fever"))->pred_rank == 1);
    CHECK(cg.find_edge(flu, g.entity_id("chills"))->pred_rank == 2);
    CHECK_FALSE(cg.find_edge(aspirin, g.entity_id("ibuprofen")));

    // Common neighbors of the endpoints: BRCA2, fever, chills.
    auto paths = enumerate_one_hop_paths(cg);
    std::set<EntityId> mids;
    for (const auto& p : paths) mids.insert(p.mid);
    CHECK(mids == std::set<EntityId>{g.entity_id("BRCA2"), g.entity_id("fever"),
                                     g.entity_id("chills")});
    for (const auto& p : paths) {
        CHECK(p.source == aspirin);
        CHECK(p.target == flu);
    }
}

TEST_CASE("enumeration equals brute force on random candidate graphs") {
    std::mt19937_64 rng(555);
    for (int iter = 0; iter < 100; ++iter) {
        const EntityId n_vertices = 30;
        CandidateGraph cg;
        cg.source = 0;
        cg.target = 1;
        std::set<std::pair<EntityId, EntityId>> used;
        std::uniform_int_distribution<EntityId> v(0, n_vertices - 1);
        int n_edges = 1 + static_cast<int>(rng() % 50);
        for (int e = 0; e < n_edges; ++e) {
            EntityId a = v(rng), b = v(rng);
            if (a == b) continue;
            auto key = std::minmax(a, b);
            if (!used.insert({key.first, key.second}).second) continue;
            cg.edges.push_back({a, b, static_cast<RelationId>(rng() % 3),
                                static_cast<std::uint32_t>(1 + rng() % 20), 0.5,
                                AttachSide::Source});
        }

        auto paths = enumerate_one_hop_paths(cg);

        // Brute force: each vertex adjacent to both endpoints is one path.
        std::vector<Path> expected;
        for (EntityId x = 0; x < n_vertices; ++x) {
            if (x == cg.source || x == cg.target) continue;
            const auto* e1 = cg.find_edge(cg.source, x);
            const auto* e2 = cg.find_edge(x, cg.target);
            if (e1 && e2)
                expected.push_back(Path{cg.source, e1->relation, x, e2->relation, cg.target});
        }
        CHECK(paths == expected);
    }
}

TEST_CASE("path sets grow monotonically with n_pred") {
    auto g = builder_graph();
    auto aspirin = g.entity_id("aspirin");
    auto flu = g.entity_id("flu");
    auto qt = parse_query_type("Drug-Phenotype-Disease", g);

    FixtureBackend m;
    m.set_predictions(aspirin, g.relation_id("Drug_Phenotype"),
                      {g.entity_id("fever"), g.entity_id("chills")});
    m.set_predictions(flu, g.relation_id("Disease_Phenotype"),
                      {g.entity_id("chills"), g.entity_id("fever")});

    std::vector<std::set<Path>> sets;
    for (std::size_t n : {1, 2, 3}) {
        auto paths = enumerate_one_hop_paths(build_candidate_graph(m, g, aspirin, flu, {qt}, n));
        sets.emplace_back(paths.begin(), paths.end());
    }
    CHECK(std::includes(sets[1].begin(), sets[1].end(), sets[0].begin(), sets[0].end()));
    CHECK(std::includes(sets[2].begin(), sets[2].end(), sets[1].begin(), sets[1].end()));
    CHECK(sets[2].size() == 2);

    // Assembling from prefixes of one fetch equals fetching at that depth.
    auto fetched = fetch_endpoint_predictions(m, g, aspirin, flu, {qt}, 3);
    for (std::size_t n : {1, 2, 3}) {
        auto direct = build_candidate_graph(m, g, aspirin, flu, {qt}, n);
        auto sliced = assemble_candidate_graph(g, aspirin, flu, fetched, n);
        CHECK(enumerate_one_hop_paths(direct) == enumerate_one_hop_paths(sliced));
    }
}

TEST_CASE("extend_paths depth handling") {
    auto g = builder_graph();
    auto aspirin = g.entity_id("aspirin");
    auto flu = g.entity_id("flu");
    auto qt = parse_query_type("Drug-Phenotype-Disease", g);

    FixtureBackend m;
    m.set_predictions(aspirin, g.relation_id("Drug_Phenotype"), {g.entity_id("fever")});
    m.set_predictions(flu, g.relation_id("Disease_Phenotype"), {g.entity_id("fever")});

    auto cg = build_candidate_graph(m, g, aspirin, flu, {qt}, 5);
    CHECK_THROWS_AS(extend_paths(cg, m, g, {qt}, 5, 0), ValidationError);
    CHECK_THROWS_AS(extend_paths(cg, m, g, {qt}, 5, 3), ValidationError);

    // depth 1 reduces to the one-hop enumeration
    auto one = extend_paths(cg, m, g, {qt}, 5, 1);
    auto flat = enumerate_one_hop_paths(cg);
    REQUIRE(one.size() == flat.size());
    for (std::size_t i = 0; i < one.size(); ++i) {
        CHECK(one[i].nodes == std::vector<EntityId>{flat[i].source, flat[i].mid, flat[i].target});
        CHECK(one[i].relations == std::vector<RelationId>{flat[i].rel1, flat[i].rel2});
    }
}

TEST_CASE("extend_paths depth 2 matches hand enumeration") {
    // a1 -A_B- b1 -B_C- c9 ... target c1 of type C; inner pair (b1, c1) under
    // query B-C-C gives b1 -B_C- c2 -C_C- c1.
    std::vector<TripleRow> rows = {
        {"a1", "A", "A_B", "b1", "B", 1},
        {"b1", "B", "B_C", "c1", "C", 1},
        {"c1", "C", "C_C", "c2", "C", 1},
        {"b1", "B", "B_C", "c2", "C", 1},
    };
    auto g = KnowledgeGraph::build(rows);
    auto a1 = g.entity_id("a1"), b1 = g.entity_id("b1"), c1 = g.entity_id("c1"),
         c2 = g.entity_id("c2");

    FixtureBackend m;
    m.set_predictions(a1, g.relation_id("A_B"), {b1});
    m.set_predictions(c1, g.relation_id("B_C"), {b1});
    m.set_predictions(b1, g.relation_id("B_C"), {c2, c1});
    m.set_predictions(c1, g.relation_id("C_C"), {c2});

    std::vector<QueryType> qts = {parse_query_type("A-B-C", g), parse_query_type("B-C-C", g)};
    auto cg = build_candidate_graph(m, g, a1, c1, qts, 5);
    auto two = extend_paths(cg, m, g, qts, 5, 2);

    MultiHopPath expected{{a1, b1, c2, c1},
                          {g.relation_id("A_B"), g.relation_id("B_C"), g.relation_id("C_C")}};
    CHECK(std::find(two.begin(), two.end(), expected) != two.end());
    for (const auto& p : two) {
        CHECK(p.nodes.size() == 4);
        CHECK(p.relations.size() == 3);
        CHECK(p.nodes.front() == a1);
        CHECK(p.nodes.back() == c1);
    }
}

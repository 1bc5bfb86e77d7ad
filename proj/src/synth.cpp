#include "kgpath/synth.hpp"
#include "kgpath/error.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <numeric>
#include <random>
#include <sstream>

namespace kgpath {

namespace {

struct Entity {
    std::string name;
    std::size_t type; // index into kTypes
    double x, y;
    bool decoy = false;
};

constexpr const char* kTypes[] = {"Gene", "Phenotype", "Disease", "Drug", "Anatomy"};
enum { kGene = 0, kPhenotype = 1, kDisease = 2, kDrug = 3, kAnatomy = 4 };

// (relation name, type a, type b)
struct RelSpec {
    const char* name;
    int a, b;
};
constexpr RelSpec kRelations[] = {
    {"Gene_Phenotype", kGene, kPhenotype},   {"Disease_Phenotype", kDisease, kPhenotype},
    {"Drug_Gene", kDrug, kGene},             {"Disease_Gene", kDisease, kGene},
    {"Disease_Drug", kDisease, kDrug},       {"Anatomy_Gene", kAnatomy, kGene},
    {"Anatomy_Phenotype", kAnatomy, kPhenotype}, {"Drug_Phenotype", kDrug, kPhenotype},
    {"Anatomy_Disease", kAnatomy, kDisease}, {"Anatomy_Drug", kAnatomy, kDrug},
};

double dist(const Entity& a, const Entity& b) {
    double dx = a.x - b.x, dy = a.y - b.y;
    return std::sqrt(dx * dx + dy * dy);
}

std::string entity_name(int type, std::size_t i) {
    static const char* prefix[] = {"g", "p", "d", "r", "a"};
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%s%03zu", prefix[type], i);
    return buf;
}

} // namespace

SynthOutput generate_synthetic_kg(const SynthConfig& cfg) {
    if (cfg.decoys >= cfg.phenotypes)
        throw ValidationError("decoy count must be smaller than the phenotype count");
    if (cfg.max_freq < 3) throw ValidationError("max_freq must be >= 3");

    std::mt19937_64 rng(cfg.seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    std::vector<Entity> entities;
    std::vector<std::vector<std::size_t>> by_type(5);
    auto add_entities = [&](int type, std::size_t count, std::size_t decoy_count) {
        for (std::size_t i = 0; i < count; ++i) {
            Entity e;
            e.name = entity_name(type, i);
            e.type = static_cast<std::size_t>(type);
            e.x = unit(rng);
            e.y = unit(rng);
            e.decoy = i + decoy_count >= count;
            by_type[type].push_back(entities.size());
            entities.push_back(std::move(e));
        }
    };
    add_entities(kGene, cfg.genes, 0);
    add_entities(kPhenotype, cfg.phenotypes, cfg.decoys);
    add_entities(kDisease, cfg.diseases, 0);
    add_entities(kDrug, cfg.drugs, 0);
    add_entities(kAnatomy, cfg.anatomies, 0);

    // Background edges: latent k-nearest neighbors, wired from both sides of
    // every relation. Weight decays with distance.
    std::map<std::tuple<std::size_t, std::size_t, std::size_t>, std::uint64_t> edges; // (rel, lo, hi)
    auto wire_side = [&](std::size_t rel, int from_type, int to_type, std::size_t k) {
        for (std::size_t u : by_type[from_type]) {
            if (entities[u].decoy) continue;
            std::vector<std::size_t> targets;
            for (std::size_t v : by_type[to_type])
                if (v != u && !entities[v].decoy) targets.push_back(v);
            std::partial_sort(targets.begin(),
                              targets.begin() + std::min(k, targets.size()), targets.end(),
                              [&](std::size_t a, std::size_t b) {
                                  double da = dist(entities[u], entities[a]);
                                  double db = dist(entities[u], entities[b]);
                                  if (da != db) return da < db;
                                  return a < b;
                              });
            for (std::size_t i = 0; i < std::min(k, targets.size()); ++i) {
                std::size_t v = targets[i];
                double d = dist(entities[u], entities[v]);
                std::uint64_t w = 1 + static_cast<std::uint64_t>(std::floor(3.0 * std::exp(-6.0 * d)));
                auto key = std::make_tuple(rel, std::min(u, v), std::max(u, v));
                auto it = edges.find(key);
                if (it == edges.end()) edges[key] = w;
                else it->second = std::max(it->second, w);
            }
        }
    };
    for (std::size_t r = 0; r < std::size(kRelations); ++r) {
        // The two relations that carry planted paths get a denser neighborhood,
        // so planted mids compete with plenty of equally well-connected ones.
        std::size_t k = (r <= 1) ? cfg.knn * 3 : cfg.knn;
        wire_side(r, kRelations[r].a, kRelations[r].b, k);
        wire_side(r, kRelations[r].b, kRelations[r].a, k);
    }

    // Decoy phenotypes: a single weak edge each, so they exist in the
    // vocabulary but carry almost no training signal.
    {
        std::uniform_int_distribution<std::size_t> pick_gene(0, by_type[kGene].size() - 1);
        for (std::size_t v : by_type[kPhenotype]) {
            if (!entities[v].decoy) continue;
            std::size_t u = by_type[kGene][pick_gene(rng)];
            auto key = std::make_tuple(std::size_t(0) /* Gene_Phenotype */, std::min(u, v),
                                       std::max(u, v));
            if (!edges.count(key)) edges[key] = 1;
        }
    }

    // Planted pairs: distinct genes, each paired with its nearest disease.
    std::vector<std::size_t> gene_pool = by_type[kGene];
    std::shuffle(gene_pool.begin(), gene_pool.end(), rng);
    if (gene_pool.size() < cfg.pair_count)
        throw ValidationError("not enough genes for the requested pair count");

    std::ostringstream docs;
    std::size_t doc_counter = 0;
    for (std::size_t pi = 0; pi < cfg.pair_count; ++pi) {
        std::size_t s = gene_pool[pi];
        std::size_t t = *std::min_element(by_type[kDisease].begin(), by_type[kDisease].end(),
                                          [&](std::size_t a, std::size_t b) {
                                              return dist(entities[s], entities[a]) <
                                                     dist(entities[s], entities[b]);
                                          });

        // Mids: phenotypes nearest to the pair, by detour length.
        std::vector<std::size_t> mids;
        for (std::size_t m : by_type[kPhenotype])
            if (!entities[m].decoy) mids.push_back(m);
        std::sort(mids.begin(), mids.end(), [&](std::size_t a, std::size_t b) {
            double ca = dist(entities[s], entities[a]) + dist(entities[a], entities[t]);
            double cb = dist(entities[s], entities[b]) + dist(entities[b], entities[t]);
            if (ca != cb) return ca < cb;
            return a < b;
        });
        mids.resize(std::min(cfg.paths_per_pair, mids.size()));

        for (std::size_t i = 0; i < mids.size(); ++i) {
            std::size_t m = mids[i];
            // Frequency decays with the mid's detour rank; closest mid = top path.
            std::uint64_t freq = 2 + static_cast<std::uint64_t>(std::llround(
                                         (static_cast<double>(cfg.max_freq) - 2.0) *
                                         std::exp(-0.35 * static_cast<double>(i))));
            for (std::uint64_t k = 0; k < freq; ++k) {
                char doc[24];
                std::snprintf(doc, sizeof(doc), "D%07zu", doc_counter++);
                docs << doc << "\t" << entities[s].name << "\tGene\tGene_Phenotype\t"
                     << entities[m].name << "\tPhenotype\n";
                docs << doc << "\t" << entities[m].name << "\tPhenotype\tDisease_Phenotype\t"
                     << entities[t].name << "\tDisease\n";
            }
            // The path's edges also enter the triple set, weighted by frequency.
            auto add = [&](std::size_t rel, std::size_t a, std::size_t b, std::uint64_t w) {
                auto key = std::make_tuple(rel, std::min(a, b), std::max(a, b));
                auto it = edges.find(key);
                if (it == edges.end()) edges[key] = w;
                else it->second = std::max(it->second, w);
            };
            add(0 /* Gene_Phenotype */, s, m, freq);
            add(1 /* Disease_Phenotype */, m, t, freq);
        }
    }

    std::ostringstream triples;
    for (const auto& [key, w] : edges) {
        auto [rel, a, b] = key;
        triples << entities[a].name << "\t" << kTypes[entities[a].type] << "\t"
                << kRelations[rel].name << "\t" << entities[b].name << "\t"
                << kTypes[entities[b].type] << "\t" << w << "\n";
    }

    return {triples.str(), docs.str()};
}

} // namespace kgpath

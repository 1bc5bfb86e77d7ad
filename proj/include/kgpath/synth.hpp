#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace kgpath {

// Seeded synthetic knowledge graph with planted, frequency-ranked 1-hop
// paths. Entities of each type live in a 2D latent space; background edges
// connect latent neighbors, so a trained model can recover proximity, and
// planted path frequencies decay with latent distance.
struct SynthConfig {
    std::uint64_t seed = 1;
    std::size_t genes = 140;
    std::size_t phenotypes = 180;
    std::size_t diseases = 110;
    std::size_t drugs = 90;
    std::size_t anatomies = 60;
    // latent nearest neighbors wired per entity per relation side
    std::size_t knn = 12;
    // sparsely connected phenotype decoys placed in dense latent regions
    std::size_t decoys = 30;
    std::size_t pair_count = 60;
    std::size_t paths_per_pair = 12;
    std::uint64_t max_freq = 24;
};

struct SynthOutput {
    // Triple file rows (tab-separated, with weight column).
    std::string triples_tsv;
    // Document-triple file rows.
    std::string docs_tsv;
};

SynthOutput generate_synthetic_kg(const SynthConfig& cfg);

} // namespace kgpath

#pragma once

#include "kgpath/kg.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <vector>

namespace kgpath {

struct Hyperparams {
    std::uint32_t dim = 200;
    std::uint32_t epochs = 200;
    double learning_rate = 0.0001;
    std::uint32_t batch_size = 128;
    double dropout_rate = 0.5;
    double l2_weight = 0.0001;
    double neg_rate = 0.25; // fraction of the entity vocabulary sampled as negatives
    std::uint64_t seed = 1;

    void validate() const;
};

struct Prediction {
    EntityId entity;
    double score;
    std::uint32_t rank; // 1-based
};

// Minimal surface a KBC backend must provide to drive path building and
// scoring. Implementations are immutable once trained.
class KbcBackend {
public:
    virtual ~KbcBackend() = default;
    virtual std::vector<Prediction> predict_tails(EntityId e, RelationId r, std::size_t n) const = 0;
    virtual std::vector<Prediction> predict_heads(EntityId e, RelationId r, std::size_t n) const = 0;
    virtual std::span<const double> entity_embedding(EntityId e) const = 0;
    virtual std::uint32_t dim() const = 0;
};

// Flat parameter storage for the reference backend. Row-major matrices.
struct ModelParams {
    std::uint32_t dim = 0;
    std::vector<double> entity_emb;   // |E| x dim
    std::vector<double> relation_emb; // |R| x dim
    std::vector<double> combine_entity_scale;   // dim
    std::vector<double> combine_relation_scale; // dim
    std::vector<double> combine_bias;           // dim
    double projection_bias = 0.0;

    std::size_t entity_count() const { return dim ? entity_emb.size() / dim : 0; }
    std::size_t relation_count() const { return dim ? relation_emb.size() / dim : 0; }
    bool all_finite() const;
};

// One training query (e, r, ?) with its candidate list. candidates[0] is the
// positive target; the rest are sampled negatives.
struct TrainQuery {
    EntityId query_entity;
    RelationId relation;
    std::vector<EntityId> candidates;
};

// Binary cross-entropy over the candidates of every query in the batch
// (mean over queries) plus l2 * ||params||^2. `dropout_keep` holds one
// 0/(1/keep_prob) mask per query per dimension, or empty for no dropout.
double batch_loss(const ModelParams& params, const std::vector<TrainQuery>& batch,
                  double l2_weight, const std::vector<double>& dropout_keep = {});

// Same loss, plus gradients in a ModelParams-shaped accumulator.
double batch_loss_and_grads(const ModelParams& params, const std::vector<TrainQuery>& batch,
                            double l2_weight, const std::vector<double>& dropout_keep,
                            ModelParams& grads);

// Reference embedding backend: combined query vector
// q = tanh(s_e . e + s_r . r + b_c), candidate score sigmoid(q . emb_c + b_p).
// Head and tail queries share the scoring function (undirected graphs).
class EmbeddingModel final : public KbcBackend {
public:
    EmbeddingModel(ModelParams params, Hyperparams hp, std::uint64_t vocab_hash);

    std::vector<Prediction> predict_tails(EntityId e, RelationId r, std::size_t n) const override;
    std::vector<Prediction> predict_heads(EntityId e, RelationId r, std::size_t n) const override;
    std::span<const double> entity_embedding(EntityId e) const override;
    std::uint32_t dim() const override { return params_.dim; }

    const ModelParams& params() const { return params_; }
    const Hyperparams& hyperparams() const { return hp_; }
    std::uint64_t vocab_hash() const { return vocab_hash_; }

    void save(std::ostream& out) const;
    // `expected_vocab_hash` is checked against the stored hash.
    static EmbeddingModel load(std::istream& in, std::uint64_t expected_vocab_hash);

private:
    ModelParams params_;
    Hyperparams hp_;
    std::uint64_t vocab_hash_;
};

struct TrainOptions {
    // Per-epoch mean losses, filled during training.
    std::vector<double>* epoch_losses = nullptr;
};

// Model file on disk: one `# kgpath ...` provenance line, then the binary
// payload.
void save_model_file(const std::filesystem::path& path, const EmbeddingModel& model,
                     std::uint64_t config_hash);
EmbeddingModel load_model_file(const std::filesystem::path& path,
                               std::uint64_t expected_vocab_hash);

// Trains the reference backend. Every triple contributes queries in both
// directions; negatives are drawn uniformly without replacement, excluding the
// query entity and its known neighbors under the query relation. All
// randomness derives from hp.seed.
EmbeddingModel train(const KnowledgeGraph& g, const Hyperparams& hp, TrainOptions opts = {});

} // namespace kgpath

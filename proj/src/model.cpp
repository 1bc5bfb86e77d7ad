#include "kgpath/model.hpp"
#include "kgpath/error.hpp"
#include "kgpath/io_util.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <istream>
#include <numeric>
#include <ostream>
#include <random>
#include <sstream>

namespace kgpath {

void Hyperparams::validate() const {
    if (dim < 1) throw ValidationError("dim must be >= 1");
    if (dropout_rate < 0.0 || dropout_rate >= 1.0)
        throw ValidationError("dropout_rate must be in [0, 1)");
    if (neg_rate <= 0.0 || neg_rate > 1.0) throw ValidationError("neg_rate must be in (0, 1]");
    if (batch_size < 1) throw ValidationError("batch_size must be >= 1");
    if (learning_rate <= 0.0) throw ValidationError("learning_rate must be > 0");
    if (l2_weight < 0.0) throw ValidationError("l2_weight must be >= 0");
}

bool ModelParams::all_finite() const {
    auto ok = [](const std::vector<double>& v) {
        return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
    };
    return ok(entity_emb) && ok(relation_emb) && ok(combine_entity_scale) &&
           ok(combine_relation_scale) && ok(combine_bias) && std::isfinite(projection_bias);
}

namespace {

double sigmoid(double x) {
    if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
    double e = std::exp(x);
    return e / (1.0 + e);
}

// Numerically stable BCE from the raw logit: softplus(logit) - y * logit.
double bce_from_logit(double logit, double y) {
    double sp = logit > 0 ? logit + std::log1p(std::exp(-logit)) : std::log1p(std::exp(logit));
    return sp - y * logit;
}

double sum_squares(const std::vector<double>& v) {
    return std::inner_product(v.begin(), v.end(), v.begin(), 0.0);
}

template <typename Fn>
void for_each_param(ModelParams& p, Fn&& fn) {
    fn(p.entity_emb);
    fn(p.relation_emb);
    fn(p.combine_entity_scale);
    fn(p.combine_relation_scale);
    fn(p.combine_bias);
}

double l2_term(const ModelParams& p, double l2_weight) {
    double s = sum_squares(p.entity_emb) + sum_squares(p.relation_emb) +
               sum_squares(p.combine_entity_scale) + sum_squares(p.combine_relation_scale) +
               sum_squares(p.combine_bias) + p.projection_bias * p.projection_bias;
    return l2_weight * s;
}

struct QueryForward {
    std::vector<double> q; // after dropout
    std::vector<double> q_raw;
};

QueryForward forward_query(const ModelParams& p, const TrainQuery& query,
                           const std::vector<double>& dropout_keep, std::size_t query_index) {
    const std::size_t d = p.dim;
    const double* e = &p.entity_emb[query.query_entity * d];
    const double* r = &p.relation_emb[query.relation * d];
    QueryForward f;
    f.q_raw.resize(d);
    f.q.resize(d);
    for (std::size_t k = 0; k < d; ++k) {
        double z = p.combine_entity_scale[k] * e[k] + p.combine_relation_scale[k] * r[k] +
                   p.combine_bias[k];
        f.q_raw[k] = std::tanh(z);
        double keep = dropout_keep.empty() ? 1.0 : dropout_keep[query_index * d + k];
        f.q[k] = f.q_raw[k] * keep;
    }
    return f;
}

} // namespace

double batch_loss(const ModelParams& params, const std::vector<TrainQuery>& batch,
                  double l2_weight, const std::vector<double>& dropout_keep) {
    const std::size_t d = params.dim;
    double loss = 0.0;
    for (std::size_t qi = 0; qi < batch.size(); ++qi) {
        const TrainQuery& query = batch[qi];
        QueryForward f = forward_query(params, query, dropout_keep, qi);
        for (std::size_t ci = 0; ci < query.candidates.size(); ++ci) {
            const double* c = &params.entity_emb[query.candidates[ci] * d];
            double logit = params.projection_bias;
            for (std::size_t k = 0; k < d; ++k) logit += f.q[k] * c[k];
            loss += bce_from_logit(logit, ci == 0 ? 1.0 : 0.0);
        }
    }
    return loss / static_cast<double>(batch.size()) + l2_term(params, l2_weight);
}

double batch_loss_and_grads(const ModelParams& params, const std::vector<TrainQuery>& batch,
                            double l2_weight, const std::vector<double>& dropout_keep,
                            ModelParams& grads) {
    const std::size_t d = params.dim;
    grads.dim = params.dim;
    grads.entity_emb.assign(params.entity_emb.size(), 0.0);
    grads.relation_emb.assign(params.relation_emb.size(), 0.0);
    grads.combine_entity_scale.assign(d, 0.0);
    grads.combine_relation_scale.assign(d, 0.0);
    grads.combine_bias.assign(d, 0.0);
    grads.projection_bias = 0.0;

    const double inv_b = 1.0 / static_cast<double>(batch.size());
    double loss = 0.0;
    std::vector<double> dq(d);

    for (std::size_t qi = 0; qi < batch.size(); ++qi) {
        const TrainQuery& query = batch[qi];
        QueryForward f = forward_query(params, query, dropout_keep, qi);
        std::fill(dq.begin(), dq.end(), 0.0);

        for (std::size_t ci = 0; ci < query.candidates.size(); ++ci) {
            EntityId cid = query.candidates[ci];
            const double* c = &params.entity_emb[cid * d];
            double logit = params.projection_bias;
            for (std::size_t k = 0; k < d; ++k) logit += f.q[k] * c[k];
            double y = ci == 0 ? 1.0 : 0.0;
            loss += bce_from_logit(logit, y);

            double dlogit = (sigmoid(logit) - y) * inv_b;
            double* gc = &grads.entity_emb[cid * d];
            for (std::size_t k = 0; k < d; ++k) {
                dq[k] += dlogit * c[k];
                gc[k] += dlogit * f.q[k];
            }
            grads.projection_bias += dlogit;
        }

        const double* e = &params.entity_emb[query.query_entity * d];
        const double* r = &params.relation_emb[query.relation * d];
        double* ge = &grads.entity_emb[query.query_entity * d];
        double* gr = &grads.relation_emb[query.relation * d];
        for (std::size_t k = 0; k < d; ++k) {
            double keep = dropout_keep.empty() ? 1.0 : dropout_keep[qi * d + k];
            double dz = dq[k] * keep * (1.0 - f.q_raw[k] * f.q_raw[k]);
            grads.combine_entity_scale[k] += dz * e[k];
            ge[k] += dz * params.combine_entity_scale[k];
            grads.combine_relation_scale[k] += dz * r[k];
            gr[k] += dz * params.combine_relation_scale[k];
            grads.combine_bias[k] += dz;
        }
    }

    // d/dtheta of l2 * ||theta||^2
    auto add_l2 = [&](std::vector<double>& g, const std::vector<double>& p) {
        for (std::size_t i = 0; i < p.size(); ++i) g[i] += 2.0 * l2_weight * p[i];
    };
    add_l2(grads.entity_emb, params.entity_emb);
    add_l2(grads.relation_emb, params.relation_emb);
    add_l2(grads.combine_entity_scale, params.combine_entity_scale);
    add_l2(grads.combine_relation_scale, params.combine_relation_scale);
    add_l2(grads.combine_bias, params.combine_bias);
    grads.projection_bias += 2.0 * l2_weight * params.projection_bias;

    return loss * inv_b + l2_term(params, l2_weight);
}

EmbeddingModel::EmbeddingModel(ModelParams params, Hyperparams hp, std::uint64_t vocab_hash)
    : params_(std::move(params)), hp_(hp), vocab_hash_(vocab_hash) {}

namespace {

std::vector<Prediction> predict_impl(const ModelParams& p, EntityId e, RelationId r, std::size_t n) {
    if (e >= p.entity_count()) throw LookupError("unknown entity id " + std::to_string(e));
    if (r >= p.relation_count()) throw LookupError("unknown relation id " + std::to_string(r));
    const std::size_t d = p.dim;
    std::vector<double> q(d);
    {
        const double* ee = &p.entity_emb[e * d];
        const double* rr = &p.relation_emb[r * d];
        for (std::size_t k = 0; k < d; ++k)
            q[k] = std::tanh(p.combine_entity_scale[k] * ee[k] +
                             p.combine_relation_scale[k] * rr[k] + p.combine_bias[k]);
    }

    std::vector<Prediction> preds;
    preds.reserve(p.entity_count());
    for (EntityId c = 0; c < p.entity_count(); ++c) {
        if (c == e) continue; // the query entity is not its own candidate
        const double* ce = &p.entity_emb[c * d];
        double logit = p.projection_bias;
        for (std::size_t k = 0; k < d; ++k) logit += q[k] * ce[k];
        preds.push_back({c, sigmoid(logit), 0});
    }
    std::sort(preds.begin(), preds.end(), [](const Prediction& a, const Prediction& b) {
        if (a.score != b.score) return a.score > b.score;
        return a.entity < b.entity;
    });
    if (preds.size() > n) preds.resize(n);
    for (std::size_t i = 0; i < preds.size(); ++i) preds[i].rank = static_cast<std::uint32_t>(i + 1);
    return preds;
}

} // namespace

std::vector<Prediction> EmbeddingModel::predict_tails(EntityId e, RelationId r, std::size_t n) const {
    if (n < 1) throw ValidationError("prediction count must be >= 1");
    return predict_impl(params_, e, r, n);
}

std::vector<Prediction> EmbeddingModel::predict_heads(EntityId e, RelationId r, std::size_t n) const {
    // Undirected graph: head queries use the same scoring function.
    return predict_tails(e, r, n);
}

std::span<const double> EmbeddingModel::entity_embedding(EntityId e) const {
    if (e >= params_.entity_count()) throw LookupError("unknown entity id " + std::to_string(e));
    return {&params_.entity_emb[e * params_.dim], params_.dim};
}

namespace {
constexpr char kModelMagic[8] = {'K', 'G', 'P', 'M', 'O', 'D', 'L', '1'};

template <typename T>
void write_pod(std::ostream& out, const T& v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
void read_pod(std::istream& in, T& v) {
    in.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (!in) throw ParseError("model file truncated");
}

void write_vec(std::ostream& out, const std::vector<double>& v) {
    out.write(reinterpret_cast<const char*>(v.data()),
              static_cast<std::streamsize>(v.size() * sizeof(double)));
}

void read_vec(std::istream& in, std::vector<double>& v, std::size_t n) {
    v.resize(n);
    in.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(n * sizeof(double)));
    if (!in) throw ParseError("model file truncated");
}
} // namespace

void EmbeddingModel::save(std::ostream& out) const {
    if (params_.entity_count() == 0)
        throw ValidationError("refusing to save a model with an empty entity vocabulary");
    out.write(kModelMagic, sizeof(kModelMagic));
    write_pod(out, hp_.dim);
    write_pod(out, hp_.epochs);
    write_pod(out, hp_.learning_rate);
    write_pod(out, hp_.batch_size);
    write_pod(out, hp_.dropout_rate);
    write_pod(out, hp_.l2_weight);
    write_pod(out, hp_.neg_rate);
    write_pod(out, hp_.seed);
    write_pod(out, vocab_hash_);
    std::uint64_t ne = params_.entity_count(), nr = params_.relation_count();
    write_pod(out, ne);
    write_pod(out, nr);
    write_vec(out, params_.entity_emb);
    write_vec(out, params_.relation_emb);
    write_vec(out, params_.combine_entity_scale);
    write_vec(out, params_.combine_relation_scale);
    write_vec(out, params_.combine_bias);
    write_pod(out, params_.projection_bias);
    if (!out) throw Error("model write failed");
}

EmbeddingModel EmbeddingModel::load(std::istream& in, std::uint64_t expected_vocab_hash) {
    char magic[8];
    in.read(magic, sizeof(magic));
    if (!in || std::memcmp(magic, kModelMagic, sizeof(magic)) != 0)
        throw ParseError("not a model file (bad magic/version)");
    Hyperparams hp;
    read_pod(in, hp.dim);
    read_pod(in, hp.epochs);
    read_pod(in, hp.learning_rate);
    read_pod(in, hp.batch_size);
    read_pod(in, hp.dropout_rate);
    read_pod(in, hp.l2_weight);
    read_pod(in, hp.neg_rate);
    read_pod(in, hp.seed);
    std::uint64_t vocab_hash = 0, ne = 0, nr = 0;
    read_pod(in, vocab_hash);
    if (vocab_hash != expected_vocab_hash)
        throw IncompatibilityError("model vocabulary hash does not match the graph");
    read_pod(in, ne);
    read_pod(in, nr);
    ModelParams p;
    p.dim = hp.dim;
    read_vec(in, p.entity_emb, ne * hp.dim);
    read_vec(in, p.relation_emb, nr * hp.dim);
    read_vec(in, p.combine_entity_scale, hp.dim);
    read_vec(in, p.combine_relation_scale, hp.dim);
    read_vec(in, p.combine_bias, hp.dim);
    read_pod(in, p.projection_bias);
    return EmbeddingModel(std::move(p), hp, vocab_hash);
}

void save_model_file(const std::filesystem::path& path, const EmbeddingModel& model,
                     std::uint64_t config_hash) {
    std::ostringstream buf(std::ios::binary);
    buf << output_header(config_hash);
    model.save(buf);
    atomic_write(path, buf.str());
}

EmbeddingModel load_model_file(const std::filesystem::path& path,
                               std::uint64_t expected_vocab_hash) {
    std::string content = read_file(path);
    std::istringstream in(content, std::ios::binary);
    std::string header;
    if (!std::getline(in, header) || header.empty() || header[0] != '#')
        throw ParseError("model file missing provenance header: " + path.string());
    return EmbeddingModel::load(in, expected_vocab_hash);
}

namespace {

struct AdamState {
    ModelParams m;
    ModelParams v;
    std::uint64_t t = 0;

    explicit AdamState(const ModelParams& shape) {
        auto zero_like = [](const std::vector<double>& p) { return std::vector<double>(p.size(), 0.0); };
        for (ModelParams* s : {&m, &v}) {
            s->dim = shape.dim;
            s->entity_emb = zero_like(shape.entity_emb);
            s->relation_emb = zero_like(shape.relation_emb);
            s->combine_entity_scale = zero_like(shape.combine_entity_scale);
            s->combine_relation_scale = zero_like(shape.combine_relation_scale);
            s->combine_bias = zero_like(shape.combine_bias);
            s->projection_bias = 0.0;
        }
    }
};

constexpr double kBeta1 = 0.9;
constexpr double kBeta2 = 0.999;
constexpr double kAdamEps = 1e-8;

void adam_step(ModelParams& params, const ModelParams& grads, AdamState& state, double lr) {
    ++state.t;
    const double bc1 = 1.0 - std::pow(kBeta1, static_cast<double>(state.t));
    const double bc2 = 1.0 - std::pow(kBeta2, static_cast<double>(state.t));
    auto update = [&](std::vector<double>& p, const std::vector<double>& g, std::vector<double>& m,
                      std::vector<double>& v) {
        for (std::size_t i = 0; i < p.size(); ++i) {
            m[i] = kBeta1 * m[i] + (1.0 - kBeta1) * g[i];
            v[i] = kBeta2 * v[i] + (1.0 - kBeta2) * g[i] * g[i];
            p[i] -= lr * (m[i] / bc1) / (std::sqrt(v[i] / bc2) + kAdamEps);
        }
    };
    update(params.entity_emb, grads.entity_emb, state.m.entity_emb, state.v.entity_emb);
    update(params.relation_emb, grads.relation_emb, state.m.relation_emb, state.v.relation_emb);
    update(params.combine_entity_scale, grads.combine_entity_scale, state.m.combine_entity_scale,
           state.v.combine_entity_scale);
    update(params.combine_relation_scale, grads.combine_relation_scale,
           state.m.combine_relation_scale, state.v.combine_relation_scale);
    update(params.combine_bias, grads.combine_bias, state.m.combine_bias, state.v.combine_bias);
    {
        double g = grads.projection_bias;
        double& m = state.m.projection_bias;
        double& v = state.v.projection_bias;
        m = kBeta1 * m + (1.0 - kBeta1) * g;
        v = kBeta2 * v + (1.0 - kBeta2) * g * g;
        params.projection_bias -= lr * (m / bc1) / (std::sqrt(v / bc2) + kAdamEps);
    }
}

} // namespace

EmbeddingModel train(const KnowledgeGraph& g, const Hyperparams& hp, TrainOptions opts) {
    hp.validate();
    if (g.triple_count() == 0) throw ValidationError("cannot train on an empty graph");

    const std::size_t ne = g.entity_count();
    const std::size_t nr = g.relation_count();
    const std::size_t d = hp.dim;

    std::mt19937_64 rng(hp.seed);

    ModelParams params;
    params.dim = hp.dim;
    {
        std::normal_distribution<double> init(0.0, 1.0 / std::sqrt(static_cast<double>(d)));
        params.entity_emb.resize(ne * d);
        for (auto& x : params.entity_emb) x = init(rng);
        params.relation_emb.resize(nr * d);
        for (auto& x : params.relation_emb) x = init(rng);
        params.combine_entity_scale.assign(d, 1.0);
        params.combine_relation_scale.assign(d, 1.0);
        params.combine_bias.assign(d, 0.0);
        params.projection_bias = 0.0;
    }

    // Both query directions per triple.
    struct QuerySpec {
        EntityId query_entity;
        RelationId relation;
        EntityId positive;
    };
    std::vector<QuerySpec> queries;
    queries.reserve(g.triple_count() * 2);
    for (const auto& t : g.triples()) {
        queries.push_back({t.head, t.relation, t.tail});
        queries.push_back({t.tail, t.relation, t.head});
    }

    const std::size_t neg_count =
        static_cast<std::size_t>(std::ceil(hp.neg_rate * static_cast<double>(ne)));

    AdamState adam(params);
    std::vector<std::size_t> order(queries.size());
    std::iota(order.begin(), order.end(), 0);

    std::vector<char> excluded(ne, 0);
    std::vector<EntityId> allowed;
    allowed.reserve(ne);
    ModelParams grads;
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    for (std::uint32_t epoch = 0; epoch < hp.epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), rng);
        double epoch_loss = 0.0;
        std::size_t batch_count = 0;

        for (std::size_t start = 0; start < order.size(); start += hp.batch_size) {
            std::size_t end = std::min(order.size(), start + hp.batch_size);
            std::vector<TrainQuery> batch;
            batch.reserve(end - start);
            for (std::size_t i = start; i < end; ++i) {
                const QuerySpec& spec = queries[order[i]];
                TrainQuery tq;
                tq.query_entity = spec.query_entity;
                tq.relation = spec.relation;
                tq.candidates.push_back(spec.positive);

                // Negatives: uniform without replacement, excluding the query
                // entity and its known neighbors under this relation.
                excluded[spec.query_entity] = 1;
                auto nbrs = g.neighbors(spec.query_entity, spec.relation);
                for (const auto& [nbr, w] : nbrs) excluded[nbr] = 1;
                allowed.clear();
                for (EntityId c = 0; c < ne; ++c)
                    if (!excluded[c]) allowed.push_back(c);
                excluded[spec.query_entity] = 0;
                for (const auto& [nbr, w] : nbrs) excluded[nbr] = 0;

                std::size_t take = std::min(neg_count, allowed.size());
                std::sample(allowed.begin(), allowed.end(), std::back_inserter(tq.candidates),
                            take, rng);
                batch.push_back(std::move(tq));
            }

            std::vector<double> dropout_keep;
            if (hp.dropout_rate > 0.0) {
                dropout_keep.resize(batch.size() * d);
                const double keep_prob = 1.0 - hp.dropout_rate;
                for (auto& k : dropout_keep)
                    k = unit(rng) < keep_prob ? 1.0 / keep_prob : 0.0;
            }

            double loss = batch_loss_and_grads(params, batch, hp.l2_weight, dropout_keep, grads);
            if (!std::isfinite(loss))
                throw Error("non-finite training loss at epoch " + std::to_string(epoch + 1) +
                            ", batch " + std::to_string(batch_count + 1));
            adam_step(params, grads, adam, hp.learning_rate);
            epoch_loss += loss;
            ++batch_count;
        }

        if (!params.all_finite())
            throw Error("non-finite parameters after epoch " + std::to_string(epoch + 1));
        if (opts.epoch_losses)
            opts.epoch_losses->push_back(epoch_loss / static_cast<double>(batch_count));
    }

    return EmbeddingModel(std::move(params), hp, g.vocab_hash());
}

} // namespace kgpath

#include "geoneg/contrastive.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>

#include <json.hpp>

#include "geoneg/util.hpp"

namespace geoneg {

namespace {

namespace fs = std::filesystem;

double logsumexp(const std::vector<double>& xs) {
    double m = *std::max_element(xs.begin(), xs.end());
    double s = 0.0;
    for (double x : xs) s += std::exp(x - m);
    return m + std::log(s);
}

std::vector<double> softmax(const std::vector<double>& xs) {
    double m = *std::max_element(xs.begin(), xs.end());
    std::vector<double> out(xs.size());
    double s = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        out[i] = std::exp(xs[i] - m);
        s += out[i];
    }
    for (auto& v : out) v /= s;
    return out;
}

}  // namespace

EncoderParams random_encoder_params(std::uint64_t seed) {
    EncoderParams params;
    params.image = random_projection(kImageFeatureDim, kEmbeddingDim, seed * 2 + 1);
    params.text = random_projection(kTextFeatureDim, kEmbeddingDim, seed * 2 + 2);
    params.set_logit_scale(default_logit_scale());
    return params;
}

double mmclip_loss_from_scores(double s_pos, const std::vector<double>& s_negs) {
    if (s_negs.empty()) throw Error::usage("mmclip loss needs at least one negative");
    std::vector<double> all;
    all.reserve(s_negs.size() + 1);
    all.push_back(s_pos);
    all.insert(all.end(), s_negs.begin(), s_negs.end());
    return logsumexp(all) - s_pos;
}

MmclipScoreGradients mmclip_gradients(double s_pos, const std::vector<double>& s_negs) {
    std::vector<double> all;
    all.reserve(s_negs.size() + 1);
    all.push_back(s_pos);
    all.insert(all.end(), s_negs.begin(), s_negs.end());
    auto probs = softmax(all);
    MmclipScoreGradients g;
    g.d_negs.assign(probs.begin() + 1, probs.end());
    double total = 0.0;
    for (double p : g.d_negs) total += p;
    g.d_pos = -total;  // exact negation of the same sum
    return g;
}

double inbatch_loss_from_scores(const Matrix& scores) {
    const int n = scores.rows;
    if (n < 2 || scores.cols != n) throw Error::usage("in-batch loss needs an NxN matrix, N >= 2");
    double loss = 0.0;
    std::vector<double> row(n), col(n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            row[static_cast<std::size_t>(j)] = scores.at(i, j);
            col[static_cast<std::size_t>(j)] = scores.at(j, i);
        }
        loss += logsumexp(row) - scores.at(i, i);
        loss += logsumexp(col) - scores.at(i, i);
    }
    return loss / static_cast<double>(n);
}

Matrix inbatch_score_gradients(const Matrix& scores) {
    const int n = scores.rows;
    Matrix grad(n, n);
    const double inv_n = 1.0 / static_cast<double>(n);
    std::vector<double> buf(n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) buf[static_cast<std::size_t>(j)] = scores.at(i, j);
        auto p = softmax(buf);
        for (int j = 0; j < n; ++j) grad.at(i, j) += inv_n * (p[static_cast<std::size_t>(j)] - (i == j ? 1.0 : 0.0));
    }
    for (int j = 0; j < n; ++j) {
        for (int i = 0; i < n; ++i) buf[static_cast<std::size_t>(i)] = scores.at(i, j);
        auto p = softmax(buf);
        for (int i = 0; i < n; ++i) grad.at(i, j) += inv_n * (p[static_cast<std::size_t>(i)] - (i == j ? 1.0 : 0.0));
    }
    return grad;
}

namespace {

struct TowerEmbedding {
    FeatureVector z;          // pre-normalization projection
    FeatureVector e;          // unit embedding
    double z_norm = 0.0;
};

TowerEmbedding project(const FeatureVector& features, const Projection& proj) {
    TowerEmbedding out;
    out.z.assign(static_cast<std::size_t>(proj.weights.cols), 0.0);
    for (int i = 0; i < proj.weights.rows; ++i) {
        double f = features[static_cast<std::size_t>(i)];
        if (f == 0.0) continue;
        const double* wrow = proj.weights.data.data() + static_cast<std::size_t>(i) * proj.weights.cols;
        for (int j = 0; j < proj.weights.cols; ++j) out.z[static_cast<std::size_t>(j)] += f * wrow[j];
    }
    out.e = out.z;
    out.z_norm = l2_norm(out.z);
    l2_normalize_or_e1(out.e);
    return out;
}

const Projection& tower_for(const EncoderParams& params, bool image_side) {
    return image_side ? params.image : params.text;
}

// Accumulates dL/dW for one (features -> embedding) path given dL/de.
void accumulate_tower_gradient(const FeatureVector& features, const TowerEmbedding& emb,
                               const FeatureVector& d_e, Matrix& d_weights) {
    if (emb.z_norm == 0.0) return;  // e1 fallback: define the subgradient as zero
    // dz = (I - e e^T) / ||z|| * de
    double e_dot = dot(emb.e, d_e);
    const int d_emb = static_cast<int>(emb.e.size());
    FeatureVector d_z(static_cast<std::size_t>(d_emb));
    for (int j = 0; j < d_emb; ++j) {
        d_z[static_cast<std::size_t>(j)] =
            (d_e[static_cast<std::size_t>(j)] - emb.e[static_cast<std::size_t>(j)] * e_dot) / emb.z_norm;
    }
    for (int i = 0; i < static_cast<int>(features.size()); ++i) {
        double f = features[static_cast<std::size_t>(i)];
        if (f == 0.0) continue;
        double* wrow = d_weights.data.data() + static_cast<std::size_t>(i) * d_weights.cols;
        for (int j = 0; j < d_emb; ++j) wrow[j] += f * d_z[static_cast<std::size_t>(j)];
    }
}

// Shared state for one anchor-side / candidate-side scored pair list.
struct PairGradientAccumulator {
    const EncoderParams& params;
    ParamGradients grads;

    explicit PairGradientAccumulator(const EncoderParams& p) : params(p) {
        grads.d_image_weights = Matrix(p.image.weights.rows, p.image.weights.cols);
        grads.d_text_weights = Matrix(p.text.weights.rows, p.text.weights.cols);
    }

    // d_score = dL/ds for s = exp(ls) * <e_a, e_b>.
    void add_pair(const FeatureVector& f_a, const TowerEmbedding& emb_a, bool a_is_image,
                  const FeatureVector& f_b, const TowerEmbedding& emb_b, double d_score,
                  FeatureVector& d_e_a_accum) {
        const double scale = std::exp(params.logit_scale());
        const double s = scale * dot(emb_a.e, emb_b.e);
        grads.d_logit_scale += d_score * s;
        const int d_emb = static_cast<int>(emb_a.e.size());
        // Anchor-side gradient is accumulated by the caller across pairs.
        for (int j = 0; j < d_emb; ++j) {
            d_e_a_accum[static_cast<std::size_t>(j)] +=
                d_score * scale * emb_b.e[static_cast<std::size_t>(j)];
        }
        FeatureVector d_e_b(static_cast<std::size_t>(d_emb));
        for (int j = 0; j < d_emb; ++j) {
            d_e_b[static_cast<std::size_t>(j)] = d_score * scale * emb_a.e[static_cast<std::size_t>(j)];
        }
        accumulate_tower_gradient(f_b, emb_b, d_e_b,
                                  a_is_image ? grads.d_text_weights : grads.d_image_weights);
    }

    void flush_anchor(const FeatureVector& f_a, const TowerEmbedding& emb_a, bool a_is_image,
                      const FeatureVector& d_e_a) {
        accumulate_tower_gradient(f_a, emb_a, d_e_a,
                                  a_is_image ? grads.d_image_weights : grads.d_text_weights);
    }
};

}  // namespace

MmclipEval mmclip_loss(const MmclipBatch& batch, const EncoderParams& params) {
    if (batch.negatives.empty()) throw Error::usage("mmclip batch needs at least one negative");
    const bool anchor_is_image = batch.negative_modality == Modality::text;
    const Projection& anchor_proj = tower_for(params, anchor_is_image);
    const Projection& cand_proj = tower_for(params, !anchor_is_image);

    auto anchor = project(batch.anchor, anchor_proj);
    auto positive = project(batch.positive, cand_proj);
    const double scale = std::exp(params.logit_scale());

    MmclipEval eval;
    eval.s_pos = scale * dot(anchor.e, positive.e);
    eval.s_negs.reserve(batch.negatives.size());
    for (const auto& nf : batch.negatives) {
        auto neg = project(nf, cand_proj);
        eval.s_negs.push_back(scale * dot(anchor.e, neg.e));
    }
    eval.loss = mmclip_loss_from_scores(eval.s_pos, eval.s_negs);
    return eval;
}

InbatchEval inbatch_loss(const InBatch& batch, const EncoderParams& params) {
    const int n = static_cast<int>(batch.pairs.size());
    if (n < 2) throw Error::usage("in-batch loss needs at least 2 pairs");
    std::vector<TowerEmbedding> images, texts;
    images.reserve(static_cast<std::size_t>(n));
    texts.reserve(static_cast<std::size_t>(n));
    for (const auto& [img, txt] : batch.pairs) {
        images.push_back(project(img, params.image));
        texts.push_back(project(txt, params.text));
    }
    const double scale = std::exp(params.logit_scale());
    InbatchEval eval;
    eval.scores = Matrix(n, n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            eval.scores.at(i, j) =
                scale * dot(images[static_cast<std::size_t>(i)].e, texts[static_cast<std::size_t>(j)].e);
        }
    }
    eval.loss = inbatch_loss_from_scores(eval.scores);
    return eval;
}

HybridEval hybrid_loss(const std::vector<MmclipBatch>& groups, const EncoderParams& params) {
    const int n = static_cast<int>(groups.size());
    if (n < 2) throw Error::usage("hybrid loss needs at least 2 groups");
    const Modality modality = groups.front().negative_modality;
    for (const auto& g : groups) {
        if (g.negative_modality != modality)
            throw Error::usage("hybrid batch must not mix negative modalities");
        if (g.negatives.empty()) throw Error::usage("hybrid groups need negatives");
    }
    const bool anchor_is_image = modality == Modality::text;
    const Projection& anchor_proj = tower_for(params, anchor_is_image);
    const Projection& cand_proj = tower_for(params, !anchor_is_image);
    const double scale = std::exp(params.logit_scale());

    std::vector<TowerEmbedding> anchors, positives;
    std::vector<std::vector<TowerEmbedding>> negatives(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        anchors.push_back(project(groups[static_cast<std::size_t>(i)].anchor, anchor_proj));
        positives.push_back(project(groups[static_cast<std::size_t>(i)].positive, cand_proj));
        for (const auto& nf : groups[static_cast<std::size_t>(i)].negatives) {
            negatives[static_cast<std::size_t>(i)].push_back(project(nf, cand_proj));
        }
    }

    double loss = 0.0;
    std::vector<double> row;
    std::vector<double> col(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        row.clear();
        for (int j = 0; j < n; ++j) {
            row.push_back(scale * dot(anchors[static_cast<std::size_t>(i)].e,
                                      positives[static_cast<std::size_t>(j)].e));
        }
        double s_ii = row[static_cast<std::size_t>(i)];
        for (const auto& neg : negatives[static_cast<std::size_t>(i)]) {
            row.push_back(scale * dot(anchors[static_cast<std::size_t>(i)].e, neg.e));
        }
        loss += logsumexp(row) - s_ii;
        for (int j = 0; j < n; ++j) {
            col[static_cast<std::size_t>(j)] = scale * dot(anchors[static_cast<std::size_t>(j)].e,
                                                           positives[static_cast<std::size_t>(i)].e);
        }
        loss += logsumexp(col) - col[static_cast<std::size_t>(i)];
    }
    HybridEval eval;
    eval.loss = loss / static_cast<double>(n);
    return eval;
}

ParamGradients backward_mmclip(const MmclipBatch& batch, const EncoderParams& params) {
    const bool anchor_is_image = batch.negative_modality == Modality::text;
    const Projection& anchor_proj = tower_for(params, anchor_is_image);
    const Projection& cand_proj = tower_for(params, !anchor_is_image);

    auto anchor = project(batch.anchor, anchor_proj);
    auto positive = project(batch.positive, cand_proj);
    std::vector<TowerEmbedding> negs;
    negs.reserve(batch.negatives.size());
    const double scale = std::exp(params.logit_scale());
    double s_pos = scale * dot(anchor.e, positive.e);
    std::vector<double> s_negs;
    for (const auto& nf : batch.negatives) {
        negs.push_back(project(nf, cand_proj));
        s_negs.push_back(scale * dot(anchor.e, negs.back().e));
    }
    auto score_grads = mmclip_gradients(s_pos, s_negs);

    PairGradientAccumulator acc(params);
    FeatureVector d_anchor(anchor.e.size(), 0.0);
    acc.add_pair(batch.anchor, anchor, anchor_is_image, batch.positive, positive,
                 score_grads.d_pos, d_anchor);
    for (std::size_t i = 0; i < negs.size(); ++i) {
        acc.add_pair(batch.anchor, anchor, anchor_is_image, batch.negatives[i], negs[i],
                     score_grads.d_negs[i], d_anchor);
    }
    acc.flush_anchor(batch.anchor, anchor, anchor_is_image, d_anchor);
    return std::move(acc.grads);
}

ParamGradients backward_inbatch(const InBatch& batch, const EncoderParams& params) {
    const int n = static_cast<int>(batch.pairs.size());
    auto eval = inbatch_loss(batch, params);
    Matrix d_scores = inbatch_score_gradients(eval.scores);

    std::vector<TowerEmbedding> images, texts;
    for (const auto& [img, txt] : batch.pairs) {
        images.push_back(project(img, params.image));
        texts.push_back(project(txt, params.text));
    }

    PairGradientAccumulator acc(params);
    std::vector<FeatureVector> d_images(static_cast<std::size_t>(n),
                                        FeatureVector(kEmbeddingDim, 0.0));
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            acc.add_pair(batch.pairs[static_cast<std::size_t>(i)].first,
                         images[static_cast<std::size_t>(i)], true,
                         batch.pairs[static_cast<std::size_t>(j)].second,
                         texts[static_cast<std::size_t>(j)], d_scores.at(i, j),
                         d_images[static_cast<std::size_t>(i)]);
        }
    }
    for (int i = 0; i < n; ++i) {
        acc.flush_anchor(batch.pairs[static_cast<std::size_t>(i)].first,
                         images[static_cast<std::size_t>(i)], true,
                         d_images[static_cast<std::size_t>(i)]);
    }
    return std::move(acc.grads);
}

ParamGradients backward_hybrid(const std::vector<MmclipBatch>& groups,
                               const EncoderParams& params) {
    const int n = static_cast<int>(groups.size());
    if (n < 2) throw Error::usage("hybrid loss needs at least 2 groups");
    const bool anchor_is_image = groups.front().negative_modality == Modality::text;
    const Projection& anchor_proj = tower_for(params, anchor_is_image);
    const Projection& cand_proj = tower_for(params, !anchor_is_image);
    const double scale = std::exp(params.logit_scale());
    const double inv_n = 1.0 / static_cast<double>(n);

    std::vector<TowerEmbedding> anchors, positives;
    std::vector<std::vector<TowerEmbedding>> negatives(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        anchors.push_back(project(groups[static_cast<std::size_t>(i)].anchor, anchor_proj));
        positives.push_back(project(groups[static_cast<std::size_t>(i)].positive, cand_proj));
        for (const auto& nf : groups[static_cast<std::size_t>(i)].negatives) {
            negatives[static_cast<std::size_t>(i)].push_back(project(nf, cand_proj));
        }
    }

    Matrix s(n, n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            s.at(i, j) = scale * dot(anchors[static_cast<std::size_t>(i)].e,
                                     positives[static_cast<std::size_t>(j)].e);
        }
    }

    Matrix d_s(n, n);
    std::vector<std::vector<double>> d_extras(static_cast<std::size_t>(n));
    // Direction 1: extended softmax across each anchor row.
    for (int i = 0; i < n; ++i) {
        std::vector<double> row;
        for (int j = 0; j < n; ++j) row.push_back(s.at(i, j));
        for (const auto& neg : negatives[static_cast<std::size_t>(i)]) {
            row.push_back(scale * dot(anchors[static_cast<std::size_t>(i)].e, neg.e));
        }
        auto p = softmax(row);
        for (int j = 0; j < n; ++j) {
            d_s.at(i, j) += inv_n * (p[static_cast<std::size_t>(j)] - (i == j ? 1.0 : 0.0));
        }
        auto& extras = d_extras[static_cast<std::size_t>(i)];
        for (std::size_t m = 0; m < negatives[static_cast<std::size_t>(i)].size(); ++m) {
            extras.push_back(inv_n * p[static_cast<std::size_t>(n) + m]);
        }
    }
    // Direction 2: plain softmax down each positive column.
    std::vector<double> col(static_cast<std::size_t>(n));
    for (int j = 0; j < n; ++j) {
        for (int i = 0; i < n; ++i) col[static_cast<std::size_t>(i)] = s.at(i, j);
        auto p = softmax(col);
        for (int i = 0; i < n; ++i) {
            d_s.at(i, j) += inv_n * (p[static_cast<std::size_t>(i)] - (i == j ? 1.0 : 0.0));
        }
    }

    PairGradientAccumulator acc(params);
    std::vector<FeatureVector> d_anchors(static_cast<std::size_t>(n),
                                         FeatureVector(kEmbeddingDim, 0.0));
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            acc.add_pair(groups[static_cast<std::size_t>(i)].anchor,
                         anchors[static_cast<std::size_t>(i)], anchor_is_image,
                         groups[static_cast<std::size_t>(j)].positive,
                         positives[static_cast<std::size_t>(j)], d_s.at(i, j),
                         d_anchors[static_cast<std::size_t>(i)]);
        }
        for (std::size_t m = 0; m < negatives[static_cast<std::size_t>(i)].size(); ++m) {
            acc.add_pair(groups[static_cast<std::size_t>(i)].anchor,
                         anchors[static_cast<std::size_t>(i)], anchor_is_image,
                         groups[static_cast<std::size_t>(i)].negatives[m],
                         negatives[static_cast<std::size_t>(i)][m],
                         d_extras[static_cast<std::size_t>(i)][m],
                         d_anchors[static_cast<std::size_t>(i)]);
        }
    }
    for (int i = 0; i < n; ++i) {
        acc.flush_anchor(groups[static_cast<std::size_t>(i)].anchor,
                         anchors[static_cast<std::size_t>(i)], anchor_is_image,
                         d_anchors[static_cast<std::size_t>(i)]);
    }
    return std::move(acc.grads);
}

// ---------------------------------------------------------------------------
// Trainer
// ---------------------------------------------------------------------------

std::string train_strategy_name(TrainStrategy s) {
    switch (s) {
        case TrainStrategy::in_batch: return "in-batch";
        case TrainStrategy::mmclip: return "mmclip";
        case TrainStrategy::hybrid: return "hybrid";
    }
    return "mmclip";
}

std::optional<TrainStrategy> train_strategy_from_name(const std::string& name) {
    for (TrainStrategy s : {TrainStrategy::in_batch, TrainStrategy::mmclip, TrainStrategy::hybrid}) {
        if (train_strategy_name(s) == name) return s;
    }
    return std::nullopt;
}

namespace {

constexpr int kHybridWindow = 8;
constexpr double kMomentum = 0.9;

struct Optimizer {
    OptimizerKind kind;
    double lr;
    Matrix v_image, v_text;
    double v_scale = 0.0;

    Optimizer(OptimizerKind k, double learning_rate, const EncoderParams& params)
        : kind(k),
          lr(learning_rate),
          v_image(params.image.weights.rows, params.image.weights.cols),
          v_text(params.text.weights.rows, params.text.weights.cols) {}

    void step(EncoderParams& params, const ParamGradients& grads) {
        auto apply = [this](Matrix& w, Matrix& v, const Matrix& g) {
            for (std::size_t i = 0; i < w.data.size(); ++i) {
                if (kind == OptimizerKind::sgd_momentum) {
                    v.data[i] = kMomentum * v.data[i] + g.data[i];
                    w.data[i] -= lr * v.data[i];
                } else {
                    w.data[i] -= lr * g.data[i];
                }
            }
        };
        apply(params.image.weights, v_image, grads.d_image_weights);
        apply(params.text.weights, v_text, grads.d_text_weights);
        double scale_update = grads.d_logit_scale;
        if (kind == OptimizerKind::sgd_momentum) {
            v_scale = kMomentum * v_scale + grads.d_logit_scale;
            scale_update = v_scale;
        }
        params.set_logit_scale(params.logit_scale() - lr * scale_update);
    }
};

MmclipBatch to_mmclip_batch(const TrainGroup& group, int ratio) {
    MmclipBatch batch;
    batch.anchor = group.anchor;
    batch.positive = group.positive;
    batch.negatives.assign(group.negatives.begin(), group.negatives.begin() + ratio);
    batch.negative_modality = group.negative_modality;
    return batch;
}

// Positive pair in (image, text) orientation regardless of modality.
std::pair<FeatureVector, FeatureVector> positive_pair(const TrainGroup& group) {
    if (group.negative_modality == Modality::text) return {group.anchor, group.positive};
    return {group.positive, group.anchor};
}

// Sample `count` distinct indices from [0, n) via a seeded partial shuffle.
std::vector<int> sample_indices(int n, int count, Rng& rng) {
    std::vector<int> all(static_cast<std::size_t>(n));
    std::iota(all.begin(), all.end(), 0);
    for (int i = 0; i < count; ++i) {
        int j = i + static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(n - i)));
        std::swap(all[static_cast<std::size_t>(i)], all[static_cast<std::size_t>(j)]);
    }
    all.resize(static_cast<std::size_t>(count));
    return all;
}

double dataset_mean_loss(const std::vector<TrainGroup>& dataset, const TrainConfig& config,
                         const EncoderParams& params) {
    const int n = static_cast<int>(dataset.size());
    switch (config.strategy) {
        case TrainStrategy::mmclip: {
            double total = 0.0;
            for (const auto& g : dataset) {
                total += mmclip_loss(to_mmclip_batch(g, config.negative_ratio), params).loss;
            }
            return total / static_cast<double>(n);
        }
        case TrainStrategy::in_batch: {
            const int batch_size = std::min(n, config.negative_ratio + 1);
            if (batch_size < 2) throw Error::usage("in-batch training needs at least 2 groups");
            double total = 0.0;
            int batches = 0;
            for (int start = 0; start + batch_size <= n; start += batch_size) {
                InBatch batch;
                for (int i = start; i < start + batch_size; ++i) {
                    batch.pairs.push_back(positive_pair(dataset[static_cast<std::size_t>(i)]));
                }
                total += inbatch_loss(batch, params).loss;
                ++batches;
            }
            return batches > 0 ? total / batches : 0.0;
        }
        case TrainStrategy::hybrid: {
            const int window = std::min(n, kHybridWindow);
            if (window < 2) throw Error::usage("hybrid training needs at least 2 groups");
            double total = 0.0;
            int batches = 0;
            for (int start = 0; start + window <= n; start += window) {
                std::vector<MmclipBatch> groups;
                for (int i = start; i < start + window; ++i) {
                    groups.push_back(
                        to_mmclip_batch(dataset[static_cast<std::size_t>(i)], config.negative_ratio));
                }
                total += hybrid_loss(groups, params).loss;
                ++batches;
            }
            return batches > 0 ? total / batches : 0.0;
        }
    }
    return 0.0;
}

}  // namespace

TrainRun train(const std::vector<TrainGroup>& dataset, const TrainConfig& config) {
    if (dataset.empty()) throw Error::usage("training dataset is empty");
    if (config.negative_ratio < 1 || config.negative_ratio > 50)
        throw Error::usage("negative_ratio must lie in [1, 50]");
    if (config.steps < 1) throw Error::usage("steps must be positive");
    if (!(config.learning_rate > 0.0)) throw Error::usage("learning_rate must be positive");
    for (const auto& g : dataset) {
        if (static_cast<int>(g.negatives.size()) < config.negative_ratio)
            throw Error::usage("negative_ratio exceeds a group's negative count");
    }

    TrainRun run;
    run.config = config;
    run.params = random_encoder_params(config.seed);
    Optimizer optimizer(config.optimizer, config.learning_rate, run.params);
    Rng rng(config.seed ^ 0x5eedf00dULL);
    const int n = static_cast<int>(dataset.size());

    for (int step = 0; step < config.steps; ++step) {
        double loss = 0.0;
        ParamGradients grads;
        switch (config.strategy) {
            case TrainStrategy::mmclip: {
                const auto& group = dataset[static_cast<std::size_t>(step % n)];
                auto batch = to_mmclip_batch(group, config.negative_ratio);
                loss = mmclip_loss(batch, run.params).loss;
                grads = backward_mmclip(batch, run.params);
                break;
            }
            case TrainStrategy::in_batch: {
                const int batch_size = std::min(n, config.negative_ratio + 1);
                if (batch_size < 2) throw Error::usage("in-batch training needs at least 2 groups");
                InBatch batch;
                for (int idx : sample_indices(n, batch_size, rng)) {
                    batch.pairs.push_back(positive_pair(dataset[static_cast<std::size_t>(idx)]));
                }
                loss = inbatch_loss(batch, run.params).loss;
                grads = backward_inbatch(batch, run.params);
                break;
            }
            case TrainStrategy::hybrid: {
                const int window = std::min(n, kHybridWindow);
                if (window < 2) throw Error::usage("hybrid training needs at least 2 groups");
                std::vector<MmclipBatch> groups;
                int start = (step * window) % n;
                for (int i = 0; i < window; ++i) {
                    groups.push_back(to_mmclip_batch(dataset[static_cast<std::size_t>((start + i) % n)],
                                                     config.negative_ratio));
                }
                loss = hybrid_loss(groups, run.params).loss;
                grads = backward_hybrid(groups, run.params);
                break;
            }
        }
        run.loss_trace.push_back(loss);
        optimizer.step(run.params, grads);
    }

    run.final_loss = dataset_mean_loss(dataset, config, run.params);
    return run;
}

// ---------------------------------------------------------------------------
// Persistence
// ---------------------------------------------------------------------------

namespace {

constexpr char kWeightsMagic[8] = {'G', 'N', 'W', 'T', '0', '0', '0', '1'};

void write_matrix(std::ofstream& out, const Matrix& m) {
    std::int32_t dims[2] = {m.rows, m.cols};
    out.write(reinterpret_cast<const char*>(dims), sizeof(dims));
    out.write(reinterpret_cast<const char*>(m.data.data()),
              static_cast<std::streamsize>(m.data.size() * sizeof(double)));
}

Matrix read_matrix(std::ifstream& in) {
    std::int32_t dims[2] = {0, 0};
    in.read(reinterpret_cast<char*>(dims), sizeof(dims));
    Matrix m(dims[0], dims[1]);
    in.read(reinterpret_cast<char*>(m.data.data()),
            static_cast<std::streamsize>(m.data.size() * sizeof(double)));
    return m;
}

}  // namespace

void save_train_run(const TrainRun& run, const std::string& run_dir) {
    fs::create_directories(run_dir);
    nlohmann::ordered_json j;
    j["strategy"] = train_strategy_name(run.config.strategy);
    j["negative_ratio"] = run.config.negative_ratio;
    j["learning_rate"] = run.config.learning_rate;
    j["steps"] = run.config.steps;
    j["seed"] = run.config.seed;
    j["optimizer"] = run.config.optimizer == OptimizerKind::sgd ? "sgd" : "sgd-momentum";
    j["final_loss"] = run.final_loss;
    std::ofstream meta(fs::path(run_dir) / "run.json");
    if (!meta) throw Error::runtime("cannot write run.json in " + run_dir);
    meta << j.dump(2) << "\n";

    std::ofstream weights(fs::path(run_dir) / "weights.bin", std::ios::binary);
    if (!weights) throw Error::runtime("cannot write weights.bin in " + run_dir);
    weights.write(kWeightsMagic, sizeof(kWeightsMagic));
    write_matrix(weights, run.params.image.weights);
    write_matrix(weights, run.params.text.weights);
    double ls = run.params.logit_scale();
    weights.write(reinterpret_cast<const char*>(&ls), sizeof(ls));

    std::ofstream trace(fs::path(run_dir) / "trace.csv");
    if (!trace) throw Error::runtime("cannot write trace.csv in " + run_dir);
    trace << "step,loss\n";
    for (std::size_t i = 0; i < run.loss_trace.size(); ++i) {
        trace << i << "," << format_number_trim9(run.loss_trace[i]) << "\n";
    }
}

TrainRun load_train_run(const std::string& run_dir) {
    std::ifstream meta(fs::path(run_dir) / "run.json");
    if (!meta) throw Error::runtime("missing run.json in " + run_dir);
    nlohmann::json j = nlohmann::json::parse(meta);
    TrainRun run;
    auto strategy = train_strategy_from_name(j.at("strategy").get<std::string>());
    if (!strategy) throw Error::runtime("unknown strategy in run.json");
    run.config.strategy = *strategy;
    run.config.negative_ratio = j.at("negative_ratio").get<int>();
    run.config.learning_rate = j.at("learning_rate").get<double>();
    run.config.steps = j.at("steps").get<int>();
    run.config.seed = j.at("seed").get<std::uint64_t>();
    run.config.optimizer = j.at("optimizer").get<std::string>() == "sgd-momentum"
                               ? OptimizerKind::sgd_momentum
                               : OptimizerKind::sgd;
    run.final_loss = j.at("final_loss").get<double>();

    std::ifstream weights(fs::path(run_dir) / "weights.bin", std::ios::binary);
    if (!weights) throw Error::runtime("missing weights.bin in " + run_dir);
    char magic[8];
    weights.read(magic, sizeof(magic));
    if (std::string(magic, 8) != std::string(kWeightsMagic, 8))
        throw Error::runtime("bad weights.bin magic in " + run_dir);
    run.params.image.weights = read_matrix(weights);
    run.params.text.weights = read_matrix(weights);
    double ls = 0.0;
    weights.read(reinterpret_cast<char*>(&ls), sizeof(ls));
    if (!weights) throw Error::runtime("truncated weights.bin in " + run_dir);
    run.params.set_logit_scale(ls);
    return run;
}

}  // namespace geoneg

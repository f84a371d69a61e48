#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "geoneg/encoder.hpp"
#include "geoneg/negatives.hpp"

namespace geoneg {

// Both towers; the logit scale is a single shared temperature and is kept
// identical in the two projections.
struct EncoderParams {
    Projection image;  // kImageFeatureDim x kEmbeddingDim
    Projection text;   // kTextFeatureDim x kEmbeddingDim

    double logit_scale() const { return image.logit_scale; }
    void set_logit_scale(double v) {
        image.logit_scale = v;
        text.logit_scale = v;
    }
};

EncoderParams random_encoder_params(std::uint64_t seed);

// One positive and its constructed negatives around a single anchor. For
// text-negative batches the anchor holds image features; for image-negative
// batches it holds text features.
struct MmclipBatch {
    FeatureVector anchor;
    FeatureVector positive;
    std::vector<FeatureVector> negatives;
    Modality negative_modality = Modality::text;
};

struct InBatch {
    std::vector<std::pair<FeatureVector, FeatureVector>> pairs;  // (image, text), N >= 2
};

// --- score-level math (log-sum-exp stabilized everywhere) -------------------

// L = -ln( exp(s+) / (exp(s+) + sum_i exp(s-_i)) )
double mmclip_loss_from_scores(double s_pos, const std::vector<double>& s_negs);

struct MmclipScoreGradients {
    double d_pos = 0.0;                // = -(sum of d_negs), exactly
    std::vector<double> d_negs;
};
MmclipScoreGradients mmclip_gradients(double s_pos, const std::vector<double>& s_negs);

// L = (1/N) sum_i [ -ln softmax_row_i(i) - ln softmax_col_i(i) ]
double inbatch_loss_from_scores(const Matrix& scores);

// dL/dS for the in-batch loss above.
Matrix inbatch_score_gradients(const Matrix& scores);

// --- embedding-level evaluation ----------------------------------------------

struct MmclipEval {
    double loss = 0.0;
    double s_pos = 0.0;
    std::vector<double> s_negs;
};
MmclipEval mmclip_loss(const MmclipBatch& batch, const EncoderParams& params);

struct InbatchEval {
    double loss = 0.0;
    Matrix scores;  // N x N, scores[i][j] = s(I_i, T_j)
};
InbatchEval inbatch_loss(const InBatch& batch, const EncoderParams& params);

// Hybrid: in-batch matrix over the groups' positive pairs, with each row's
// denominator extended by that row's constructed negatives.
struct HybridEval {
    double loss = 0.0;
};
HybridEval hybrid_loss(const std::vector<MmclipBatch>& groups, const EncoderParams& params);

// --- analytic parameter gradients ---------------------------------------------

struct ParamGradients {
    Matrix d_image_weights;
    Matrix d_text_weights;
    double d_logit_scale = 0.0;
};

ParamGradients backward_mmclip(const MmclipBatch& batch, const EncoderParams& params);
ParamGradients backward_inbatch(const InBatch& batch, const EncoderParams& params);
ParamGradients backward_hybrid(const std::vector<MmclipBatch>& groups,
                               const EncoderParams& params);

// --- trainer -------------------------------------------------------------------

enum class TrainStrategy { in_batch, mmclip, hybrid };
enum class OptimizerKind { sgd, sgd_momentum };

std::string train_strategy_name(TrainStrategy s);
std::optional<TrainStrategy> train_strategy_from_name(const std::string& name);

struct TrainConfig {
    TrainStrategy strategy = TrainStrategy::mmclip;
    int negative_ratio = 10;        // in [1, 50]
    double learning_rate = 1e-2;
    int steps = 500;
    std::uint64_t seed = 0;
    OptimizerKind optimizer = OptimizerKind::sgd;
};

struct TrainGroup {
    FeatureVector anchor;    // image features for text negatives, text for image
    FeatureVector positive;  // opposite modality
    std::vector<FeatureVector> negatives;
    Modality negative_modality = Modality::text;
};

struct TrainRun {
    TrainConfig config;
    EncoderParams params;
    std::vector<double> loss_trace;  // one entry per step
    double final_loss = 0.0;         // mean strategy loss over the dataset at the final params
};

// Deterministic per (dataset, config). In-batch uses Eq.-style pair batches
// of size negative_ratio + 1; mmclip walks groups in dataset order truncated
// to the ratio; hybrid builds 8-group windows with constructed negatives in
// the denominators. Throws Error(usage) on an empty dataset or a ratio
// exceeding a group's negative count.
TrainRun train(const std::vector<TrainGroup>& dataset, const TrainConfig& config);

// Persistence: run.json + weights.bin + trace.csv inside run_dir.
void save_train_run(const TrainRun& run, const std::string& run_dir);
TrainRun load_train_run(const std::string& run_dir);

}  // namespace geoneg

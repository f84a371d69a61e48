#pragma once

#include <map>
#include <string>
#include <vector>

#include "geoneg/contrastive.hpp"
#include "geoneg/encoder.hpp"

namespace geoneg {

struct EvalItem {
    std::string anchor_id;
    std::string positive_id;
    std::vector<std::string> negative_ids;  // candidate pool, nonempty
};

struct EvalSet {
    std::string name;  // random-neg, retrieval-neg, rule-neg, image-neg
    std::vector<EvalItem> items;
};

// Fraction of items whose positive strictly outranks every pool negative by
// cosine against the anchor; ties count as misses. All ids must resolve in
// the embedding matrix.
double hit_at_1(const EvalSet& eval_set, const EmbeddingMatrix& embeddings);

// Tower-tagged features for a corpus, keyed by item id.
struct CorpusFeatures {
    std::map<std::string, FeatureVector> image_items;  // scene ids -> image features
    std::map<std::string, FeatureVector> text_items;   // caption ids -> text features
};

// Embeds every item with its tower; rows ordered by (image ids sorted, then
// text ids sorted).
EmbeddingMatrix embed_corpus(const CorpusFeatures& corpus, const EncoderParams& params);

// --- ratio sweep -----------------------------------------------------------

struct RatioSweepRow {
    int ratio = 0;
    double final_loss = 0.0;
    double hit_at_1 = 0.0;
};

// One full train + eval per ratio with a shared seed. Ratios must be unique
// and within every group's negative budget.
std::vector<RatioSweepRow> ratio_sweep(const std::vector<TrainGroup>& dataset,
                                       const TrainConfig& config_template,
                                       const std::vector<int>& ratios, const EvalSet& eval_set,
                                       const CorpusFeatures& corpus);

std::string ratio_sweep_csv(const std::vector<RatioSweepRow>& rows);

// --- similarity audits --------------------------------------------------------

struct AuditReport {
    std::vector<double> per_item_max;                 // max cosine per query
    std::vector<std::vector<double>> per_item_top5;   // top-5 cosines per query, descending
    std::map<double, double> fraction_below;          // threshold -> fraction with max < threshold
    std::map<double, double> fraction_exceeding;      // threshold -> fraction with max > threshold
    std::vector<std::string> removed_ids;             // contamination filter only
};

AuditReport max_similarity_audit(const EmbeddingMatrix& queries, const EmbeddingMatrix& corpus,
                                 const std::vector<double>& thresholds);

// Removes train items whose max similarity against the test corpus exceeds
// the cutoff; reports the post-filter audit of test-vs-filtered-train.
struct ContaminationResult {
    std::vector<std::string> kept_train_ids;
    AuditReport report;
};
ContaminationResult contamination_filter(const EmbeddingMatrix& train,
                                         const EmbeddingMatrix& test, double cutoff = 0.995);

// --- 2-means separation ---------------------------------------------------------

struct SeparationScores {
    double kmeans_separation_accuracy = 0.0;
    double natural_separation_score = 0.0;
};

// Seeded 2-means (10 restarts, 100 iterations, init by uniform choice of two
// distinct points) over the union of the two groups.
SeparationScores separation_scores(const EmbeddingMatrix& a, const EmbeddingMatrix& b,
                                   std::uint64_t seed = 0);

}  // namespace geoneg

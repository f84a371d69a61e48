#include "geoneg/eval.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "geoneg/util.hpp"

namespace geoneg {

namespace {

double row_cosine(const EmbeddingMatrix& m, int a, int b) {
    const double* ra = m.row(a);
    const double* rb = m.row(b);
    double s = 0.0;
    for (int d = 0; d < m.dim; ++d) s += ra[d] * rb[d];
    return s;
}

double cross_cosine(const EmbeddingMatrix& a, int i, const EmbeddingMatrix& b, int j) {
    const double* ra = a.row(i);
    const double* rb = b.row(j);
    double s = 0.0;
    for (int d = 0; d < a.dim; ++d) s += ra[d] * rb[d];
    return s;
}

}  // namespace

double hit_at_1(const EvalSet& eval_set, const EmbeddingMatrix& embeddings) {
    if (eval_set.items.empty()) throw Error::usage("empty eval set");
    int hits = 0;
    for (const auto& item : eval_set.items) {
        int anchor = embeddings.find(item.anchor_id);
        int positive = embeddings.find(item.positive_id);
        if (anchor < 0) throw Error::usage("unresolvable anchor id " + item.anchor_id);
        if (positive < 0) throw Error::usage("unresolvable positive id " + item.positive_id);
        if (item.negative_ids.empty()) throw Error::usage("empty candidate pool");
        double pos_score = row_cosine(embeddings, anchor, positive);
        bool hit = true;
        for (const auto& neg_id : item.negative_ids) {
            int neg = embeddings.find(neg_id);
            if (neg < 0) throw Error::usage("unresolvable negative id " + neg_id);
            if (!(pos_score > row_cosine(embeddings, anchor, neg))) {
                hit = false;  // ties count as misses
                break;
            }
        }
        if (hit) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(eval_set.items.size());
}

EmbeddingMatrix embed_corpus(const CorpusFeatures& corpus, const EncoderParams& params) {
    EmbeddingMatrix m;
    m.dim = kEmbeddingDim;
    for (const auto& [id, features] : corpus.image_items) {
        m.append(id, embed(features, params.image));
    }
    for (const auto& [id, features] : corpus.text_items) {
        m.append(id, embed(features, params.text));
    }
    return m;
}

std::vector<RatioSweepRow> ratio_sweep(const std::vector<TrainGroup>& dataset,
                                       const TrainConfig& config_template,
                                       const std::vector<int>& ratios, const EvalSet& eval_set,
                                       const CorpusFeatures& corpus) {
    if (ratios.empty()) throw Error::usage("ratio list is empty");
    std::set<int> unique_ratios(ratios.begin(), ratios.end());
    if (unique_ratios.size() != ratios.size()) throw Error::usage("duplicate ratio in sweep");
    int max_ratio = *std::max_element(ratios.begin(), ratios.end());
    for (const auto& g : dataset) {
        if (static_cast<int>(g.negatives.size()) < max_ratio)
            throw Error::usage("insufficient negatives for ratio " + std::to_string(max_ratio));
    }

    std::vector<RatioSweepRow> rows;
    for (int ratio : ratios) {
        TrainConfig config = config_template;
        config.negative_ratio = ratio;
        TrainRun run = train(dataset, config);
        EmbeddingMatrix embeddings = embed_corpus(corpus, run.params);
        RatioSweepRow row;
        row.ratio = ratio;
        row.final_loss = run.final_loss;
        row.hit_at_1 = hit_at_1(eval_set, embeddings);
        rows.push_back(row);
    }
    return rows;
}

std::string ratio_sweep_csv(const std::vector<RatioSweepRow>& rows) {
    std::string csv = "ratio,final_loss,hit_at_1\n";
    for (const auto& row : rows) {
        csv += std::to_string(row.ratio) + "," + format_number_trim9(row.final_loss) + "," +
               format_number_trim9(row.hit_at_1) + "\n";
    }
    return csv;
}

AuditReport max_similarity_audit(const EmbeddingMatrix& queries, const EmbeddingMatrix& corpus,
                                 const std::vector<double>& thresholds) {
    if (corpus.size() == 0) throw Error::usage("audit corpus is empty");
    AuditReport report;
    for (int i = 0; i < queries.size(); ++i) {
        std::vector<double> sims;
        sims.reserve(static_cast<std::size_t>(corpus.size()));
        for (int j = 0; j < corpus.size(); ++j) {
            sims.push_back(cross_cosine(queries, i, corpus, j));
        }
        std::sort(sims.begin(), sims.end(), std::greater<double>());
        report.per_item_max.push_back(sims.front());
        sims.resize(std::min<std::size_t>(sims.size(), 5));
        report.per_item_top5.push_back(sims);
    }
    const double n = static_cast<double>(queries.size());
    for (double t : thresholds) {
        int below = 0, above = 0;
        for (double s : report.per_item_max) {
            if (s < t) ++below;
            if (s > t) ++above;
        }
        report.fraction_below[t] = n > 0 ? below / n : 1.0;
        report.fraction_exceeding[t] = n > 0 ? above / n : 0.0;
    }
    return report;
}

ContaminationResult contamination_filter(const EmbeddingMatrix& train,
                                         const EmbeddingMatrix& test, double cutoff) {
    if (test.size() == 0) throw Error::usage("test corpus is empty");
    ContaminationResult result;
    EmbeddingMatrix filtered;
    filtered.dim = train.dim;
    for (int i = 0; i < train.size(); ++i) {
        double max_sim = -1.0;
        for (int j = 0; j < test.size(); ++j) {
            max_sim = std::max(max_sim, cross_cosine(train, i, test, j));
        }
        if (max_sim > cutoff) {
            result.report.removed_ids.push_back(train.ids[static_cast<std::size_t>(i)]);
        } else {
            result.kept_train_ids.push_back(train.ids[static_cast<std::size_t>(i)]);
            filtered.append(train.ids[static_cast<std::size_t>(i)],
                            FeatureVector(train.row(i), train.row(i) + train.dim));
        }
    }
    // Post-filter audit: every test item against the surviving train items,
    // at the paper's threshold ladder.
    std::vector<double> thresholds = {cutoff, 0.99, 0.98, 0.97};
    std::sort(thresholds.begin(), thresholds.end());
    thresholds.erase(std::unique(thresholds.begin(), thresholds.end()), thresholds.end());
    if (filtered.size() > 0) {
        AuditReport post = max_similarity_audit(test, filtered, thresholds);
        post.removed_ids = result.report.removed_ids;
        result.report = post;
    } else {
        for (double t : thresholds) {
            result.report.fraction_below[t] = 1.0;
            result.report.fraction_exceeding[t] = 0.0;
        }
    }
    return result;
}

namespace {

struct KMeansResult {
    std::vector<int> assignment;
    double inertia = 0.0;
    std::vector<double> centroids;  // 2 x dim
};

double sq_dist(const double* a, const double* b, int dim) {
    double s = 0.0;
    for (int d = 0; d < dim; ++d) {
        double diff = a[d] - b[d];
        s += diff * diff;
    }
    return s;
}

KMeansResult two_means(const std::vector<double>& rows, int n, int dim, Rng& rng) {
    KMeansResult result;
    result.centroids.assign(static_cast<std::size_t>(2 * dim), 0.0);
    int c0 = static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(n)));
    int c1 = c0;
    while (c1 == c0) c1 = static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(n)));
    for (int d = 0; d < dim; ++d) {
        result.centroids[static_cast<std::size_t>(d)] = rows[static_cast<std::size_t>(c0) * dim + d];
        result.centroids[static_cast<std::size_t>(dim + d)] =
            rows[static_cast<std::size_t>(c1) * dim + d];
    }
    result.assignment.assign(static_cast<std::size_t>(n), 0);

    for (int iter = 0; iter < 100; ++iter) {
        bool changed = false;
        for (int i = 0; i < n; ++i) {
            const double* x = rows.data() + static_cast<std::size_t>(i) * dim;
            double d0 = sq_dist(x, result.centroids.data(), dim);
            double d1 = sq_dist(x, result.centroids.data() + dim, dim);
            int a = d1 < d0 ? 1 : 0;
            if (a != result.assignment[static_cast<std::size_t>(i)]) {
                result.assignment[static_cast<std::size_t>(i)] = a;
                changed = true;
            }
        }
        std::vector<double> sums(static_cast<std::size_t>(2 * dim), 0.0);
        int counts[2] = {0, 0};
        for (int i = 0; i < n; ++i) {
            int a = result.assignment[static_cast<std::size_t>(i)];
            counts[a] += 1;
            const double* x = rows.data() + static_cast<std::size_t>(i) * dim;
            for (int d = 0; d < dim; ++d) sums[static_cast<std::size_t>(a * dim + d)] += x[d];
        }
        for (int c = 0; c < 2; ++c) {
            if (counts[c] == 0) continue;  // keep the stale centroid
            for (int d = 0; d < dim; ++d) {
                result.centroids[static_cast<std::size_t>(c * dim + d)] =
                    sums[static_cast<std::size_t>(c * dim + d)] / counts[c];
            }
        }
        if (!changed && iter > 0) break;
    }

    result.inertia = 0.0;
    for (int i = 0; i < n; ++i) {
        const double* x = rows.data() + static_cast<std::size_t>(i) * dim;
        result.inertia +=
            sq_dist(x, result.centroids.data() +
                           static_cast<std::size_t>(result.assignment[static_cast<std::size_t>(i)]) * dim,
                    dim);
    }
    return result;
}

}  // namespace

SeparationScores separation_scores(const EmbeddingMatrix& a, const EmbeddingMatrix& b,
                                   std::uint64_t seed) {
    const int na = a.size();
    const int nb = b.size();
    const int n = na + nb;
    if (na == 0 || nb == 0) throw Error::usage("both groups must be nonempty");
    if (n < 2) throw Error::usage("need at least 2 points total");
    if (a.dim != b.dim) throw Error::usage("dimension mismatch between groups");
    const int dim = a.dim;

    std::vector<double> rows;
    rows.reserve(static_cast<std::size_t>(n) * dim);
    rows.insert(rows.end(), a.rows.begin(), a.rows.end());
    rows.insert(rows.end(), b.rows.begin(), b.rows.end());

    KMeansResult best;
    bool have_best = false;
    for (int restart = 0; restart < 10; ++restart) {
        Rng rng(seed * 1315423911ULL + static_cast<std::uint64_t>(restart) + 1);
        KMeansResult r = two_means(rows, n, dim, rng);
        if (!have_best || r.inertia < best.inertia) {
            best = std::move(r);
            have_best = true;
        }
    }

    // Accuracy under the best of the two cluster->group assignments.
    int match_a0 = 0;  // group a mapped to cluster 0, b to cluster 1
    for (int i = 0; i < n; ++i) {
        int cluster = best.assignment[static_cast<std::size_t>(i)];
        int group = i < na ? 0 : 1;
        if (cluster == group) ++match_a0;
    }
    SeparationScores scores;
    scores.kmeans_separation_accuracy =
        std::max(match_a0, n - match_a0) / static_cast<double>(n);

    // Majority cluster per group; score the fraction of points landing in
    // their own group's majority cluster.
    int a_in_c0 = 0, b_in_c0 = 0;
    for (int i = 0; i < n; ++i) {
        if (best.assignment[static_cast<std::size_t>(i)] == 0) {
            if (i < na)
                ++a_in_c0;
            else
                ++b_in_c0;
        }
    }
    int majority_a = a_in_c0 * 2 >= na ? 0 : 1;
    int majority_b = b_in_c0 * 2 >= nb ? 0 : 1;
    int natural = 0;
    for (int i = 0; i < n; ++i) {
        int majority = i < na ? majority_a : majority_b;
        if (best.assignment[static_cast<std::size_t>(i)] == majority) ++natural;
    }
    scores.natural_separation_score = natural / static_cast<double>(n);
    return scores;
}

}  // namespace geoneg

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "geoneg/caption.hpp"
#include "geoneg/encoder.hpp"
#include "geoneg/geometry.hpp"

namespace geoneg {

enum class Modality { text, image };

enum class NegativeCategory {
    ordering,
    shape_attribute,
    relation,
    numeric,
    retrieval,
    scene_perturb,
    random,
};

std::string negative_category_name(NegativeCategory c);
std::string modality_name(Modality m);

struct NegativeItem {
    std::string id;
    NegativeCategory category = NegativeCategory::ordering;
    std::string delta;  // human-readable, machine-parseable description of the change
};

struct NegativeGroup {
    std::string positive_id;
    Modality modality = Modality::text;
    std::vector<NegativeItem> negatives;

    int ratio() const { return static_cast<int>(negatives.size()); }
};

// Rule-based caption negatives: each one perturbs exactly one fact, with the
// category chosen round-robin over {ordering, shape-attribute, relation,
// numeric} restricted to facts the scene actually offers. Ordering draws are
// rejected while cyclically equal to the original; numeric perturbations
// multiply by a factor from {0.5, 0.75, 1.5, 2.0} (angles redrawn when the
// result leaves (0, 180)). Deterministic per seed. Throws Error(usage) when
// no category applies.
struct RuleNegatives {
    NegativeGroup group;            // text modality
    std::vector<Caption> captions;  // aligned with group.negatives
};
RuleNegatives rule_negatives(const Caption& positive, const Scene& scene, int count,
                             std::uint64_t seed, const std::string& positive_id);

// Image-based negatives: one structural edit per negative (label swap,
// relation break by rotation, uniform rescale with marks kept truthful, or a
// square/rectangle attribute toggle). Every output passes validate_scene,
// has a canonical serialization distinct from the positive and from its
// siblings, and carries a delta that verify_scene_delta can check.
struct SceneNegatives {
    NegativeGroup group;  // image modality
    std::vector<Scene> scenes;
};
SceneNegatives scene_perturb_negatives(const Scene& scene, int count, std::uint64_t seed,
                                       const std::string& positive_id);

// Checks a scene-perturbation delta claim against the actual pair.
bool verify_scene_delta(const Scene& positive, const Scene& negative, const std::string& delta);

// Exact top-k by cosine similarity, query row excluded, ties broken by
// ascending row index. When sample_from_top is m > k, the k negatives are
// drawn uniformly without replacement from the top-m (off by default).
NegativeGroup retrieval_negatives(int query_index, const EmbeddingMatrix& embeddings, int k,
                                  int sample_from_top = 0, std::uint64_t seed = 0);

// Uniform sample without replacement from the corpus, excluding the positive.
NegativeGroup random_negatives(const std::string& positive_id,
                               const std::vector<std::string>& corpus_ids, int count,
                               std::uint64_t seed);

}  // namespace geoneg

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "geoneg/geometry.hpp"
#include "geoneg/render.hpp"

namespace geoneg {

inline constexpr int kTextFeatureDim = 256;
inline constexpr int kImageFeatureDim = 64;
inline constexpr int kEmbeddingDim = 32;

// Initial logit scale, the standard contrastive ln(1/0.07).
double default_logit_scale();

using FeatureVector = std::vector<double>;

// Row-major dense matrix, sized for toy projections.
struct Matrix {
    int rows = 0;
    int cols = 0;
    std::vector<double> data;

    Matrix() = default;
    Matrix(int r, int c) : rows(r), cols(c), data(static_cast<std::size_t>(r) * c, 0.0) {}

    double& at(int r, int c) { return data[static_cast<std::size_t>(r) * cols + c]; }
    double at(int r, int c) const { return data[static_cast<std::size_t>(r) * cols + c]; }

    static Matrix identity(int n);
};

struct Projection {
    Matrix weights;  // D_in x D_emb
    double logit_scale = 0.0;
};

// Seeded random projection, uniform in +-1/sqrt(D_in).
Projection random_projection(int d_in, int d_emb, std::uint64_t seed);

// Hashed bag-of-tokens: lowercase, split on non-alphanumerics, FNV-1a 64-bit
// per token; bucket = hash mod 256, sign from the hash's top bit; then
// L2-normalized. Empty token set maps to e1.
FeatureVector text_features(const std::string& text);

// 64-dim geometric descriptor: element counts, 16-bin interior-angle
// histogram, 16-bin normalized-length histogram, relation-kind counts and
// attribute one-hots; L2-normalized. include_numeric_marks=false zeroes the
// mark-count feature only.
FeatureVector image_features(const Scene& scene, const RenderOptions& options = {});

// normalize(features x weights). A zero pre-normalization vector maps to e1.
// Throws Error(usage) on dimension mismatch.
FeatureVector embed(const FeatureVector& features, const Projection& projection);

// exp(logit_scale) * <a, b> for unit-norm embeddings.
double similarity(const FeatureVector& a, const FeatureVector& b, double logit_scale);

double dot(const FeatureVector& a, const FeatureVector& b);
double l2_norm(const FeatureVector& a);
void l2_normalize_or_e1(FeatureVector& v);

struct EmbeddingMatrix {
    int dim = kEmbeddingDim;
    std::vector<std::string> ids;   // unique, one per row
    std::vector<double> rows;       // row-major n x dim, each row unit-norm

    int size() const { return static_cast<int>(ids.size()); }
    const double* row(int i) const { return rows.data() + static_cast<std::size_t>(i) * dim; }
    void append(const std::string& id, const FeatureVector& embedding);
    int find(const std::string& id) const;  // -1 when absent
};

// Persistence: a single JSON header line followed by little-endian float64
// rows (binary mode), or id/vector JSON lines (jsonl mode).
void save_embeddings(const EmbeddingMatrix& m, const std::string& path, bool binary = true);
EmbeddingMatrix load_embeddings(const std::string& path);

}  // namespace geoneg

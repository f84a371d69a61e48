#include "geoneg/encoder.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstring>
#include <fstream>

#include <json.hpp>

#include "geoneg/util.hpp"

namespace geoneg {

double default_logit_scale() { return std::log(1.0 / 0.07); }

Matrix Matrix::identity(int n) {
    Matrix m(n, n);
    for (int i = 0; i < n; ++i) m.at(i, i) = 1.0;
    return m;
}

Projection random_projection(int d_in, int d_emb, std::uint64_t seed) {
    Projection p;
    p.weights = Matrix(d_in, d_emb);
    p.logit_scale = default_logit_scale();
    Rng rng(seed);
    const double bound = 1.0 / std::sqrt(static_cast<double>(d_in));
    for (auto& w : p.weights.data) w = rng.uniform(-bound, bound);
    return p;
}

double dot(const FeatureVector& a, const FeatureVector& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double l2_norm(const FeatureVector& a) { return std::sqrt(dot(a, a)); }

void l2_normalize_or_e1(FeatureVector& v) {
    double n = l2_norm(v);
    if (n == 0.0) {
        std::fill(v.begin(), v.end(), 0.0);
        if (!v.empty()) v[0] = 1.0;
        return;
    }
    for (auto& x : v) x /= n;
}

FeatureVector text_features(const std::string& text) {
    FeatureVector v(kTextFeatureDim, 0.0);
    std::string token;
    bool any = false;
    auto flush = [&]() {
        if (token.empty()) return;
        std::uint64_t h = fnv1a64(token);
        std::size_t bucket = static_cast<std::size_t>(h % kTextFeatureDim);
        double sign = (h >> 63) ? -1.0 : 1.0;
        v[bucket] += sign;
        any = true;
        token.clear();
    };
    for (char c : text) {
        if (std::isalnum(static_cast<unsigned char>(c))) {
            token += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        } else {
            flush();
        }
    }
    flush();
    if (!any) {
        v[0] = 1.0;
        return v;
    }
    l2_normalize_or_e1(v);
    return v;
}

namespace {

// Feature layout inside the 64-dim image descriptor.
constexpr int kCountPoints = 0;
constexpr int kCountSegments = 1;
constexpr int kCountPolygons = 2;
constexpr int kCountCircles = 3;
constexpr int kCountMarks = 4;
constexpr int kAngleHistStart = 5;    // 16 bins over (0, 180)
constexpr int kLengthHistStart = 21;  // 16 bins over normalized lengths
constexpr int kRelationStart = 37;    // 5 relation kinds
constexpr int kAttrStart = 42;        // 5 attribute one-hot counts
// 47..63 reserved (zero)

}  // namespace

FeatureVector image_features(const Scene& scene, const RenderOptions& options) {
    if (!scene_is_valid(scene)) throw Error::usage("cannot encode an invalid scene");
    const Scene c = canonicalize(scene);
    FeatureVector v(kImageFeatureDim, 0.0);

    v[kCountPoints] = static_cast<double>(c.points.size());
    std::vector<double> lengths;
    for (const auto& s : c.shapes) {
        switch (s.kind) {
            case ShapeKind::segment: {
                v[kCountSegments] += 1.0;
                lengths.push_back(
                    measured_quantity(c, SegmentRef{s.vertices[0], s.vertices[1]}, Quantity::length));
                break;
            }
            case ShapeKind::polygon: {
                v[kCountPolygons] += 1.0;
                const std::size_t n = s.vertices.size();
                for (std::size_t i = 0; i < n; ++i) {
                    char prev = s.vertices[(i + n - 1) % n];
                    char cur = s.vertices[i];
                    char next = s.vertices[(i + 1) % n];
                    double angle = measured_quantity(c, AngleRef{prev, cur, next}, Quantity::angle);
                    int bin = std::clamp(static_cast<int>(angle / 180.0 * 16.0), 0, 15);
                    v[kAngleHistStart + bin] += 1.0;
                    lengths.push_back(
                        measured_quantity(c, SegmentRef{cur, next}, Quantity::length));
                }
                if (s.attr != ShapeAttr::none) {
                    v[kAttrStart + static_cast<int>(s.attr) - 1] += 1.0;
                }
                break;
            }
            case ShapeKind::circle:
                v[kCountCircles] += 1.0;
                lengths.push_back(2.0 * s.radius);
                break;
        }
    }
    if (options.include_numeric_marks) {
        v[kCountMarks] = static_cast<double>(c.marks.size());
    }
    if (!lengths.empty()) {
        double max_len = *std::max_element(lengths.begin(), lengths.end());
        if (max_len > 0.0) {
            for (double len : lengths) {
                int bin = std::clamp(static_cast<int>(len / max_len * 16.0), 0, 15);
                v[kLengthHistStart + bin] += 1.0;
            }
        }
    }
    for (const auto& r : c.relations) {
        v[kRelationStart + static_cast<int>(r.kind)] += 1.0;
    }

    l2_normalize_or_e1(v);
    return v;
}

FeatureVector embed(const FeatureVector& features, const Projection& projection) {
    if (static_cast<int>(features.size()) != projection.weights.rows)
        throw Error::usage("feature dimension does not match projection input dimension");
    FeatureVector out(static_cast<std::size_t>(projection.weights.cols), 0.0);
    for (int i = 0; i < projection.weights.rows; ++i) {
        double f = features[static_cast<std::size_t>(i)];
        if (f == 0.0) continue;
        const double* wrow = projection.weights.data.data() +
                             static_cast<std::size_t>(i) * projection.weights.cols;
        for (int j = 0; j < projection.weights.cols; ++j) out[static_cast<std::size_t>(j)] += f * wrow[j];
    }
    l2_normalize_or_e1(out);
    return out;
}

double similarity(const FeatureVector& a, const FeatureVector& b, double logit_scale) {
    return std::exp(logit_scale) * dot(a, b);
}

void EmbeddingMatrix::append(const std::string& id, const FeatureVector& embedding) {
    if (static_cast<int>(embedding.size()) != dim)
        throw Error::usage("embedding dimension mismatch on append");
    ids.push_back(id);
    rows.insert(rows.end(), embedding.begin(), embedding.end());
}

int EmbeddingMatrix::find(const std::string& id) const {
    for (std::size_t i = 0; i < ids.size(); ++i) {
        if (ids[i] == id) return static_cast<int>(i);
    }
    return -1;
}

void save_embeddings(const EmbeddingMatrix& m, const std::string& path, bool binary) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error::runtime("cannot write " + path);
    nlohmann::ordered_json header;
    header["format"] = binary ? "binary" : "jsonl";
    header["n"] = m.size();
    header["dim"] = m.dim;
    header["ids"] = m.ids;
    out << header.dump() << "\n";
    if (binary) {
        static_assert(sizeof(double) == 8);
        out.write(reinterpret_cast<const char*>(m.rows.data()),
                  static_cast<std::streamsize>(m.rows.size() * sizeof(double)));
    } else {
        for (int i = 0; i < m.size(); ++i) {
            nlohmann::ordered_json row;
            row["id"] = m.ids[static_cast<std::size_t>(i)];
            row["v"] = std::vector<double>(m.row(i), m.row(i) + m.dim);
            out << row.dump() << "\n";
        }
    }
    if (!out) throw Error::runtime("failed while writing " + path);
}

EmbeddingMatrix load_embeddings(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error::runtime("cannot read " + path);
    std::string header_line;
    if (!std::getline(in, header_line)) throw Error::runtime("empty embedding file " + path);
    nlohmann::json header = nlohmann::json::parse(header_line);
    EmbeddingMatrix m;
    m.dim = header.at("dim").get<int>();
    const int n = header.at("n").get<int>();
    m.ids = header.at("ids").get<std::vector<std::string>>();
    if (static_cast<int>(m.ids.size()) != n)
        throw Error::runtime("embedding header id count mismatch in " + path);
    const std::string format = header.at("format").get<std::string>();
    if (format == "binary") {
        m.rows.resize(static_cast<std::size_t>(n) * m.dim);
        in.read(reinterpret_cast<char*>(m.rows.data()),
                static_cast<std::streamsize>(m.rows.size() * sizeof(double)));
        if (in.gcount() != static_cast<std::streamsize>(m.rows.size() * sizeof(double)))
            throw Error::runtime("truncated embedding row block in " + path);
    } else {
        std::string line;
        std::vector<std::string> ids;
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            nlohmann::json row = nlohmann::json::parse(line);
            ids.push_back(row.at("id").get<std::string>());
            auto values = row.at("v").get<std::vector<double>>();
            if (static_cast<int>(values.size()) != m.dim)
                throw Error::runtime("bad row width in " + path);
            m.rows.insert(m.rows.end(), values.begin(), values.end());
        }
        if (ids != m.ids) throw Error::runtime("row ids disagree with header in " + path);
    }
    return m;
}

}  // namespace geoneg

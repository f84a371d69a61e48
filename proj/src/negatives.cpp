#include "geoneg/negatives.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <sstream>

#include "geoneg/dsl.hpp"
#include "geoneg/util.hpp"

namespace geoneg {

namespace {

constexpr double kNumericFactors[4] = {0.5, 0.75, 1.5, 2.0};

template <typename T>
void shuffle(std::vector<T>& items, Rng& rng) {
    for (std::size_t i = items.size(); i > 1; --i) {
        std::size_t j = static_cast<std::size_t>(rng.uniform_index(i));
        std::swap(items[i - 1], items[j]);
    }
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> parts;
    std::string cur;
    for (char c : s) {
        if (c == sep) {
            parts.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    parts.push_back(cur);
    return parts;
}

}  // namespace

std::string negative_category_name(NegativeCategory c) {
    switch (c) {
        case NegativeCategory::ordering: return "ordering";
        case NegativeCategory::shape_attribute: return "shape-attribute";
        case NegativeCategory::relation: return "relation";
        case NegativeCategory::numeric: return "numeric";
        case NegativeCategory::retrieval: return "retrieval";
        case NegativeCategory::scene_perturb: return "scene-perturb";
        case NegativeCategory::random: return "random";
    }
    return "ordering";
}

std::string modality_name(Modality m) { return m == Modality::text ? "text" : "image"; }

// ---------------------------------------------------------------------------
// Rule-based caption negatives
// ---------------------------------------------------------------------------

namespace {

struct FactEdit {
    std::size_t fact_index = 0;
    Fact replacement;
    std::string delta;
};

// Alternative relation kinds compatible with the operand shape types.
std::vector<RelationKind> compatible_alternatives(RelationKind kind) {
    switch (kind) {
        case RelationKind::parallel:
        case RelationKind::perpendicular:
        case RelationKind::intersects:
            return {RelationKind::parallel, RelationKind::perpendicular, RelationKind::intersects};
        case RelationKind::similar:
        case RelationKind::congruent:
            return {RelationKind::similar, RelationKind::congruent};
    }
    return {};
}

const Shape* find_shape_by_label(const Scene& scene, const std::string& label) {
    for (const auto& s : scene.shapes) {
        if (s.label() == label) return &s;
    }
    return nullptr;
}

int shape_index_by_label(const Scene& scene, const std::string& label) {
    for (std::size_t i = 0; i < scene.shapes.size(); ++i) {
        if (scene.shapes[i].label() == label) return static_cast<int>(i);
    }
    return -1;
}

class RuleEditFactory {
public:
    RuleEditFactory(const Caption& positive, const Scene& scene, Rng& rng)
        : positive_(positive), scene_(canonicalize(scene)), rng_(rng) {
        for (std::size_t i = 0; i < positive.facts.size(); ++i) {
            const Fact& f = positive.facts[i];
            switch (f.kind) {
                case FactKind::ordering: {
                    // Triangles admit no non-cyclic permutation (every
                    // transposition is a rotation of the reversal).
                    auto parts = split(f.payload, ':');
                    if (parts.at(1).size() >= 4) ordering_.push_back(i);
                    break;
                }
                case FactKind::shape: {
                    auto parts = split(f.payload, ':');
                    if (parts.at(1) != "polygon") break;
                    if (!false_attributes(parts.at(2), parts.at(3)).empty()) attribute_.push_back(i);
                    break;
                }
                case FactKind::relation: {
                    if (!false_relation_kinds(f).empty()) relation_.push_back(i);
                    break;
                }
                case FactKind::mark:
                    numeric_.push_back(i);
                    break;
            }
        }
    }

    bool any_applicable() const {
        return !(ordering_.empty() && attribute_.empty() && relation_.empty() && numeric_.empty());
    }

    // Next edit in round-robin category order, restricted to applicable
    // categories.
    FactEdit next() {
        for (int step = 0; step < 4; ++step) {
            int cat = (next_category_ + step) % 4;
            const std::vector<std::size_t>* pool = nullptr;
            switch (cat) {
                case 0: pool = &ordering_; break;
                case 1: pool = &attribute_; break;
                case 2: pool = &relation_; break;
                case 3: pool = &numeric_; break;
            }
            if (pool->empty()) continue;
            next_category_ = (cat + 1) % 4;
            std::size_t fact_index = (*pool)[rng_.uniform_index(pool->size())];
            switch (cat) {
                case 0: return ordering_edit(fact_index);
                case 1: return attribute_edit(fact_index);
                case 2: return relation_edit(fact_index);
                default: return numeric_edit(fact_index);
            }
        }
        throw Error::usage("no perturbable fact in any rule category");
    }

    static NegativeCategory category_of(const FactEdit& edit, const Caption& positive) {
        switch (positive.facts[edit.fact_index].kind) {
            case FactKind::ordering: return NegativeCategory::ordering;
            case FactKind::shape: return NegativeCategory::shape_attribute;
            case FactKind::relation: return NegativeCategory::relation;
            case FactKind::mark: return NegativeCategory::numeric;
        }
        return NegativeCategory::ordering;
    }

private:
    std::vector<ShapeAttr> false_attributes(const std::string& verts,
                                            const std::string& current) const {
        std::vector<ShapeAttr> out;
        const Shape* shape = find_shape_by_label(scene_, verts);
        if (shape == nullptr) return out;
        for (ShapeAttr a : candidate_attributes(shape->vertices.size())) {
            if (shape_attr_name(a) == current) continue;
            if (!attribute_holds(scene_, *shape, a)) out.push_back(a);
        }
        return out;
    }

    std::vector<RelationKind> false_relation_kinds(const Fact& fact) const {
        std::vector<RelationKind> out;
        auto parts = split(fact.payload, ':');
        auto kind = relation_kind_from_name(parts.at(1));
        int lhs = shape_index_by_label(scene_, parts.at(2));
        int rhs = shape_index_by_label(scene_, parts.at(3));
        if (!kind || lhs < 0 || rhs < 0) return out;
        for (RelationKind alt : compatible_alternatives(*kind)) {
            if (alt == *kind) continue;
            if (!relation_holds(scene_, Relation{alt, lhs, rhs})) out.push_back(alt);
        }
        return out;
    }

    FactEdit ordering_edit(std::size_t fact_index) {
        auto parts = split(positive_.facts[fact_index].payload, ':');
        const std::string& original = parts.at(1);
        std::string perm = original;
        do {
            std::vector<char> letters(perm.begin(), perm.end());
            shuffle(letters, rng_);
            perm.assign(letters.begin(), letters.end());
        } while (cyclically_equal(original, perm));
        FactEdit edit;
        edit.fact_index = fact_index;
        edit.replacement = {FactKind::ordering, "ordering:" + perm};
        edit.delta = "ordering " + original + " -> " + perm;
        return edit;
    }

    FactEdit attribute_edit(std::size_t fact_index) {
        auto parts = split(positive_.facts[fact_index].payload, ':');
        auto candidates = false_attributes(parts.at(2), parts.at(3));
        ShapeAttr chosen = candidates[rng_.uniform_index(candidates.size())];
        FactEdit edit;
        edit.fact_index = fact_index;
        edit.replacement = {FactKind::shape,
                            "shape:polygon:" + parts.at(2) + ":" + shape_attr_name(chosen)};
        edit.delta = "attribute " + parts.at(2) + " " + parts.at(3) + " -> " +
                     shape_attr_name(chosen);
        return edit;
    }

    FactEdit relation_edit(std::size_t fact_index) {
        const Fact& fact = positive_.facts[fact_index];
        auto parts = split(fact.payload, ':');
        auto candidates = false_relation_kinds(fact);
        RelationKind chosen = candidates[rng_.uniform_index(candidates.size())];
        FactEdit edit;
        edit.fact_index = fact_index;
        edit.replacement = {FactKind::relation, "relation:" + relation_kind_name(chosen) + ":" +
                                                    parts.at(2) + ":" + parts.at(3)};
        edit.delta = "relation " + parts.at(2) + "," + parts.at(3) + " " + parts.at(1) + " -> " +
                     relation_kind_name(chosen);
        return edit;
    }

    FactEdit numeric_edit(std::size_t fact_index) {
        const Fact& fact = positive_.facts[fact_index];
        auto parts = split(fact.payload, ':');
        const bool is_angle = parts.at(1) == "angle";
        double value = std::strtod(parts.at(3).c_str(), nullptr);
        double factor = 0.0;
        double perturbed = 0.0;
        do {
            factor = kNumericFactors[rng_.uniform_index(4)];
            perturbed = value * factor;
        } while (is_angle && !(perturbed > 0.0 && perturbed < 180.0));
        FactEdit edit;
        edit.fact_index = fact_index;
        edit.replacement = {FactKind::mark, "mark:" + parts.at(1) + ":" + parts.at(2) + ":" +
                                                format_number_trim9(perturbed)};
        edit.delta = "mark " + parts.at(1) + " " + parts.at(2) + " " + parts.at(3) + " -> " +
                     format_number_trim9(perturbed) + " (x" + format_number_trim9(factor) + ")";
        return edit;
    }

    const Caption& positive_;
    Scene scene_;
    Rng& rng_;
    std::vector<std::size_t> ordering_, attribute_, relation_, numeric_;
    int next_category_ = 0;
};

}  // namespace

RuleNegatives rule_negatives(const Caption& positive, const Scene& scene, int count,
                             std::uint64_t seed, const std::string& positive_id) {
    if (count < 1) throw Error::usage("negative count must be >= 1");
    Rng rng(seed);
    RuleEditFactory factory(positive, scene, rng);
    if (!factory.any_applicable())
        throw Error::usage("scene has no perturbable fact in any rule category");

    RuleNegatives result;
    result.group.positive_id = positive_id;
    result.group.modality = Modality::text;
    std::set<std::string> seen_texts;

    for (int k = 0; k < count; ++k) {
        FactEdit edit;
        Caption negative;
        bool fresh = false;
        for (int attempt = 0; attempt < 64 && !fresh; ++attempt) {
            edit = factory.next();
            negative.facts = positive.facts;
            negative.facts[edit.fact_index] = edit.replacement;
            negative.text = caption_text(negative.facts);
            fresh = seen_texts.insert(negative.text).second;
        }
        // After exhausting retries a duplicate is allowed; the group-level
        // invariants below still hold for it.
        if (!fresh) {
            negative.facts = positive.facts;
            negative.facts[edit.fact_index] = edit.replacement;
            negative.text = caption_text(negative.facts);
        }
        if (negative.text == positive.text || caption_equals_modulo_cyclic(positive, negative))
            throw Error::runtime("internal: rule negative equals its positive");
        NegativeItem item;
        item.id = positive_id + "_neg" + std::to_string(k);
        item.category = RuleEditFactory::category_of(edit, positive);
        item.delta = edit.delta;
        result.group.negatives.push_back(item);
        result.captions.push_back(std::move(negative));
    }
    return result;
}

// ---------------------------------------------------------------------------
// Scene perturbation negatives
// ---------------------------------------------------------------------------

namespace {

struct SceneEdit {
    Scene scene;
    std::string delta;
};

Scene rename_labels(const Scene& scene, char a, char b) {
    Scene out = scene;
    auto swap_char = [a, b](char c) { return c == a ? b : (c == b ? a : c); };
    for (auto& p : out.points) p.id = swap_char(p.id);
    for (auto& s : out.shapes) {
        for (auto& v : s.vertices) v = swap_char(v);
    }
    for (auto& m : out.marks) {
        if (auto* seg = std::get_if<SegmentRef>(&m.target)) {
            seg->a = swap_char(seg->a);
            seg->b = swap_char(seg->b);
        } else {
            auto& ang = std::get<AngleRef>(m.target);
            ang.a = swap_char(ang.a);
            ang.vertex = swap_char(ang.vertex);
            ang.c = swap_char(ang.c);
        }
    }
    return canonicalize(out);
}

// Recomputes every mark value from the (already quantized) coordinates.
void refresh_marks(Scene& scene) {
    for (auto& m : scene.marks) {
        m.value = quantize9(measured_quantity(scene, m.target, m.quantity));
    }
}

void quantize_points(Scene& scene) {
    for (auto& p : scene.points) {
        p.x = quantize9(p.x);
        p.y = quantize9(p.y);
    }
    for (auto& s : scene.shapes) {
        if (s.kind == ShapeKind::circle) s.radius = quantize9(s.radius);
    }
}

// Drops relations that no longer hold; if the named pair now intersects (and
// both are segments), records that instead.
void repair_relations(Scene& scene, int broken_lhs, int broken_rhs, bool& added_intersects) {
    std::vector<Relation> kept;
    for (const auto& r : scene.relations) {
        if (relation_holds(scene, r)) kept.push_back(r);
    }
    scene.relations = kept;
    added_intersects = false;
    const Shape& a = scene.shapes[static_cast<std::size_t>(broken_lhs)];
    const Shape& b = scene.shapes[static_cast<std::size_t>(broken_rhs)];
    if (a.kind == ShapeKind::segment && b.kind == ShapeKind::segment &&
        segments_intersect(scene, a, b)) {
        bool present = false;
        for (const auto& r : scene.relations) {
            if (r.kind == RelationKind::intersects &&
                ((r.lhs == broken_lhs && r.rhs == broken_rhs) ||
                 (r.lhs == broken_rhs && r.rhs == broken_lhs)))
                present = true;
        }
        if (!present) {
            scene.relations.push_back({RelationKind::intersects, broken_lhs, broken_rhs});
        }
        added_intersects = true;
    }
}

// --- label swap -------------------------------------------------------------

std::vector<std::pair<char, char>> label_swap_variants(const Scene& scene, Rng& rng) {
    std::vector<std::pair<char, char>> pairs;
    for (std::size_t i = 0; i < scene.points.size(); ++i) {
        for (std::size_t j = i + 1; j < scene.points.size(); ++j) {
            char a = scene.points[i].id;
            char b = scene.points[j].id;
            bool ok = true;
            for (const auto& s : scene.shapes) {
                if (s.kind != ShapeKind::polygon) continue;
                std::string before = s.label();
                std::string after = before;
                for (auto& c : after) c = c == a ? b : (c == b ? a : c);
                if (after != before && cyclically_equal(before, after)) {
                    ok = false;
                    break;
                }
            }
            if (ok) pairs.emplace_back(std::min(a, b), std::max(a, b));
        }
    }
    shuffle(pairs, rng);
    return pairs;
}

std::optional<SceneEdit> apply_label_swap(const Scene& scene, std::pair<char, char> pair) {
    SceneEdit edit;
    edit.scene = rename_labels(scene, pair.first, pair.second);
    edit.delta = std::string("label-swap ") + pair.first + "<->" + pair.second;
    if (!scene_is_valid(edit.scene)) return std::nullopt;
    return edit;
}

// --- relation break by rotation ----------------------------------------------

struct RotateVariant {
    int relation_index = 0;
    char pivot = 'A';
    double angle_deg = 0.0;
};

bool point_on_segment(const Scene& scene, char candidate, const Shape& segment) {
    const Point* p = scene.find_point(candidate);
    const Point* a = scene.find_point(segment.vertices[0]);
    const Point* b = scene.find_point(segment.vertices[1]);
    double ux = b->x - a->x, uy = b->y - a->y;
    double wx = p->x - a->x, wy = p->y - a->y;
    double len = std::hypot(ux, uy);
    if (len == 0.0) return false;
    double cross = ux * wy - uy * wx;
    if (std::fabs(cross) > 1e-9 * len * std::max(std::hypot(wx, wy), 1.0)) return false;
    double t = (wx * ux + wy * uy) / (len * len);
    return t > 1e-9 && t < 1.0 - 1e-9;
}

std::vector<RotateVariant> rotate_variants(const Scene& scene, Rng& rng) {
    static const double kAngles[] = {75.0, -75.0, 60.0, -60.0, 45.0, -45.0,
                                     30.0, -30.0, 20.0, -20.0, 12.0, -12.0};
    std::vector<RotateVariant> variants;
    for (std::size_t ri = 0; ri < scene.relations.size(); ++ri) {
        const Relation& r = scene.relations[ri];
        if (r.kind != RelationKind::parallel && r.kind != RelationKind::perpendicular) continue;
        const Shape& target = scene.shapes[static_cast<std::size_t>(r.rhs)];
        // Pivot candidates: labeled points strictly inside the rotated
        // segment first (they keep incident intersections alive), then its
        // endpoints.
        std::vector<char> pivots;
        for (const auto& p : scene.points) {
            if (p.id != target.vertices[0] && p.id != target.vertices[1] &&
                point_on_segment(scene, p.id, target))
                pivots.push_back(p.id);
        }
        pivots.push_back(target.vertices[0]);
        pivots.push_back(target.vertices[1]);
        for (char pivot : pivots) {
            for (double angle : kAngles) {
                variants.push_back({static_cast<int>(ri), pivot, angle});
            }
        }
    }
    shuffle(variants, rng);
    return variants;
}

std::optional<SceneEdit> apply_rotation(const Scene& scene, const RotateVariant& variant) {
    const Relation broken = scene.relations[static_cast<std::size_t>(variant.relation_index)];
    const Shape target = scene.shapes[static_cast<std::size_t>(broken.rhs)];
    const Shape other = scene.shapes[static_cast<std::size_t>(broken.lhs)];
    Scene out = scene;
    const Point* pivot = out.find_point(variant.pivot);
    double px = pivot->x, py = pivot->y;
    double rad = variant.angle_deg * M_PI / 180.0;
    double cos_a = std::cos(rad), sin_a = std::sin(rad);
    for (auto& p : out.points) {
        bool is_endpoint = p.id == target.vertices[0] || p.id == target.vertices[1];
        if (!is_endpoint || p.id == variant.pivot) continue;
        double dx = p.x - px, dy = p.y - py;
        p.x = px + dx * cos_a - dy * sin_a;
        p.y = py + dx * sin_a + dy * cos_a;
    }
    quantize_points(out);
    refresh_marks(out);

    // The targeted relation must now fail decisively (10x the tolerance).
    Relation probe = broken;
    if (relation_holds(out, probe, 10.0)) return std::nullopt;
    bool added_intersects = false;
    repair_relations(out, broken.lhs, broken.rhs, added_intersects);
    out = canonicalize(out);
    if (!scene_is_valid(out)) return std::nullopt;

    SceneEdit edit;
    edit.scene = out;
    edit.delta = "relation-break " + relation_kind_name(broken.kind) + "(" + other.label() + "," +
                 target.label() + ") -> " + (added_intersects ? "intersects" : "none");
    return edit;
}

// --- uniform rescale ----------------------------------------------------------

struct ScaleVariant {
    double factor = 1.0;
    int center_mode = 0;  // 0: origin, 1: centroid, 2: second point
};

std::vector<ScaleVariant> scale_variants(const Scene& scene, Rng& rng) {
    std::vector<ScaleVariant> variants;
    bool has_length_mark = false;
    for (const auto& m : scene.marks) {
        if (m.quantity == Quantity::length) has_length_mark = true;
    }
    if (!has_length_mark) return variants;  // nothing numeric would change
    for (int center = 0; center < 3; ++center) {
        if (center == 2 && scene.points.size() < 2) break;
        for (double f : kNumericFactors) variants.push_back({f, center});
    }
    shuffle(variants, rng);
    return variants;
}

std::optional<SceneEdit> apply_scale(const Scene& scene, const ScaleVariant& variant) {
    Scene out = scene;
    double cx = 0.0, cy = 0.0;
    if (variant.center_mode == 1) {
        for (const auto& p : out.points) {
            cx += p.x;
            cy += p.y;
        }
        cx /= static_cast<double>(out.points.size());
        cy /= static_cast<double>(out.points.size());
    } else if (variant.center_mode == 2) {
        cx = out.points[1].x;
        cy = out.points[1].y;
    }
    for (auto& p : out.points) {
        p.x = cx + (p.x - cx) * variant.factor;
        p.y = cy + (p.y - cy) * variant.factor;
    }
    for (auto& s : out.shapes) {
        if (s.kind == ShapeKind::circle) s.radius *= variant.factor;
    }
    quantize_points(out);
    refresh_marks(out);
    out = canonicalize(out);
    if (!scene_is_valid(out)) return std::nullopt;
    SceneEdit edit;
    edit.scene = out;
    edit.delta = "scale x" + format_number_trim9(variant.factor);
    return edit;
}

// --- square/rectangle attribute toggle ----------------------------------------

struct AttrVariant {
    std::string polygon;  // vertex labels
    ShapeAttr from = ShapeAttr::square;
    ShapeAttr to = ShapeAttr::rectangle;
    int axis = 0;          // 0: first side direction, 1: second side direction
    double factor = 1.5;   // ignored for rectangle -> square
};

std::vector<AttrVariant> attr_variants(const Scene& scene, Rng& rng) {
    std::vector<AttrVariant> variants;
    for (const auto& s : scene.shapes) {
        if (s.kind != ShapeKind::polygon) continue;
        if (s.attr == ShapeAttr::square) {
            for (int axis = 0; axis < 2; ++axis) {
                for (double f : kNumericFactors) {
                    variants.push_back({s.label(), ShapeAttr::square, ShapeAttr::rectangle, axis, f});
                }
            }
        } else if (s.attr == ShapeAttr::rectangle) {
            variants.push_back({s.label(), ShapeAttr::rectangle, ShapeAttr::square, 0, 1.0});
        }
    }
    shuffle(variants, rng);
    return variants;
}

std::optional<SceneEdit> apply_attr_toggle(const Scene& scene, const AttrVariant& variant) {
    Scene out = scene;
    int idx = shape_index_by_label(out, variant.polygon);
    if (idx < 0) return std::nullopt;
    Shape& poly = out.shapes[static_cast<std::size_t>(idx)];
    const Point* v0 = out.find_point(poly.vertices[0]);
    const Point* v1 = out.find_point(poly.vertices[variant.axis == 0 ? 1 : 3]);
    double ux = v1->x - v0->x, uy = v1->y - v0->y;
    double len = std::hypot(ux, uy);
    if (len == 0.0) return std::nullopt;
    ux /= len;
    uy /= len;

    double factor = variant.factor;
    if (variant.to == ShapeAttr::square) {
        // Stretch the first side to the length of the adjacent one.
        const Point* v1b = out.find_point(poly.vertices[1]);
        const Point* v2 = out.find_point(poly.vertices[2]);
        double side0 = std::hypot(v1b->x - v0->x, v1b->y - v0->y);
        double side1 = std::hypot(v2->x - v1b->x, v2->y - v1b->y);
        if (side0 == 0.0) return std::nullopt;
        factor = side1 / side0;
    }

    // Stretch every point along u; right angles aligned with u survive.
    for (auto& p : out.points) {
        double along = p.x * ux + p.y * uy;
        double delta = (factor - 1.0) * along;
        p.x += delta * ux;
        p.y += delta * uy;
    }
    poly.attr = variant.to;
    quantize_points(out);
    refresh_marks(out);
    bool added = false;
    repair_relations(out, idx, idx, added);
    out = canonicalize(out);
    if (!scene_is_valid(out)) return std::nullopt;
    int check = shape_index_by_label(out, variant.polygon);
    if (check < 0 ||
        attribute_holds(out, out.shapes[static_cast<std::size_t>(check)], variant.from))
        return std::nullopt;
    SceneEdit edit;
    edit.scene = out;
    edit.delta = "attr " + variant.polygon + " " + shape_attr_name(variant.from) + " -> " +
                 shape_attr_name(variant.to);
    return edit;
}

}  // namespace

SceneNegatives scene_perturb_negatives(const Scene& scene, int count, std::uint64_t seed,
                                       const std::string& positive_id) {
    if (count < 1) throw Error::usage("negative count must be >= 1");
    if (!scene_is_valid(scene)) throw Error::usage("cannot perturb an invalid scene");
    const Scene positive = canonicalize(scene);
    const std::string positive_text = serialize(positive);

    Rng rng(seed);
    auto swaps = label_swap_variants(positive, rng);
    auto rotations = rotate_variants(positive, rng);
    auto scales = scale_variants(positive, rng);
    auto attrs = attr_variants(positive, rng);
    std::size_t si = 0, ri = 0, ci = 0, ai = 0;

    SceneNegatives result;
    result.group.positive_id = positive_id;
    result.group.modality = Modality::image;
    std::set<std::string> seen{positive_text};

    int generator = 0;
    int exhausted_streak = 0;
    while (result.group.negatives.size() < static_cast<std::size_t>(count)) {
        std::optional<SceneEdit> edit;
        bool produced = false;
        switch (generator) {
            case 0:
                while (si < swaps.size() && !produced) {
                    edit = apply_label_swap(positive, swaps[si++]);
                    produced = edit && seen.insert(serialize(edit->scene)).second;
                }
                break;
            case 1:
                while (ri < rotations.size() && !produced) {
                    edit = apply_rotation(positive, rotations[ri++]);
                    produced = edit && seen.insert(serialize(edit->scene)).second;
                }
                break;
            case 2:
                while (ci < scales.size() && !produced) {
                    edit = apply_scale(positive, scales[ci++]);
                    produced = edit && seen.insert(serialize(edit->scene)).second;
                }
                break;
            default:
                while (ai < attrs.size() && !produced) {
                    edit = apply_attr_toggle(positive, attrs[ai++]);
                    produced = edit && seen.insert(serialize(edit->scene)).second;
                }
                break;
        }
        generator = (generator + 1) % 4;
        if (!produced) {
            if (++exhausted_streak >= 4) {
                throw Error::usage("no applicable scene edit left (requested " +
                                   std::to_string(count) + ", produced " +
                                   std::to_string(result.group.negatives.size()) + ")");
            }
            continue;
        }
        exhausted_streak = 0;
        NegativeItem item;
        item.id = positive_id + "_neg" + std::to_string(result.group.negatives.size());
        item.category = NegativeCategory::scene_perturb;
        item.delta = edit->delta;
        result.group.negatives.push_back(item);
        result.scenes.push_back(std::move(edit->scene));
    }
    return result;
}

bool verify_scene_delta(const Scene& positive, const Scene& negative, const std::string& delta) {
    if (!scene_is_valid(negative)) return false;
    const Scene pos = canonicalize(positive);
    const Scene neg = canonicalize(negative);
    if (serialize(pos) == serialize(neg)) return false;

    std::istringstream in(delta);
    std::string head;
    in >> head;
    if (head == "label-swap") {
        std::string pair;
        in >> pair;  // "A<->B"
        if (pair.size() != 5) return false;
        Scene swapped = rename_labels(pos, pair[0], pair[4]);
        return serialize(swapped) == serialize(neg);
    }
    if (head == "relation-break") {
        std::string spec, arrow, outcome;
        in >> spec >> arrow >> outcome;  // "parallel(AB,CD)" "->" "intersects|none"
        auto open = spec.find('(');
        auto comma = spec.find(',');
        auto close = spec.find(')');
        if (open == std::string::npos || comma == std::string::npos || close == std::string::npos)
            return false;
        auto kind = relation_kind_from_name(spec.substr(0, open));
        std::string lhs_label = spec.substr(open + 1, comma - open - 1);
        std::string rhs_label = spec.substr(comma + 1, close - comma - 1);
        int lhs = shape_index_by_label(neg, lhs_label);
        int rhs = shape_index_by_label(neg, rhs_label);
        if (!kind || lhs < 0 || rhs < 0) return false;
        for (const auto& r : neg.relations) {
            bool same_pair = (r.lhs == lhs && r.rhs == rhs) || (r.lhs == rhs && r.rhs == lhs);
            if (r.kind == *kind && same_pair) return false;  // still present
        }
        if (relation_holds(neg, Relation{*kind, lhs, rhs}, 10.0)) return false;  // not broken by 10x
        if (outcome == "intersects") {
            for (const auto& r : neg.relations) {
                bool same_pair = (r.lhs == lhs && r.rhs == rhs) || (r.lhs == rhs && r.rhs == lhs);
                if (r.kind == RelationKind::intersects && same_pair) return true;
            }
            return false;
        }
        return true;
    }
    if (head == "scale") {
        std::string factor_token;
        in >> factor_token;  // "x1.5"
        if (factor_token.empty() || factor_token[0] != 'x') return false;
        double f = std::strtod(factor_token.c_str() + 1, nullptr);
        if (pos.marks.size() != neg.marks.size()) return false;
        for (std::size_t i = 0; i < pos.marks.size(); ++i) {
            const auto& a = pos.marks[i];
            const auto& b = neg.marks[i];
            if (measure_target_label(a.target) != measure_target_label(b.target)) return false;
            double expect = a.quantity == Quantity::length ? a.value * f : a.value;
            if (std::fabs(b.value - expect) > 1e-6 * std::max(std::fabs(expect), 1.0)) return false;
        }
        return true;
    }
    if (head == "attr") {
        std::string verts, from, arrow, to;
        in >> verts >> from >> arrow >> to;
        int idx = shape_index_by_label(neg, verts);
        auto from_attr = shape_attr_from_name(from);
        auto to_attr = shape_attr_from_name(to);
        if (idx < 0 || !from_attr || !to_attr) return false;
        const Shape& poly = neg.shapes[static_cast<std::size_t>(idx)];
        if (poly.attr != *to_attr) return false;
        return !attribute_holds(neg, poly, *from_attr);
    }
    return false;
}

// ---------------------------------------------------------------------------
// Retrieval and random negatives
// ---------------------------------------------------------------------------

NegativeGroup retrieval_negatives(int query_index, const EmbeddingMatrix& embeddings, int k,
                                  int sample_from_top, std::uint64_t seed) {
    const int n = embeddings.size();
    if (query_index < 0 || query_index >= n) throw Error::usage("query row out of range");
    if (k < 1 || k >= n) throw Error::usage("k must satisfy 1 <= k < corpus size");
    int pool = sample_from_top > 0 ? sample_from_top : k;
    if (pool < k || pool >= n) throw Error::usage("sample_from_top must satisfy k <= m < corpus size");

    const double* q = embeddings.row(query_index);
    std::vector<std::pair<double, int>> scored;
    scored.reserve(static_cast<std::size_t>(n) - 1);
    for (int i = 0; i < n; ++i) {
        if (i == query_index) continue;
        double s = 0.0;
        const double* r = embeddings.row(i);
        for (int d = 0; d < embeddings.dim; ++d) s += q[d] * r[d];
        scored.emplace_back(s, i);
    }
    // Highest cosine first; ties broken by ascending row index.
    std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first > b.first;
        return a.second < b.second;
    });
    scored.resize(static_cast<std::size_t>(pool));

    std::vector<int> chosen;
    if (sample_from_top > 0) {
        std::vector<int> indices(scored.size());
        std::iota(indices.begin(), indices.end(), 0);
        Rng rng(seed);
        shuffle(indices, rng);
        indices.resize(static_cast<std::size_t>(k));
        std::sort(indices.begin(), indices.end());
        for (int i : indices) chosen.push_back(i);
    } else {
        for (int i = 0; i < k; ++i) chosen.push_back(i);
    }

    NegativeGroup group;
    group.positive_id = embeddings.ids[static_cast<std::size_t>(query_index)];
    group.modality = Modality::text;
    for (int pos : chosen) {
        const auto& [score, row] = scored[static_cast<std::size_t>(pos)];
        NegativeItem item;
        item.id = embeddings.ids[static_cast<std::size_t>(row)];
        item.category = NegativeCategory::retrieval;
        item.delta = "cos=" + format_number_trim9(score);
        group.negatives.push_back(item);
    }
    return group;
}

NegativeGroup random_negatives(const std::string& positive_id,
                               const std::vector<std::string>& corpus_ids, int count,
                               std::uint64_t seed) {
    if (count < 1) throw Error::usage("negative count must be >= 1");
    std::vector<std::string> pool;
    for (const auto& id : corpus_ids) {
        if (id != positive_id) pool.push_back(id);
    }
    if (static_cast<int>(pool.size()) < count)
        throw Error::usage("corpus too small for " + std::to_string(count) + " random negatives");
    Rng rng(seed);
    shuffle(pool, rng);

    NegativeGroup group;
    group.positive_id = positive_id;
    group.modality = Modality::text;
    for (int i = 0; i < count; ++i) {
        NegativeItem item;
        item.id = pool[static_cast<std::size_t>(i)];
        item.category = NegativeCategory::random;
        item.delta = "uniform";
        group.negatives.push_back(item);
    }
    return group;
}

}  // namespace geoneg

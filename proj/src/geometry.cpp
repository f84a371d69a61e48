#include "geoneg/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <tuple>

#include "geoneg/util.hpp"

namespace geoneg {

namespace {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;
};

Vec2 operator-(const Vec2& a, const Vec2& b) { return {a.x - b.x, a.y - b.y}; }

double dot(const Vec2& a, const Vec2& b) { return a.x * b.x + a.y * b.y; }
double cross(const Vec2& a, const Vec2& b) { return a.x * b.y - a.y * b.x; }
double norm(const Vec2& a) { return std::hypot(a.x, a.y); }

Vec2 point_vec(const Point& p) { return {p.x, p.y}; }

bool nearly_equal_rel(double a, double b, double tol) {
    double scale = std::max({std::fabs(a), std::fabs(b), 1e-12});
    return std::fabs(a - b) <= tol * scale;
}

const Point* point_or_null(const Scene& scene, char id) {
    for (const auto& p : scene.points) {
        if (p.id == id) return &p;
    }
    return nullptr;
}

// Side lengths of a polygon in listed order.
std::vector<double> polygon_sides(const Scene& scene, const Shape& poly) {
    std::vector<double> sides;
    const std::size_t n = poly.vertices.size();
    sides.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        const Point* a = point_or_null(scene, poly.vertices[i]);
        const Point* b = point_or_null(scene, poly.vertices[(i + 1) % n]);
        sides.push_back(norm(point_vec(*b) - point_vec(*a)));
    }
    return sides;
}

// Interior angle at vertex i, degrees in (0, 180) for non-degenerate corners.
double polygon_angle(const Scene& scene, const Shape& poly, std::size_t i) {
    const std::size_t n = poly.vertices.size();
    const Point* prev = point_or_null(scene, poly.vertices[(i + n - 1) % n]);
    const Point* cur = point_or_null(scene, poly.vertices[i]);
    const Point* next = point_or_null(scene, poly.vertices[(i + 1) % n]);
    Vec2 u = point_vec(*prev) - point_vec(*cur);
    Vec2 v = point_vec(*next) - point_vec(*cur);
    return std::atan2(std::fabs(cross(u, v)), dot(u, v)) * 180.0 / M_PI;
}

bool all_sides_equal(const std::vector<double>& sides, double tol) {
    for (std::size_t i = 1; i < sides.size(); ++i) {
        if (!nearly_equal_rel(sides[i], sides[0], tol)) return false;
    }
    return true;
}

bool all_angles_right(const Scene& scene, const Shape& poly, double tol) {
    for (std::size_t i = 0; i < poly.vertices.size(); ++i) {
        if (!nearly_equal_rel(polygon_angle(scene, poly, i), 90.0, tol)) return false;
    }
    return true;
}

// Try to match side sequences under one rotation/direction with a common
// ratio. Returns the ratio if matched.
std::optional<double> match_sides(const std::vector<double>& a, const std::vector<double>& b,
                                  double tol) {
    const std::size_t n = a.size();
    if (b.size() != n) return std::nullopt;
    for (int dir = 0; dir < 2; ++dir) {
        for (std::size_t off = 0; off < n; ++off) {
            double ratio = 0.0;
            bool ok = true;
            for (std::size_t i = 0; i < n; ++i) {
                std::size_t j = dir == 0 ? (i + off) % n : (off + n - i) % n;
                double r = a[i] / b[j];
                if (i == 0) {
                    ratio = r;
                } else if (!nearly_equal_rel(r, ratio, tol)) {
                    ok = false;
                    break;
                }
            }
            if (ok) return ratio;
        }
    }
    return std::nullopt;
}

int shape_kind_rank(ShapeKind kind) {
    switch (kind) {
        case ShapeKind::segment: return 0;
        case ShapeKind::polygon: return 1;
        case ShapeKind::circle: return 2;
    }
    return 3;
}

int relation_kind_rank(RelationKind kind) { return static_cast<int>(kind); }

int quantity_rank(Quantity q) { return q == Quantity::length ? 0 : 1; }

}  // namespace

const Point* Scene::find_point(char id) const { return point_or_null(*this, id); }

std::string shape_attr_name(ShapeAttr attr) {
    switch (attr) {
        case ShapeAttr::none: return "none";
        case ShapeAttr::square: return "square";
        case ShapeAttr::rectangle: return "rectangle";
        case ShapeAttr::right_triangle: return "right-triangle";
        case ShapeAttr::isosceles_triangle: return "isosceles-triangle";
        case ShapeAttr::equilateral_triangle: return "equilateral-triangle";
    }
    return "none";
}

std::optional<ShapeAttr> shape_attr_from_name(const std::string& name) {
    for (ShapeAttr a : {ShapeAttr::none, ShapeAttr::square, ShapeAttr::rectangle,
                        ShapeAttr::right_triangle, ShapeAttr::isosceles_triangle,
                        ShapeAttr::equilateral_triangle}) {
        if (shape_attr_name(a) == name) return a;
    }
    return std::nullopt;
}

std::string relation_kind_name(RelationKind kind) {
    switch (kind) {
        case RelationKind::parallel: return "parallel";
        case RelationKind::perpendicular: return "perpendicular";
        case RelationKind::similar: return "similar";
        case RelationKind::congruent: return "congruent";
        case RelationKind::intersects: return "intersects";
    }
    return "parallel";
}

std::optional<RelationKind> relation_kind_from_name(const std::string& name) {
    for (RelationKind k : {RelationKind::parallel, RelationKind::perpendicular,
                           RelationKind::similar, RelationKind::congruent,
                           RelationKind::intersects}) {
        if (relation_kind_name(k) == name) return k;
    }
    return std::nullopt;
}

std::string measure_target_label(const MeasureTarget& target) {
    if (const auto* seg = std::get_if<SegmentRef>(&target)) {
        return std::string{seg->a, seg->b};
    }
    const auto& ang = std::get<AngleRef>(target);
    return std::string{ang.a, ang.vertex, ang.c};
}

double measured_quantity(const Scene& scene, const MeasureTarget& target, Quantity quantity) {
    if (quantity == Quantity::length) {
        const auto* seg = std::get_if<SegmentRef>(&target);
        if (seg == nullptr) throw Error::usage("length target must be a point pair");
        const Point* a = scene.find_point(seg->a);
        const Point* b = scene.find_point(seg->b);
        if (a == nullptr || b == nullptr)
            throw Error::usage("unresolvable length target " + measure_target_label(target));
        return norm(point_vec(*b) - point_vec(*a));
    }
    const auto* ang = std::get_if<AngleRef>(&target);
    if (ang == nullptr) throw Error::usage("angle target must be a point triple");
    const Point* a = scene.find_point(ang->a);
    const Point* v = scene.find_point(ang->vertex);
    const Point* c = scene.find_point(ang->c);
    if (a == nullptr || v == nullptr || c == nullptr)
        throw Error::usage("unresolvable angle target " + measure_target_label(target));
    Vec2 u = point_vec(*a) - point_vec(*v);
    Vec2 w = point_vec(*c) - point_vec(*v);
    if (norm(u) == 0.0 || norm(w) == 0.0)
        throw Error::usage("degenerate angle target " + measure_target_label(target));
    return std::atan2(std::fabs(cross(u, w)), dot(u, w)) * 180.0 / M_PI;
}

bool segments_parallel(const Scene& scene, const Shape& a, const Shape& b, double margin) {
    Vec2 u = point_vec(*scene.find_point(a.vertices[1])) - point_vec(*scene.find_point(a.vertices[0]));
    Vec2 v = point_vec(*scene.find_point(b.vertices[1])) - point_vec(*scene.find_point(b.vertices[0]));
    return std::fabs(cross(u, v)) <= margin * kGeoTolerance * norm(u) * norm(v);
}

bool segments_perpendicular(const Scene& scene, const Shape& a, const Shape& b, double margin) {
    Vec2 u = point_vec(*scene.find_point(a.vertices[1])) - point_vec(*scene.find_point(a.vertices[0]));
    Vec2 v = point_vec(*scene.find_point(b.vertices[1])) - point_vec(*scene.find_point(b.vertices[0]));
    return std::fabs(dot(u, v)) <= margin * kGeoTolerance * norm(u) * norm(v);
}

bool segments_intersect(const Scene& scene, const Shape& a, const Shape& b) {
    Vec2 p = point_vec(*scene.find_point(a.vertices[0]));
    Vec2 r = point_vec(*scene.find_point(a.vertices[1])) - p;
    Vec2 q = point_vec(*scene.find_point(b.vertices[0]));
    Vec2 s = point_vec(*scene.find_point(b.vertices[1])) - q;
    double denom = cross(r, s);
    double scale = std::max(norm(r) * norm(s), 1e-12);
    if (std::fabs(denom) <= kGeoTolerance * scale) {
        // Parallel: count overlapping collinear segments as intersecting.
        if (std::fabs(cross(q - p, r)) > kGeoTolerance * norm(r) * std::max(norm(q - p), 1.0))
            return false;
        double rr = dot(r, r);
        double t0 = dot(q - p, r) / rr;
        double t1 = t0 + dot(s, r) / rr;
        if (t0 > t1) std::swap(t0, t1);
        return t1 >= -kGeoTolerance && t0 <= 1.0 + kGeoTolerance;
    }
    double t = cross(q - p, s) / denom;
    double u = cross(q - p, r) / denom;
    const double eps = kGeoTolerance;
    return t >= -eps && t <= 1.0 + eps && u >= -eps && u <= 1.0 + eps;
}

bool polygons_similar(const Scene& scene, const Shape& a, const Shape& b, double margin) {
    auto ratio = match_sides(polygon_sides(scene, a), polygon_sides(scene, b),
                             margin * kGeoTolerance);
    return ratio.has_value();
}

bool polygons_congruent(const Scene& scene, const Shape& a, const Shape& b, double margin) {
    auto ratio = match_sides(polygon_sides(scene, a), polygon_sides(scene, b),
                             margin * kGeoTolerance);
    return ratio.has_value() && nearly_equal_rel(*ratio, 1.0, margin * kGeoTolerance);
}

bool relation_holds(const Scene& scene, const Relation& relation, double margin) {
    const Shape& a = scene.shapes[static_cast<std::size_t>(relation.lhs)];
    const Shape& b = scene.shapes[static_cast<std::size_t>(relation.rhs)];
    switch (relation.kind) {
        case RelationKind::parallel: return segments_parallel(scene, a, b, margin);
        case RelationKind::perpendicular: return segments_perpendicular(scene, a, b, margin);
        case RelationKind::similar: return polygons_similar(scene, a, b, margin);
        case RelationKind::congruent: return polygons_congruent(scene, a, b, margin);
        case RelationKind::intersects: return segments_intersect(scene, a, b);
    }
    return false;
}

bool attribute_holds(const Scene& scene, const Shape& polygon, ShapeAttr attr) {
    if (polygon.kind != ShapeKind::polygon) return false;
    const std::size_t n = polygon.vertices.size();
    auto sides = polygon_sides(scene, polygon);
    const double tol = kGeoTolerance;
    switch (attr) {
        case ShapeAttr::none:
            return true;
        case ShapeAttr::square:
            return n == 4 && all_sides_equal(sides, tol) && all_angles_right(scene, polygon, tol);
        case ShapeAttr::rectangle:
            // Strictly a non-square rectangle, so square->rectangle swaps are
            // decisively false statements.
            return n == 4 && all_angles_right(scene, polygon, tol) &&
                   !all_sides_equal(sides, tol);
        case ShapeAttr::right_triangle: {
            if (n != 3) return false;
            for (std::size_t i = 0; i < 3; ++i) {
                if (nearly_equal_rel(polygon_angle(scene, polygon, i), 90.0, tol)) return true;
            }
            return false;
        }
        case ShapeAttr::isosceles_triangle: {
            if (n != 3) return false;
            if (all_sides_equal(sides, tol)) return false;  // equilateral excluded
            return nearly_equal_rel(sides[0], sides[1], tol) ||
                   nearly_equal_rel(sides[1], sides[2], tol) ||
                   nearly_equal_rel(sides[0], sides[2], tol);
        }
        case ShapeAttr::equilateral_triangle:
            return n == 3 && all_sides_equal(sides, tol);
    }
    return false;
}

std::vector<ShapeAttr> candidate_attributes(std::size_t vertex_count) {
    if (vertex_count == 3) {
        return {ShapeAttr::right_triangle, ShapeAttr::isosceles_triangle,
                ShapeAttr::equilateral_triangle};
    }
    if (vertex_count == 4) {
        return {ShapeAttr::square, ShapeAttr::rectangle};
    }
    return {};
}

std::vector<Violation> validate_scene(const Scene& scene) {
    std::vector<Violation> report;
    auto add = [&report](const std::string& code, const std::string& message, EntityKind entity,
                         int index) {
        report.push_back(Violation{code, message, entity, index});
    };

    // Points: unique labels, finite coordinates, contiguous A-prefix.
    std::set<char> labels;
    for (std::size_t i = 0; i < scene.points.size(); ++i) {
        const Point& p = scene.points[i];
        if (p.id < 'A' || p.id > 'Z') {
            add("point.bad-label", std::string("label must be A-Z: ") + p.id, EntityKind::point,
                static_cast<int>(i));
        }
        if (!labels.insert(p.id).second) {
            add("point.duplicate-label", std::string("duplicate label ") + p.id, EntityKind::point,
                static_cast<int>(i));
        }
        if (!std::isfinite(p.x) || !std::isfinite(p.y)) {
            add("point.nonfinite", std::string("non-finite coordinates on ") + p.id,
                EntityKind::point, static_cast<int>(i));
        }
    }
    if (!scene.points.empty()) {
        char expected = 'A';
        bool contiguous = true;
        for (char c : labels) {
            if (c != expected++) {
                contiguous = false;
                break;
            }
        }
        if (!contiguous || labels.size() != scene.points.size()) {
            add("labels.not-contiguous", "labels must be a contiguous prefix starting at A",
                EntityKind::scene, -1);
        }
    }
    bool points_ok = true;
    for (const auto& v : report) {
        if (v.code == "point.duplicate-label" || v.code == "point.nonfinite") points_ok = false;
    }

    // Shapes.
    std::vector<bool> shape_ok(scene.shapes.size(), true);
    for (std::size_t i = 0; i < scene.shapes.size(); ++i) {
        const Shape& s = scene.shapes[i];
        bool refs_ok = true;
        for (char v : s.vertices) {
            if (scene.find_point(v) == nullptr) {
                add("shape.unknown-point", std::string("unknown point ") + v, EntityKind::shape,
                    static_cast<int>(i));
                refs_ok = false;
            }
        }
        switch (s.kind) {
            case ShapeKind::segment:
                if (s.vertices.size() != 2) {
                    add("shape.arity", "segment needs exactly 2 vertices", EntityKind::shape,
                        static_cast<int>(i));
                    refs_ok = false;
                }
                break;
            case ShapeKind::polygon:
                if (s.vertices.size() < 3) {
                    add("shape.arity", "polygon needs at least 3 vertices", EntityKind::shape,
                        static_cast<int>(i));
                    refs_ok = false;
                }
                break;
            case ShapeKind::circle:
                if (s.vertices.size() != 1) {
                    add("shape.arity", "circle needs exactly one center point", EntityKind::shape,
                        static_cast<int>(i));
                    refs_ok = false;
                }
                if (!(s.radius > 0.0) || !std::isfinite(s.radius)) {
                    add("shape.bad-radius", "circle radius must be positive and finite",
                        EntityKind::shape, static_cast<int>(i));
                }
                break;
        }
        shape_ok[i] = refs_ok && points_ok;
        if (s.attr != ShapeAttr::none) {
            std::size_t want = (s.attr == ShapeAttr::square || s.attr == ShapeAttr::rectangle) ? 4 : 3;
            if (s.kind != ShapeKind::polygon || s.vertices.size() != want) {
                add("attr.kind-mismatch",
                    shape_attr_name(s.attr) + " requires a " + std::to_string(want) +
                        "-vertex polygon",
                    EntityKind::shape, static_cast<int>(i));
            } else if (shape_ok[i] && !attribute_holds(scene, s, s.attr)) {
                add("attr.inconsistent",
                    "declared " + shape_attr_name(s.attr) + " is not true of " + s.label(),
                    EntityKind::shape, static_cast<int>(i));
            }
        }
    }

    // Relations.
    for (std::size_t i = 0; i < scene.relations.size(); ++i) {
        const Relation& r = scene.relations[i];
        const int n = static_cast<int>(scene.shapes.size());
        if (r.lhs < 0 || r.lhs >= n || r.rhs < 0 || r.rhs >= n) {
            add("relation.unknown-shape", "relation operand does not resolve", EntityKind::relation,
                static_cast<int>(i));
            continue;
        }
        if (r.lhs == r.rhs) {
            add("relation.degenerate", "relation between a shape and itself",
                EntityKind::relation, static_cast<int>(i));
            continue;
        }
        const Shape& a = scene.shapes[static_cast<std::size_t>(r.lhs)];
        const Shape& b = scene.shapes[static_cast<std::size_t>(r.rhs)];
        bool type_ok = true;
        if (r.kind == RelationKind::parallel || r.kind == RelationKind::perpendicular ||
            r.kind == RelationKind::intersects) {
            type_ok = a.kind == ShapeKind::segment && b.kind == ShapeKind::segment;
        } else {
            type_ok = a.kind == ShapeKind::polygon && b.kind == ShapeKind::polygon &&
                      a.vertices.size() == b.vertices.size();
        }
        if (!type_ok) {
            add("relation.operand-type",
                relation_kind_name(r.kind) + " has incompatible operands " + a.label() + ", " +
                    b.label(),
                EntityKind::relation, static_cast<int>(i));
            continue;
        }
        if (shape_ok[static_cast<std::size_t>(r.lhs)] && shape_ok[static_cast<std::size_t>(r.rhs)] &&
            !relation_holds(scene, r)) {
            add("relation.untrue",
                relation_kind_name(r.kind) + "(" + a.label() + ", " + b.label() +
                    ") is not true of the coordinates",
                EntityKind::relation, static_cast<int>(i));
        }
    }

    // Marks.
    for (std::size_t i = 0; i < scene.marks.size(); ++i) {
        const NumericMark& m = scene.marks[i];
        bool resolved = true;
        for (char c : measure_target_label(m.target)) {
            if (scene.find_point(c) == nullptr) {
                add("mark.unknown-point", std::string("unknown point ") + c, EntityKind::mark,
                    static_cast<int>(i));
                resolved = false;
            }
        }
        if (!resolved || !points_ok) continue;
        if (m.quantity == Quantity::angle && !(m.value > 0.0 && m.value < 180.0)) {
            add("mark.angle-range", "angle mark must lie in (0, 180)", EntityKind::mark,
                static_cast<int>(i));
            continue;
        }
        if ((m.quantity == Quantity::length) != std::holds_alternative<SegmentRef>(m.target)) {
            add("mark.target-kind", "mark target kind does not match quantity", EntityKind::mark,
                static_cast<int>(i));
            continue;
        }
        double measured = 0.0;
        try {
            measured = measured_quantity(scene, m.target, m.quantity);
        } catch (const Error& e) {
            add("mark.unresolvable", e.what(), EntityKind::mark, static_cast<int>(i));
            continue;
        }
        if (!nearly_equal_rel(m.value, measured, kGeoTolerance)) {
            add("mark.value-mismatch",
                "mark " + measure_target_label(m.target) + " = " + format_number_trim9(m.value) +
                    " but measured " + format_number_trim9(measured),
                EntityKind::mark, static_cast<int>(i));
        }
    }

    return report;
}

Scene canonicalize(const Scene& scene) {
    Scene out = scene;
    std::sort(out.points.begin(), out.points.end(),
              [](const Point& a, const Point& b) { return a.id < b.id; });

    // Sort shapes, remembering the index remap for relations.
    std::vector<int> order(out.shapes.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
    auto shape_key = [&out](int i) {
        const Shape& s = out.shapes[static_cast<std::size_t>(i)];
        return std::make_tuple(s.label(), shape_kind_rank(s.kind), s.radius);
    };
    std::sort(order.begin(), order.end(),
              [&shape_key](int a, int b) { return shape_key(a) < shape_key(b); });
    std::vector<int> remap(out.shapes.size());
    std::vector<Shape> shapes;
    shapes.reserve(out.shapes.size());
    for (std::size_t pos = 0; pos < order.size(); ++pos) {
        remap[static_cast<std::size_t>(order[pos])] = static_cast<int>(pos);
        shapes.push_back(out.shapes[static_cast<std::size_t>(order[pos])]);
    }
    out.shapes = std::move(shapes);

    for (auto& r : out.relations) {
        r.lhs = remap[static_cast<std::size_t>(r.lhs)];
        r.rhs = remap[static_cast<std::size_t>(r.rhs)];
        // All relation kinds here are symmetric; normalize operand order.
        if (out.shapes[static_cast<std::size_t>(r.rhs)].label() <
            out.shapes[static_cast<std::size_t>(r.lhs)].label()) {
            std::swap(r.lhs, r.rhs);
        }
    }
    std::sort(out.relations.begin(), out.relations.end(),
              [&out](const Relation& a, const Relation& b) {
                  auto key = [&out](const Relation& r) {
                      return std::make_tuple(relation_kind_rank(r.kind),
                                             out.shapes[static_cast<std::size_t>(r.lhs)].label(),
                                             out.shapes[static_cast<std::size_t>(r.rhs)].label());
                  };
                  return key(a) < key(b);
              });

    std::sort(out.marks.begin(), out.marks.end(), [](const NumericMark& a, const NumericMark& b) {
        return std::make_tuple(measure_target_label(a.target), quantity_rank(a.quantity), a.value) <
               std::make_tuple(measure_target_label(b.target), quantity_rank(b.quantity), b.value);
    });
    return out;
}

std::optional<SceneTemplate> scene_template_from_name(const std::string& name) {
    for (SceneTemplate t : {SceneTemplate::triangle_with_cevian,
                            SceneTemplate::parallel_lines_transversal,
                            SceneTemplate::quadrilateral_with_diagonal,
                            SceneTemplate::circle_with_inscribed_triangle}) {
        if (scene_template_name(t) == name) return t;
    }
    return std::nullopt;
}

std::string scene_template_name(SceneTemplate t) {
    switch (t) {
        case SceneTemplate::triangle_with_cevian: return "triangle-with-cevian";
        case SceneTemplate::parallel_lines_transversal: return "parallel-lines-transversal";
        case SceneTemplate::quadrilateral_with_diagonal: return "quadrilateral-with-diagonal";
        case SceneTemplate::circle_with_inscribed_triangle: return "circle-with-inscribed-triangle";
    }
    throw Error::usage("unknown scene template");
}

namespace {

void quantize_scene(Scene& scene) {
    for (auto& p : scene.points) {
        p.x = quantize9(p.x);
        p.y = quantize9(p.y);
    }
    for (auto& s : scene.shapes) {
        if (s.kind == ShapeKind::circle) s.radius = quantize9(s.radius);
    }
    for (auto& m : scene.marks) m.value = quantize9(m.value);
}

void add_measured_mark(Scene& scene, MeasureTarget target, Quantity q) {
    NumericMark m;
    m.target = target;
    m.quantity = q;
    m.value = quantize9(measured_quantity(scene, target, q));
    scene.marks.push_back(m);
}

int shape_index(const Scene& scene, const std::string& label) {
    for (std::size_t i = 0; i < scene.shapes.size(); ++i) {
        if (scene.shapes[i].label() == label) return static_cast<int>(i);
    }
    throw Error::runtime("template internal: shape " + label + " not found");
}

// Right triangle at A with the altitude AD to the hypotenuse BC. Yields a
// perpendicular relation and a similar-triangles pair.
Scene make_triangle_with_cevian(Rng& rng) {
    Scene scene;
    double p = quantize9(rng.uniform(3.0, 6.0));          // |AB|
    double q = quantize9(p * rng.uniform(0.55, 0.85));    // |AC|, kept well off isosceles
    scene.points = {{'A', 0.0, 0.0}, {'B', p, 0.0}, {'C', 0.0, q}};
    // Foot of the altitude from A onto BC.
    double t = (p * p) / (p * p + q * q);
    scene.points.push_back({'D', p - t * p, t * q});

    Shape abc{ShapeKind::polygon, {'A', 'B', 'C'}, 0.0, ShapeAttr::right_triangle};
    Shape abd{ShapeKind::polygon, {'A', 'B', 'D'}, 0.0, ShapeAttr::none};
    Shape cad{ShapeKind::polygon, {'C', 'A', 'D'}, 0.0, ShapeAttr::none};
    Shape ad{ShapeKind::segment, {'A', 'D'}, 0.0, ShapeAttr::none};
    Shape bc{ShapeKind::segment, {'B', 'C'}, 0.0, ShapeAttr::none};
    scene.shapes = {abc, abd, cad, ad, bc};
    quantize_scene(scene);

    scene.relations.push_back(
        {RelationKind::perpendicular, shape_index(scene, "AD"), shape_index(scene, "BC")});
    scene.relations.push_back(
        {RelationKind::intersects, shape_index(scene, "AD"), shape_index(scene, "BC")});
    scene.relations.push_back(
        {RelationKind::similar, shape_index(scene, "ABD"), shape_index(scene, "CAD")});

    add_measured_mark(scene, SegmentRef{'A', 'B'}, Quantity::length);
    add_measured_mark(scene, SegmentRef{'A', 'C'}, Quantity::length);
    add_measured_mark(scene, AngleRef{'B', 'A', 'C'}, Quantity::angle);
    return scene;
}

// Two parallel segments AB, CD cut by a transversal EF with E on AB and F
// on CD.
Scene make_parallel_lines_transversal(Rng& rng) {
    Scene scene;
    double w = quantize9(rng.uniform(5.0, 9.0));
    double h = quantize9(rng.uniform(2.5, 5.0));
    double shift = quantize9(rng.uniform(-1.0, 1.0));
    scene.points = {{'A', 0.0, 0.0},
                    {'B', w, 0.0},
                    {'C', shift, h},
                    {'D', quantize9(shift + w), h}};
    double u = quantize9(rng.uniform(0.3, 0.7));
    double v = quantize9(rng.uniform(0.3, 0.7));
    Point e{'E', quantize9(u * w), 0.0};
    Point f{'F', quantize9(shift + v * w), h};
    scene.points.push_back(e);
    scene.points.push_back(f);

    scene.shapes = {Shape{ShapeKind::segment, {'A', 'B'}, 0.0, ShapeAttr::none},
                    Shape{ShapeKind::segment, {'C', 'D'}, 0.0, ShapeAttr::none},
                    Shape{ShapeKind::segment, {'E', 'F'}, 0.0, ShapeAttr::none}};
    quantize_scene(scene);

    scene.relations.push_back(
        {RelationKind::parallel, shape_index(scene, "AB"), shape_index(scene, "CD")});
    scene.relations.push_back(
        {RelationKind::intersects, shape_index(scene, "AB"), shape_index(scene, "EF")});
    scene.relations.push_back(
        {RelationKind::intersects, shape_index(scene, "CD"), shape_index(scene, "EF")});

    add_measured_mark(scene, SegmentRef{'A', 'B'}, Quantity::length);
    add_measured_mark(scene, SegmentRef{'E', 'F'}, Quantity::length);
    add_measured_mark(scene, AngleRef{'F', 'E', 'B'}, Quantity::angle);
    return scene;
}

// Axis-aligned square or rectangle ABCD with both diagonals drawn; the
// diagonal AC splits it into congruent triangles.
Scene make_quadrilateral_with_diagonal(Rng& rng) {
    Scene scene;
    bool square = rng.uniform() < 0.5;
    double a = quantize9(rng.uniform(3.0, 7.0));
    double b = square ? a : quantize9(a * rng.uniform(1.35, 1.9));
    scene.points = {{'A', 0.0, 0.0}, {'B', b, 0.0}, {'C', b, a}, {'D', 0.0, a}};

    Shape quad{ShapeKind::polygon, {'A', 'B', 'C', 'D'}, 0.0,
               square ? ShapeAttr::square : ShapeAttr::rectangle};
    Shape abc{ShapeKind::polygon, {'A', 'B', 'C'}, 0.0, ShapeAttr::right_triangle};
    Shape acd{ShapeKind::polygon, {'A', 'C', 'D'}, 0.0, ShapeAttr::none};
    Shape ac{ShapeKind::segment, {'A', 'C'}, 0.0, ShapeAttr::none};
    Shape bd{ShapeKind::segment, {'B', 'D'}, 0.0, ShapeAttr::none};
    scene.shapes = {quad, abc, acd, ac, bd};
    quantize_scene(scene);

    scene.relations.push_back(
        {RelationKind::intersects, shape_index(scene, "AC"), shape_index(scene, "BD")});
    scene.relations.push_back(
        {RelationKind::congruent, shape_index(scene, "ABC"), shape_index(scene, "ACD")});
    if (square) {
        scene.relations.push_back(
            {RelationKind::perpendicular, shape_index(scene, "AC"), shape_index(scene, "BD")});
    }

    add_measured_mark(scene, SegmentRef{'A', 'B'}, Quantity::length);
    add_measured_mark(scene, SegmentRef{'B', 'C'}, Quantity::length);
    add_measured_mark(scene, AngleRef{'A', 'B', 'C'}, Quantity::angle);
    return scene;
}

// Circle centered at D with inscribed triangle ABC where BC is a diameter,
// so the angle at A is right (Thales).
Scene make_circle_with_inscribed_triangle(Rng& rng) {
    Scene scene;
    double r = quantize9(rng.uniform(2.5, 5.0));
    double cx = quantize9(rng.uniform(-1.0, 1.0));
    double cy = quantize9(rng.uniform(-1.0, 1.0));
    double theta = rng.uniform(0.05, M_PI / 2 - 0.05);
    double phi = rng.uniform(M_PI / 2 + 0.3, 3 * M_PI / 2 - 0.3);
    Point b{'B', quantize9(cx + r * std::cos(theta)), quantize9(cy + r * std::sin(theta))};
    // Exact antipode of the quantized B keeps BC passing through the center.
    Point c{'C', quantize9(2 * cx - b.x), quantize9(2 * cy - b.y)};
    Point a{'A', quantize9(cx + r * std::cos(phi)), quantize9(cy + r * std::sin(phi))};
    scene.points = {a, b, c, {'D', cx, cy}};

    // BC is a diameter, so the inscribed angle at A is right (Thales).
    Shape circle{ShapeKind::circle, {'D'}, r, ShapeAttr::none};
    Shape abc{ShapeKind::polygon, {'A', 'B', 'C'}, 0.0, ShapeAttr::right_triangle};
    Shape ab{ShapeKind::segment, {'A', 'B'}, 0.0, ShapeAttr::none};
    Shape ac{ShapeKind::segment, {'A', 'C'}, 0.0, ShapeAttr::none};
    Shape bc{ShapeKind::segment, {'B', 'C'}, 0.0, ShapeAttr::none};
    scene.shapes = {circle, abc, ab, ac, bc};
    quantize_scene(scene);

    scene.relations.push_back(
        {RelationKind::perpendicular, shape_index(scene, "AB"), shape_index(scene, "AC")});
    scene.relations.push_back(
        {RelationKind::intersects, shape_index(scene, "AB"), shape_index(scene, "BC")});

    add_measured_mark(scene, SegmentRef{'B', 'C'}, Quantity::length);
    add_measured_mark(scene, AngleRef{'B', 'A', 'C'}, Quantity::angle);
    add_measured_mark(scene, SegmentRef{'A', 'B'}, Quantity::length);
    return scene;
}

}  // namespace

Scene random_scene(std::uint64_t seed, SceneTemplate scene_template) {
    // Mix the template into the stream so (seed, t1) and (seed, t2) differ.
    Rng rng(seed * 0x9e3779b97f4a7c15ull + static_cast<std::uint64_t>(scene_template) + 1);
    Scene scene;
    switch (scene_template) {
        case SceneTemplate::triangle_with_cevian:
            scene = make_triangle_with_cevian(rng);
            break;
        case SceneTemplate::parallel_lines_transversal:
            scene = make_parallel_lines_transversal(rng);
            break;
        case SceneTemplate::quadrilateral_with_diagonal:
            scene = make_quadrilateral_with_diagonal(rng);
            break;
        case SceneTemplate::circle_with_inscribed_triangle:
            scene = make_circle_with_inscribed_triangle(rng);
            break;
    }
    scene.seed = seed;
    return canonicalize(scene);
}

}  // namespace geoneg

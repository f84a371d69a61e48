#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace geoneg {

// Relative tolerance for all geometric consistency checks: attribute truth,
// relation truth, and numeric-mark agreement.
inline constexpr double kGeoTolerance = 1e-6;

struct Point {
    char id = 'A';  // single uppercase letter, unique per scene
    double x = 0.0;
    double y = 0.0;

    bool operator==(const Point&) const = default;
};

enum class ShapeKind { segment, polygon, circle };

enum class ShapeAttr {
    none,
    square,
    rectangle,
    right_triangle,
    isosceles_triangle,
    equilateral_triangle,
};

struct Shape {
    ShapeKind kind = ShapeKind::segment;
    std::vector<char> vertices;  // segment: 2 ids; polygon: >=3; circle: center id only
    double radius = 0.0;         // circles only
    ShapeAttr attr = ShapeAttr::none;

    bool operator==(const Shape&) const = default;

    // Vertex labels as a string ("AB", "ABCD", "D"). Used for canonical
    // ordering, DSL operands and captions.
    std::string label() const { return std::string(vertices.begin(), vertices.end()); }
};

enum class RelationKind { parallel, perpendicular, similar, congruent, intersects };

struct Relation {
    RelationKind kind = RelationKind::parallel;
    int lhs = 0;  // index into Scene::shapes
    int rhs = 0;

    bool operator==(const Relation&) const = default;
};

enum class Quantity { length, angle };

// A measurement target: segment endpoints for lengths, an ordered point
// triple (vertex in the middle) for angles.
struct SegmentRef {
    char a = 'A';
    char b = 'B';
    bool operator==(const SegmentRef&) const = default;
};

struct AngleRef {
    char a = 'A';
    char vertex = 'B';
    char c = 'C';
    bool operator==(const AngleRef&) const = default;
};

using MeasureTarget = std::variant<SegmentRef, AngleRef>;

struct NumericMark {
    MeasureTarget target;
    Quantity quantity = Quantity::length;
    double value = 0.0;

    bool operator==(const NumericMark&) const = default;
};

struct Scene {
    std::vector<Point> points;
    std::vector<Shape> shapes;
    std::vector<Relation> relations;
    std::vector<NumericMark> marks;
    std::uint64_t seed = 0;

    bool operator==(const Scene&) const = default;

    const Point* find_point(char id) const;
};

// Where in a scene a validation violation was found.
enum class EntityKind { scene, point, shape, relation, mark };

struct Violation {
    std::string code;     // machine-readable, e.g. "attr.inconsistent"
    std::string message;  // human-readable detail
    EntityKind entity = EntityKind::scene;
    int index = -1;  // index into the corresponding scene list, -1 for scene-level
};

// Lists every broken invariant. Empty report means the scene is valid.
std::vector<Violation> validate_scene(const Scene& scene);

inline bool scene_is_valid(const Scene& scene) { return validate_scene(scene).empty(); }

// Euclidean length or interior angle (degrees) derived from coordinates.
// Throws Error(usage) if the target does not resolve or is degenerate.
double measured_quantity(const Scene& scene, const MeasureTarget& target, Quantity quantity);

// Geometric truth predicates at kGeoTolerance. `margin` scales the tolerance
// (negatives are broken by >= 10x, checked with margin = 10).
bool segments_parallel(const Scene& scene, const Shape& a, const Shape& b, double margin = 1.0);
bool segments_perpendicular(const Scene& scene, const Shape& a, const Shape& b, double margin = 1.0);
bool segments_intersect(const Scene& scene, const Shape& a, const Shape& b);
bool polygons_similar(const Scene& scene, const Shape& a, const Shape& b, double margin = 1.0);
bool polygons_congruent(const Scene& scene, const Shape& a, const Shape& b, double margin = 1.0);
bool relation_holds(const Scene& scene, const Relation& relation, double margin = 1.0);

// True iff `attr` holds for the polygon's coordinates. Exclusive readings:
// rectangle excludes squares, isosceles excludes equilateral, so swapping an
// attribute always produces a decisively false statement.
bool attribute_holds(const Scene& scene, const Shape& polygon, ShapeAttr attr);

// Attributes that could be declared on a polygon of this vertex count.
std::vector<ShapeAttr> candidate_attributes(std::size_t vertex_count);

// Sorts points/shapes/relations/marks into canonical order and normalizes
// symmetric relation operands. Structural scene equality is equality of
// canonical forms.
Scene canonicalize(const Scene& scene);

enum class SceneTemplate {
    triangle_with_cevian,
    parallel_lines_transversal,
    quadrilateral_with_diagonal,
    circle_with_inscribed_triangle,
};

std::optional<SceneTemplate> scene_template_from_name(const std::string& name);
std::string scene_template_name(SceneTemplate t);

// Deterministic template instantiation. The returned scene is canonical,
// passes validate_scene, and carries >=1 relation and >=2 numeric marks.
Scene random_scene(std::uint64_t seed, SceneTemplate scene_template);

std::string shape_attr_name(ShapeAttr attr);
std::optional<ShapeAttr> shape_attr_from_name(const std::string& name);
std::string relation_kind_name(RelationKind kind);
std::optional<RelationKind> relation_kind_from_name(const std::string& name);
std::string measure_target_label(const MeasureTarget& target);

}  // namespace geoneg

#include "geoneg/caption.hpp"

#include <algorithm>
#include <sstream>

#include "geoneg/util.hpp"

namespace geoneg {

namespace {

std::vector<std::string> split_payload(const std::string& payload) {
    std::vector<std::string> parts;
    std::string cur;
    for (char c : payload) {
        if (c == ':') {
            parts.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    parts.push_back(cur);
    return parts;
}

std::string polygon_noun(std::size_t n) {
    switch (n) {
        case 3: return "triangle";
        case 4: return "quadrilateral";
        case 5: return "pentagon";
        case 6: return "hexagon";
        default: return std::to_string(n) + "-gon";
    }
}

std::string attr_phrase(const std::string& attr) {
    if (attr == "square") return "a square";
    if (attr == "rectangle") return "a rectangle";
    if (attr == "right-triangle") return "a right triangle";
    if (attr == "isosceles-triangle") return "an isosceles triangle";
    if (attr == "equilateral-triangle") return "an equilateral triangle";
    return attr;
}

}  // namespace

std::string fact_kind_name(FactKind kind) {
    switch (kind) {
        case FactKind::shape: return "shape";
        case FactKind::relation: return "relation";
        case FactKind::mark: return "mark";
        case FactKind::ordering: return "ordering";
    }
    return "shape";
}

std::string sentence_for_fact(const Fact& fact) {
    auto parts = split_payload(fact.payload);
    switch (fact.kind) {
        case FactKind::shape: {
            const std::string& shape_kind = parts.at(1);
            if (shape_kind == "segment") {
                return parts.at(2) + " is a segment";
            }
            if (shape_kind == "circle") {
                return "circle centered at " + parts.at(2) + " has radius " + parts.at(3);
            }
            const std::string& verts = parts.at(2);
            const std::string& attr = parts.at(3);
            if (attr == "none") {
                return verts + " is a " + polygon_noun(verts.size());
            }
            return polygon_noun(verts.size()) + " " + verts + " is " + attr_phrase(attr);
        }
        case FactKind::relation: {
            const std::string& kind = parts.at(1);
            const std::string& lhs = parts.at(2);
            const std::string& rhs = parts.at(3);
            if (kind == "parallel") return lhs + " is parallel to " + rhs;
            if (kind == "perpendicular") return lhs + " is perpendicular to " + rhs;
            if (kind == "similar") return lhs + " is similar to " + rhs;
            if (kind == "congruent") return lhs + " is congruent to " + rhs;
            return lhs + " intersects " + rhs;
        }
        case FactKind::mark: {
            const std::string& quantity = parts.at(1);
            const std::string& target = parts.at(2);
            const std::string& value = parts.at(3);
            if (quantity == "length") return target + " = " + value;
            return "angle " + target + " = " + value + " degrees";
        }
        case FactKind::ordering:
            return "the vertex order is " + parts.at(1);
    }
    return fact.payload;
}

std::string caption_text(const std::vector<Fact>& facts) {
    std::string text;
    for (std::size_t i = 0; i < facts.size(); ++i) {
        if (i > 0) text += "; ";
        text += sentence_for_fact(facts[i]);
    }
    return text;
}

Caption caption(const Scene& scene) {
    if (!scene_is_valid(scene)) throw Error::usage("cannot caption an invalid scene");
    const Scene c = canonicalize(scene);
    Caption cap;

    for (const auto& s : c.shapes) {
        Fact f;
        f.kind = FactKind::shape;
        switch (s.kind) {
            case ShapeKind::segment:
                f.payload = "shape:segment:" + s.label();
                break;
            case ShapeKind::polygon:
                f.payload = "shape:polygon:" + s.label() + ":" + shape_attr_name(s.attr);
                break;
            case ShapeKind::circle:
                f.payload = "shape:circle:" + s.label() + ":" + format_number_trim9(s.radius);
                break;
        }
        cap.facts.push_back(f);
        if (s.kind == ShapeKind::polygon) {
            cap.facts.push_back({FactKind::ordering, "ordering:" + s.label()});
        }
    }
    for (const auto& r : c.relations) {
        const Shape& lhs = c.shapes[static_cast<std::size_t>(r.lhs)];
        const Shape& rhs = c.shapes[static_cast<std::size_t>(r.rhs)];
        cap.facts.push_back({FactKind::relation, "relation:" + relation_kind_name(r.kind) + ":" +
                                                     lhs.label() + ":" + rhs.label()});
    }
    for (const auto& m : c.marks) {
        cap.facts.push_back(
            {FactKind::mark, std::string("mark:") +
                                 (m.quantity == Quantity::length ? "length" : "angle") + ":" +
                                 measure_target_label(m.target) + ":" +
                                 format_number_trim9(m.value)});
    }

    cap.text = caption_text(cap.facts);
    return cap;
}

bool cyclically_equal(const std::string& a, const std::string& b) {
    if (a.size() != b.size()) return false;
    if (a.empty()) return true;
    const std::size_t n = a.size();
    std::string reversed(a.rbegin(), a.rend());
    for (std::size_t off = 0; off < n; ++off) {
        bool fwd = true, rev = true;
        for (std::size_t i = 0; i < n && (fwd || rev); ++i) {
            if (a[(i + off) % n] != b[i]) fwd = false;
            if (reversed[(i + off) % n] != b[i]) rev = false;
        }
        if (fwd || rev) return true;
    }
    return false;
}

bool caption_equals_modulo_cyclic(const Caption& a, const Caption& b) {
    if (a.facts.size() != b.facts.size()) return false;
    for (std::size_t i = 0; i < a.facts.size(); ++i) {
        const Fact& fa = a.facts[i];
        const Fact& fb = b.facts[i];
        if (fa.kind != fb.kind) return false;
        if (fa.kind == FactKind::ordering) {
            auto pa = split_payload(fa.payload);
            auto pb = split_payload(fb.payload);
            if (!cyclically_equal(pa.at(1), pb.at(1))) return false;
            continue;
        }
        if (fa.kind == FactKind::shape) {
            auto pa = split_payload(fa.payload);
            auto pb = split_payload(fb.payload);
            if (pa.at(1) != pb.at(1)) return false;
            if (pa.at(1) == "polygon") {
                // Polygon naming may rotate with the ordering; attribute must
                // match exactly.
                if (pa.at(3) != pb.at(3)) return false;
                if (!cyclically_equal(pa.at(2), pb.at(2))) return false;
                continue;
            }
        }
        if (fa.payload != fb.payload) return false;
    }
    return true;
}

}  // namespace geoneg

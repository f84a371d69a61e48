#include "geoneg/render.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>
#include <sstream>

#include "geoneg/util.hpp"

namespace geoneg {

namespace {

struct Px {
    double x = 0.0;
    double y = 0.0;
};

std::string fmt_px(double v) {
    if (v == 0.0) v = 0.0;
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return std::string(buf);
}

constexpr double kLabelOffsetPx = 12.0;
constexpr double kAngleArcRadiusPx = 20.0;

struct Mapper {
    double scale = 1.0;
    double world_cx = 0.0, world_cy = 0.0;
    double px_cx = 0.0, px_cy = 0.0;

    Px map(double x, double y) const {
        return {px_cx + (x - world_cx) * scale, px_cy - (y - world_cy) * scale};
    }
};

}  // namespace

std::string render(const Scene& scene, const RenderOptions& options) {
    if (options.canvas_width <= 0 || options.canvas_height <= 0)
        throw Error::usage("canvas dimensions must be positive");
    if (options.margin_fraction < 0.0 || options.margin_fraction > 0.4)
        throw Error::usage("margin_fraction must lie in [0, 0.4]");
    if (!scene_is_valid(scene)) throw Error::usage("cannot render an invalid scene");
    if (scene.points.empty()) throw Error::usage("cannot render an empty scene");

    const Scene c = canonicalize(scene);

    double min_x = c.points.front().x, max_x = min_x;
    double min_y = c.points.front().y, max_y = min_y;
    auto grow = [&](double x, double y) {
        min_x = std::min(min_x, x);
        max_x = std::max(max_x, x);
        min_y = std::min(min_y, y);
        max_y = std::max(max_y, y);
    };
    for (const auto& p : c.points) grow(p.x, p.y);
    for (const auto& s : c.shapes) {
        if (s.kind == ShapeKind::circle) {
            const Point* ctr = c.find_point(s.vertices[0]);
            grow(ctr->x - s.radius, ctr->y - s.radius);
            grow(ctr->x + s.radius, ctr->y + s.radius);
        }
    }
    const double extent_x = max_x - min_x;
    const double extent_y = max_y - min_y;
    if (extent_x == 0.0 && extent_y == 0.0)
        throw Error::usage("zero-extent scene: all points coincident");

    const double w = static_cast<double>(options.canvas_width);
    const double h = static_cast<double>(options.canvas_height);
    const double usable_x = w * (1.0 - 2.0 * options.margin_fraction);
    const double usable_y = h * (1.0 - 2.0 * options.margin_fraction);
    double scale = 0.0;
    if (extent_x == 0.0) {
        scale = usable_y / extent_y;
    } else if (extent_y == 0.0) {
        scale = usable_x / extent_x;
    } else {
        scale = std::min(usable_x / extent_x, usable_y / extent_y);
    }
    Mapper m{scale, (min_x + max_x) / 2.0, (min_y + max_y) / 2.0, w / 2.0, h / 2.0};

    auto point_px = [&](char id) {
        const Point* p = c.find_point(id);
        return m.map(p->x, p->y);
    };

    std::ostringstream out;
    out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << options.canvas_width
        << "\" height=\"" << options.canvas_height << "\" viewBox=\"0 0 "
        << options.canvas_width << " " << options.canvas_height << "\">\n";

    // Shapes, in canonical order.
    for (const auto& s : c.shapes) {
        switch (s.kind) {
            case ShapeKind::segment: {
                Px a = point_px(s.vertices[0]);
                Px b = point_px(s.vertices[1]);
                out << "<line x1=\"" << fmt_px(a.x) << "\" y1=\"" << fmt_px(a.y) << "\" x2=\""
                    << fmt_px(b.x) << "\" y2=\"" << fmt_px(b.y)
                    << "\" stroke=\"black\" stroke-width=\"1.5\"/>\n";
                break;
            }
            case ShapeKind::polygon: {
                out << "<polygon points=\"";
                for (std::size_t i = 0; i < s.vertices.size(); ++i) {
                    Px p = point_px(s.vertices[i]);
                    if (i > 0) out << ' ';
                    out << fmt_px(p.x) << ',' << fmt_px(p.y);
                }
                out << "\" fill=\"none\" stroke=\"black\" stroke-width=\"1.5\"/>\n";
                break;
            }
            case ShapeKind::circle: {
                Px ctr = point_px(s.vertices[0]);
                out << "<circle cx=\"" << fmt_px(ctr.x) << "\" cy=\"" << fmt_px(ctr.y)
                    << "\" r=\"" << fmt_px(s.radius * scale)
                    << "\" fill=\"none\" stroke=\"black\" stroke-width=\"1.5\"/>\n";
                break;
            }
        }
    }

    // Point labels, offset away from the centroid of incident shapes.
    for (const auto& p : c.points) {
        Px pos = m.map(p.x, p.y);
        double acc_x = 0.0, acc_y = 0.0;
        int incident = 0;
        for (const auto& s : c.shapes) {
            bool touches = std::find(s.vertices.begin(), s.vertices.end(), p.id) !=
                           s.vertices.end();
            if (!touches) continue;
            double sx = 0.0, sy = 0.0;
            for (char v : s.vertices) {
                Px q = point_px(v);
                sx += q.x;
                sy += q.y;
            }
            acc_x += sx / static_cast<double>(s.vertices.size());
            acc_y += sy / static_cast<double>(s.vertices.size());
            ++incident;
        }
        double dx = 1.0, dy = -1.0;
        if (incident > 0) {
            double cx = acc_x / incident, cy = acc_y / incident;
            dx = pos.x - cx;
            dy = pos.y - cy;
        }
        double len = std::hypot(dx, dy);
        if (len < 1e-9) {
            dx = 1.0;
            dy = -1.0;
            len = std::sqrt(2.0);
        }
        double lx = pos.x + dx / len * kLabelOffsetPx;
        double ly = pos.y + dy / len * kLabelOffsetPx;
        out << "<text x=\"" << fmt_px(lx) << "\" y=\"" << fmt_px(ly)
            << "\" font-family=\"sans-serif\" font-size=\"14\" text-anchor=\"middle\" "
               "dominant-baseline=\"middle\">"
            << p.id << "</text>\n";
    }

    // Numeric marks.
    if (options.include_numeric_marks) {
        for (const auto& mark : c.marks) {
            if (mark.quantity == Quantity::length) {
                const auto& seg = std::get<SegmentRef>(mark.target);
                Px a = point_px(seg.a);
                Px b = point_px(seg.b);
                double mx = (a.x + b.x) / 2.0, my = (a.y + b.y) / 2.0;
                // Perpendicular offset keeps the value off the stroke.
                double ux = b.x - a.x, uy = b.y - a.y;
                double len = std::hypot(ux, uy);
                double nx = len > 1e-9 ? -uy / len : 0.0;
                double ny = len > 1e-9 ? ux / len : -1.0;
                out << "<text class=\"mark\" x=\"" << fmt_px(mx + nx * 10.0) << "\" y=\""
                    << fmt_px(my + ny * 10.0)
                    << "\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"middle\" "
                       "dominant-baseline=\"middle\">"
                    << format_number_trim9(mark.value) << "</text>\n";
            } else {
                const auto& ang = std::get<AngleRef>(mark.target);
                Px v = point_px(ang.vertex);
                Px pa = point_px(ang.a);
                Px pc = point_px(ang.c);
                double a1 = std::atan2(pa.y - v.y, pa.x - v.x);
                double a2 = std::atan2(pc.y - v.y, pc.x - v.x);
                Px s0{v.x + kAngleArcRadiusPx * std::cos(a1),
                      v.y + kAngleArcRadiusPx * std::sin(a1)};
                Px s1{v.x + kAngleArcRadiusPx * std::cos(a2),
                      v.y + kAngleArcRadiusPx * std::sin(a2)};
                // Interior angles are < 180 degrees, so the short sweep is
                // always the drawn one.
                double delta = a2 - a1;
                while (delta <= -M_PI) delta += 2.0 * M_PI;
                while (delta > M_PI) delta -= 2.0 * M_PI;
                int sweep = delta >= 0.0 ? 1 : 0;
                out << "<path class=\"mark\" d=\"M " << fmt_px(s0.x) << ' ' << fmt_px(s0.y)
                    << " A " << fmt_px(kAngleArcRadiusPx) << ' ' << fmt_px(kAngleArcRadiusPx)
                    << " 0 0 " << sweep << ' ' << fmt_px(s1.x) << ' ' << fmt_px(s1.y)
                    << "\" fill=\"none\" stroke=\"gray\" stroke-width=\"1\"/>\n";
                double mid = a1 + delta / 2.0;
                out << "<text class=\"mark\" x=\""
                    << fmt_px(v.x + 32.0 * std::cos(mid)) << "\" y=\""
                    << fmt_px(v.y + 32.0 * std::sin(mid))
                    << "\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"middle\" "
                       "dominant-baseline=\"middle\">"
                    << format_number_trim9(mark.value) << "&#176;</text>\n";
            }
        }
    }

    out << "</svg>\n";
    return out.str();
}

namespace {

// Minimal attribute scanner for the SVG subset emitted by render().
struct SvgElement {
    std::string tag;
    std::map<std::string, std::string> attrs;
};

std::vector<SvgElement> scan_elements(const std::string& svg) {
    std::vector<SvgElement> elements;
    std::size_t i = 0;
    while (i < svg.size()) {
        if (svg[i] != '<') {
            ++i;
            continue;
        }
        std::size_t close = svg.find('>', i);
        if (close == std::string::npos) throw Error::usage("malformed SVG: unterminated tag");
        std::string body = svg.substr(i + 1, close - i - 1);
        i = close + 1;
        if (body.empty() || body[0] == '/' || body[0] == '?' || body[0] == '!') continue;
        SvgElement el;
        std::size_t j = 0;
        while (j < body.size() && !std::isspace(static_cast<unsigned char>(body[j])) &&
               body[j] != '/')
            ++j;
        el.tag = body.substr(0, j);
        while (j < body.size()) {
            while (j < body.size() && (std::isspace(static_cast<unsigned char>(body[j])) ||
                                       body[j] == '/'))
                ++j;
            std::size_t eq = body.find('=', j);
            if (eq == std::string::npos) break;
            std::string name = body.substr(j, eq - j);
            std::size_t q1 = body.find('"', eq);
            if (q1 == std::string::npos) throw Error::usage("malformed SVG: unquoted attribute");
            std::size_t q2 = body.find('"', q1 + 1);
            if (q2 == std::string::npos) throw Error::usage("malformed SVG: unterminated attribute");
            el.attrs[name] = body.substr(q1 + 1, q2 - q1 - 1);
            j = q2 + 1;
        }
        elements.push_back(std::move(el));
    }
    return elements;
}

}  // namespace

SvgFeatures rasterize_features(const std::string& svg) {
    if (svg.find("<svg") == std::string::npos)
        throw Error::usage("malformed SVG: missing <svg> root");
    SvgFeatures features;
    std::set<std::string> strokes;
    bool have_box = false;
    auto grow = [&](double x, double y) {
        if (!have_box) {
            features.min_x = features.max_x = x;
            features.min_y = features.max_y = y;
            have_box = true;
            return;
        }
        features.min_x = std::min(features.min_x, x);
        features.max_x = std::max(features.max_x, x);
        features.min_y = std::min(features.min_y, y);
        features.max_y = std::max(features.max_y, y);
    };

    for (const auto& el : scan_elements(svg)) {
        if (el.tag == "svg") continue;
        features.element_counts[el.tag] += 1;
        if (el.tag == "text") features.text_label_count += 1;
        auto cls = el.attrs.find("class");
        if (cls != el.attrs.end() && cls->second == "mark") features.mark_element_count += 1;
        auto stroke = el.attrs.find("stroke");
        if (stroke != el.attrs.end()) strokes.insert(stroke->second);

        auto num = [&el](const char* name) -> std::optional<double> {
            auto it = el.attrs.find(name);
            if (it == el.attrs.end()) return std::nullopt;
            return std::strtod(it->second.c_str(), nullptr);
        };
        if (auto x = num("x")) {
            if (auto y = num("y")) grow(*x, *y);
        }
        if (auto x1 = num("x1")) {
            if (auto y1 = num("y1")) grow(*x1, *y1);
        }
        if (auto x2 = num("x2")) {
            if (auto y2 = num("y2")) grow(*x2, *y2);
        }
        if (auto cx = num("cx")) {
            if (auto cy = num("cy")) {
                double r = num("r").value_or(0.0);
                grow(*cx - r, *cy - r);
                grow(*cx + r, *cy + r);
            }
        }
        auto pts = el.attrs.find("points");
        if (pts != el.attrs.end()) {
            const char* s = pts->second.c_str();
            char* end = nullptr;
            while (*s != '\0') {
                double x = std::strtod(s, &end);
                if (end == s) break;
                s = end;
                while (*s == ',' || *s == ' ') ++s;
                double y = std::strtod(s, &end);
                if (end == s) break;
                s = end;
                while (*s == ',' || *s == ' ') ++s;
                grow(x, y);
            }
        }
    }
    features.stroke_inventory.assign(strokes.begin(), strokes.end());
    return features;
}

}  // namespace geoneg

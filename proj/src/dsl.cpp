#include "geoneg/dsl.hpp"

#include <cctype>
#include <charconv>
#include <cstdlib>
#include <map>
#include <sstream>

#include "geoneg/util.hpp"

namespace geoneg {

namespace {

struct Token {
    std::string text;
    Span span;
};

// Splits one line into word / punctuation tokens; '(', ')', ',' and '=' are
// single-character tokens.
std::vector<Token> lex_line(const std::string& line, int line_no) {
    std::vector<Token> tokens;
    std::size_t i = 0;
    while (i < line.size()) {
        char c = line[i];
        if (c == '#') break;
        if (std::isspace(static_cast<unsigned char>(c))) {
            ++i;
            continue;
        }
        Span span{line_no, static_cast<int>(i) + 1};
        if (c == '(' || c == ')' || c == ',' || c == '=') {
            tokens.push_back({std::string(1, c), span});
            ++i;
            continue;
        }
        std::size_t start = i;
        while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i])) &&
               line[i] != '(' && line[i] != ')' && line[i] != ',' && line[i] != '=' &&
               line[i] != '#') {
            ++i;
        }
        tokens.push_back({line.substr(start, i - start), span});
    }
    return tokens;
}

class StatementParser {
public:
    StatementParser(std::vector<Token> tokens, std::vector<Diagnostic>& diagnostics)
        : tokens_(std::move(tokens)), diagnostics_(diagnostics) {}

    bool failed() const { return failed_; }
    Span statement_span() const { return tokens_.empty() ? Span{} : tokens_.front().span; }

    bool at_end() const { return pos_ >= tokens_.size(); }

    const Token* peek() const { return at_end() ? nullptr : &tokens_[pos_]; }

    std::optional<Token> take() {
        if (at_end()) return std::nullopt;
        return tokens_[pos_++];
    }

    void error(const std::string& message) {
        Span span = at_end() ? (tokens_.empty() ? Span{} : tokens_.back().span)
                             : tokens_[pos_].span;
        diagnostics_.push_back({span, message});
        failed_ = true;
    }

    bool expect(const std::string& text) {
        auto t = take();
        if (!t || t->text != text) {
            if (t) --pos_;
            error("expected '" + text + "'");
            return false;
        }
        return true;
    }

    std::optional<char> label() {
        auto t = take();
        if (!t || t->text.size() != 1 || t->text[0] < 'A' || t->text[0] > 'Z') {
            if (t) --pos_;
            error("expected a point label A-Z");
            return std::nullopt;
        }
        return t->text[0];
    }

    std::optional<double> number() {
        auto t = take();
        if (!t) {
            error("expected a number");
            return std::nullopt;
        }
        const char* begin = t->text.c_str();
        char* end = nullptr;
        double v = std::strtod(begin, &end);
        if (end != begin + t->text.size() || !std::isfinite(v)) {
            --pos_;
            error("expected a finite number, got '" + t->text + "'");
            return std::nullopt;
        }
        return v;
    }

    std::optional<std::uint64_t> u64() {
        auto t = take();
        if (!t) {
            error("expected an integer");
            return std::nullopt;
        }
        std::uint64_t v = 0;
        auto [p, ec] = std::from_chars(t->text.data(), t->text.data() + t->text.size(), v);
        if (ec != std::errc() || p != t->text.data() + t->text.size()) {
            --pos_;
            error("expected an unsigned integer, got '" + t->text + "'");
            return std::nullopt;
        }
        return v;
    }

    // "(" LABEL+ ")"
    std::optional<std::vector<char>> operand() {
        if (!expect("(")) return std::nullopt;
        std::vector<char> labels;
        while (!at_end() && peek()->text != ")") {
            auto l = label();
            if (!l) return std::nullopt;
            labels.push_back(*l);
        }
        if (!expect(")")) return std::nullopt;
        if (labels.empty()) {
            error("empty shape operand");
            return std::nullopt;
        }
        return labels;
    }

private:
    std::vector<Token> tokens_;
    std::size_t pos_ = 0;
    std::vector<Diagnostic>& diagnostics_;
    bool failed_ = false;
};

struct PendingRelation {
    RelationKind kind;
    std::vector<char> lhs;
    std::vector<char> rhs;
    Span span;
};

int find_shape(const Scene& scene, const std::vector<char>& labels) {
    for (std::size_t i = 0; i < scene.shapes.size(); ++i) {
        if (scene.shapes[i].kind != ShapeKind::circle &&
            scene.shapes[i].vertices == labels)
            return static_cast<int>(i);
        if (scene.shapes[i].kind == ShapeKind::circle && labels.size() == 1 &&
            scene.shapes[i].vertices == labels)
            return static_cast<int>(i);
    }
    return -1;
}

}  // namespace

ParseResult parse(const std::string& source) {
    ParseResult result;
    Scene scene;
    std::vector<PendingRelation> pending_relations;
    std::map<int, Span> shape_spans;  // shape index -> statement span
    std::map<int, Span> mark_spans;
    std::map<char, Span> point_spans;
    Span scene_span{1, 1};

    std::istringstream stream(source);
    std::string line;
    int line_no = 0;
    while (std::getline(stream, line)) {
        ++line_no;
        auto tokens = lex_line(line, line_no);
        if (tokens.empty()) continue;
        StatementParser p(std::move(tokens), result.diagnostics);
        auto head = p.take();
        const std::string& kw = head->text;

        if (kw == "seed") {
            auto v = p.u64();
            if (v) scene.seed = *v;
        } else if (kw == "point") {
            auto id = p.label();
            if (!id) continue;
            if (!p.expect("(")) continue;
            auto x = p.number();
            if (!x) continue;
            if (!p.expect(",")) continue;
            auto y = p.number();
            if (!y) continue;
            p.expect(")");
            if (!p.failed()) {
                scene.points.push_back({*id, *x, *y});
                point_spans[*id] = head->span;
            }
        } else if (kw == "segment") {
            auto a = p.label();
            auto b = a ? p.label() : std::nullopt;
            if (a && b) {
                scene.shapes.push_back({ShapeKind::segment, {*a, *b}, 0.0, ShapeAttr::none});
                shape_spans[static_cast<int>(scene.shapes.size()) - 1] = head->span;
            }
        } else if (kw == "polygon") {
            std::vector<char> verts;
            ShapeAttr attr = ShapeAttr::none;
            bool bad = false;
            while (!p.at_end()) {
                const Token* t = p.peek();
                if (t->text.size() == 1 && t->text[0] >= 'A' && t->text[0] <= 'Z') {
                    verts.push_back(*p.label());
                } else {
                    auto a = shape_attr_from_name(t->text);
                    if (!a || *a == ShapeAttr::none) {
                        p.error("expected a vertex label or shape attribute, got '" + t->text +
                                "'");
                        bad = true;
                        break;
                    }
                    attr = *a;
                    p.take();
                    if (!p.at_end()) {
                        p.error("attribute must be the last token of a polygon statement");
                        bad = true;
                    }
                    break;
                }
            }
            if (!bad && verts.size() < 3) {
                p.error("polygon needs at least 3 vertices");
                bad = true;
            }
            if (!bad) {
                scene.shapes.push_back({ShapeKind::polygon, verts, 0.0, attr});
                shape_spans[static_cast<int>(scene.shapes.size()) - 1] = head->span;
            }
        } else if (kw == "circle") {
            auto center = p.label();
            auto r = center ? p.number() : std::nullopt;
            if (center && r) {
                scene.shapes.push_back({ShapeKind::circle, {*center}, *r, ShapeAttr::none});
                shape_spans[static_cast<int>(scene.shapes.size()) - 1] = head->span;
            }
        } else if (auto rel_kind = relation_kind_from_name(kw)) {
            auto lhs = p.operand();
            auto rhs = lhs ? p.operand() : std::nullopt;
            if (lhs && rhs) {
                pending_relations.push_back({*rel_kind, *lhs, *rhs, head->span});
            }
        } else if (kw == "mark") {
            auto qt = p.take();
            if (!qt || (qt->text != "length" && qt->text != "angle")) {
                p.error("expected 'length' or 'angle'");
                continue;
            }
            bool is_length = qt->text == "length";
            NumericMark mark;
            mark.quantity = is_length ? Quantity::length : Quantity::angle;
            if (is_length) {
                auto a = p.label();
                auto b = a ? p.label() : std::nullopt;
                if (!a || !b) continue;
                mark.target = SegmentRef{*a, *b};
            } else {
                auto a = p.label();
                auto v = a ? p.label() : std::nullopt;
                auto c = v ? p.label() : std::nullopt;
                if (!a || !v || !c) continue;
                mark.target = AngleRef{*a, *v, *c};
            }
            if (!p.expect("=")) continue;
            auto value = p.number();
            if (!value) continue;
            mark.value = *value;
            scene.marks.push_back(mark);
            mark_spans[static_cast<int>(scene.marks.size()) - 1] = head->span;
        } else {
            p.error("unknown statement '" + kw + "'");
            continue;
        }
        if (!p.failed() && !p.at_end()) {
            p.error("trailing tokens after statement");
        }
    }

    // Resolve relation operands now that all shapes are known.
    std::vector<Span> relation_spans;
    for (const auto& pr : pending_relations) {
        int lhs = find_shape(scene, pr.lhs);
        int rhs = find_shape(scene, pr.rhs);
        if (lhs < 0 || rhs < 0) {
            const auto& missing = lhs < 0 ? pr.lhs : pr.rhs;
            result.diagnostics.push_back(
                {pr.span, "unknown shape (" + std::string(missing.begin(), missing.end()) +
                              ") in " + relation_kind_name(pr.kind) + " relation"});
            continue;
        }
        scene.relations.push_back({pr.kind, lhs, rhs});
        relation_spans.push_back(pr.span);
    }

    if (!result.diagnostics.empty()) return result;

    // Semantic validation; attach statement spans to violations.
    auto violations = validate_scene(scene);
    for (const auto& v : violations) {
        Span span = scene_span;
        switch (v.entity) {
            case EntityKind::point:
                if (v.index >= 0 && v.index < static_cast<int>(scene.points.size()))
                    span = point_spans.count(scene.points[static_cast<std::size_t>(v.index)].id)
                               ? point_spans[scene.points[static_cast<std::size_t>(v.index)].id]
                               : scene_span;
                break;
            case EntityKind::shape:
                if (shape_spans.count(v.index)) span = shape_spans[v.index];
                break;
            case EntityKind::relation:
                if (v.index >= 0 && v.index < static_cast<int>(relation_spans.size()))
                    span = relation_spans[static_cast<std::size_t>(v.index)];
                break;
            case EntityKind::mark:
                if (mark_spans.count(v.index)) span = mark_spans[v.index];
                break;
            case EntityKind::scene:
                break;
        }
        result.diagnostics.push_back({span, v.code + ": " + v.message});
    }
    if (!result.diagnostics.empty()) return result;

    result.scene = canonicalize(scene);
    return result;
}

std::string serialize(const Scene& scene) {
    if (!scene_is_valid(scene)) throw Error::usage("cannot serialize an invalid scene");
    Scene c = canonicalize(scene);
    std::string out;
    out += "seed " + std::to_string(c.seed) + "\n";
    for (const auto& p : c.points) {
        out += "point ";
        out += p.id;
        out += " (" + format_number_fixed9(p.x) + ", " + format_number_fixed9(p.y) + ")\n";
    }
    for (const auto& s : c.shapes) {
        switch (s.kind) {
            case ShapeKind::segment:
                out += "segment ";
                out += s.vertices[0];
                out += ' ';
                out += s.vertices[1];
                out += '\n';
                break;
            case ShapeKind::polygon: {
                out += "polygon";
                for (char v : s.vertices) {
                    out += ' ';
                    out += v;
                }
                if (s.attr != ShapeAttr::none) out += " " + shape_attr_name(s.attr);
                out += '\n';
                break;
            }
            case ShapeKind::circle:
                out += "circle ";
                out += s.vertices[0];
                out += " " + format_number_fixed9(s.radius) + "\n";
                break;
        }
    }
    for (const auto& r : c.relations) {
        auto operand = [](const Shape& s) {
            std::string t = "(";
            for (std::size_t i = 0; i < s.vertices.size(); ++i) {
                if (i > 0) t += ' ';
                t += s.vertices[i];
            }
            return t + ")";
        };
        out += relation_kind_name(r.kind) + " " +
               operand(c.shapes[static_cast<std::size_t>(r.lhs)]) + " " +
               operand(c.shapes[static_cast<std::size_t>(r.rhs)]) + "\n";
    }
    for (const auto& m : c.marks) {
        out += "mark ";
        out += m.quantity == Quantity::length ? "length" : "angle";
        for (char ch : measure_target_label(m.target)) {
            out += ' ';
            out += ch;
        }
        out += " = " + format_number_fixed9(m.value) + "\n";
    }
    return out;
}

}  // namespace geoneg

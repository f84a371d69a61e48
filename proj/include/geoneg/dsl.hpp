#pragma once

#include <optional>
#include <string>
#include <vector>

#include "geoneg/geometry.hpp"

namespace geoneg {

// A source location: 1-based line and column of the offending token.
struct Span {
    int line = 0;
    int column = 0;
};

struct Diagnostic {
    Span span;
    std::string message;
};

struct ParseResult {
    std::optional<Scene> scene;  // set iff diagnostics is empty
    std::vector<Diagnostic> diagnostics;

    bool ok() const { return scene.has_value(); }
};

// Parses one .geo document. Statements:
//   seed N
//   point A (x, y)
//   segment A B
//   polygon A B C [square|rectangle|right-triangle|isosceles-triangle|equilateral-triangle]
//   circle O r
//   parallel (A B) (C D)        (also perpendicular/similar/congruent/intersects)
//   mark length A B = v
//   mark angle A B C = v
// '#' starts a line comment. Returns the validated scene or diagnostics with
// line/column spans; semantic violations point at the offending statement.
ParseResult parse(const std::string& source);

// Canonical text form: statements sorted, numbers printed with 9 significant
// digits, one statement per line. Throws Error(usage) on an invalid scene.
std::string serialize(const Scene& scene);

}  // namespace geoneg

#pragma once

#include <map>
#include <string>
#include <vector>

#include "geoneg/geometry.hpp"

namespace geoneg {

struct RenderOptions {
    bool include_numeric_marks = true;
    int canvas_width = 512;
    int canvas_height = 512;
    double margin_fraction = 0.1;  // in [0, 0.4]
};

// Deterministic Scene -> SVG. Byte-identical for identical inputs. Points
// are always labeled with their letters; numeric marks are drawn only when
// include_numeric_marks is set, and every mark element carries class="mark".
// Throws Error(usage) on an invalid or zero-extent scene.
std::string render(const Scene& scene, const RenderOptions& options = {});

// Pixel-independent summary of a rendered SVG. Stable under whitespace-only
// changes to the SVG text.
struct SvgFeatures {
    std::map<std::string, int> element_counts;  // tag -> count (line, polygon, circle, path, text)
    int text_label_count = 0;                   // all <text> elements
    int mark_element_count = 0;                 // elements with class="mark"
    double min_x = 0.0, min_y = 0.0, max_x = 0.0, max_y = 0.0;  // bounding box over coordinates
    std::vector<std::string> stroke_inventory;  // distinct stroke colors, sorted
};

// Parses the SVG subset produced by render. Throws Error(usage) on malformed
// input.
SvgFeatures rasterize_features(const std::string& svg);

}  // namespace geoneg

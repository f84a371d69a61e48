#pragma once

#include <string>
#include <vector>

#include "geoneg/geometry.hpp"

namespace geoneg {

enum class FactKind { shape, relation, mark, ordering };

// One canonical scene fact. Payload grammar:
//   shape:segment:AB            shape:polygon:ABCD:square    shape:circle:D:3.25
//   relation:parallel:AB:CD     mark:length:AB:5             mark:angle:ABC:60
//   ordering:ABCD
struct Fact {
    FactKind kind = FactKind::shape;
    std::string payload;

    bool operator==(const Fact&) const = default;
};

struct Caption {
    std::string text;         // sentences joined with "; "
    std::vector<Fact> facts;  // bijective with shapes + relations + marks + one ordering per polygon
};

// Fixed English template for one fact. text of a caption is always the join
// of these, so edited fact lists re-render consistently.
std::string sentence_for_fact(const Fact& fact);

std::string fact_kind_name(FactKind kind);

// Renders the full caption text from a fact list.
std::string caption_text(const std::vector<Fact>& facts);

// Deterministic caption whose facts are exactly the scene's facts. Throws
// Error(usage) on an invalid scene.
Caption caption(const Scene& scene);

// True iff b is a rotation of a or a rotation of a's reversal.
bool cyclically_equal(const std::string& a, const std::string& b);

// True iff the captions differ at most by replacing polygon vertex orderings
// with rotations (or rotations of reversals) of the original orderings.
bool caption_equals_modulo_cyclic(const Caption& a, const Caption& b);

}  // namespace geoneg

#pragma once

#include <string>

#include "psbfem/model.hpp"

namespace psb {

// Native model file: JSON with a top-level format_version (currently 1).
// The full schema is documented in docs/model_format.md. Meshes may be given
// inline (nodes / elements / boundary_edges) or as a quadtree block that is
// generated, polygonized and validated during parsing. Dirichlet and flux
// selectors (explicit ids, boundary tag, or box) are resolved to node lists
// at parse time. Throws parse/model errors with line numbers where known.
SeepageModel parse_native_model(const std::string& text);

// Serializes in the fully resolved inline form (explicit nodes, elements,
// node lists), so parse(serialize(m)) reproduces m exactly — coordinates
// included, since doubles are written shortest-round-trip.
std::string serialize_model(const SeepageModel& model);

// Field-by-field equality, coordinates compared bit-exact.
bool model_identical(const SeepageModel& a, const SeepageModel& b);

}  // namespace psb

#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "psbfem/geometry.hpp"

namespace psb {

struct Node {
    int id = 0;
    Point p;
};

struct PolygonElement {
    int id = 0;
    std::vector<int> node_ids;  // boundary vertices, counter-clockwise
    int material_id = 0;
};

struct BoundaryEdge {
    int a = 0;  // node ids, order as stored in the owning element
    int b = 0;
    std::string tag;
};

struct PolygonMesh {
    std::vector<Node> nodes;  // kept sorted by id
    std::vector<PolygonElement> elements;
    std::vector<BoundaryEdge> boundary_edges;

    // Sorts nodes by id; throws on duplicate ids. Call after bulk edits.
    void sort_nodes();

    // Index into nodes for a node id (binary search). Throws if missing.
    std::size_t node_index(int id) const;
    const Node& node(int id) const { return nodes[node_index(id)]; }
    bool has_node(int id) const;

    std::vector<Point> element_polygon(const PolygonElement& e) const;

    // Diagonal of the axis-aligned bounding box over all nodes.
    double diameter() const;
};

struct ValidationIssue {
    bool is_violation = true;  // false = warning (e.g. orientation repair)
    std::string message;
};

struct ValidationReport {
    std::vector<ValidationIssue> issues;

    bool pass() const;
    std::size_t violation_count() const;
    std::size_t warning_count() const;
    std::string to_string() const;
};

// Checks node id uniqueness and coincident nodes, element node references,
// polygon simplicity, star-convexity w.r.t. the centroid, edge conformity
// (each edge on at most two elements; each boundary_edge on exactly one).
// Clockwise polygons are repaired to counter-clockwise with a warning; that
// is the only mutation ever applied.
ValidationReport validate_mesh(PolygonMesh& mesh);

// Inserts every node lying strictly inside an element edge into that
// element's vertex list (and splits boundary_edges the same way), so
// quadtree hanging nodes become ordinary polygon vertices. Meshes without
// hanging nodes pass through unchanged.
void polygonize_hanging_nodes(PolygonMesh& mesh);

// Ids of nodes on edges used by exactly one element (requires a conforming
// mesh — run polygonize_hanging_nodes first on quadtree output). Sorted.
std::vector<int> boundary_node_ids(const PolygonMesh& mesh);

struct RefineRegion {
    Point a;
    Point b;  // set b = a for a point region
    int depth = 1;
};

struct QuadtreeSpec {
    std::vector<Point> domain;  // outer polygon, CCW
    std::vector<std::vector<Point>> holes;
    int max_depth = 1;
    int base_depth = 0;  // floor depth when refine_regions is non-empty
    std::vector<RefineRegion> refine_regions;
    bool balance = true;
    // Root cell of the subdivision. Defaults (size <= 0) to the bounding
    // square of the domain anchored at its lower-left corner. Override to
    // control where cell boundaries fall (e.g. a power-of-two root that
    // aligns with the domain edges).
    Point root_origin{0.0, 0.0};
    double root_size = 0.0;
};

// Subdivides the root square (uniformly to max_depth when refine_regions is
// empty, else to base_depth plus deeper around the regions), optionally
// 2:1-balances, removes cells whose center is outside the domain or inside
// a hole, snaps cut vertices onto the offending boundary, and tags boundary
// edges: left/right/bottom/top on the domain's bounding-box sides,
// "boundary" elsewhere on the outer polygon, "impermeable" on hole
// staircases. The result still carries hanging nodes; feed it to
// polygonize_hanging_nodes for a conforming mesh.
PolygonMesh generate_quadtree(const QuadtreeSpec& spec);

}  // namespace psb

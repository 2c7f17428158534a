#pragma once

#include <string>

#include "psbfem/model.hpp"

namespace psb::fixtures {

// Canonical pentagon-element input deck (the documented six-line example).
std::string listing1_deck();

// Complete solvable deck on the 3x2 mixed mesh: one quad, two triangles and
// the pentagon, eight nodes.
std::string figure4_deck();

// The same mixed mesh built directly: nodes 1..8, elements 1 (quad),
// 2 and 4 (triangles), 3 (pentagon), all material 1.
PolygonMesh figure4_mesh();

// nx-by-ny grid of axis-aligned quads covering [0,w]x[0,h]. Node ids
// j*(nx+1)+i, element ids row-major from 0, material 1, tagged boundary
// edges (left/right/bottom/top).
PolygonMesh rect_grid_mesh(int nx, int ny, double w, double h);

// Unit-square quadtree at uniform depth, polygonized (trivially conforming).
PolygonMesh unit_square_quadtree(int depth);

// Unit square at base depth 2 refined to depth 4 near the origin corner,
// balanced and polygonized: hanging nodes become polygon vertices.
PolygonMesh corner_refined_quadtree();

// Linear field used by patch tests.
double patch_field(Point p);  // 1 + 2x + 3y

// Model imposing patch_field on every boundary node of the mesh; kx=ky=1.
SeepageModel patch_model(PolygonMesh mesh);

// Harmonic reference h = sin(pi x) sinh(pi y) / sinh(pi) on the unit square.
double harmonic_ref(Point p);

// Unit-square model with harmonic_ref imposed on all boundary nodes.
SeepageModel harmonic_model(PolygonMesh mesh);

// Steady flow past a centered impermeable square inclusion (hole
// [5/16,11/16]^2), top head 1, bottom head 0: polygon-mesh solver variant
// (quadtree refined around the hole) and the matching all-quad reference
// variant (uniform 16x16 minus the hole cells).
SeepageModel inclusion_sbfem_model();
SeepageModel inclusion_fem_model();

// Transient reservoir-filling analog on a 100x40 rectangle: upstream head
// ramps 10 -> 30 over 100 days then holds to 3000 days, downstream head 5;
// kx = 1e-3, ky = 5e-4 m/day, Ss = 5e-5 1/m, dt = 10 days, steady start,
// monitor "P" at (50, 0). Solver variant: quadtree (4 m cells, upstream
// column refined to 2 m); reference variant: uniform 25x10 grid of 4 m
// quads.
SeepageModel dam_sbfem_model();
SeepageModel dam_fem_model();

}  // namespace psb::fixtures

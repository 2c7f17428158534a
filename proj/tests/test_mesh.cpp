#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <set>

#include "psbfem/errors.hpp"
#include "psbfem/fixtures.hpp"
#include "psbfem/geometry.hpp"
#include "psbfem/mesh.hpp"

using namespace psb;

namespace {

// Independent area/centroid oracle: triangulate with a fan from vertex 0 and
// accumulate signed triangle areas and centroids.
AreaCentroid fan_oracle(const std::vector<Point>& poly) {
    double area = 0.0, cx = 0.0, cy = 0.0;
    for (std::size_t i = 1; i + 1 < poly.size(); ++i) {
        const Point a = poly[0], b = poly[i], c = poly[i + 1];
        const double t = 0.5 * cross(b - a, c - a);
        area += t;
        cx += t * (a.x + b.x + c.x) / 3.0;
        cy += t * (a.y + b.y + c.y) / 3.0;
    }
    return {area, {cx / area, cy / area}};
}

std::vector<Point> random_convex_polygon(std::mt19937& rng) {
    std::uniform_real_distribution<double> ang(0.0, 2.0 * M_PI);
    std::uniform_real_distribution<double> rad(0.5, 2.0);
    std::uniform_int_distribution<int> count(3, 10);
    const int n = count(rng);
    std::vector<double> angles(n);
    for (auto& a : angles) a = ang(rng);
    std::sort(angles.begin(), angles.end());
    // polygon on a convex curve: sorted angles at a shared radius profile
    const double r = rad(rng);
    std::vector<Point> poly;
    for (double a : angles) poly.push_back({3.0 + r * std::cos(a), -1.0 + r * std::sin(a)});
    return poly;
}

PolygonMesh two_squares() {
    PolygonMesh m;
    m.nodes = {{1, {0, 0}}, {2, {1, 0}}, {3, {1, 1}}, {4, {0, 1}}, {5, {2, 0}}, {6, {2, 1}}};
    m.elements = {{1, {1, 2, 3, 4}, 1}, {2, {2, 5, 6, 3}, 1}};
    return m;
}

}  // namespace

TEST_CASE("area and centroid of reference shapes") {
    const AreaCentroid square = polygon_area_centroid({{0, 0}, {1, 0}, {1, 1}, {0, 1}});
    CHECK(square.area == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(square.centroid.x == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(square.centroid.y == doctest::Approx(0.5).epsilon(1e-14));

    const AreaCentroid tri = polygon_area_centroid({{0, 0}, {1, 0}, {0, 1}});
    CHECK(tri.area == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(tri.centroid.x == doctest::Approx(1.0 / 3.0).epsilon(1e-14));
    CHECK(tri.centroid.y == doctest::Approx(1.0 / 3.0).epsilon(1e-14));
}

TEST_CASE("area and centroid match the fan oracle on random convex polygons") {
    std::mt19937 rng(7151);
    for (int trial = 0; trial < 20; ++trial) {
        const std::vector<Point> poly = random_convex_polygon(rng);
        const AreaCentroid got = polygon_area_centroid(poly);
        const AreaCentroid want = fan_oracle(poly);
        CHECK(std::abs(got.area - want.area) < 1e-12 * want.area);
        CHECK(std::abs(got.centroid.x - want.centroid.x) < 1e-12 * polygon_diameter(poly));
        CHECK(std::abs(got.centroid.y - want.centroid.y) < 1e-12 * polygon_diameter(poly));
    }
}

TEST_CASE("degenerate polygons are rejected") {
    CHECK_THROWS_AS(polygon_area_centroid({{0, 0}, {1, 0}, {2, 0}}), Error);
    CHECK_THROWS_AS(polygon_area_centroid({{0, 0}, {1, 0}, {0.5, 1e-12}}), Error);  // sliver
    // degeneracy is relative to the polygon's own scale, so a uniformly tiny
    // but well-proportioned triangle is fine
    CHECK_NOTHROW(polygon_area_centroid({{0, 0}, {1e-15, 0}, {0, 1e-15}}));
}

TEST_CASE("star convexity distinguishes visible and hidden centers") {
    const std::vector<Point> square{{0, 0}, {1, 0}, {1, 1}, {0, 1}};
    CHECK(polygon_star_convex(square, {0.5, 0.5}));
    CHECK_FALSE(polygon_star_convex(square, {1.5, 0.5}));

    // L-shape: the centroid sees everything, a far corner does not
    const std::vector<Point> ell{{0, 0}, {2, 0}, {2, 1}, {1, 1}, {1, 2}, {0, 2}};
    const AreaCentroid ac = polygon_area_centroid(ell);
    CHECK(polygon_star_convex(ell, ac.centroid));
    CHECK_FALSE(polygon_star_convex(ell, {1.9, 0.05}));
}

TEST_CASE("simplicity catches self-intersection") {
    CHECK(polygon_is_simple({{0, 0}, {1, 0}, {1, 1}, {0, 1}}));
    CHECK_FALSE(polygon_is_simple({{0, 0}, {1, 1}, {1, 0}, {0, 1}}));  // bowtie
}

TEST_CASE("point in polygon and boundary projection") {
    const std::vector<Point> square{{0, 0}, {1, 0}, {1, 1}, {0, 1}};
    CHECK(point_in_polygon({0.5, 0.5}, square));
    CHECK_FALSE(point_in_polygon({1.5, 0.5}, square));
    const Point proj = project_to_polygon_boundary({1.5, 0.5}, square);
    CHECK(proj.x == doctest::Approx(1.0));
    CHECK(proj.y == doctest::Approx(0.5));
}

TEST_CASE("mesh validation passes the mixed reference mesh") {
    PolygonMesh mesh = fixtures::figure4_mesh();
    const ValidationReport rep = validate_mesh(mesh);
    CHECK(rep.pass());
    CHECK(rep.warning_count() == 0);
}

TEST_CASE("clockwise polygons are repaired with a warning") {
    PolygonMesh m;
    m.nodes = {{1, {0, 0}}, {2, {1, 0}}, {3, {1, 1}}, {4, {0, 1}}};
    m.elements = {{1, {1, 4, 3, 2}, 1}};  // clockwise
    const ValidationReport rep = validate_mesh(m);
    CHECK(rep.pass());
    CHECK(rep.warning_count() == 1);
    // repaired in place, keeping the first node as the anchor
    CHECK(m.elements[0].node_ids == std::vector<int>{1, 2, 3, 4});
    // idempotent afterwards
    const ValidationReport again = validate_mesh(m);
    CHECK(again.warning_count() == 0);
}

TEST_CASE("coincident nodes with distinct ids are a violation") {
    PolygonMesh m = two_squares();
    m.nodes.push_back({7, {1.0, 0.0}});  // same place as node 2
    m.elements[1].node_ids = {7, 5, 6, 3};
    m.sort_nodes();
    const ValidationReport rep = validate_mesh(m);
    CHECK_FALSE(rep.pass());
}

TEST_CASE("unknown node references and non-simple polygons are violations") {
    PolygonMesh m = two_squares();
    m.elements[0].node_ids = {1, 2, 3, 99};
    CHECK_FALSE(validate_mesh(m).pass());

    PolygonMesh bow = two_squares();
    bow.elements[0].node_ids = {1, 3, 2, 4};
    CHECK_FALSE(validate_mesh(bow).pass());
}

TEST_CASE("an edge shared by three elements is a violation") {
    PolygonMesh m = two_squares();
    m.nodes.push_back({7, {0.5, -1.0}});
    m.nodes.push_back({8, {1.5, -1.0}});
    m.sort_nodes();
    m.elements.push_back({3, {1, 7, 2}, 1});
    m.elements.push_back({4, {2, 7, 8}, 1});  // edge (2,7) now on elements 3 and 4 both ways
    ValidationReport rep = validate_mesh(m);
    // edge (7,2)/(2,7) is used by two elements here; make a true triple use
    m.elements.push_back({5, {1, 2, 7}, 1});
    rep = validate_mesh(m);
    CHECK_FALSE(rep.pass());
}

TEST_CASE("boundary edges must lie on exactly one element") {
    PolygonMesh m = two_squares();
    m.boundary_edges.push_back({2, 3, "inner"});  // interior edge, used twice
    CHECK_FALSE(validate_mesh(m).pass());

    PolygonMesh ok = two_squares();
    ok.boundary_edges.push_back({1, 2, "bottom"});
    CHECK(validate_mesh(ok).pass());
}

TEST_CASE("hanging nodes become polygon vertices") {
    // one unit cell next to two half cells on its right edge
    PolygonMesh m;
    m.nodes = {{1, {0, 0}},   {2, {1, 0}},   {3, {1, 1}},  {4, {0, 1}},
               {5, {1, 0.5}}, {6, {1.5, 0}}, {7, {1.5, 0.5}}, {8, {1.5, 1}}};
    m.elements = {{1, {1, 2, 3, 4}, 1}, {2, {2, 6, 7, 5}, 1}, {3, {5, 7, 8, 3}, 1}};
    polygonize_hanging_nodes(m);
    const auto& big = m.elements[0];
    CHECK(big.node_ids.size() == 5);
    CHECK(std::count(big.node_ids.begin(), big.node_ids.end(), 5) == 1);
    // order preserved: 5 sits between 2 and 3
    const auto it = std::find(big.node_ids.begin(), big.node_ids.end(), 2);
    CHECK(*(std::next(it) == big.node_ids.end() ? big.node_ids.begin() : std::next(it)) == 5);
    CHECK(validate_mesh(m).pass());
}

TEST_CASE("meshes without hanging nodes pass through unchanged") {
    PolygonMesh m = two_squares();
    const PolygonMesh before = m;
    polygonize_hanging_nodes(m);
    CHECK(m.elements[0].node_ids == before.elements[0].node_ids);
    CHECK(m.elements[1].node_ids == before.elements[1].node_ids);
}

TEST_CASE("boundary node identification") {
    PolygonMesh m = fixtures::rect_grid_mesh(3, 3, 1.0, 1.0);
    const std::vector<int> b = boundary_node_ids(m);
    CHECK(b.size() == 12);  // 16 nodes, 4 interior
    for (int id : b) {
        const Point p = m.node(id).p;
        const bool on_rim = p.x == 0.0 || p.y == 0.0 || std::abs(p.x - 1.0) < 1e-12 ||
                            std::abs(p.y - 1.0) < 1e-12;
        CHECK(on_rim);
    }
}

TEST_CASE("uniform quadtree: 4^depth cells") {
    QuadtreeSpec spec;
    spec.domain = {{0, 0}, {1, 0}, {1, 1}, {0, 1}};
    spec.max_depth = 2;
    const PolygonMesh m = generate_quadtree(spec);
    CHECK(m.elements.size() == 16);
    CHECK(m.nodes.size() == 25);
    double area = 0.0;
    for (const auto& e : m.elements) area += polygon_area_centroid(m.element_polygon(e)).area;
    CHECK(area == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("corner refinement with balancing keeps neighbor depths within one level") {
    PolygonMesh m = fixtures::corner_refined_quadtree();
    // depth of a cell = log2(1/size); recover from element areas
    std::map<int, double> depth_of_element;
    std::map<std::pair<int, int>, std::vector<int>> edge_use;  // undirected node pair -> elems
    for (const auto& e : m.elements) {
        const double a = polygon_area_centroid(m.element_polygon(e)).area;
        depth_of_element[e.id] = std::log2(1.0 / std::sqrt(a));
        const int n = static_cast<int>(e.node_ids.size());
        for (int i = 0; i < n; ++i) {
            int u = e.node_ids[i], v = e.node_ids[(i + 1) % n];
            if (u > v) std::swap(u, v);
            edge_use[{u, v}].push_back(e.id);
        }
    }
    // exhaustive neighbor enumeration: any shared (sub)edge joins neighbors
    for (const auto& [edge, elems] : edge_use)
        if (elems.size() == 2)
            CHECK(std::abs(depth_of_element[elems[0]] - depth_of_element[elems[1]]) <= 1.0 + 1e-9);
    // refinement actually reached depth 4 somewhere and depth 2 elsewhere
    double dmin = 99, dmax = 0;
    for (const auto& [id, d] : depth_of_element) {
        dmin = std::min(dmin, d);
        dmax = std::max(dmax, d);
    }
    CHECK(dmax == doctest::Approx(4.0).epsilon(1e-9));
    CHECK(dmin == doctest::Approx(2.0).epsilon(1e-9));
}

TEST_CASE("quadtree with a centered square hole") {
    QuadtreeSpec spec;
    spec.domain = {{0, 0}, {1, 0}, {1, 1}, {0, 1}};
    spec.max_depth = 4;
    const double lo = 0.335, hi = 0.665;  // ~0.33 x 0.33 centered hole
    spec.holes = {{{lo, lo}, {hi, lo}, {hi, hi}, {lo, hi}}};
    PolygonMesh m = generate_quadtree(spec);

    bool has_impermeable = false;
    for (const auto& be : m.boundary_edges)
        if (be.tag == "impermeable") has_impermeable = true;
    CHECK(has_impermeable);

    for (const auto& e : m.elements) {
        const AreaCentroid ac = polygon_area_centroid(m.element_polygon(e));
        const bool center_in_hole = ac.centroid.x > lo && ac.centroid.x < hi &&
                                    ac.centroid.y > lo && ac.centroid.y < hi;
        CHECK_FALSE(center_in_hole);
    }

    polygonize_hanging_nodes(m);
    CHECK(validate_mesh(m).pass());
}

TEST_CASE("generated mesh areas sum to domain minus holes") {
    const PolygonMesh uniform = fixtures::unit_square_quadtree(3);
    double area = 0.0;
    for (const auto& e : uniform.elements)
        area += polygon_area_centroid(uniform.element_polygon(e)).area;
    CHECK(area == doctest::Approx(1.0).epsilon(1e-10));

    QuadtreeSpec spec;
    spec.domain = {{0, 0}, {1, 0}, {1, 1}, {0, 1}};
    spec.max_depth = 3;
    spec.holes = {{{0.25, 0.25}, {0.75, 0.25}, {0.75, 0.75}, {0.25, 0.75}}};
    const PolygonMesh holed = generate_quadtree(spec);
    double harea = 0.0;
    for (const auto& e : holed.elements)
        harea += polygon_area_centroid(holed.element_polygon(e)).area;
    CHECK(harea == doctest::Approx(0.75).epsilon(1e-10));  // hole aligned with cell grid
}

TEST_CASE("quadtree boundary tags name the four box sides") {
    const PolygonMesh m = fixtures::unit_square_quadtree(2);
    std::set<std::string> tags;
    for (const auto& be : m.boundary_edges) tags.insert(be.tag);
    CHECK(tags == std::set<std::string>{"left", "right", "bottom", "top"});
    int left_edges = 0;
    for (const auto& be : m.boundary_edges)
        if (be.tag == "left") {
            CHECK(m.node(be.a).p.x == doctest::Approx(0.0));
            CHECK(m.node(be.b).p.x == doctest::Approx(0.0));
            ++left_edges;
        }
    CHECK(left_edges == 4);
}

TEST_CASE("unreachable refine depth is an error") {
    QuadtreeSpec spec;
    spec.domain = {{0, 0}, {1, 0}, {1, 1}, {0, 1}};
    spec.max_depth = 2;
    spec.refine_regions = {{{0, 0}, {0, 0}, 5}};
    CHECK_THROWS_AS(generate_quadtree(spec), Error);
}

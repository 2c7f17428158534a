#include "psbfem/fixtures.hpp"

#include <cmath>
#include <functional>

#include "psbfem/errors.hpp"

namespace psb::fixtures {

namespace {

void check_valid(PolygonMesh& mesh) {
    ValidationReport rep = validate_mesh(mesh);
    if (!rep.pass()) throw Error(ErrorCode::internal, "fixture mesh invalid: " + rep.to_string());
}

// one Dirichlet set per distinct head value so arbitrary fields fit the
// (node set, value) shape
void impose_on_boundary(SeepageModel& model, const std::function<double(Point)>& field) {
    for (int id : boundary_node_ids(model.mesh)) {
        DirichletSet ds;
        ds.name = "bc_" + std::to_string(id);
        ds.nodes = {id};
        ds.head = field(model.mesh.node(id).p);
        model.dirichlet.push_back(std::move(ds));
    }
}

}  // namespace

std::string listing1_deck() {
    return "*USER ELEMENT, NODES=5, TYPE=U5, PROPERTIES=2, COORDINATES=2\n"
           "8\n"
           "*ELEMENT, TYPE=U5, ELSET=E5\n"
           "3,2,3,4,8,7\n"
           "*UEL PROPERTY, ELEST=E5\n"
           "0.003,0.003\n";
}

std::string figure4_deck() {
    return "** mixed polygon mesh: one quad, two triangles, one pentagon\n"
           "*USER ELEMENT, NODES=3, TYPE=U3, PROPERTIES=2, COORDINATES=2\n"
           "8\n"
           "*USER ELEMENT, NODES=4, TYPE=U4, PROPERTIES=2, COORDINATES=2\n"
           "8\n"
           "*USER ELEMENT, NODES=5, TYPE=U5, PROPERTIES=2, COORDINATES=2\n"
           "8\n"
           "*NODE\n"
           "1, 0.0, 0.0\n"
           "2, 1.0, 0.0\n"
           "3, 3.0, 0.0\n"
           "4, 3.0, 2.0\n"
           "5, 0.0, 2.0\n"
           "6, 0.0, 1.0\n"
           "7, 1.0, 1.0\n"
           "8, 1.0, 2.0\n"
           "*ELEMENT, TYPE=U4, ELSET=E4\n"
           "1, 1, 2, 7, 6\n"
           "*ELEMENT, TYPE=U3, ELSET=E3\n"
           "2, 6, 7, 8\n"
           "4, 6, 8, 5\n"
           "*ELEMENT, TYPE=U5, ELSET=E5\n"
           "3, 2, 3, 4, 8, 7\n"
           "*UEL PROPERTY, ELSET=E4\n"
           "0.003, 0.003\n"
           "*UEL PROPERTY, ELSET=E3\n"
           "0.003, 0.003\n"
           "*UEL PROPERTY, ELEST=E5\n"
           "0.003, 0.003\n";
}

PolygonMesh figure4_mesh() {
    PolygonMesh mesh;
    mesh.nodes = {{1, {0, 0}}, {2, {1, 0}}, {3, {3, 0}}, {4, {3, 2}},
                  {5, {0, 2}}, {6, {0, 1}}, {7, {1, 1}}, {8, {1, 2}}};
    mesh.elements = {{1, {1, 2, 7, 6}, 1},
                     {2, {6, 7, 8}, 1},
                     {4, {6, 8, 5}, 1},
                     {3, {2, 3, 4, 8, 7}, 1}};
    check_valid(mesh);
    return mesh;
}

PolygonMesh rect_grid_mesh(int nx, int ny, double w, double h) {
    if (nx < 1 || ny < 1 || !(w > 0.0) || !(h > 0.0))
        throw Error(ErrorCode::invalid_argument, "rect_grid_mesh needs nx,ny >= 1 and w,h > 0");
    PolygonMesh mesh;
    const auto nid = [nx](int i, int j) { return j * (nx + 1) + i; };
    for (int j = 0; j <= ny; ++j)
        for (int i = 0; i <= nx; ++i)
            mesh.nodes.push_back({nid(i, j), {w * i / nx, h * j / ny}});
    int eid = 0;
    for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i)
            mesh.elements.push_back(
                {eid++, {nid(i, j), nid(i + 1, j), nid(i + 1, j + 1), nid(i, j + 1)}, 1});
    for (int i = 0; i < nx; ++i) {
        mesh.boundary_edges.push_back({nid(i, 0), nid(i + 1, 0), "bottom"});
        mesh.boundary_edges.push_back({nid(i + 1, ny), nid(i, ny), "top"});
    }
    for (int j = 0; j < ny; ++j) {
        mesh.boundary_edges.push_back({nid(nx, j), nid(nx, j + 1), "right"});
        mesh.boundary_edges.push_back({nid(0, j + 1), nid(0, j), "left"});
    }
    check_valid(mesh);
    return mesh;
}

PolygonMesh unit_square_quadtree(int depth) {
    QuadtreeSpec spec;
    spec.domain = {{0, 0}, {1, 0}, {1, 1}, {0, 1}};
    spec.max_depth = depth;
    PolygonMesh mesh = generate_quadtree(spec);
    polygonize_hanging_nodes(mesh);
    check_valid(mesh);
    return mesh;
}

PolygonMesh corner_refined_quadtree() {
    QuadtreeSpec spec;
    spec.domain = {{0, 0}, {1, 0}, {1, 1}, {0, 1}};
    spec.max_depth = 4;
    spec.base_depth = 2;
    spec.refine_regions.push_back({{0, 0}, {0, 0}, 4});
    PolygonMesh mesh = generate_quadtree(spec);
    polygonize_hanging_nodes(mesh);
    check_valid(mesh);
    return mesh;
}

double patch_field(Point p) { return 1.0 + 2.0 * p.x + 3.0 * p.y; }

SeepageModel patch_model(PolygonMesh mesh) {
    SeepageModel model;
    model.mesh = std::move(mesh);
    model.materials[1] = {1.0, 1.0, 0.0};
    impose_on_boundary(model, patch_field);
    model.validate();
    return model;
}

double harmonic_ref(Point p) {
    return std::sin(M_PI * p.x) * std::sinh(M_PI * p.y) / std::sinh(M_PI);
}

SeepageModel harmonic_model(PolygonMesh mesh) {
    SeepageModel model;
    model.mesh = std::move(mesh);
    model.materials[1] = {1.0, 1.0, 0.0};
    impose_on_boundary(model, harmonic_ref);
    model.validate();
    return model;
}

namespace {

std::vector<Point> inclusion_hole() {
    const double a = 5.0 / 16.0, b = 11.0 / 16.0;
    return {{a, a}, {b, a}, {b, b}, {a, b}};
}

void inclusion_bcs(SeepageModel& model) {
    model.materials[1] = {1.0, 1.0, 0.0};
    const double tol = 1e-9;
    DirichletSet top{"top", {}, 1.0, ""}, bottom{"bottom", {}, 0.0, ""};
    for (const auto& n : model.mesh.nodes) {
        if (std::abs(n.p.y - 1.0) < tol) top.nodes.push_back(n.id);
        if (std::abs(n.p.y) < tol) bottom.nodes.push_back(n.id);
    }
    model.dirichlet = {std::move(top), std::move(bottom)};
    model.validate();
}

}  // namespace

SeepageModel inclusion_sbfem_model() {
    QuadtreeSpec spec;
    spec.domain = {{0, 0}, {1, 0}, {1, 1}, {0, 1}};
    spec.holes = {inclusion_hole()};
    spec.max_depth = 5;
    spec.base_depth = 4;
    const auto hole = inclusion_hole();
    for (std::size_t i = 0; i < hole.size(); ++i)
        spec.refine_regions.push_back({hole[i], hole[(i + 1) % hole.size()], 5});
    SeepageModel model;
    model.mesh = generate_quadtree(spec);
    polygonize_hanging_nodes(model.mesh);
    check_valid(model.mesh);
    inclusion_bcs(model);
    return model;
}

SeepageModel inclusion_fem_model() {
    PolygonMesh grid = rect_grid_mesh(16, 16, 1.0, 1.0);
    PolygonMesh mesh;
    mesh.nodes = grid.nodes;  // unused nodes are harmless for the reference
    const double a = 5.0 / 16.0, b = 11.0 / 16.0;
    for (const auto& e : grid.elements) {
        Point c{0, 0};
        for (int id : e.node_ids) c = c + grid.node(id).p;
        c = (1.0 / 4.0) * c;
        const bool in_hole = c.x > a && c.x < b && c.y > a && c.y < b;
        if (!in_hole) mesh.elements.push_back(e);
    }
    // drop nodes used by no element so validation and dof counts stay honest
    std::vector<int> used(grid.nodes.size(), 0);
    for (const auto& e : mesh.elements)
        for (int id : e.node_ids) used[grid.node_index(id)] = 1;
    PolygonMesh pruned;
    for (const auto& n : mesh.nodes)
        if (used[grid.node_index(n.id)]) pruned.nodes.push_back(n);
    pruned.elements = mesh.elements;
    check_valid(pruned);
    SeepageModel model;
    model.mesh = std::move(pruned);
    inclusion_bcs(model);
    return model;
}

namespace {

void dam_bcs(SeepageModel& model) {
    model.materials[1] = {1e-3, 5e-4, 5e-5};
    model.unit_note = "m, day";
    model.schedules["filling"] = {{{0.0, 10.0}, {100.0, 30.0}, {3000.0, 30.0}}};
    const double tol = 1e-9;
    DirichletSet up{"upstream", {}, 0.0, "filling"}, down{"downstream", {}, 5.0, ""};
    for (const auto& n : model.mesh.nodes) {
        if (std::abs(n.p.x) < tol) up.nodes.push_back(n.id);
        if (std::abs(n.p.x - 100.0) < tol) down.nodes.push_back(n.id);
    }
    model.dirichlet = {std::move(up), std::move(down)};
    TransientSpec ts;
    ts.dt = 10.0;
    ts.t_end = 3000.0;
    ts.init = TransientSpec::Init::steady;
    model.transient = ts;
    model.monitors = {{"P", {50.0, 0.0}}};
    model.validate();
}

}  // namespace

SeepageModel dam_sbfem_model() {
    QuadtreeSpec spec;
    spec.domain = {{0, 0}, {100, 0}, {100, 40}, {0, 40}};
    spec.root_origin = {0.0, 0.0};
    spec.root_size = 128.0;  // power-of-two root so 4 m cells align with the domain
    spec.max_depth = 6;
    spec.base_depth = 5;
    spec.refine_regions.push_back({{0, 0}, {0, 40}, 6});
    SeepageModel model;
    model.mesh = generate_quadtree(spec);
    polygonize_hanging_nodes(model.mesh);
    check_valid(model.mesh);
    dam_bcs(model);
    return model;
}

SeepageModel dam_fem_model() {
    SeepageModel model;
    model.mesh = rect_grid_mesh(25, 10, 100.0, 40.0);
    dam_bcs(model);
    return model;
}

}  // namespace psb::fixtures

#include "psbfem/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <utility>

#include "psbfem/errors.hpp"

namespace psb {

void PolygonMesh::sort_nodes() {
    std::sort(nodes.begin(), nodes.end(), [](const Node& a, const Node& b) { return a.id < b.id; });
    for (std::size_t i = 1; i < nodes.size(); ++i)
        if (nodes[i].id == nodes[i - 1].id)
            throw Error(ErrorCode::model, "duplicate node id " + std::to_string(nodes[i].id));
}

std::size_t PolygonMesh::node_index(int id) const {
    auto it = std::lower_bound(nodes.begin(), nodes.end(), id,
                               [](const Node& n, int v) { return n.id < v; });
    if (it == nodes.end() || it->id != id)
        throw Error(ErrorCode::model, "unknown node id " + std::to_string(id));
    return static_cast<std::size_t>(it - nodes.begin());
}

bool PolygonMesh::has_node(int id) const {
    auto it = std::lower_bound(nodes.begin(), nodes.end(), id,
                               [](const Node& n, int v) { return n.id < v; });
    return it != nodes.end() && it->id == id;
}

std::vector<Point> PolygonMesh::element_polygon(const PolygonElement& e) const {
    std::vector<Point> poly;
    poly.reserve(e.node_ids.size());
    for (int id : e.node_ids) poly.push_back(node(id).p);
    return poly;
}

double PolygonMesh::diameter() const {
    if (nodes.empty()) return 0.0;
    double xmin = std::numeric_limits<double>::max(), xmax = -xmin;
    double ymin = xmin, ymax = xmax;
    for (const Node& n : nodes) {
        xmin = std::min(xmin, n.p.x);
        xmax = std::max(xmax, n.p.x);
        ymin = std::min(ymin, n.p.y);
        ymax = std::max(ymax, n.p.y);
    }
    return std::hypot(xmax - xmin, ymax - ymin);
}

bool ValidationReport::pass() const { return violation_count() == 0; }

std::size_t ValidationReport::violation_count() const {
    std::size_t n = 0;
    for (const auto& i : issues) n += i.is_violation ? 1 : 0;
    return n;
}

std::size_t ValidationReport::warning_count() const {
    return issues.size() - violation_count();
}

std::string ValidationReport::to_string() const {
    if (issues.empty()) return "mesh valid\n";
    std::string out;
    for (const auto& i : issues) {
        out += i.is_violation ? "violation: " : "warning: ";
        out += i.message;
        out += '\n';
    }
    return out;
}

namespace {

std::string elem_label(const PolygonElement& e) { return "element " + std::to_string(e.id); }

}  // namespace

ValidationReport validate_mesh(PolygonMesh& mesh) {
    ValidationReport rep;
    auto violation = [&rep](std::string msg) { rep.issues.push_back({true, std::move(msg)}); };
    auto warning = [&rep](std::string msg) { rep.issues.push_back({false, std::move(msg)}); };

    // node ids unique and coordinates finite
    {
        std::vector<Node> sorted = mesh.nodes;
        std::sort(sorted.begin(), sorted.end(),
                  [](const Node& a, const Node& b) { return a.id < b.id; });
        for (std::size_t i = 1; i < sorted.size(); ++i)
            if (sorted[i].id == sorted[i - 1].id)
                violation("duplicate node id " + std::to_string(sorted[i].id));
        for (const Node& n : sorted)
            if (!std::isfinite(n.p.x) || !std::isfinite(n.p.y))
                violation("node " + std::to_string(n.id) + " has non-finite coordinates");
    }

    // coincident nodes with distinct ids (duplicate-node defect)
    const double tol = kCoincidenceRel * mesh.diameter();
    {
        std::vector<const Node*> byx;
        byx.reserve(mesh.nodes.size());
        for (const Node& n : mesh.nodes) byx.push_back(&n);
        std::sort(byx.begin(), byx.end(),
                  [](const Node* a, const Node* b) { return a->p.x < b->p.x; });
        for (std::size_t i = 0; i < byx.size(); ++i) {
            for (std::size_t j = i + 1; j < byx.size(); ++j) {
                if (byx[j]->p.x - byx[i]->p.x > tol) break;
                if (distance(byx[i]->p, byx[j]->p) <= tol)
                    violation("nodes " + std::to_string(byx[i]->id) + " and " +
                              std::to_string(byx[j]->id) + " are coincident");
            }
        }
    }

    // element ids unique
    {
        std::vector<int> ids;
        for (const auto& e : mesh.elements) ids.push_back(e.id);
        std::sort(ids.begin(), ids.end());
        for (std::size_t i = 1; i < ids.size(); ++i)
            if (ids[i] == ids[i - 1])
                violation("duplicate element id " + std::to_string(ids[i]));
    }

    // per-element geometry
    for (auto& e : mesh.elements) {
        if (e.node_ids.size() < 3) {
            violation(elem_label(e) + " has fewer than 3 vertices");
            continue;
        }
        bool refs_ok = true;
        for (int id : e.node_ids)
            if (!mesh.has_node(id)) {
                violation(elem_label(e) + " references unknown node " + std::to_string(id));
                refs_ok = false;
            }
        if (!refs_ok) continue;
        {
            std::vector<int> ids = e.node_ids;
            std::sort(ids.begin(), ids.end());
            if (std::adjacent_find(ids.begin(), ids.end()) != ids.end()) {
                violation(elem_label(e) + " repeats a node id");
                continue;
            }
        }
        std::vector<Point> poly = mesh.element_polygon(e);
        if (polygon_signed_area(poly) < 0.0) {
            std::reverse(e.node_ids.begin() + 1, e.node_ids.end());
            poly = mesh.element_polygon(e);
            warning(elem_label(e) + " was clockwise; repaired to counter-clockwise");
        }
        if (!polygon_is_simple(poly, tol)) {
            violation(elem_label(e) + " is not a simple polygon");
            continue;
        }
        try {
            const AreaCentroid ac = polygon_area_centroid(poly);
            if (!polygon_star_convex(poly, ac.centroid))
                violation(elem_label(e) + " is not star-convex from its centroid");
        } catch (const Error& err) {
            violation(elem_label(e) + ": " + err.what());
        }
    }

    // edge conformity: undirected edge -> number of incident elements
    std::map<std::pair<int, int>, int> edge_use;
    for (const auto& e : mesh.elements) {
        const std::size_t k = e.node_ids.size();
        for (std::size_t i = 0; i < k; ++i) {
            int a = e.node_ids[i], b = e.node_ids[(i + 1) % k];
            if (a > b) std::swap(a, b);
            ++edge_use[{a, b}];
        }
    }
    for (const auto& [edge, count] : edge_use)
        if (count > 2)
            violation("edge (" + std::to_string(edge.first) + "," + std::to_string(edge.second) +
                      ") is shared by " + std::to_string(count) + " elements");
    for (const auto& be : mesh.boundary_edges) {
        int a = be.a, b = be.b;
        if (a > b) std::swap(a, b);
        auto it = edge_use.find({a, b});
        const int count = it == edge_use.end() ? 0 : it->second;
        if (count != 1)
            violation("boundary edge (" + std::to_string(be.a) + "," + std::to_string(be.b) +
                      ") lies on " + std::to_string(count) + " elements, expected 1");
    }

    return rep;
}

void polygonize_hanging_nodes(PolygonMesh& mesh) {
    const double tol = kCoincidenceRel * mesh.diameter();

    // nodes sorted by x for cheap pruning of the on-edge search
    std::vector<const Node*> byx;
    byx.reserve(mesh.nodes.size());
    for (const Node& n : mesh.nodes) byx.push_back(&n);
    std::sort(byx.begin(), byx.end(), [](const Node* a, const Node* b) { return a->p.x < b->p.x; });

    // Returns node ids strictly inside segment (a,b), ordered from a to b.
    auto nodes_on_edge = [&](Point a, Point b, int ia, int ib) {
        std::vector<std::pair<double, int>> hits;
        const double x0 = std::min(a.x, b.x) - tol, x1 = std::max(a.x, b.x) + tol;
        const double y0 = std::min(a.y, b.y) - tol, y1 = std::max(a.y, b.y) + tol;
        auto lo = std::lower_bound(byx.begin(), byx.end(), x0,
                                   [](const Node* n, double v) { return n->p.x < v; });
        for (auto it = lo; it != byx.end() && (*it)->p.x <= x1; ++it) {
            const Node* n = *it;
            if (n->p.y < y0 || n->p.y > y1 || n->id == ia || n->id == ib) continue;
            double t = 0.0;
            if (point_on_open_segment(n->p, a, b, tol, &t)) hits.emplace_back(t, n->id);
        }
        std::sort(hits.begin(), hits.end());
        std::vector<int> ids;
        ids.reserve(hits.size());
        for (auto& [t, id] : hits) ids.push_back(id);
        return ids;
    };

    for (auto& e : mesh.elements) {
        std::vector<int> out;
        const std::size_t k = e.node_ids.size();
        for (std::size_t i = 0; i < k; ++i) {
            const int ia = e.node_ids[i], ib = e.node_ids[(i + 1) % k];
            out.push_back(ia);
            for (int id : nodes_on_edge(mesh.node(ia).p, mesh.node(ib).p, ia, ib))
                out.push_back(id);
        }
        e.node_ids = std::move(out);
    }

    std::vector<BoundaryEdge> split;
    for (const auto& be : mesh.boundary_edges) {
        const Point a = mesh.node(be.a).p, b = mesh.node(be.b).p;
        std::vector<int> chain{be.a};
        for (int id : nodes_on_edge(a, b, be.a, be.b)) chain.push_back(id);
        chain.push_back(be.b);
        for (std::size_t i = 0; i + 1 < chain.size(); ++i)
            split.push_back({chain[i], chain[i + 1], be.tag});
    }
    mesh.boundary_edges = std::move(split);
}

std::vector<int> boundary_node_ids(const PolygonMesh& mesh) {
    std::map<std::pair<int, int>, int> edge_use;
    for (const auto& e : mesh.elements) {
        const std::size_t k = e.node_ids.size();
        for (std::size_t i = 0; i < k; ++i) {
            int a = e.node_ids[i], b = e.node_ids[(i + 1) % k];
            if (a > b) std::swap(a, b);
            ++edge_use[{a, b}];
        }
    }
    std::vector<int> ids;
    for (const auto& [edge, count] : edge_use)
        if (count == 1) {
            ids.push_back(edge.first);
            ids.push_back(edge.second);
        }
    std::sort(ids.begin(), ids.end());
    ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
    return ids;
}

}  // namespace psb

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <set>
#include <vector>

#include "psbfem/errors.hpp"
#include "psbfem/mesh.hpp"

namespace psb {

namespace {

struct CellKey {
    int depth, ix, iy;
    bool operator<(const CellKey& o) const {
        if (depth != o.depth) return depth < o.depth;
        if (iy != o.iy) return iy < o.iy;
        return ix < o.ix;
    }
};

struct Box {
    double x0, y0, x1, y1;
};

struct Bbox {
    double xmin = std::numeric_limits<double>::max(), xmax = -xmin;
    double ymin = xmin, ymax = xmax;
};

Bbox bbox_of(const std::vector<Point>& poly) {
    Bbox b;
    for (const Point& p : poly) {
        b.xmin = std::min(b.xmin, p.x);
        b.xmax = std::max(b.xmax, p.x);
        b.ymin = std::min(b.ymin, p.y);
        b.ymax = std::max(b.ymax, p.y);
    }
    return b;
}

class QuadtreeBuilder {
  public:
    explicit QuadtreeBuilder(const QuadtreeSpec& spec) : spec_(spec) {
        if (spec.max_depth < 1 || spec.max_depth > 20)
            throw Error(ErrorCode::invalid_argument, "max_depth must be in [1, 20]");
        if (spec.base_depth < 0 || spec.base_depth > spec.max_depth)
            throw Error(ErrorCode::invalid_argument, "base_depth must be in [0, max_depth]");
        for (const auto& r : spec.refine_regions)
            if (r.depth < 1 || r.depth > spec.max_depth)
                throw Error(ErrorCode::invalid_argument,
                            "refine region target depth " + std::to_string(r.depth) +
                                " unreachable (max_depth " + std::to_string(spec.max_depth) + ")");
        if (spec.domain.size() < 3 || !polygon_is_simple(spec.domain))
            throw Error(ErrorCode::geometry, "quadtree domain polygon is invalid");
        domain_ = spec.domain;
        if (polygon_signed_area(domain_) < 0.0)
            std::reverse(domain_.begin(), domain_.end());
        dom_box_ = bbox_of(domain_);
        tol_ = kCoincidenceRel *
               std::hypot(dom_box_.xmax - dom_box_.xmin, dom_box_.ymax - dom_box_.ymin);

        if (spec.root_size > 0.0) {
            origin_ = spec.root_origin;
            size_ = spec.root_size;
        } else {
            origin_ = {dom_box_.xmin, dom_box_.ymin};
            size_ = std::max(dom_box_.xmax - dom_box_.xmin, dom_box_.ymax - dom_box_.ymin);
        }
        if (size_ <= 0.0) throw Error(ErrorCode::geometry, "quadtree domain has zero extent");
        if (dom_box_.xmin < origin_.x - tol_ || dom_box_.ymin < origin_.y - tol_ ||
            dom_box_.xmax > origin_.x + size_ + tol_ || dom_box_.ymax > origin_.y + size_ + tol_)
            throw Error(ErrorCode::invalid_argument, "root square does not cover the domain");

        depth_max_ = spec.max_depth;
        res_ = 1 << depth_max_;
        step_ = size_ / static_cast<double>(res_);
    }

    PolygonMesh build() {
        subdivide(0, 0, 0);
        if (spec_.balance) balance();
        remove_cells();
        register_nodes();
        PolygonMesh mesh = emit_mesh();
        tag_boundary_edges(mesh);
        return mesh;
    }

  private:
    Box cell_box(const CellKey& c) const {
        const double s = size_ / static_cast<double>(1 << c.depth);
        return {origin_.x + c.ix * s, origin_.y + c.iy * s, origin_.x + (c.ix + 1) * s,
                origin_.y + (c.iy + 1) * s};
    }

    int target_depth(const Box& b) const {
        int t = spec_.refine_regions.empty() ? spec_.max_depth : spec_.base_depth;
        for (const auto& r : spec_.refine_regions) {
            if (t >= r.depth) continue;
            const bool hit = (r.a.x == r.b.x && r.a.y == r.b.y)
                                 ? (r.a.x >= b.x0 && r.a.x <= b.x1 && r.a.y >= b.y0 && r.a.y <= b.y1)
                                 : segment_intersects_rect(r.a, r.b, b.x0, b.y0, b.x1, b.y1);
            if (hit) t = r.depth;
        }
        return t;
    }

    void subdivide(int depth, int ix, int iy) {
        const CellKey c{depth, ix, iy};
        if (depth < target_depth(cell_box(c))) {
            for (int dy = 0; dy < 2; ++dy)
                for (int dx = 0; dx < 2; ++dx) subdivide(depth + 1, 2 * ix + dx, 2 * iy + dy);
        } else {
            leaves_.insert(c);
        }
    }

    // Leaf of the tree covering finest-lattice point (px, py), if any.
    const CellKey* covering_leaf(const std::set<CellKey>& leaves, int px, int py) const {
        if (px < 0 || py < 0 || px >= res_ || py >= res_) return nullptr;
        for (int d = depth_max_; d >= 0; --d) {
            auto it = leaves.find({d, px >> (depth_max_ - d), py >> (depth_max_ - d)});
            if (it != leaves.end()) return &*it;
        }
        return nullptr;
    }

    void balance() {
        bool changed = true;
        while (changed) {
            changed = false;
            const std::vector<CellKey> snapshot(leaves_.begin(), leaves_.end());
            for (const CellKey& c : snapshot) {
                if (!leaves_.count(c)) continue;
                const int shift = depth_max_ - c.depth;
                const int X0 = c.ix << shift, Y0 = c.iy << shift;
                const int mid = shift > 0 ? (1 << (shift - 1)) : 0;
                // probe just beyond each side, at the side's midpoint
                const int probes[4][2] = {{X0 - 1, Y0 + mid},
                                          {X0 + (1 << shift), Y0 + mid},
                                          {X0 + mid, Y0 - 1},
                                          {X0 + mid, Y0 + (1 << shift)}};
                for (const auto& pr : probes) {
                    const CellKey* nb = covering_leaf(leaves_, pr[0], pr[1]);
                    if (nb && nb->depth < c.depth - 1) {
                        const CellKey split = *nb;
                        leaves_.erase(split);
                        for (int dy = 0; dy < 2; ++dy)
                            for (int dx = 0; dx < 2; ++dx)
                                leaves_.insert(
                                    {split.depth + 1, 2 * split.ix + dx, 2 * split.iy + dy});
                        changed = true;
                    }
                }
            }
        }
    }

    bool center_kept(const CellKey& c) const {
        const Box b = cell_box(c);
        const Point center{0.5 * (b.x0 + b.x1), 0.5 * (b.y0 + b.y1)};
        if (!point_in_polygon(center, domain_)) return false;
        for (const auto& hole : spec_.holes)
            if (point_in_polygon(center, hole)) return false;
        return true;
    }

    void remove_cells() {
        for (auto it = leaves_.begin(); it != leaves_.end();)
            it = center_kept(*it) ? std::next(it) : leaves_.erase(it);
        if (leaves_.empty())
            throw Error(ErrorCode::geometry, "no quadtree cell lies inside the domain");
    }

    Point lattice_point(int X, int Y) const {
        return {origin_.x + X * step_, origin_.y + Y * step_};
    }

    void register_nodes() {
        std::set<std::pair<int, int>> keys;  // (Y, X): scan order
        for (const CellKey& c : leaves_) {
            const int shift = depth_max_ - c.depth;
            const int X0 = c.ix << shift, Y0 = c.iy << shift;
            const int X1 = (c.ix + 1) << shift, Y1 = (c.iy + 1) << shift;
            keys.insert({Y0, X0});
            keys.insert({Y0, X1});
            keys.insert({Y1, X0});
            keys.insert({Y1, X1});
        }
        int id = 0;
        for (const auto& [Y, X] : keys) {
            Point p = lattice_point(X, Y);
            p = snap(p);
            node_id_[{X, Y}] = id;
            node_pos_.push_back(p);
            ++id;
        }
    }

    // Clipping rule: vertices strictly outside the domain (or strictly
    // inside a hole) move to the closest point of the offending boundary.
    Point snap(Point p) const {
        if (!point_in_polygon(p, domain_)) {
            const Point q = project_to_polygon_boundary(p, domain_);
            if (distance(p, q) > tol_) return q;
        }
        for (const auto& hole : spec_.holes) {
            if (!point_in_polygon(p, hole)) continue;
            const Point q = project_to_polygon_boundary(p, hole);
            if (distance(p, q) > tol_) return q;
        }
        return p;
    }

    PolygonMesh emit_mesh() {
        PolygonMesh mesh;
        mesh.nodes.reserve(node_pos_.size());
        for (const auto& [key, id] : node_id_) mesh.nodes.push_back({id, node_pos_[id]});
        mesh.sort_nodes();
        int eid = 0;
        for (const CellKey& c : leaves_) {
            const int shift = depth_max_ - c.depth;
            const int X0 = c.ix << shift, Y0 = c.iy << shift;
            const int X1 = (c.ix + 1) << shift, Y1 = (c.iy + 1) << shift;
            PolygonElement e;
            e.id = eid++;
            e.material_id = 1;
            e.node_ids = {node_id_.at({X0, Y0}), node_id_.at({X1, Y0}), node_id_.at({X1, Y1}),
                          node_id_.at({X0, Y1})};
            mesh.elements.push_back(std::move(e));
        }
        return mesh;
    }

    // Walks each kept leaf's sides in finest-lattice unit segments, probing
    // half a step outward; maximal uncovered runs become boundary edges.
    // Run endpoints always coincide with registered nodes (a coverage change
    // happens at a kept neighbor's corner).
    void tag_boundary_edges(PolygonMesh& mesh) const {
        std::vector<BoundaryEdge> edges;
        for (const CellKey& c : leaves_) {
            const int shift = depth_max_ - c.depth;
            const int X0 = c.ix << shift, Y0 = c.iy << shift;
            const int X1 = (c.ix + 1) << shift, Y1 = (c.iy + 1) << shift;
            const int len = 1 << shift;
            struct Side {
                int sx, sy;    // start lattice point
                int dx, dy;    // unit step along the side
                int ox, oy;    // probe offset sign (outward)
            };
            const Side sides[4] = {
                {X0, Y0, 1, 0, 0, -1},  // bottom
                {X1, Y0, 0, 1, 1, 0},   // right
                {X1, Y1, -1, 0, 0, 1},  // top
                {X0, Y1, 0, -1, -1, 0}, // left
            };
            for (const Side& s : sides) {
                int run_start = -1;
                for (int u = 0; u <= len; ++u) {
                    bool exposed = false;
                    if (u < len) {
                        // finest-lattice cell just outside unit segment u
                        int cx, cy;
                        if (s.dx != 0) {  // horizontal side
                            cx = s.sx + s.dx * u + (s.dx < 0 ? -1 : 0);
                            cy = s.oy < 0 ? s.sy - 1 : s.sy;
                        } else {  // vertical side
                            cy = s.sy + s.dy * u + (s.dy < 0 ? -1 : 0);
                            cx = s.ox < 0 ? s.sx - 1 : s.sx;
                        }
                        exposed = covering_leaf(leaves_, cx, cy) == nullptr;
                    }
                    if (exposed && run_start < 0) run_start = u;
                    if ((!exposed || u == len) && run_start >= 0) {
                        const int a_x = s.sx + s.dx * run_start, a_y = s.sy + s.dy * run_start;
                        const int b_x = s.sx + s.dx * u, b_y = s.sy + s.dy * u;
                        edges.push_back({node_id_.at({a_x, a_y}), node_id_.at({b_x, b_y}), ""});
                        run_start = -1;
                    }
                }
            }
        }
        for (auto& e : edges) e.tag = classify(mesh.node(e.a).p, mesh.node(e.b).p);
        mesh.boundary_edges = std::move(edges);
    }

    std::string classify(Point a, Point b) const {
        auto near = [&](double v, double w) { return std::abs(v - w) <= tol_; };
        if (near(a.x, dom_box_.xmin) && near(b.x, dom_box_.xmin)) return "left";
        if (near(a.x, dom_box_.xmax) && near(b.x, dom_box_.xmax)) return "right";
        if (near(a.y, dom_box_.ymin) && near(b.y, dom_box_.ymin)) return "bottom";
        if (near(a.y, dom_box_.ymax) && near(b.y, dom_box_.ymax)) return "top";
        const Point mid = 0.5 * (a + b);
        if (distance(a, project_to_polygon_boundary(a, domain_)) <= tol_ &&
            distance(b, project_to_polygon_boundary(b, domain_)) <= tol_ &&
            distance(mid, project_to_polygon_boundary(mid, domain_)) <= tol_)
            return "boundary";
        return "impermeable";
    }

    const QuadtreeSpec& spec_;
    std::vector<Point> domain_;
    Bbox dom_box_;
    Point origin_;
    double size_ = 0.0;
    double tol_ = 0.0;
    int depth_max_ = 0;
    int res_ = 0;
    double step_ = 0.0;
    std::set<CellKey> leaves_;
    std::map<std::pair<int, int>, int> node_id_;  // (X, Y) -> id
    std::vector<Point> node_pos_;
};

}  // namespace

PolygonMesh generate_quadtree(const QuadtreeSpec& spec) { return QuadtreeBuilder(spec).build(); }

}  // namespace psb

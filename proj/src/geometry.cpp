#include "psbfem/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "psbfem/errors.hpp"

namespace psb {

double cross(Point a, Point b) { return a.x * b.y - a.y * b.x; }
double dot(Point a, Point b) { return a.x * b.x + a.y * b.y; }
double norm(Point p) { return std::hypot(p.x, p.y); }
double distance(Point a, Point b) { return norm(a - b); }

double polygon_signed_area(const std::vector<Point>& poly) {
    double a = 0.0;
    const std::size_t n = poly.size();
    for (std::size_t i = 0; i < n; ++i) {
        const Point& p = poly[i];
        const Point& q = poly[(i + 1) % n];
        a += cross(p, q);
    }
    return 0.5 * a;
}

double polygon_diameter(const std::vector<Point>& poly) {
    double xmin = std::numeric_limits<double>::max(), xmax = -xmin;
    double ymin = xmin, ymax = xmax;
    for (const Point& p : poly) {
        xmin = std::min(xmin, p.x);
        xmax = std::max(xmax, p.x);
        ymin = std::min(ymin, p.y);
        ymax = std::max(ymax, p.y);
    }
    return std::hypot(xmax - xmin, ymax - ymin);
}

AreaCentroid polygon_area_centroid(const std::vector<Point>& poly, double tol_rel) {
    if (poly.size() < 3)
        throw Error(ErrorCode::geometry, "polygon needs at least 3 vertices");
    const double d = polygon_diameter(poly);
    const double a = polygon_signed_area(poly);
    if (std::abs(a) <= tol_rel * d * d)
        throw Error(ErrorCode::geometry, "degenerate polygon: area below tolerance");
    double cx = 0.0, cy = 0.0;
    const std::size_t n = poly.size();
    for (std::size_t i = 0; i < n; ++i) {
        const Point& p = poly[i];
        const Point& q = poly[(i + 1) % n];
        const double w = cross(p, q);
        cx += (p.x + q.x) * w;
        cy += (p.y + q.y) * w;
    }
    return {a, Point{cx / (6.0 * a), cy / (6.0 * a)}};
}

namespace {

int orient(Point a, Point b, Point c, double tol) {
    const double v = cross(b - a, c - a);
    if (v > tol) return 1;
    if (v < -tol) return -1;
    return 0;
}

bool on_segment_collinear(Point a, Point b, Point p, double tol) {
    return p.x >= std::min(a.x, b.x) - tol && p.x <= std::max(a.x, b.x) + tol &&
           p.y >= std::min(a.y, b.y) - tol && p.y <= std::max(a.y, b.y) + tol;
}

}  // namespace

bool segments_intersect(Point a1, Point a2, Point b1, Point b2, double tol) {
    const int o1 = orient(a1, a2, b1, tol);
    const int o2 = orient(a1, a2, b2, tol);
    const int o3 = orient(b1, b2, a1, tol);
    const int o4 = orient(b1, b2, a2, tol);
    if (o1 != o2 && o3 != o4) return true;
    if (o1 == 0 && on_segment_collinear(a1, a2, b1, tol)) return true;
    if (o2 == 0 && on_segment_collinear(a1, a2, b2, tol)) return true;
    if (o3 == 0 && on_segment_collinear(b1, b2, a1, tol)) return true;
    if (o4 == 0 && on_segment_collinear(b1, b2, a2, tol)) return true;
    return false;
}

bool polygon_is_simple(const std::vector<Point>& poly, double tol) {
    const std::size_t n = poly.size();
    if (n < 3) return false;
    for (std::size_t i = 0; i < n; ++i)
        if (distance(poly[i], poly[(i + 1) % n]) <= tol) return false;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            // skip adjacent edges (they share an endpoint)
            if (j == i || (j + 1) % n == i || (i + 1) % n == j) continue;
            if (segments_intersect(poly[i], poly[(i + 1) % n], poly[j], poly[(j + 1) % n], tol))
                return false;
        }
    }
    return true;
}

bool polygon_star_convex(const std::vector<Point>& poly, Point center, double tol_rel) {
    const double d = polygon_diameter(poly);
    const double tol = tol_rel * d * d;
    const std::size_t n = poly.size();
    for (std::size_t i = 0; i < n; ++i) {
        const Point p = poly[i] - center;
        const Point q = poly[(i + 1) % n] - center;
        if (cross(p, q) <= tol) return false;
    }
    return true;
}

bool point_in_polygon(Point p, const std::vector<Point>& poly, double tol) {
    const std::size_t n = poly.size();
    // boundary counts as inside
    for (std::size_t i = 0; i < n; ++i) {
        const Point a = poly[i], b = poly[(i + 1) % n];
        if (orient(a, b, p, tol == 0.0 ? 1e-300 : tol) == 0 && on_segment_collinear(a, b, p, tol))
            return true;
    }
    bool inside = false;
    for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
        const Point a = poly[i], b = poly[j];
        if ((a.y > p.y) != (b.y > p.y)) {
            const double xint = a.x + (p.y - a.y) / (b.y - a.y) * (b.x - a.x);
            if (p.x < xint) inside = !inside;
        }
    }
    return inside;
}

Point project_to_polygon_boundary(Point p, const std::vector<Point>& poly) {
    double best = std::numeric_limits<double>::max();
    Point best_pt = p;
    const std::size_t n = poly.size();
    for (std::size_t i = 0; i < n; ++i) {
        const Point a = poly[i], b = poly[(i + 1) % n];
        const Point ab = b - a;
        const double len2 = dot(ab, ab);
        double t = len2 > 0.0 ? dot(p - a, ab) / len2 : 0.0;
        t = std::clamp(t, 0.0, 1.0);
        const Point q = a + t * ab;
        const double d = distance(p, q);
        if (d < best) {
            best = d;
            best_pt = q;
        }
    }
    return best_pt;
}

bool segment_intersects_rect(Point a, Point b, double x0, double y0, double x1, double y1) {
    // trivial accept: an endpoint inside
    auto inside = [&](Point p) { return p.x >= x0 && p.x <= x1 && p.y >= y0 && p.y <= y1; };
    if (inside(a) || inside(b)) return true;
    const Point c00{x0, y0}, c10{x1, y0}, c11{x1, y1}, c01{x0, y1};
    return segments_intersect(a, b, c00, c10) || segments_intersect(a, b, c10, c11) ||
           segments_intersect(a, b, c11, c01) || segments_intersect(a, b, c01, c00);
}

bool point_on_open_segment(Point p, Point a, Point b, double tol, double* t_out) {
    const Point ab = b - a;
    const double len = norm(ab);
    if (len <= tol) return false;
    const double c = cross(ab, p - a) / len;  // perpendicular distance
    if (std::abs(c) > tol) return false;
    const double t = dot(p - a, ab) / (len * len);
    if (t * len <= tol || (1.0 - t) * len <= tol) return false;  // excludes endpoints
    if (t_out) *t_out = t;
    return true;
}

}  // namespace psb

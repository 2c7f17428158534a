#pragma once

#include <cstddef>
#include <vector>

namespace psb {

struct Point {
    double x = 0.0;
    double y = 0.0;
};

inline Point operator+(Point a, Point b) { return {a.x + b.x, a.y + b.y}; }
inline Point operator-(Point a, Point b) { return {a.x - b.x, a.y - b.y}; }
inline Point operator*(double s, Point p) { return {s * p.x, s * p.y}; }
inline Point operator*(Point p, double s) { return {s * p.x, s * p.y}; }

double cross(Point a, Point b);
double dot(Point a, Point b);
double norm(Point p);
double distance(Point a, Point b);

// Relative tolerance used for coincidence / degeneracy checks throughout.
inline constexpr double kCoincidenceRel = 1e-9;

struct AreaCentroid {
    double area = 0.0;
    Point centroid;
};

// Shoelace area and centroid of a simple polygon given in order (positive
// area when counter-clockwise). Throws a geometry error when the polygon is
// degenerate relative to its diameter.
AreaCentroid polygon_area_centroid(const std::vector<Point>& poly,
                                   double tol_rel = kCoincidenceRel);

double polygon_signed_area(const std::vector<Point>& poly);

// True when no two non-adjacent edges intersect and no edge is degenerate.
bool polygon_is_simple(const std::vector<Point>& poly, double tol = 0.0);

// True when every edge subtends a strictly positive area from `center`,
// i.e. the whole boundary is visible from it.
bool polygon_star_convex(const std::vector<Point>& poly, Point center,
                         double tol_rel = kCoincidenceRel);

// Diagonal of the axis-aligned bounding box.
double polygon_diameter(const std::vector<Point>& poly);

// Even-odd rule; points on the boundary count as inside.
bool point_in_polygon(Point p, const std::vector<Point>& poly, double tol = 1e-12);

// Closest point on the polygon boundary.
Point project_to_polygon_boundary(Point p, const std::vector<Point>& poly);

bool segments_intersect(Point a1, Point a2, Point b1, Point b2, double tol = 1e-12);

// Segment vs axis-aligned rectangle [x0,x1] x [y0,y1].
bool segment_intersects_rect(Point a, Point b, double x0, double y0, double x1, double y1);

// True when p lies strictly inside segment (a,b), endpoints excluded.
// `tol` is an absolute distance; on success writes the parameter t in (0,1).
bool point_on_open_segment(Point p, Point a, Point b, double tol, double* t_out = nullptr);

}  // namespace psb

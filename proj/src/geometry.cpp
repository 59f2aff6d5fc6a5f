#include "perfhom/geometry.hpp"

#include <algorithm>
#include <cmath>

namespace perfhom {

namespace {

constexpr double kPi = 3.14159265358979323846;

}  // namespace

// When n is a multiple of 4 the set is generated from the first quadrant and
// reflected, so polygons and ring points are exactly symmetric under x- and
// y-mirroring; symmetric cell meshes depend on this.
std::vector<Vec2> unit_circle_directions(int n) {
  std::vector<Vec2> d(static_cast<std::size_t>(n));
  if (n % 4 == 0) {
    const int q = n / 4;
    for (int i = 0; i <= q; ++i) {
      const double a = 2.0 * kPi * i / n;
      d[static_cast<std::size_t>(i)] = {std::cos(a), std::sin(a)};
    }
    d[0] = {1.0, 0.0};
    d[static_cast<std::size_t>(q)] = {0.0, 1.0};
    for (int i = 1; i <= q; ++i) {
      const Vec2 p = d[static_cast<std::size_t>(q - i)];
      d[static_cast<std::size_t>(q + i)] = {-p.x, p.y};
    }
    for (int i = 1; i < 2 * q; ++i) {
      const Vec2 p = d[static_cast<std::size_t>(i)];
      d[static_cast<std::size_t>(2 * q + i)] = {-p.x, -p.y};
    }
  } else {
    for (int i = 0; i < n; ++i) {
      const double a = 2.0 * kPi * i / n;
      d[static_cast<std::size_t>(i)] = {std::cos(a), std::sin(a)};
    }
  }
  return d;
}

namespace {

Polygon polygonalize(const HoleSpec& h) {
  Polygon poly;
  switch (h.shape) {
    case HoleShape::none:
      break;
    case HoleShape::disc: {
      for (const Vec2& d : unit_circle_directions(h.polygon_segments))
        poly.pts.push_back(h.center + h.radius * d);
      break;
    }
    case HoleShape::ellipse: {
      for (const Vec2& d : unit_circle_directions(h.polygon_segments))
        poly.pts.push_back(h.center + Vec2{h.semi_axes.x * d.x, h.semi_axes.y * d.y});
      break;
    }
    case HoleShape::square: {
      // Exact square; sides subdivided (collinear points) to honor the
      // requested boundary discretization count.
      const int per_side = (h.polygon_segments + 3) / 4;
      const double w = h.half_width;
      const Vec2 corners[4] = {{h.center.x + w, h.center.y - w},
                               {h.center.x + w, h.center.y + w},
                               {h.center.x - w, h.center.y + w},
                               {h.center.x - w, h.center.y - w}};
      for (int s = 0; s < 4; ++s) {
        const Vec2 a = corners[s];
        const Vec2 b = corners[(s + 1) % 4];
        for (int i = 0; i < per_side; ++i) {
          const double t = static_cast<double>(i) / per_side;
          poly.pts.push_back({a.x + t * (b.x - a.x), a.y + t * (b.y - a.y)});
        }
      }
      break;
    }
  }
  return poly;
}

double clearance_to_unit_square(const Polygon& poly) {
  double c = 1.0;
  for (const Vec2& p : poly.pts)
    c = std::min({c, p.x, p.y, 1.0 - p.x, 1.0 - p.y});
  return c;
}

}  // namespace

HoleSpec HoleSpec::none() { return HoleSpec{}; }

HoleSpec HoleSpec::disc(Vec2 center, double radius, int segments) {
  HoleSpec h;
  h.shape = HoleShape::disc;
  h.center = center;
  h.radius = radius;
  h.polygon_segments = segments;
  return h;
}

HoleSpec HoleSpec::square(Vec2 center, double half_width, int segments) {
  HoleSpec h;
  h.shape = HoleShape::square;
  h.center = center;
  h.half_width = half_width;
  h.polygon_segments = segments;
  return h;
}

HoleSpec HoleSpec::ellipse(Vec2 center, Vec2 semi_axes, int segments) {
  HoleSpec h;
  h.shape = HoleShape::ellipse;
  h.center = center;
  h.semi_axes = semi_axes;
  h.polygon_segments = segments;
  return h;
}

double Polygon::area() const {
  double twice = 0.0;
  const std::size_t n = pts.size();
  for (std::size_t i = 0; i < n; ++i) twice += cross(pts[i], pts[(i + 1) % n]);
  return 0.5 * twice;
}

double Polygon::perimeter() const {
  double len = 0.0;
  const std::size_t n = pts.size();
  for (std::size_t i = 0; i < n; ++i) len += norm(pts[(i + 1) % n] - pts[i]);
  return len;
}

bool Polygon::is_convex() const {
  const std::size_t n = pts.size();
  if (n < 3) return false;
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2 a = pts[(i + 1) % n] - pts[i];
    const Vec2 b = pts[(i + 2) % n] - pts[(i + 1) % n];
    if (cross(a, b) < -1e-14) return false;
  }
  return true;
}

UnitCell make_unit_cell(const HoleSpec& hole) {
  UnitCell cell;
  cell.hole = hole;
  if (hole.shape == HoleShape::none) return cell;

  if (hole.polygon_segments < 8)
    throw ConfigError("hole polygon_segments must be at least 8");
  if (hole.shape == HoleShape::disc && hole.radius <= 0.0)
    throw ConfigError("disc hole radius must be positive");
  if (hole.shape == HoleShape::square && hole.half_width <= 0.0)
    throw ConfigError("square hole half_width must be positive");
  if (hole.shape == HoleShape::ellipse && (hole.semi_axes.x <= 0.0 || hole.semi_axes.y <= 0.0))
    throw ConfigError("ellipse hole semi-axes must be positive");

  cell.hole_polygon = polygonalize(hole);
  if (clearance_to_unit_square(cell.hole_polygon) <= 0.0)
    throw ConfigError("hole touches or crosses the boundary of the unit cell");
  if (!cell.hole_polygon.is_convex())
    throw NumericalError("polygonalized hole is not convex");

  const double hole_area = cell.hole_polygon.area();
  cell.area_ystar = 1.0 - hole_area;
  cell.perimeter_df = cell.hole_polygon.perimeter();
  return cell;
}

double hole_clearance(const UnitCell& cell) {
  if (!cell.has_hole()) return 1.0;
  return clearance_to_unit_square(cell.hole_polygon);
}

PerforatedDomain enumerate_holes(const Rect& outer, const UnitCell& cell, double epsilon) {
  if (epsilon <= 0.0) throw ConfigError("epsilon must be positive");
  const double nx_real = outer.width() / epsilon;
  const double ny_real = outer.height() / epsilon;
  const int nx = static_cast<int>(std::lround(nx_real));
  const int ny = static_cast<int>(std::lround(ny_real));
  if (nx < 1 || ny < 1 || std::abs(nx * epsilon - outer.width()) > 1e-9 * std::max(1.0, outer.width()) ||
      std::abs(ny * epsilon - outer.height()) > 1e-9 * std::max(1.0, outer.height()))
    throw ConfigError("epsilon does not tile the outer rectangle exactly");

  PerforatedDomain dom;
  dom.outer = outer;
  dom.epsilon = epsilon;
  dom.cell = cell;
  dom.cells_x = nx;
  dom.cells_y = ny;

  if (cell.has_hole()) {
    for (int kx = 0; kx < nx; ++kx) {
      for (int ky = 0; ky < ny; ++ky) {
        bool inside = true;
        for (const Vec2& p : cell.hole_polygon.pts) {
          const double x = outer.x0 + epsilon * (kx + p.x);
          const double y = outer.y0 + epsilon * (ky + p.y);
          if (!(x > outer.x0 && x < outer.x1 && y > outer.y0 && y < outer.y1)) {
            inside = false;
            break;
          }
        }
        if (inside) dom.holes.emplace_back(kx, ky);
      }
    }
  }
  return dom;
}

DomainMeasures measures(const PerforatedDomain& domain) {
  DomainMeasures m;
  const double hole_area = 1.0 - domain.cell.area_ystar;
  const double n_holes = static_cast<double>(domain.holes.size());
  m.area_omega_eps = domain.outer.area() - n_holes * domain.epsilon * domain.epsilon * hole_area;
  m.perimeter_df_eps = n_holes * domain.epsilon * domain.cell.perimeter_df;
  return m;
}

}  // namespace perfhom

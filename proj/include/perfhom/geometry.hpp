#pragma once

#include <utility>
#include <vector>

#include "perfhom/common.hpp"

namespace perfhom {

enum class HoleShape { none, disc, square, ellipse };

// Hole geometry inside the reference cell Y = [0,1]^2. Curved shapes are
// polygonalized once and the same polygon is scaled into every eps-cell, so
// cell-problem geometry and eps-problem geometry stay consistent.
struct HoleSpec {
  HoleShape shape = HoleShape::none;
  Vec2 center{0.5, 0.5};
  double radius = 0.0;       // disc
  double half_width = 0.0;   // axis-aligned square
  Vec2 semi_axes{0.0, 0.0};  // ellipse
  int polygon_segments = 64;

  static HoleSpec none();
  static HoleSpec disc(Vec2 center, double radius, int segments = 64);
  static HoleSpec square(Vec2 center, double half_width, int segments = 64);
  static HoleSpec ellipse(Vec2 center, Vec2 semi_axes, int segments = 64);
};

// CCW polygon.
struct Polygon {
  std::vector<Vec2> pts;

  double area() const;
  double perimeter() const;
  bool is_convex() const;  // collinear vertices allowed
};

// Reference cell Y = [0,1]^2 with hole F, |Y| = 1. theta* = area_ystar and
// sigma = perimeter_df numerically.
struct UnitCell {
  HoleSpec hole;
  Polygon hole_polygon;      // empty when there is no hole
  double area_ystar = 1.0;   // |Y*|
  double perimeter_df = 0.0; // |dF|

  bool has_hole() const { return !hole_polygon.pts.empty(); }
};

/// Builds the unit cell, rejecting holes that touch the cell boundary and
/// polygon_segments < 8.
UnitCell make_unit_cell(const HoleSpec& hole);

/// Distance from the hole polygon to the boundary of Y (1.0 without a hole).
double hole_clearance(const UnitCell& cell);

struct Rect {
  double x0 = 0, y0 = 0, x1 = 1, y1 = 1;

  double width() const { return x1 - x0; }
  double height() const { return y1 - y0; }
  double area() const { return width() * height(); }
};

// Omega_eps = Omega minus the eps-scaled holes eps*(k + F). eps is restricted
// to exact tilings of Omega so the hole list is a pure containment result and
// no cell is clipped.
struct PerforatedDomain {
  Rect outer;
  double epsilon = 0.0;
  UnitCell cell;
  int cells_x = 0, cells_y = 0;
  std::vector<std::pair<int, int>> holes;  // cell indices k, lexicographic
};

/// Enumerates the holes eps*(k + F) whose closures lie in the open set Omega.
/// Rejects epsilon that does not tile Omega exactly.
PerforatedDomain enumerate_holes(const Rect& outer, const UnitCell& cell, double epsilon);

struct DomainMeasures {
  double area_omega_eps = 0.0;
  double perimeter_df_eps = 0.0;
};

DomainMeasures measures(const PerforatedDomain& domain);

/// Directions at angles 2*pi*i/n. For n divisible by 4 the set is generated
/// in one quadrant and reflected, so it is exactly mirror symmetric.
std::vector<Vec2> unit_circle_directions(int n);

}  // namespace perfhom

#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace nonloc {

// Uniform axis-aligned grid. Cell i has center origin + (i + 1/2) h per axis;
// storage is row-major with the last axis fastest.
struct Grid {
  int d = 1;
  double h = 1.0;
  std::vector<long> n;
  std::vector<double> origin;

  Grid() = default;
  Grid(int d, double h, std::vector<long> n, std::vector<double> origin);
  // Cube [-half, half]^d (rounded outward to whole cells) with spacing h.
  static Grid centered_cube(int d, double h, double half);
  // Box [lo, hi] per axis, rounded outward to whole cells.
  static Grid box(const std::vector<double>& lo, const std::vector<double>& hi, double h);

  std::size_t size() const;
  double cell_volume() const;
  std::vector<long> strides() const;
  void unravel(std::size_t flat, long* idx) const;
  std::size_t ravel(const long* idx) const;
  bool inside(const long* idx) const;
  void center(std::size_t flat, double* x) const;
  double center_along(int axis, long i) const { return origin[axis] + (i + 0.5) * h; }
  bool same_as(const Grid& o) const;
  std::string header() const;
};

struct GridSet {
  Grid grid;
  std::vector<std::uint8_t> cells;

  GridSet() = default;
  explicit GridSet(Grid g) : grid(std::move(g)), cells(grid.size(), 0) {}
  std::size_t count() const;
  double volume() const { return static_cast<double>(count()) * grid.cell_volume(); }
  std::vector<std::size_t> members() const;
  GridSet complement() const;
  GridSet intersect(const GridSet& o) const;
  GridSet unite(const GridSet& o) const;
  GridSet minus(const GridSet& o) const;
  bool operator==(const GridSet& o) const { return grid.same_as(o.grid) && cells == o.cells; }
};

struct GridFunction {
  Grid grid;
  std::vector<double> values;

  GridFunction() = default;
  explicit GridFunction(Grid g, double fill = 0.0) : grid(std::move(g)), values(grid.size(), fill) {}
  static GridFunction indicator(const GridSet& s);
  // Lp norm over the grid, (sum |u|^p h^d)^(1/p).
  double lp_norm(double p) const;
};

struct Shape {
  struct Ball {
    double radius;
    std::vector<double> center;
  };
  struct Box {
    std::vector<double> lo, hi;
  };
  std::vector<Ball> balls;
  std::vector<Box> boxes;

  static Shape ball(double radius, std::vector<double> center);
  static Shape box(std::vector<double> lo, std::vector<double> hi);
  static Shape union_of(const std::vector<Shape>& parts);
  bool contains(const double* x, int d) const;
};

// Cells whose centers lie in the (open) shape. `empty` is set when no cell is occupied.
GridSet rasterize(const Grid& grid, const Shape& shape, bool* empty = nullptr);

// u(x + shift h) - u(x), with zero padding outside the grid box.
GridFunction forward_difference(const GridFunction& u, const std::vector<long>& shift);

enum class MollifierBoundary { ZeroPad, Renormalize };

// Convolution with the bump (1 - |x/eps|^2)_+^2, normalized to unit discrete mass.
// ZeroPad treats u as zero outside the box; Renormalize divides by the in-box weight.
GridFunction mollify(const GridFunction& u, double eps, MollifierBoundary boundary = MollifierBoundary::ZeroPad);

// Cells ranked by euclidean distance of their centers from the origin, ties by flat index.
std::vector<std::size_t> distance_ranking(const Grid& grid);

// Same-count set made of the first cells of the distance ranking.
GridSet rearrange(const GridSet& s);
// |u| sorted in decreasing order and laid onto the distance ranking.
GridFunction rearrange(const GridFunction& u);

double mean(const GridFunction& u, const GridSet& omega);

// Text format: header `d h n1 .. nd o1 .. od`, then values in storage order.
// A header starting with `binary` is followed by one newline and raw doubles.
// Lines starting with `#` before the header are comments.
void write_grid(const std::string& path, const GridFunction& u, bool binary = false, const std::string& comment = "");
void write_grid(const std::string& path, const GridSet& s, const std::string& comment = "");
GridFunction read_grid_function(const std::string& path);
GridSet read_grid_set(const std::string& path);

}  // namespace nonloc

#pragma once

#include <array>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace nlop {

// Bounded open set in R^N, N in {1,2}.
class Domain {
public:
  enum class Shape { Interval, Box, Ball };

  static Domain interval(double a, double b);
  static Domain box(double ax, double bx, double ay, double by);
  static Domain ball(int dim, std::array<double, 2> center, double radius);

  Shape shape() const { return shape_; }
  int dim() const { return dim_; }
  std::array<double, 2> lo() const { return lo_; }  // bounding box
  std::array<double, 2> hi() const { return hi_; }
  std::array<double, 2> center() const { return center_; }
  double radius() const { return radius_; }

  // closed containment: x in the closure of the domain
  bool contains(std::span<const double> x) const;
  // distance from x to the complement; negative outside, 0 on the boundary
  double boundary_distance(std::span<const double> x) const;
  double volume() const;

  nlohmann::json describe() const;
  static Domain from_json(const nlohmann::json& descriptor);

private:
  friend class Mesh;
  Domain() = default;
  Shape shape_ = Shape::Interval;
  int dim_ = 1;
  std::array<double, 2> lo_{}, hi_{};
  std::array<double, 2> center_{};
  double radius_ = 0.0;
};

std::string to_string(Domain::Shape s);

enum class CellClass { Interior, Cut, Exterior };

class EmptySubdomain : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Uniform cell partition of the bounding box.  Cells fully inside the closed
// domain are interior and carry the degrees of freedom; cells that merely cut
// the boundary are treated like exterior ones (the discrete field vanishes
// there), keeping u = 0 outside the domain.
class Mesh {
public:
  static Mesh uniform(const Domain& domain, int n_per_axis);

  const Domain& domain() const { return domain_; }
  int dim() const { return domain_.dim(); }
  int nx() const { return nx_; }
  int ny() const { return ny_; }
  double hx() const { return hx_; }
  double hy() const { return hy_; }
  // grid spacing; equals hx (and hy when the box aspect allows square cells)
  double cell_size() const { return hx_; }
  double cell_volume() const { return dim() == 1 ? hx_ : hx_ * hy_; }

  int cell_count() const { return nx_ * ny_; }
  int cell_index(int ix, int iy) const { return ix + nx_ * iy; }
  std::array<int, 2> cell_coords(int cell) const { return {cell % nx_, cell / nx_}; }
  std::array<double, 2> cell_center(int cell) const;
  std::array<double, 2> cell_lo(int cell) const;  // lower corner
  CellClass cell_class(int cell) const { return classes_[cell]; }

  // grid neighbor shifted by `steps` cells along `axis`; -1 when off the grid
  int neighbor(int cell, int axis, int steps) const;

  int dof_count() const { return static_cast<int>(cell_of_dof_.size()); }
  int dof_of_cell(int cell) const { return dof_of_cell_[cell]; }
  int cell_of_dof(int dof) const { return cell_of_dof_[dof]; }

  int count(CellClass c) const;

  // interior DOFs whose cell center lies at distance >= margin from the
  // complement of the domain
  std::vector<int> dofs_with_margin(double margin) const;
  // interior DOFs whose whole cell lies in the closed ball
  std::vector<int> dofs_in_ball(std::array<double, 2> center, double radius) const;

  nlohmann::json info() const;

private:
  Mesh() = default;
  Domain domain_;
  int nx_ = 0, ny_ = 1;
  double hx_ = 0.0, hy_ = 1.0;
  std::vector<CellClass> classes_;
  std::vector<int> dof_of_cell_;
  std::vector<int> cell_of_dof_;
};

struct Subdomain {
  double margin = 0.0;
  std::vector<int> dofs;
};

// Throws EmptySubdomain when no cell center is margin-deep inside the domain.
Subdomain select_subdomain(const Mesh& mesh, double margin);

}  // namespace nlop

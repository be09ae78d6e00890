#include "nlop/mesh.hpp"

#include <algorithm>
#include <cmath>

namespace nlop {

Domain Domain::interval(double a, double b) {
  if (!(a < b) || !std::isfinite(a) || !std::isfinite(b))
    throw std::invalid_argument("interval: need finite a < b");
  Domain d;
  d.shape_ = Shape::Interval;
  d.dim_ = 1;
  d.lo_ = {a, 0.0};
  d.hi_ = {b, 0.0};
  return d;
}

Domain Domain::box(double ax, double bx, double ay, double by) {
  if (!(ax < bx) || !(ay < by) || !std::isfinite(ax + bx + ay + by))
    throw std::invalid_argument("box: need finite lo < hi per axis");
  Domain d;
  d.shape_ = Shape::Box;
  d.dim_ = 2;
  d.lo_ = {ax, ay};
  d.hi_ = {bx, by};
  return d;
}

Domain Domain::ball(int dim, std::array<double, 2> center, double radius) {
  if (dim != 1 && dim != 2) throw std::invalid_argument("ball: dim must be 1 or 2");
  if (!(radius > 0.0) || !std::isfinite(radius))
    throw std::invalid_argument("ball: radius must be positive and finite");
  Domain d;
  d.shape_ = Shape::Ball;
  d.dim_ = dim;
  d.center_ = center;
  d.radius_ = radius;
  for (int i = 0; i < dim; ++i) {
    d.lo_[i] = center[i] - radius;
    d.hi_[i] = center[i] + radius;
  }
  return d;
}

bool Domain::contains(std::span<const double> x) const {
  if (shape_ == Shape::Ball) {
    double r2 = 0.0;
    for (int i = 0; i < dim_; ++i) r2 += (x[i] - center_[i]) * (x[i] - center_[i]);
    return r2 <= radius_ * radius_;
  }
  for (int i = 0; i < dim_; ++i)
    if (x[i] < lo_[i] || x[i] > hi_[i]) return false;
  return true;
}

double Domain::boundary_distance(std::span<const double> x) const {
  if (shape_ == Shape::Ball) {
    double r2 = 0.0;
    for (int i = 0; i < dim_; ++i) r2 += (x[i] - center_[i]) * (x[i] - center_[i]);
    return radius_ - std::sqrt(r2);
  }
  double d = std::numeric_limits<double>::infinity();
  for (int i = 0; i < dim_; ++i) d = std::min({d, x[i] - lo_[i], hi_[i] - x[i]});
  return d;
}

double Domain::volume() const {
  switch (shape_) {
    case Shape::Interval: return hi_[0] - lo_[0];
    case Shape::Box: return (hi_[0] - lo_[0]) * (hi_[1] - lo_[1]);
    case Shape::Ball: return dim_ == 1 ? 2.0 * radius_ : M_PI * radius_ * radius_;
  }
  return 0.0;
}

std::string to_string(Domain::Shape s) {
  switch (s) {
    case Domain::Shape::Interval: return "interval";
    case Domain::Shape::Box: return "box";
    case Domain::Shape::Ball: return "ball";
  }
  return "?";
}

nlohmann::json Domain::describe() const {
  nlohmann::json j;
  j["shape"] = to_string(shape_);
  switch (shape_) {
    case Shape::Interval:
      j["bounds"] = {lo_[0], hi_[0]};
      break;
    case Shape::Box:
      j["x"] = {lo_[0], hi_[0]};
      j["y"] = {lo_[1], hi_[1]};
      break;
    case Shape::Ball:
      j["dim"] = dim_;
      j["center"] = dim_ == 1 ? nlohmann::json{center_[0]} : nlohmann::json{center_[0], center_[1]};
      j["radius"] = radius_;
      break;
  }
  return j;
}

Domain Domain::from_json(const nlohmann::json& d) {
  if (!d.is_object() || !d.contains("shape"))
    throw std::invalid_argument("domain descriptor needs a 'shape'");
  std::string shape = d.at("shape").get<std::string>();
  if (shape == "interval") {
    auto b = d.at("bounds");
    return interval(b.at(0).get<double>(), b.at(1).get<double>());
  }
  if (shape == "box") {
    auto x = d.at("x"), y = d.at("y");
    return box(x.at(0).get<double>(), x.at(1).get<double>(), y.at(0).get<double>(),
               y.at(1).get<double>());
  }
  if (shape == "ball") {
    auto c = d.at("center");
    int dim = d.contains("dim") ? d.at("dim").get<int>() : static_cast<int>(c.size());
    std::array<double, 2> center{c.at(0).get<double>(), 0.0};
    if (dim == 2) center[1] = c.at(1).get<double>();
    return ball(dim, center, d.at("radius").get<double>());
  }
  throw std::invalid_argument("unknown domain shape '" + shape + "'");
}

namespace {

// positive-measure intersection of an axis-aligned cell with the open domain
bool cell_intersects(const Domain& dom, const std::array<double, 2>& clo,
                     const std::array<double, 2>& chi) {
  if (dom.shape() == Domain::Shape::Ball) {
    double d2 = 0.0;
    for (int i = 0; i < dom.dim(); ++i) {
      double c = dom.center()[i];
      double t = std::max({clo[i] - c, c - chi[i], 0.0});
      d2 += t * t;
    }
    return d2 < dom.radius() * dom.radius();
  }
  for (int i = 0; i < dom.dim(); ++i)
    if (!(clo[i] < dom.hi()[i] && chi[i] > dom.lo()[i])) return false;
  return true;
}

}  // namespace

Mesh Mesh::uniform(const Domain& domain, int n_per_axis) {
  if (n_per_axis < 2) throw std::invalid_argument("mesh: need at least 2 cells per axis");
  Mesh m;
  m.domain_ = domain;
  m.nx_ = n_per_axis;
  m.hx_ = (domain.hi()[0] - domain.lo()[0]) / n_per_axis;
  if (!(m.hx_ > 0.0)) throw std::invalid_argument("mesh: degenerate domain");
  if (domain.dim() == 2) {
    double height = domain.hi()[1] - domain.lo()[1];
    m.ny_ = std::max(1, static_cast<int>(std::lround(height / m.hx_)));
    m.hy_ = height / m.ny_;
    if (!(m.hy_ > 0.0)) throw std::invalid_argument("mesh: degenerate domain");
  }
  const int total = m.nx_ * m.ny_;
  m.classes_.resize(total);
  m.dof_of_cell_.assign(total, -1);
  for (int cell = 0; cell < total; ++cell) {
    auto lo = m.cell_lo(cell);
    std::array<double, 2> hi{lo[0] + m.hx_, lo[1] + m.hy_};
    bool inside = true;
    const int corners = domain.dim() == 1 ? 2 : 4;
    for (int c = 0; c < corners && inside; ++c) {
      double p[2] = {(c & 1) ? hi[0] : lo[0], (c & 2) ? hi[1] : lo[1]};
      inside = domain.contains(std::span<const double>(p, domain.dim()));
    }
    if (inside) {
      m.classes_[cell] = CellClass::Interior;
      m.dof_of_cell_[cell] = static_cast<int>(m.cell_of_dof_.size());
      m.cell_of_dof_.push_back(cell);
    } else {
      m.classes_[cell] =
          cell_intersects(domain, lo, hi) ? CellClass::Cut : CellClass::Exterior;
    }
  }
  return m;
}

std::array<double, 2> Mesh::cell_center(int cell) const {
  auto [ix, iy] = cell_coords(cell);
  return {domain_.lo()[0] + (ix + 0.5) * hx_,
          dim() == 2 ? domain_.lo()[1] + (iy + 0.5) * hy_ : 0.0};
}

std::array<double, 2> Mesh::cell_lo(int cell) const {
  auto [ix, iy] = cell_coords(cell);
  return {domain_.lo()[0] + ix * hx_, dim() == 2 ? domain_.lo()[1] + iy * hy_ : 0.0};
}

int Mesh::neighbor(int cell, int axis, int steps) const {
  auto [ix, iy] = cell_coords(cell);
  if (axis == 0)
    ix += steps;
  else
    iy += steps;
  if (ix < 0 || ix >= nx_ || iy < 0 || iy >= ny_) return -1;
  return cell_index(ix, iy);
}

int Mesh::count(CellClass c) const {
  return static_cast<int>(std::count(classes_.begin(), classes_.end(), c));
}

std::vector<int> Mesh::dofs_with_margin(double margin) const {
  std::vector<int> out;
  for (int d = 0; d < dof_count(); ++d) {
    auto c = cell_center(cell_of_dof_[d]);
    if (domain_.boundary_distance(std::span<const double>(c.data(), dim())) >= margin - 1e-12)
      out.push_back(d);
  }
  return out;
}

std::vector<int> Mesh::dofs_in_ball(std::array<double, 2> center, double radius) const {
  std::vector<int> out;
  for (int d = 0; d < dof_count(); ++d) {
    auto lo = cell_lo(cell_of_dof_[d]);
    double far2 = 0.0;
    for (int i = 0; i < dim(); ++i) {
      double hi = lo[i] + (i == 0 ? hx_ : hy_);
      double t = std::max(std::abs(lo[i] - center[i]), std::abs(hi - center[i]));
      far2 += t * t;
    }
    if (far2 <= radius * radius) out.push_back(d);
  }
  return out;
}

nlohmann::json Mesh::info() const {
  nlohmann::json j;
  j["domain"] = domain_.describe();
  j["nx"] = nx_;
  j["ny"] = ny_;
  j["hx"] = hx_;
  j["hy"] = dim() == 2 ? nlohmann::json(hy_) : nlohmann::json();
  j["cells"] = cell_count();
  j["interior"] = count(CellClass::Interior);
  j["cut"] = count(CellClass::Cut);
  j["exterior"] = count(CellClass::Exterior);
  j["dofs"] = dof_count();
  j["interior_volume"] = dof_count() * cell_volume();
  j["domain_volume"] = domain_.volume();
  return j;
}

Subdomain select_subdomain(const Mesh& mesh, double margin) {
  if (!(margin > 0.0)) throw std::invalid_argument("select_subdomain: margin must be positive");
  Subdomain s;
  s.margin = margin;
  s.dofs = mesh.dofs_with_margin(margin);
  if (s.dofs.empty())
    throw EmptySubdomain("no cell lies " + std::to_string(margin) + " deep inside the domain");
  return s;
}

}  // namespace nlop

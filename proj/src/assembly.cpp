#include "nlop/assembly.hpp"

#include <algorithm>
#include <cmath>

#include "nlop/quadrature.hpp"

namespace nlop {

namespace {

struct LinFactor {
  double a = 0.0, b = 0.0;
  double operator()(double t) const { return a + b * t; }
};

// tent weight on the panel [ (m-1+s)h, (m+s)h ]
LinFactor tent_side(int m, int s, double h) {
  if (s == 0) return {-(m - 1) * h, 1.0};  // t - (m-1)h
  return {(m + 1) * h, -1.0};              // (m+1)h - t
}

double clamp01(double x, double lo, double hi) { return std::min(hi, std::max(lo, x)); }

// kernel mean over the two points +-r (1D); radial kernels shortcut
double mean1(const Kernel& k, double r) {
  if (k.is_radial()) return r < k.window_lower() || r >= k.support_radius() ? 0.0 : k.radial(r);
  const double zp[1] = {r}, zm[1] = {-r};
  return 0.5 * (k(std::span<const double>(zp, 1)) + k(std::span<const double>(zm, 1)));
}

std::vector<double> clip_sorted(const std::vector<double>& vals, double lo, double hi) {
  std::vector<double> out;
  for (double v : vals)
    if (v > lo * (1.0 + 1e-15) + 1e-300 && v < hi * (1.0 - 1e-15))
      out.push_back(v);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end(),
                        [](double a, double b) { return std::abs(a - b) < 1e-14 * (1.0 + b); }),
            out.end());
  return out;
}

}  // namespace

WeightTable::WeightTable(const Mesh& mesh, const Kernel& kernel, double rel_tol)
    : kernel_(kernel),
      dim_(mesh.dim()),
      hx_(mesh.hx()),
      hy_(mesh.hy()),
      nx_(mesh.nx()),
      ny_(mesh.ny()),
      rel_tol_(rel_tol),
      radial_(kernel.is_radial()),
      square_(mesh.hx() == mesh.hy()),
      circles_(kernel.discontinuity_radii()) {
  const double supp = kernel_.support_radius();
  auto reach = [&](int n, double h) {
    if (!std::isfinite(supp)) return n;
    return std::min(n, static_cast<int>(std::floor(supp / h)) + 1);
  };
  reach_x_ = reach(nx_, hx_);
  reach_y_ = dim_ == 2 ? reach(ny_, hy_) : 0;
}

std::array<int, 2> WeightTable::canonical(int mx, int my) const {
  if (dim_ == 1) return {std::abs(mx), 0};
  if (radial_) {
    int a = std::abs(mx), b = std::abs(my);
    if (square_ && a > b) std::swap(a, b);
    return {a, b};
  }
  // general even kernel: only the joint sign flip is a symmetry
  if (mx < 0 || (mx == 0 && my < 0)) return {-mx, -my};
  return {mx, my};
}

double WeightTable::at(int mx, int my) const {
  auto key = canonical(mx, my);
  auto it = cache_.find(key);
  if (it != cache_.end()) return it->second;
  double v = compute(key[0], key[1]);
  cache_.emplace(key, v);
  return v;
}

double WeightTable::compute(int mx, int my) const {
  // quick zero: the tent support does not meet the kernel support
  const double gx = std::max(std::abs(mx) - 1, 0) * hx_;
  const double gy = std::max(std::abs(my) - 1, 0) * hy_;
  if (std::hypot(gx, gy) >= kernel_.support_radius()) return 0.0;
  return dim_ == 1 ? entry_1d(std::abs(mx)) : entry_2d(mx, my);
}

double WeightTable::entry_1d(int m) const {
  const double h = hx_;
  if (m == 0) {
    // int_0^h (j(t) + j(-t)) (h - t) dt, singular endpoint at 0
    auto f = [&](double t) { return 2.0 * mean1(kernel_, t) * (h - t); };
    auto inner = clip_sorted(circles_, 0.0, h);
    double first = inner.empty() ? h : inner.front();
    auto res = quad::dyadic_lower(f, first, rel_tol_);
    if (!res.converged)
      throw quad::QuadratureError("pair weight at lattice offset 0 did not converge",
                                  res.shell_sums.empty() ? 0.0 : std::abs(res.shell_sums.back()));
    double v = res.value;
    if (!inner.empty()) {
      inner.push_back(h);
      v += quad::gauss_segments(f, inner, 16);
    }
    return v;
  }
  auto eval = [&](double t) {
    if (radial_) return t < kernel_.window_lower() || t >= kernel_.support_radius()
                            ? 0.0
                            : kernel_.radial(t);
    return kernel_(std::span<const double>(&t, 1));
  };
  double total = 0.0;
  for (int s = 0; s <= 1; ++s) {
    const double lo = (m - 1 + s) * h, hi = (m + s) * h;
    if (lo >= kernel_.support_radius()) continue;
    LinFactor mu = tent_side(m, s, h);
    auto f = [&](double t) { return eval(t) * mu(t); };
    auto bps = clip_sorted(circles_, lo, hi);
    if (lo == 0.0) {
      double first = bps.empty() ? hi : bps.front();
      auto res = quad::dyadic_lower(f, first, rel_tol_);
      if (!res.converged)
        throw quad::QuadratureError(
            "pair weight at lattice offset " + std::to_string(m) + " did not converge",
            res.shell_sums.empty() ? 0.0 : std::abs(res.shell_sums.back()));
      total += res.value;
      if (!bps.empty()) {
        bps.push_back(hi);
        total += quad::gauss_segments(f, bps, 16);
      }
    } else {
      bps.insert(bps.begin(), lo);
      bps.push_back(hi);
      total += quad::gauss_segments(f, bps, 16);
    }
  }
  return total;
}

namespace {

struct Panel {
  double x0, x1, y0, y1;
  double rmin() const {
    double dx = std::max({x0, -x1, 0.0});
    double dy = std::max({y0, -y1, 0.0});
    return std::hypot(dx, dy);
  }
  double rmax() const {
    double dx = std::max(std::abs(x0), std::abs(x1));
    double dy = std::max(std::abs(y0), std::abs(y1));
    return std::hypot(dx, dy);
  }
};

}  // namespace

double WeightTable::entry_2d(int mx, int my) const {
  auto eval = [&](double zx, double zy) {
    if (radial_) {
      double r = std::hypot(zx, zy);
      return r < kernel_.window_lower() || r >= kernel_.support_radius() ? 0.0
                                                                         : kernel_.radial(r);
    }
    const double z[2] = {zx, zy};
    return kernel_(std::span<const double>(z, 2));
  };

  // polar integral over a rectangle seen from the origin corner (x0 or x1 = 0
  // and y0 or y1 = 0); the radial direction absorbs the kernel singularity
  auto polar_corner = [&](const Panel& p, const LinFactor& mux, const LinFactor& muy) {
    const double sx = p.x1 <= 0.0 ? -1.0 : 1.0;
    const double sy = p.y1 <= 0.0 ? -1.0 : 1.0;
    const double a = p.x1 - p.x0, b = p.y1 - p.y0;
    const double diag = std::hypot(a, b);
    std::vector<double> th{0.0, std::atan2(b, a), M_PI / 2};
    for (double c : circles_) {
      if (c > a && c < diag) th.push_back(std::acos(a / c));
      if (c > b && c < diag) th.push_back(std::asin(b / c));
    }
    std::sort(th.begin(), th.end());
    th.erase(std::unique(th.begin(), th.end(),
                         [](double u, double v) { return std::abs(u - v) < 1e-14; }),
             th.end());
    auto inner = [&](double theta) {
      const double ct = std::cos(theta), st = std::sin(theta);
      const double R = std::min(a / std::max(ct, 1e-300), b / std::max(st, 1e-300));
      auto f = [&](double r) {
        const double zx = sx * r * ct, zy = sy * r * st;
        return eval(zx, zy) * mux(zx) * muy(zy) * r;
      };
      auto bps = clip_sorted(circles_, 0.0, R);
      double first = bps.empty() ? R : bps.front();
      auto res = quad::dyadic_lower(f, first, rel_tol_);
      if (!res.converged)
        throw quad::QuadratureError("corner panel radial integral did not converge",
                                    res.shell_sums.empty() ? 0.0
                                                           : std::abs(res.shell_sums.back()));
      double v = res.value;
      if (!bps.empty()) {
        bps.push_back(R);
        v += quad::gauss_segments(f, bps, 16);
      }
      return v;
    };
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < th.size(); ++i)
      total += quad::gauss(inner, th[i], th[i + 1], 16);
    return total;
  };

  // polar integral over a rectangle away from the origin, with breakpoints at
  // the kernel jump circles
  auto polar_rect = [&](const Panel& p, const LinFactor& mux, const LinFactor& muy) {
    const double cx[4] = {p.x0, p.x1, p.x0, p.x1};
    const double cy[4] = {p.y0, p.y0, p.y1, p.y1};
    std::vector<double> th;
    for (int i = 0; i < 4; ++i) th.push_back(std::atan2(cy[i], cx[i]));
    const double tmin = *std::min_element(th.begin(), th.end());
    const double tmax = *std::max_element(th.begin(), th.end());
    for (double c : circles_) {
      for (double v : {p.x0, p.x1}) {  // vertical edges x = v
        if (c * c > v * v) {
          double y = std::sqrt(c * c - v * v);
          for (double s : {y, -y})
            if (s >= p.y0 && s <= p.y1) th.push_back(std::atan2(s, v));
        }
      }
      for (double w : {p.y0, p.y1}) {  // horizontal edges y = w
        if (c * c > w * w) {
          double x = std::sqrt(c * c - w * w);
          for (double s : {x, -x})
            if (s >= p.x0 && s <= p.x1) th.push_back(std::atan2(w, s));
        }
      }
    }
    std::sort(th.begin(), th.end());
    th.erase(std::remove_if(th.begin(), th.end(),
                            [&](double t) { return t < tmin - 1e-14 || t > tmax + 1e-14; }),
             th.end());
    th.erase(std::unique(th.begin(), th.end(),
                         [](double u, double v) { return std::abs(u - v) < 1e-14; }),
             th.end());
    auto inner = [&](double theta) {
      const double ct = std::cos(theta), st = std::sin(theta);
      double rin = 0.0, rout = std::numeric_limits<double>::infinity();
      auto slab = [&](double lo, double hi, double dir) {
        if (std::abs(dir) < 1e-300) {
          if (lo > 0.0 || hi < 0.0) rin = 1.0, rout = 0.0;
          return;
        }
        double t1 = lo / dir, t2 = hi / dir;
        if (t1 > t2) std::swap(t1, t2);
        rin = std::max(rin, t1);
        rout = std::min(rout, t2);
      };
      slab(p.x0, p.x1, ct);
      slab(p.y0, p.y1, st);
      if (!(rin < rout)) return 0.0;
      auto f = [&](double r) {
        const double zx = r * ct, zy = r * st;
        return eval(zx, zy) * mux(zx) * muy(zy) * r;
      };
      auto bps = clip_sorted(circles_, rin, rout);
      bps.insert(bps.begin(), rin);
      bps.push_back(rout);
      return quad::gauss_segments(f, bps, 12);
    };
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < th.size(); ++i)
      total += quad::gauss(inner, th[i], th[i + 1], 12);
    return total;
  };

  auto smooth_panel = [&](const Panel& p, const LinFactor& mux, const LinFactor& muy) {
    const int order = p.rmin() < 4.0 * std::max(hx_, hy_) ? 16 : 12;
    const auto& rule = quad::gauss_rule(order);
    const double cxm = 0.5 * (p.x0 + p.x1), cxr = 0.5 * (p.x1 - p.x0);
    const double cym = 0.5 * (p.y0 + p.y1), cyr = 0.5 * (p.y1 - p.y0);
    double total = 0.0;
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
      const double x = cxm + cxr * rule.nodes[i];
      double row = 0.0;
      for (std::size_t j = 0; j < rule.nodes.size(); ++j) {
        const double y = cym + cyr * rule.nodes[j];
        row += rule.weights[j] * eval(x, y) * muy(y);
      }
      total += rule.weights[i] * mux(x) * row;
    }
    return total * cxr * cyr;
  };

  double total = 0.0;
  for (int sx = 0; sx <= 1; ++sx) {
    for (int sy = 0; sy <= 1; ++sy) {
      Panel p{(mx - 1 + sx) * hx_, (mx + sx) * hx_, (my - 1 + sy) * hy_, (my + sy) * hy_};
      if (p.rmin() >= kernel_.support_radius()) continue;
      LinFactor mux = tent_side(mx, sx, hx_), muy = tent_side(my, sy, hy_);
      const bool corner = (p.x0 == 0.0 || p.x1 == 0.0) && (p.y0 == 0.0 || p.y1 == 0.0);
      if (corner) {
        total += polar_corner(p, mux, muy);
        continue;
      }
      bool crossed = false;
      for (double c : circles_)
        if (c > p.rmin() && c < p.rmax()) crossed = true;
      total += crossed ? polar_rect(p, mux, muy) : smooth_panel(p, mux, muy);
    }
  }
  return total;
}

namespace {

// mass of a radial kernel outside the centered rectangle [-Lx,Lx] x [-Ly,Ly]
double rect_exterior_mass(const Kernel& k, double Lx, double Ly) {
  std::vector<double> th{0.0, std::atan2(Ly, Lx), M_PI / 2};
  const double diag = std::hypot(Lx, Ly);
  for (double c : k.discontinuity_radii()) {
    if (c > Lx && c < diag) th.push_back(std::acos(Lx / c));
    if (c > Ly && c < diag) th.push_back(std::asin(Ly / c));
  }
  std::sort(th.begin(), th.end());
  auto f = [&](double theta) {
    double rb = std::min(Lx / std::max(std::cos(theta), 1e-300),
                         Ly / std::max(std::sin(theta), 1e-300));
    return k.tail_mass(rb);
  };
  double v = 0.0;
  for (std::size_t i = 0; i + 1 < th.size(); ++i) v += quad::gauss(f, th[i], th[i + 1], 24);
  return v * 2.0 / M_PI;
}

// sum of pair weights from one cell to every lattice cell beyond the per-axis
// window |m_d| <= n_d; equals the kernel mass against the complement of the
// taper product and is the same for every cell
double window_remainder(const Mesh& mesh, const Kernel& k, double rel_tol) {
  const double hx = mesh.hx(), hy = mesh.hy();
  const double Lx = mesh.nx() * hx, Ly = mesh.ny() * hy;
  const double supp = k.support_radius();
  const double Lmin = mesh.dim() == 1 ? Lx : std::min(Lx, Ly);
  if (supp <= Lmin) return 0.0;
  if (mesh.dim() == 1) {
    auto f = [&](double r) { return mean1(k, r) * (r - Lx); };
    std::vector<double> bps = clip_sorted(k.discontinuity_radii(), Lx, Lx + hx);
    bps.insert(bps.begin(), Lx);
    bps.push_back(std::min(Lx + hx, supp));
    double band = bps.back() > bps.front() ? quad::gauss_segments(f, bps, 16) : 0.0;
    return 2.0 * band + hx * k.tail_mass(Lx + hx);
  }
  if (!k.is_radial())
    throw std::invalid_argument(
        "assembly: non-radial kernels must be supported inside the mesh bounding box");
  // h^2 * (mass outside the rectangle) minus the taper-weighted band integral
  double outside = hx * hy * rect_exterior_mass(k, Lx, Ly);
  auto taper = [&](double t, double L, double h) {
    return clamp01(L + h - std::abs(t), 0.0, h);
  };
  auto f2 = [&](double x, double y) {
    return k.radial(std::hypot(x, y)) * taper(x, Lx, hx) * taper(y, Ly, hy);
  };
  auto fr = [&](double x, double y) {
    double r = std::hypot(x, y);
    return r >= supp ? 0.0 : f2(x, y);
  };
  const double bx = std::min(Lx + hx, supp), by = std::min(Ly + hy, supp);
  double band = 0.0;
  if (bx > Lx) band += 2.0 * quad::adaptive2(fr, {Lx, bx, -Ly, Ly}, rel_tol);
  if (by > Ly) band += 2.0 * quad::adaptive2(fr, {-Lx, Lx, Ly, by}, rel_tol);
  if (bx > Lx && by > Ly) band += 4.0 * quad::adaptive2(fr, {Lx, bx, Ly, by}, rel_tol);
  return outside - band;
}

Eigen::VectorXd killing_from_table(const Mesh& mesh, const WeightTable& table, double remainder) {
  const int n = mesh.dof_count();
  Eigen::VectorXd kappa(n);
  const int rx = table.reach_x();
  const int ry = mesh.dim() == 2 ? table.reach_y() : 0;
  for (int d = 0; d < n; ++d) {
    auto [ix, iy] = mesh.cell_coords(mesh.cell_of_dof(d));
    double acc = remainder;
    for (int dy = -ry; dy <= ry; ++dy) {
      const int jy = iy + dy;
      const bool row_off = jy < 0 || jy >= mesh.ny();
      for (int dx = -rx; dx <= rx; ++dx) {
        const int jx = ix + dx;
        if (!row_off && jx >= 0 && jx < mesh.nx() &&
            mesh.cell_class(mesh.cell_index(jx, jy)) == CellClass::Interior)
          continue;
        try {
          acc += table.at(dx, dy);
        } catch (const quad::QuadratureError& err) {
          throw quad::QuadratureError("killing weight for cell " +
                                          std::to_string(mesh.cell_of_dof(d)) + " at offset (" +
                                          std::to_string(dx) + "," + std::to_string(dy) +
                                          "): " + err.what(),
                                      err.residual());
        }
      }
    }
    kappa[d] = acc;
  }
  return kappa;
}

void check_assembly_admissible(const Kernel& k) {
  if (!(k.sigma() < 1.0))
    throw std::invalid_argument(
        "assembly: kernel order must be below 1 for finite adjacent-cell weights");
  LevyIntegral li = levy_integral(k, k.sigma());
  if (!li.finite) li = levy_integral(k, std::min(2.0, k.sigma() + 0.1));
  if (!li.finite)
    throw std::invalid_argument("assembly: the kernel fails the Levy integrability test");
}

}  // namespace

Eigen::MatrixXd NonlocalForm::interaction_laplacian() const {
  Eigen::MatrixXd L = -W;
  L.diagonal() += W.rowwise().sum();
  return L;
}

Eigen::MatrixXd NonlocalForm::stiffness() const {
  Eigen::MatrixXd A = interaction_laplacian();
  A.diagonal() += kappa;
  return A;
}

double NonlocalForm::energy(const Eigen::VectorXd& u) const {
  const int n = static_cast<int>(u.size());
  double e = 0.0;
  for (int i = 0; i < n; ++i) {
    e += kappa[i] * u[i] * u[i];
    for (int j = i + 1; j < n; ++j) {
      const double d = u[i] - u[j];
      e += W(i, j) * d * d;
    }
  }
  return e;
}

NonlocalForm assemble_stiffness(const Mesh& mesh, const Kernel& kernel, double rel_tol) {
  check_assembly_admissible(kernel);
  WeightTable table(mesh, kernel, rel_tol);
  const int n = mesh.dof_count();
  NonlocalForm form;
  form.W = Eigen::MatrixXd::Zero(n, n);
  form.mass = Eigen::VectorXd::Constant(n, mesh.cell_volume());
  const int rx = table.reach_x();
  const int ry = mesh.dim() == 2 ? table.reach_y() : 0;
  for (int d = 0; d < n; ++d) {
    const int cell = mesh.cell_of_dof(d);
    auto [ix, iy] = mesh.cell_coords(cell);
    for (int dy = -ry; dy <= ry; ++dy) {
      const int jy = iy + dy;
      if (jy < 0 || jy >= mesh.ny()) continue;
      for (int dx = -rx; dx <= rx; ++dx) {
        const int jx = ix + dx;
        if (jx < 0 || jx >= mesh.nx()) continue;
        const int jcell = mesh.cell_index(jx, jy);
        if (mesh.cell_class(jcell) != CellClass::Interior) continue;
        const int e = mesh.dof_of_cell(jcell);
        if (e <= d) continue;
        double w;
        try {
          w = table.at(dx, dy);
        } catch (const quad::QuadratureError& err) {
          throw quad::QuadratureError("assembling cells " + std::to_string(cell) + " and " +
                                          std::to_string(jcell) + ": " + err.what(),
                                      err.residual());
        }
        form.W(d, e) = form.W(e, d) = w;
      }
    }
  }
  form.kappa = killing_from_table(mesh, table, window_remainder(mesh, kernel, rel_tol));
  return form;
}

Eigen::VectorXd assemble_killing(const Mesh& mesh, const Kernel& kernel, double rel_tol) {
  WeightTable table(mesh, kernel, rel_tol);
  return killing_from_table(mesh, table, window_remainder(mesh, kernel, rel_tol));
}

double killing_density(const Domain& domain, const Kernel& kernel, std::span<const double> x) {
  if (!kernel.is_radial())
    throw std::invalid_argument("killing_density: radial kernels only");
  if (domain.boundary_distance(x) < 0.0)
    throw std::invalid_argument("killing_density: point lies outside the domain");
  if (domain.dim() == 1) {
    const double d1 = x[0] - domain.lo()[0], d2 = domain.hi()[0] - x[0];
    return 0.5 * (kernel.tail_mass(d1) + kernel.tail_mass(d2));
  }
  if (domain.shape() == Domain::Shape::Ball) {
    const double R = domain.radius();
    const double dx = x[0] - domain.center()[0], dy = x[1] - domain.center()[1];
    const double d = std::hypot(dx, dy);
    // ray exit distance toward angle theta measured from the center direction
    auto exit = [&](double theta) {
      const double s = d * std::sin(theta);
      return d * std::cos(theta) + std::sqrt(std::max(R * R - s * s, 0.0));
    };
    std::vector<double> th{0.0, M_PI};
    for (double c : kernel.discontinuity_radii()) {
      if (c > R - d && c < R + d && d > 0.0) {
        double u = (c * c + d * d - R * R) / (2.0 * c * d);
        if (u > -1.0 && u < 1.0) th.push_back(std::acos(u));
      }
    }
    std::sort(th.begin(), th.end());
    double v = 0.0;
    for (std::size_t i = 0; i + 1 < th.size(); ++i)
      v += quad::adaptive([&](double t) { return kernel.tail_mass(exit(t)); }, th[i], th[i + 1],
                          1e-10);
    return v / M_PI;
  }
  // box: exit distance of the ray from x in direction theta
  auto exit = [&](double theta) {
    const double c = std::cos(theta), s = std::sin(theta);
    double t = std::numeric_limits<double>::infinity();
    if (std::abs(c) > 1e-300) t = std::min(t, (c > 0 ? domain.hi()[0] - x[0] : domain.lo()[0] - x[0]) / c);
    if (std::abs(s) > 1e-300) t = std::min(t, (s > 0 ? domain.hi()[1] - x[1] : domain.lo()[1] - x[1]) / s);
    return t;
  };
  std::vector<double> th;
  for (double cx : {domain.lo()[0], domain.hi()[0]})
    for (double cy : {domain.lo()[1], domain.hi()[1]}) th.push_back(std::atan2(cy - x[1], cx - x[0]));
  th.push_back(-M_PI);
  th.push_back(M_PI);
  std::sort(th.begin(), th.end());
  double v = 0.0;
  for (std::size_t i = 0; i + 1 < th.size(); ++i)
    v += quad::adaptive([&](double t) { return kernel.tail_mass(exit(t)); }, th[i], th[i + 1],
                        1e-10);
  return v / (2.0 * M_PI);
}

ConvolutionOperator assemble_convolution(const Mesh& mesh, const Kernel& h, double rel_tol) {
  const double total = h.total_mass();
  if (!std::isfinite(total))
    throw std::invalid_argument("assemble_convolution: kernel is not integrable");
  const double edge = std::min(1.0, h.support_radius());
  auto sq_mean = [&](double r) -> double {
    if (h.is_radial()) {
      double v = r < h.window_lower() || r >= h.support_radius() ? 0.0 : h.radial(r);
      return v * v;
    }
    if (mesh.dim() == 1) {
      const double zp[1] = {r}, zm[1] = {-r};
      const double a = h(std::span<const double>(zp, 1));
      const double b = h(std::span<const double>(zm, 1));
      return 0.5 * (a * a + b * b);
    }
    double acc = 0.0;
    for (int q = 0; q < 8; ++q) {
      const double t = (q + 0.5) * (M_PI / 4.0);
      const double z[2] = {r * std::cos(t), r * std::sin(t)};
      const double a = h(std::span<const double>(z, 2));
      acc += a * a;
    }
    return acc / 8.0;
  };
  auto sq = [&](double r) { return std::pow(r, mesh.dim() - 1) * sq_mean(r); };
  if (edge > 0.0 && h.window_lower() == 0.0) {
    auto near = quad::dyadic_lower(sq, edge, 1e-8);
    if (!near.converged)
      throw std::invalid_argument("assemble_convolution: kernel is not square integrable");
  }
  WeightTable table(mesh, h, rel_tol);
  const int n = mesh.dof_count();
  ConvolutionOperator op;
  op.kernel_mass = total;
  op.P = Eigen::MatrixXd::Zero(n, n);
  const int rx = table.reach_x();
  const int ry = mesh.dim() == 2 ? table.reach_y() : 0;
  for (int d = 0; d < n; ++d) {
    auto [ix, iy] = mesh.cell_coords(mesh.cell_of_dof(d));
    for (int dy = -ry; dy <= ry; ++dy) {
      const int jy = iy + dy;
      if (jy < 0 || jy >= mesh.ny()) continue;
      for (int dx = -rx; dx <= rx; ++dx) {
        const int jx = ix + dx;
        if (jx < 0 || jx >= mesh.nx()) continue;
        const int jcell = mesh.cell_index(jx, jy);
        if (mesh.cell_class(jcell) != CellClass::Interior) continue;
        const int e = mesh.dof_of_cell(jcell);
        if (e < d) continue;
        const double w = table.at(dx, dy);
        op.P(d, e) = w;
        op.P(e, d) = w;
      }
    }
  }
  op.row_sum_norm = op.P.rowwise().sum().maxCoeff() / mesh.cell_volume();
  return op;
}

ExteriorPairing exterior_pairing(const Mesh& mesh, const Kernel& kernel,
                                 double truncation_radius, double rel_tol) {
  const double supp = kernel.support_radius();
  const double diam = std::hypot(mesh.nx() * mesh.hx(), mesh.dim() == 2 ? mesh.ny() * mesh.hy() : 0.0);
  double R = truncation_radius;
  if (R <= 0.0) R = std::isfinite(supp) ? supp : 4.0 * diam;
  R = std::min(R, supp);
  const int pad_x = static_cast<int>(std::ceil(R / mesh.hx())) + 1;
  const int pad_y = mesh.dim() == 2 ? static_cast<int>(std::ceil(R / mesh.hy())) + 1 : 0;
  double excluded = pad_x * mesh.hx();
  if (mesh.dim() == 2) excluded = std::min(excluded, pad_y * mesh.hy());
  ExteriorPairing out;
  out.truncation_radius = R;
  out.dropped_tail = std::isfinite(supp) && R >= supp
                         ? 0.0
                         : mesh.cell_volume() * kernel.tail_mass(excluded);

  const int n = mesh.dof_count();
  for (int jy = -pad_y; jy < mesh.ny() + pad_y; ++jy) {
    for (int jx = -pad_x; jx < mesh.nx() + pad_x; ++jx) {
      bool inside = jx >= 0 && jx < mesh.nx() && jy >= 0 && jy < mesh.ny();
      if (inside && mesh.cell_class(mesh.cell_index(jx, jy)) == CellClass::Interior) continue;
      out.site_mx.push_back(jx);
      out.site_my.push_back(jy);
      out.site_centers.push_back(
          {mesh.domain().lo()[0] + (jx + 0.5) * mesh.hx(),
           mesh.dim() == 2 ? mesh.domain().lo()[1] + (jy + 0.5) * mesh.hy() : 0.0});
    }
  }
  const int ns = static_cast<int>(out.site_mx.size());
  if (static_cast<long long>(n) * ns > 50'000'000)
    throw std::invalid_argument("exterior_pairing: truncation radius yields too many sites");
  WeightTable table(mesh, kernel, rel_tol);
  out.E = Eigen::MatrixXd::Zero(n, ns);
  for (int d = 0; d < n; ++d) {
    auto [ix, iy] = mesh.cell_coords(mesh.cell_of_dof(d));
    for (int s = 0; s < ns; ++s)
      out.E(d, s) = table.at(out.site_mx[s] - ix, out.site_my[s] - iy);
  }
  return out;
}

ExteriorLoad exterior_load(const Mesh& mesh, const Kernel& kernel,
                           const std::function<double(std::span<const double>)>& g,
                           double truncation_radius, double rel_tol) {
  ExteriorPairing pair = exterior_pairing(mesh, kernel, truncation_radius, rel_tol);
  const int ns = static_cast<int>(pair.site_centers.size());
  Eigen::VectorXd gv(ns);
  for (int s = 0; s < ns; ++s) {
    double v = g(std::span<const double>(pair.site_centers[s].data(), mesh.dim()));
    if (!std::isfinite(v) || std::abs(v) > 1e12)
      throw std::invalid_argument("exterior_load: exterior data is unbounded on the sampled sites");
    gv[s] = v;
  }
  ExteriorLoad out;
  out.truncation_radius = pair.truncation_radius;
  out.dropped_tail = pair.dropped_tail;
  out.ell = pair.E * gv;
  return out;
}

NonlocalForm assemble_twopoint(const Mesh& mesh, const TwoPointFn& k, double reach) {
  if (!(reach > 0.0) || !std::isfinite(reach))
    throw std::invalid_argument("assemble_twopoint: need a finite positive reach");
  const int n = mesh.dof_count();
  const double vol = mesh.cell_volume();
  NonlocalForm form;
  form.W = Eigen::MatrixXd::Zero(n, n);
  form.kappa = Eigen::VectorXd::Zero(n);
  form.mass = Eigen::VectorXd::Constant(n, vol);
  const int dim = mesh.dim();
  auto val = [&](const std::array<double, 2>& a, const std::array<double, 2>& b) {
    return k(std::span<const double>(a.data(), dim), std::span<const double>(b.data(), dim));
  };
  std::vector<std::array<double, 2>> centers(n);
  for (int d = 0; d < n; ++d) centers[d] = mesh.cell_center(mesh.cell_of_dof(d));
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      double dist = std::hypot(centers[i][0] - centers[j][0],
                               dim == 2 ? centers[i][1] - centers[j][1] : 0.0);
      if (dist > reach) continue;
      form.W(i, j) = form.W(j, i) = val(centers[i], centers[j]) * vol * vol;
    }
  const int pad_x = static_cast<int>(std::ceil(reach / mesh.hx())) + 1;
  const int pad_y = dim == 2 ? static_cast<int>(std::ceil(reach / mesh.hy())) + 1 : 0;
  for (int i = 0; i < n; ++i) {
    double acc = 0.0;
    for (int jy = -pad_y; jy < mesh.ny() + pad_y; ++jy) {
      for (int jx = -pad_x; jx < mesh.nx() + pad_x; ++jx) {
        bool inside = jx >= 0 && jx < mesh.nx() && jy >= 0 && jy < mesh.ny();
        if (inside && mesh.cell_class(mesh.cell_index(jx, jy)) == CellClass::Interior) continue;
        std::array<double, 2> c{mesh.domain().lo()[0] + (jx + 0.5) * mesh.hx(),
                                dim == 2 ? mesh.domain().lo()[1] + (jy + 0.5) * mesh.hy() : 0.0};
        double dist = std::hypot(centers[i][0] - c[0], dim == 2 ? centers[i][1] - c[1] : 0.0);
        if (dist > reach) continue;
        acc += val(centers[i], c) * vol * vol;
      }
    }
    form.kappa[i] = acc;
  }
  return form;
}

}  // namespace nlop

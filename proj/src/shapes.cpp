#include "kernelconv/shapes.hpp"

#include <cmath>

#include "kernelconv/parallel.hpp"

namespace kernelconv {

namespace {

double eval_param(const Expr& e, double j, const char* what) {
  double v = e.eval(EvalEnv::at_index(j));
  if (!std::isfinite(v)) throw SpecError(std::string(what) + " evaluated to a non-finite value");
  return v;
}

GridMask raster_disc(double cx, double cy, double radius, const GridSpec& g) {
  if (!(radius > 0)) throw SpecError("disc radius must be positive");
  GridMask out(g);
  auto& bits = out.bits();
  const double r2 = radius * radius;
  for (int y = 0; y < g.ny; ++y) {
    const double py = g.origin.y + (y + 0.5) * g.hy() - cy;
    const std::size_t row = static_cast<std::size_t>(y) * g.nx;
    for (int x = 0; x < g.nx; ++x) {
      const double px = g.origin.x + (x + 0.5) * g.hx() - cx;
      bits[row + x] = (px * px + py * py < r2) ? 1 : 0;
    }
  }
  return out;
}

GridMask raster_rect(double cx, double cy, double hw, double hh, const GridSpec& g) {
  if (!(hw > 0) || !(hh > 0)) throw SpecError("rect half-widths must be positive");
  GridMask out(g);
  auto& bits = out.bits();
  for (int y = 0; y < g.ny; ++y) {
    const bool in_y = std::fabs(g.origin.y + (y + 0.5) * g.hy() - cy) < hh;
    const std::size_t row = static_cast<std::size_t>(y) * g.nx;
    if (!in_y) continue;
    for (int x = 0; x < g.nx; ++x) {
      const bool in_x = std::fabs(g.origin.x + (x + 0.5) * g.hx() - cx) < hw;
      bits[row + x] = in_x ? 1 : 0;
    }
  }
  return out;
}

GridMask raster_slit_disc(double index, const GridSpec& g) {
  if (!(index > 0)) throw SpecError("slit_disc index must be positive");
  GridMask out(g);
  auto& bits = out.bits();
  const double tip = 1.0 - 1.0 / index;
  const double half_row = 0.5 * g.hy();
  for (int y = 0; y < g.ny; ++y) {
    const double py = g.origin.y + (y + 0.5) * g.hy();
    const bool slit_row = std::fabs(py) <= half_row;
    const std::size_t row = static_cast<std::size_t>(y) * g.nx;
    for (int x = 0; x < g.nx; ++x) {
      const double px = g.origin.x + (x + 0.5) * g.hx();
      bool inside = px * px + py * py < 1.0;
      if (inside && slit_row && px > -1.0 && px < tip) inside = false;
      bits[row + x] = inside ? 1 : 0;
    }
  }
  return out;
}

GridMask raster_halfspace(const Expr& phi, double j, const GridSpec& g) {
  GridMask out(g);
  auto& bits = out.bits();
  parallel_rows(g.ny, [&](int y0, int y1) {
    for (int y = y0; y < y1; ++y) {
      const double py = g.origin.y + (y + 0.5) * g.hy();
      EvalEnv env;
      env.bind(Var::Y, py).bind(Var::S, py).bind(Var::J, j);
      const double threshold = phi.eval(env);
      if (std::isnan(threshold)) throw SpecError("halfspace_graph phi evaluated to NaN");
      const std::size_t row = static_cast<std::size_t>(y) * g.nx;
      for (int x = 0; x < g.nx; ++x) {
        const double px = g.origin.x + (x + 0.5) * g.hx();
        bits[row + x] = (px > threshold) ? 1 : 0;
      }
    }
  });
  return out;
}

GridMask raster_sublevel(const Expr& psi, double j, const GridSpec& g) {
  GridMask out(g);
  auto& bits = out.bits();
  parallel_rows(g.ny, [&](int y0, int y1) {
    for (int y = y0; y < y1; ++y) {
      const double py = g.origin.y + (y + 0.5) * g.hy();
      const std::size_t row = static_cast<std::size_t>(y) * g.nx;
      for (int x = 0; x < g.nx; ++x) {
        const double px = g.origin.x + (x + 0.5) * g.hx();
        double v;
        try {
          v = psi.eval(EvalEnv::at_point(px, py, j));
        } catch (const EvalError& e) {
          throw SpecError("sublevel psi at cell (" + std::to_string(x) + "," + std::to_string(y) +
                          "): " + e.what());
        }
        bits[row + x] = (v < 0) ? 1 : 0;
      }
    }
  });
  return out;
}

}  // namespace

DiscShape disc(double cx, double cy, double radius) {
  return {Expr::constant(cx), Expr::constant(cy), Expr::constant(radius)};
}

RectShape rect(double cx, double cy, double half_w, double half_h) {
  return {Expr::constant(cx), Expr::constant(cy), Expr::constant(half_w), Expr::constant(half_h)};
}

void validate_shape(const ShapeSpec& shape, const std::string& where) {
  const VarSet index_only = VarSet::of({Var::J});
  const VarSet profile = VarSet::of({Var::X, Var::Y, Var::R, Var::S, Var::J});
  const VarSet graph = VarSet::of({Var::Y, Var::S, Var::J});
  std::visit(
      [&](const auto& s) {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, DiscShape>) {
          require_free_vars(s.cx, index_only, where + " disc center x");
          require_free_vars(s.cy, index_only, where + " disc center y");
          require_free_vars(s.radius, index_only, where + " disc radius");
        } else if constexpr (std::is_same_v<T, RectShape>) {
          require_free_vars(s.cx, index_only, where + " rect center x");
          require_free_vars(s.cy, index_only, where + " rect center y");
          require_free_vars(s.half_w, index_only, where + " rect half-width");
          require_free_vars(s.half_h, index_only, where + " rect half-height");
        } else if constexpr (std::is_same_v<T, SlitDiscShape>) {
          require_free_vars(s.index, index_only, where + " slit_disc index");
        } else if constexpr (std::is_same_v<T, HalfspaceGraphShape>) {
          require_free_vars(s.phi, graph, where + " halfspace_graph phi");
        } else {
          require_free_vars(s.psi, profile, where + " sublevel psi");
        }
      },
      shape);
}

GridMask rasterize_shape(const ShapeSpec& shape, const GridSpec& grid, double j) {
  return std::visit(
      [&](const auto& s) -> GridMask {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, DiscShape>) {
          return raster_disc(eval_param(s.cx, j, "disc center x"), eval_param(s.cy, j, "disc center y"),
                             eval_param(s.radius, j, "disc radius"), grid);
        } else if constexpr (std::is_same_v<T, RectShape>) {
          return raster_rect(eval_param(s.cx, j, "rect center x"), eval_param(s.cy, j, "rect center y"),
                             eval_param(s.half_w, j, "rect half-width"),
                             eval_param(s.half_h, j, "rect half-height"), grid);
        } else if constexpr (std::is_same_v<T, SlitDiscShape>) {
          return raster_slit_disc(eval_param(s.index, j, "slit_disc index"), grid);
        } else if constexpr (std::is_same_v<T, HalfspaceGraphShape>) {
          return raster_halfspace(s.phi, j, grid);
        } else {
          return raster_sublevel(s.psi, j, grid);
        }
      },
      shape);
}

}  // namespace kernelconv

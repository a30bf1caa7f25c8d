#include "diffvor/render_svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace diffvor {

namespace {

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

std::string format_loss_label(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

struct Frame {
  Bbox box;
  double span = 1.0;
  // SVG y grows downward; geometry is emitted flipped about the box center.
  double flip_y(double y) const { return box.lo.y + box.hi.y - y; }
};

Frame make_frame(const DiagramSnapshot& diagram,
                 const std::optional<Boundary>& boundary) {
  Bbox box;
  if (boundary) {
    box = boundary->bbox();
  } else {
    box = bounding_box(diagram.sites);
  }
  if (!box.valid()) {
    box.expand({0.0, 0.0});
    box.expand({1.0, 1.0});
  }
  const double margin = 0.05 * std::max(box.diagonal(), 1e-12);
  box.expand(box.lo - Vec2{margin, margin});
  box.expand(box.hi + Vec2{margin, margin});
  return Frame{box, std::max(box.hi.x - box.lo.x, box.hi.y - box.lo.y)};
}

void open_svg(std::string& out, const Frame& f) {
  out += "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"";
  out += fmt(f.box.lo.x) + " " + fmt(f.box.lo.y) + " " +
         fmt(f.box.hi.x - f.box.lo.x) + " " + fmt(f.box.hi.y - f.box.lo.y);
  out += "\">\n";
}

}  // namespace

std::string render_diagram_svg(const DiagramSnapshot& diagram,
                               const std::optional<Boundary>& boundary,
                               const RenderStyle& style) {
  const Frame f = make_frame(diagram, boundary);
  const double stroke = 0.002 * f.span;
  std::string out;
  open_svg(out, f);

  out += "<g fill=\"none\" stroke=\"red\" stroke-width=\"" + fmt(stroke) +
         "\">\n";
  for (const auto& cell : diagram.cells) {
    out += "<polygon points=\"";
    for (std::size_t i = 0; i < cell.vertices.size(); ++i) {
      if (i > 0) out += ' ';
      out += fmt(cell.vertices[i].x) + "," + fmt(f.flip_y(cell.vertices[i].y));
    }
    out += "\"/>\n";
  }
  out += "</g>\n";

  if (style.show_boundary && boundary) {
    out += "<polygon fill=\"none\" stroke=\"black\" stroke-width=\"" +
           fmt(stroke) + "\" points=\"";
    const auto& verts = boundary->vertices();
    for (std::size_t i = 0; i < verts.size(); ++i) {
      if (i > 0) out += ' ';
      out += fmt(verts[i].x) + "," + fmt(f.flip_y(verts[i].y));
    }
    out += "\"/>\n";
  }

  if (style.show_sites) {
    out += "<g fill=\"black\">\n";
    for (const Vec2 s : diagram.sites) {
      out += "<circle cx=\"" + fmt(s.x) + "\" cy=\"" + fmt(f.flip_y(s.y)) +
             "\" r=\"" + fmt(0.004 * f.span) + "\"/>\n";
    }
    out += "</g>\n";
  }

  if (!style.markers.empty() && style.markers.size() == diagram.sites.size()) {
    const double peak =
        *std::max_element(style.markers.begin(), style.markers.end());
    out += "<g fill=\"red\" fill-opacity=\"0.6\">\n";
    for (std::size_t i = 0; i < diagram.sites.size(); ++i) {
      const double r = 0.04 * f.span * (peak > 0.0 ? style.markers[i] / peak : 1.0);
      out += "<circle cx=\"" + fmt(diagram.sites[i].x) + "\" cy=\"" +
             fmt(f.flip_y(diagram.sites[i].y)) + "\" r=\"" + fmt(r) + "\"/>\n";
    }
    out += "</g>\n";
  }

  out += "</svg>\n";
  return out;
}

std::string render_loss_curve_svg(std::span<const double> losses) {
  const double width = 800.0, height = 500.0, pad = 40.0;
  std::string out;
  out += "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 " +
         fmt(width) + " " + fmt(height) + "\">\n";
  out += "<rect x=\"" + fmt(pad) + "\" y=\"" + fmt(pad) + "\" width=\"" +
         fmt(width - 2 * pad) + "\" height=\"" + fmt(height - 2 * pad) +
         "\" fill=\"none\" stroke=\"black\" stroke-width=\"1\"/>\n";
  if (losses.size() >= 2) {
    const double lo = *std::min_element(losses.begin(), losses.end());
    const double hi = *std::max_element(losses.begin(), losses.end());
    const double range = hi > lo ? hi - lo : 1.0;
    out += "<polyline fill=\"none\" stroke=\"red\" stroke-width=\"1.5\" "
           "points=\"";
    for (std::size_t i = 0; i < losses.size(); ++i) {
      if (i > 0) out += ' ';
      const double x =
          pad + (width - 2 * pad) * static_cast<double>(i) /
                    static_cast<double>(losses.size() - 1);
      const double y = height - pad - (height - 2 * pad) * (losses[i] - lo) / range;
      out += fmt(x) + "," + fmt(y);
    }
    out += "\"/>\n";
    out += "<text x=\"" + fmt(pad) + "\" y=\"" + fmt(pad - 10.0) +
           "\" font-size=\"14\">max " + format_loss_label(hi) + "</text>\n";
    out += "<text x=\"" + fmt(pad) + "\" y=\"" + fmt(height - pad + 24.0) +
           "\" font-size=\"14\">min " + format_loss_label(lo) + " over " +
           std::to_string(losses.size()) + " steps</text>\n";
  }
  out += "</svg>\n";
  return out;
}

}  // namespace diffvor

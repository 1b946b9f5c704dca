#pragma once

#include <cstdio>
#include <ostream>
#include <string>
#include <vector>

#include "packlab/packing.hpp"

namespace packlab {

// One packing drawn at `offset` (user units) with a caption.
struct SvgPanel {
    const Packing* packing = nullptr;
    Vec2 offset;
    std::string caption;
};

namespace detail {

inline std::string svg_num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3f", v);
    std::string s = buf;
    if (s == "-0.000") {
        s = "0.000";
    }
    return s;
}

}  // namespace detail

// Standalone SVG at 100 units per body diameter; y points up in packing
// coordinates. Torus panels show every image meeting the fundamental domain,
// clipped to it.
inline void write_svg(std::ostream& out, const std::vector<SvgPanel>& panels) {
    require(!panels.empty(), "nothing to render");
    const double scale = 100.0 / panels.front().packing->body().diameter();
    const double margin = 20.0;
    const double caption_h = 24.0;
    double xmin = 1e300, ymin = 1e300, xmax = -1e300, ymax = -1e300;
    for (const SvgPanel& p : panels) {
        const Rect d = p.packing->window().domain().translated(p.offset);
        xmin = std::min(xmin, d.xmin);
        ymin = std::min(ymin, d.ymin);
        xmax = std::max(xmax, d.xmax);
        ymax = std::max(ymax, d.ymax);
    }
    const double width = (xmax - xmin) * scale + 2.0 * margin;
    const double height = (ymax - ymin) * scale + 2.0 * margin + caption_h;
    auto X = [&](double x) { return detail::svg_num((x - xmin) * scale + margin); };
    auto Y = [&](double y) { return detail::svg_num((ymax - y) * scale + margin); };
    using detail::svg_num;

    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << svg_num(width) << "\" height=\""
        << svg_num(height) << "\" viewBox=\"0 0 " << svg_num(width) << ' ' << svg_num(height) << "\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    for (std::size_t k = 0; k < panels.size(); ++k) {
        const SvgPanel& panel = panels[k];
        const Packing& p = *panel.packing;
        const Rect d = p.window().domain().translated(panel.offset);
        out << "<clipPath id=\"w" << k << "\"><rect x=\"" << X(d.xmin) << "\" y=\"" << Y(d.ymax) << "\" width=\""
            << svg_num(d.width() * scale) << "\" height=\"" << svg_num(d.height() * scale) << "\"/></clipPath>\n";
        out << "<g clip-path=\"url(#w" << k << ")\" fill=\"#d9d9d9\" stroke=\"black\" stroke-width=\"1\">\n";
        p.for_each_instance(p.window().domain(), [&](const Instance& inst) {
            const PlacedShape s = detail::shifted(inst.shape, panel.offset);
            if (s.disc) {
                out << "<circle cx=\"" << X(s.center.x) << "\" cy=\"" << Y(s.center.y) << "\" r=\""
                    << svg_num(s.radius * scale) << "\"/>\n";
            } else {
                out << "<polygon points=\"";
                for (std::size_t i = 0; i < s.vertices.size(); ++i) {
                    out << (i ? " " : "") << X(s.vertices[i].x) << ',' << Y(s.vertices[i].y);
                }
                out << "\"/>\n";
            }
        });
        out << "</g>\n";
        out << "<rect x=\"" << X(d.xmin) << "\" y=\"" << Y(d.ymax) << "\" width=\"" << svg_num(d.width() * scale)
            << "\" height=\"" << svg_num(d.height() * scale) << "\" fill=\"none\" stroke=\"#555\""
            << (p.window().is_torus() ? " stroke-dasharray=\"6 4\"" : "") << "/>\n";
        if (!panel.caption.empty()) {
            out << "<text x=\"" << X(0.5 * (d.xmin + d.xmax)) << "\" y=\""
                << svg_num((ymax - d.ymin) * scale + margin + 18.0)
                << "\" font-family=\"serif\" font-size=\"16\" text-anchor=\"middle\">" << panel.caption << "</text>\n";
        }
    }
    out << "</svg>\n";
}

}  // namespace packlab

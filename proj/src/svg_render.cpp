#include "hb/svg_render.hpp"

#include "hb/hilbert.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>
#include <vector>

namespace hb {

namespace {

using Polygon = std::vector<Vec>;

std::string fmt(double v) {
    char buf[40];
    // canonical zero avoids "-0.000000" flapping
    if (std::abs(v) < 5e-7) v = 0.0;
    std::snprintf(buf, sizeof(buf), "%.6f", v);
    return buf;
}

struct Canvas {
    double lo, hi;
    int size;
    std::ostringstream out;

    std::pair<double, double> map(const Vec& y) const {
        double sx = (y[0] - lo) / (hi - lo) * size;
        double sy = (hi - y[1]) / (hi - lo) * size; // y axis points up
        return {sx, sy};
    }

    void polyline(const Polygon& pts, const std::string& color, double width, bool closed,
                  const std::string& cls = "", const std::string& fill = "none") {
        if (pts.size() < 2) return;
        out << "<path";
        if (!cls.empty()) out << " class=\"" << cls << "\"";
        out << " d=\"";
        for (std::size_t i = 0; i < pts.size(); ++i) {
            auto [sx, sy] = map(pts[i]);
            out << (i == 0 ? "M" : "L") << fmt(sx) << " " << fmt(sy);
        }
        if (closed) out << "Z";
        out << "\" fill=\"" << fill << "\" stroke=\"" << color << "\" stroke-width=\""
            << fmt(width) << "\"/>\n";
    }
};

Polygon clip_halfplane(const Polygon& poly, const Vec& a, double b) {
    Polygon out;
    const std::size_t n = poly.size();
    for (std::size_t i = 0; i < n; ++i) {
        const Vec& p = poly[i];
        const Vec& q = poly[(i + 1) % n];
        double sp = a.dot(p) - b, sq = a.dot(q) - b;
        if (sp <= 0) out.push_back(p);
        if ((sp < 0 && sq > 0) || (sp > 0 && sq < 0)) {
            double t = sp / (sp - sq);
            out.push_back(p + t * (q - p));
        }
    }
    return out;
}

Polygon boundary_polyline(const ConvexDomain& dom, int samples) {
    const AffineChart& chart = dom.chart();
    ProjPoint anchor = dom.anchor();
    Vec ya = chart.project(anchor);
    Polygon pts;
    for (int k = 0; k < samples; ++k) {
        double theta = 2.0 * M_PI * k / samples;
        Vec dir(2);
        dir << std::cos(theta), std::sin(theta);
        auto [pm, pp] = dom.chord(anchor, chart.embed(Vec(ya + dir)));
        pts.push_back(chart.project(pp));
    }
    return pts;
}

// Polygon of the Dirichlet region: the chart viewport clipped by every
// bisector and by tangent half-planes of the base quadric.
Polygon dirichlet_polygon(const DirichletDomain& dd, const QuadricDomain& base, double extent) {
    Polygon poly;
    Vec c0 = base.chart().project(dd.base_point);
    poly.push_back(c0 + extent * (Vec(2) << 1, 1).finished());
    poly.push_back(c0 + extent * (Vec(2) << -1, 1).finished());
    poly.push_back(c0 + extent * (Vec(2) << -1, -1).finished());
    poly.push_back(c0 + extent * (Vec(2) << 1, -1).finished());
    for (const auto& [a, b] : dd.all_bisectors) {
        poly = clip_halfplane(poly, a, b);
        if (poly.empty()) return poly;
    }
    // Approximate the quadric by tangent half-planes.
    const AffineChart& chart = base.chart();
    ProjPoint anchor = base.anchor();
    Vec ya = chart.project(anchor);
    for (int k = 0; k < 48; ++k) {
        double theta = 2.0 * M_PI * (k + 0.5) / 48;
        Vec dir(2);
        dir << std::cos(theta), std::sin(theta);
        auto [pm, pp] = base.chord(anchor, chart.embed(Vec(ya + dir)));
        ProjHyperplane tangent = polar(pp, base.form());
        Vec cov = chart.frame_inverse().transpose() * tangent.covector;
        Vec a = cov.head(2);
        double b = -cov[2];
        if (a.dot(ya) - b > 0) {
            a = -a;
            b = -b;
        }
        poly = clip_halfplane(poly, a, b);
        if (poly.empty()) return poly;
    }
    return poly;
}

// Developing map of a bend scene on base points (identity otherwise).
Vec develop(const SceneDomain& sd, const Vec& y) {
    if (!sd.bend) return y;
    const BentDomain& dom = *sd.bend->domain;
    const AffineChart& chart = dom.chart();
    ProjPoint p = chart.embed(y);
    int c = dom.locate_base_chamber(p);
    return chart.project(dom.chambers()[c].map.apply(p));
}

Polygon develop_polygon(const SceneDomain& sd, const Polygon& poly, int edge_samples) {
    if (!sd.bend) return poly;
    Polygon out;
    const std::size_t n = poly.size();
    for (std::size_t i = 0; i < n; ++i) {
        const Vec& p = poly[i];
        const Vec& q = poly[(i + 1) % n];
        for (int k = 0; k < edge_samples; ++k) {
            double t = static_cast<double>(k) / edge_samples;
            out.push_back(develop(sd, Vec(p + t * (q - p))));
        }
    }
    return out;
}

} // namespace

RenderMode parse_render_mode(const std::string& name) {
    if (name == "tiling") return RenderMode::Tiling;
    if (name == "bent-domain") return RenderMode::BentDomain;
    if (name == "fundamental-domain") return RenderMode::FundamentalDomain;
    throw Error(ErrorCode::SchemaError, "unknown render mode: " + name);
}

std::string render_svg(const Scene& scene, RenderMode mode) {
    if (scene.dimension != 2)
        throw Error(ErrorCode::DimensionUnsupported, "rendering is 2-dimensional");
    SceneDomain sd = realize_scene(scene);

    Canvas canvas;
    canvas.lo = scene.viewport_min;
    canvas.hi = scene.viewport_max;
    canvas.size = scene.image_size;
    canvas.out << "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 "
               << scene.image_size << " " << scene.image_size << "\">\n";
    canvas.out << "<rect width=\"" << scene.image_size << "\" height=\"" << scene.image_size
               << "\" fill=\"#ffffff\"/>\n";

    const bool group_modes =
        mode == RenderMode::Tiling || mode == RenderMode::FundamentalDomain;
    if (group_modes && sd.has_rep && sd.quadric) {
        const QuadricDomain& base = *sd.quadric;
        Vec x0v(2);
        x0v << 0.013, 0.027;
        ProjPoint x0 = base.chart().embed(x0v);
        DirichletDomain dd = dirichlet_domain(sd.rep, base, x0, scene.orbit_words >= 3 ? 3 : 2);
        Polygon cell = dirichlet_polygon(dd, base, 4.0);
        if (!cell.empty()) {
            std::vector<Word> words;
            if (mode == RenderMode::Tiling)
                words = reduced_words(sd.rep.generators, scene.orbit_words);
            else
                words.push_back({});
            for (const auto& w : words) {
                ProjMap g = sd.rep.evaluate(w);
                Polygon tile;
                for (const auto& v : cell)
                    tile.push_back(base.chart().project(g.apply(base.chart().embed(v))));
                tile = develop_polygon(sd, tile, sd.bend ? 6 : 1);
                canvas.polyline(tile, scene.color_tiles, 0.5 * scene.stroke_width, true,
                                "tile");
            }
        }
    }

    // Wall chords (bend scenes), mapped through the developing map.
    if (sd.bend) {
        const BentDomain& dom = *sd.bend->domain;
        for (const auto& wall : dom.walls()) {
            if (wall.carrier.size() > 2) continue; // keep the picture readable
            Polygon chord;
            for (int k = 0; k <= 32; ++k) {
                double t = static_cast<double>(k) / 32;
                chord.push_back(develop(sd, Vec((1 - t) * wall.chord_a + t * wall.chord_b)));
            }
            canvas.polyline(chord, scene.color_walls, 0.75 * scene.stroke_width, false,
                            "wall");
        }
    }

    canvas.polyline(boundary_polyline(*sd.domain, scene.boundary_samples),
                    scene.color_boundary, scene.stroke_width, true, "boundary");

    canvas.out << "</svg>\n";
    return canvas.out.str();
}

} // namespace hb

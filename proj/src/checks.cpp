#include "hb/checks.hpp"

#include "hb/hilbert.hpp"
#include "hb/svg_render.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <sstream>

namespace hb {

namespace {

Vec v2(double a, double b) {
    Vec v(2);
    v << a, b;
    return v;
}

bool is_minkowski(const Mat& form) {
    const int n1 = static_cast<int>(form.rows());
    Vec d = Vec::Ones(n1);
    d[n1 - 1] = -1;
    Mat mink = Mat(d.asDiagonal());
    return (form / form.cwiseAbs().maxCoeff() - mink).norm() < 1e-12;
}

double klein_distance(const Vec& x, const Vec& y) {
    double num = 1.0 - x.dot(y);
    double den = std::sqrt((1.0 - x.squaredNorm()) * (1.0 - y.squaredNorm()));
    return std::acosh(num / den);
}

struct Runner {
    const Scene& scene;
    SceneDomain sd;
    CheckReport report;

    explicit Runner(const Scene& s) : scene(s), sd(realize_scene(s)) {}

    void add(const std::string& id, double residual, double threshold, bool pass) {
        report.entries.push_back({id, residual, threshold, pass});
    }
    void add_below(const std::string& id, double residual, double threshold) {
        add(id, residual, threshold, residual < threshold);
    }

    long n_small() const { return std::min<long>(scene.samples, 300); }
    long n_mid() const { return std::min<long>(scene.samples, 2000); }

    // ---- metric suite -----------------------------------------------------
    void metric() {
        const ConvexDomain& dom = *sd.domain;
        MetricContext ctx(dom);
        Rng rng = Rng::split(scene.seed, 1);

        double sym = 0, tri = 0;
        for (long i = 0; i < n_mid(); ++i) {
            ProjPoint x = dom.sample_interior(rng);
            ProjPoint y = dom.sample_interior(rng);
            ProjPoint z = dom.sample_interior(rng);
            double dxy = distance(ctx, x, y);
            sym = std::max(sym, std::abs(dxy - distance(ctx, y, x)));
            tri = std::max(tri, distance(ctx, x, z) - (dxy + distance(ctx, y, z)));
        }
        add_below("metric/symmetry", sym, 1e-10);
        add_below("metric/triangle-inequality", tri, 1e-9);

        double hom = 0, fd_err = 0;
        for (long i = 0; i < n_small(); ++i) {
            ProjPoint x = dom.sample_interior(rng);
            Vec v = rng.direction(dom.dim()) * rng.uniform(0.1, 2.0);
            double f = finsler_norm(ctx, x, v);
            hom = std::max(hom, std::abs(finsler_norm(ctx, x, 2.0 * v) - 2.0 * f));
            const double h = 1e-5;
            Vec cx = ctx.chart.project(x);
            double fd = (distance(ctx, x, ctx.chart.embed(cx + h * v)) +
                         distance(ctx, x, ctx.chart.embed(cx - h * v))) /
                        (2.0 * h);
            fd_err = std::max(fd_err, std::abs(fd - f));
        }
        add_below("metric/finsler-homogeneity", hom, 1e-12);
        add_below("metric/finsler-derivative", fd_err, 1e-6);

        if (sd.quadric && scene.kind == Scene::DomainKind::Ellipsoid) {
            double inv = 0;
            for (long i = 0; i < 50; ++i) {
                Mat m(dom.dim() + 1, dom.dim() + 1);
                for (int r = 0; r < m.rows(); ++r)
                    for (int c = 0; c < m.cols(); ++c) m(r, c) = rng.uniform(-1, 1);
                if (std::abs(m.determinant()) < 1e-2) continue;
                Eigen::JacobiSVD<Mat> svd(m);
                if (svd.singularValues()[0] / svd.singularValues()[m.rows() - 1] > 40)
                    continue;
                ProjMap g = ProjMap::from_matrix(m);
                QuadricDomain image = sd.quadric->transformed(g);
                MetricContext ctx_g(image);
                ProjPoint x = dom.sample_interior(rng), y = dom.sample_interior(rng);
                inv = std::max(inv, std::abs(distance(ctx, x, y) -
                                             distance(ctx_g, g.apply(x), g.apply(y))));
            }
            add_below("metric/projective-invariance", inv, 1e-9);

            if (is_minkowski(scene.form) && dom.dim() == 2) {
                double worst = 0;
                for (long i = 0; i < n_mid(); ++i) {
                    ProjPoint x = dom.sample_interior(rng), y = dom.sample_interior(rng);
                    Vec cx = ctx.chart.project(x), cy = ctx.chart.project(y);
                    worst = std::max(worst,
                                     std::abs(distance(ctx, x, y) - klein_distance(cx, cy)));
                }
                add_below("metric/klein-closed-form", worst, 1e-9);

                Vec tilt(3);
                tilt << 0.3, -0.2, 1.0;
                MetricContext ctx2(dom, AffineChart::with_infinity(ProjHyperplane(tilt)));
                double chart_dev = 0;
                for (long i = 0; i < n_small(); ++i) {
                    ProjPoint x = dom.sample_interior(rng), y = dom.sample_interior(rng);
                    chart_dev = std::max(chart_dev,
                                         std::abs(distance(ctx, x, y) - distance(ctx2, x, y)));
                }
                add_below("metric/chart-independence", chart_dev, 1e-9);
            }
        }
    }

    // ---- volume suite ------------------------------------------------------
    void volume() {
        const ConvexDomain& dom = *sd.domain;
        MetricContext ctx(dom);
        VolumeEstimate empty = busemann_volume(ctx, VolumeRegion::empty(), 1000, scene.seed);
        add("volume/empty-region", empty.value, 0.0, empty.value == 0.0);

        if (sd.quadric && scene.kind == Scene::DomainKind::Ellipsoid &&
            is_minkowski(scene.form) && dom.dim() == 2) {
            const double oracle = 2.0 * M_PI * (std::cosh(1.5) - 1.0);
            long n = std::min<long>(std::max<long>(scene.samples, 50000), 400000);
            VolumeEstimate est = busemann_volume(
                ctx, VolumeRegion::metric_ball(dom.anchor(), 1.5), n, scene.seed);
            add_below("volume/hyperbolic-ball-area", std::abs(est.value - oracle) / oracle,
                      0.02);
        }

        if (sd.quadric) {
            Rng rng = Rng::split(scene.seed, 7);
            bool ok = true;
            double worst = 0;
            for (int pair = 0; pair < 4; ++pair) {
                ProjPoint p = sd.quadric->ray_boundary(sd.quadric->anchor(),
                                                       rng.direction(dom.dim())).second;
                double s_out = rng.uniform(0.05, 0.3);
                QuadricDomain outer = pencil_ellipsoid(*sd.quadric, p, s_out);
                QuadricDomain inner =
                    pencil_ellipsoid(*sd.quadric, p, s_out + rng.uniform(0.3, 1.0));
                MetricContext ctx_o(outer), ctx_i(inner);
                Vec q = inner.chart().project(inner.anchor());
                Polytope cell = Polytope::box(q - v2(0.04, 0.04), q + v2(0.04, 0.04));
                auto [lo, hi] = context_bounding_box(ctx_i);
                VolumeEstimate ei = busemann_volume(ctx_i, VolumeRegion::of_domain(cell),
                                                    10000, scene.seed, &lo, &hi);
                VolumeEstimate eo = busemann_volume(ctx_o, VolumeRegion::of_domain(cell),
                                                    10000, scene.seed, &lo, &hi);
                double slack = ei.value * 3.0 * (ei.stderr_value / std::max(ei.value, 1e-12));
                worst = std::max(worst, eo.value - ei.value);
                if (eo.value > ei.value + slack) ok = false;
            }
            add("volume/nested-monotone", worst, 0.0, ok);
        }
    }

    // ---- bending suite -----------------------------------------------------
    void bending() {
        if (!sd.bend) return;
        const BendResult& res = *sd.bend;
        add_below("bending/relation-residual", res.relation_residual, 1e-9);
        add_below("bending/centralizer-residual", res.centralizer_residual, 1e-9);
        add_below("bending/equivariance-residual", res.equivariance_residual, 1e-9);

        if (scene.bend_t == 0.0) {
            double dev = 0;
            for (const auto& g : sd.rep.generators)
                dev = std::max(dev, (res.rho_t.images.at(g).mat -
                                     sd.rep.images.at(g).mat).norm());
            add("bending/identity-at-zero", dev, 0.0, dev == 0.0);
        } else {
            Word ab = parse_word("A B");
            double sep = std::abs(res.rho_t.evaluate(ab).mat.trace() -
                                  sd.rep.evaluate(ab).mat.trace());
            add("bending/trace-separation", sep, 1e-3, sep > 1e-3);
        }

        const BentDomain& dom = *res.domain;
        const AffineChart& chart = dom.chart();
        Rng rng = Rng::split(scene.seed, 9);
        int viol = 0;
        long n = n_mid();
        for (long i = 0; i < n; ++i) {
            Vec y1 = chart.project(dom.sample_interior(rng));
            Vec y2 = chart.project(dom.sample_interior(rng));
            Containment mid = dom.classify(chart.embed(Vec(0.5 * (y1 + y2))));
            if (mid.exact && !mid.interior()) ++viol;
        }
        add("bending/convexity-midpoints", static_cast<double>(viol), 0.0, viol == 0);

        double wall_dev = 0;
        int edges = 0;
        for (const auto& c : dom.chambers()) {
            if (c.parent < 0 || edges >= 12) continue;
            ++edges;
            const Wall& w = dom.walls()[c.parent_wall];
            const Chamber& par = dom.chambers()[c.parent];
            for (int k = 0; k < 100; ++k) {
                double s = (k + 0.5) / 100;
                ProjPoint z = chart.embed(Vec((1 - s) * w.chord_a + s * w.chord_b));
                ProjPoint a = c.map.apply(z), b = par.map.apply(z);
                wall_dev = std::max(wall_dev,
                                    std::min((a.rep - b.rep).norm(), (a.rep + b.rep).norm()));
            }
        }
        add_below("bending/wall-continuity", wall_dev, 1e-9);

        auto violations = strict_convexity_probe(dom, static_cast<int>(n_mid()), scene.seed);
        add("bending/strict-convexity", static_cast<double>(violations.size()), 0.0,
            violations.empty());
    }

    // ---- groups suite --------------------------------------------------------
    void groups() {
        if (!sd.has_rep) return;
        const Representation& rho_t = sd.bend ? sd.bend->rho_t : sd.rep;

        Classification comm = classify_element(sd.rep.evaluate(parse_word("A B A^-1 B^-1")));
        add("groups/unipotent-commutator", comm.unipotent_bound, 1e-6,
            comm.type == ElementType::ParabolicUnipotent && comm.unipotent_bound < 1e-6);

        int dim9 = irreducibility_dimension(rho_t, 4);
        add("groups/irreducibility-span", static_cast<double>(dim9), 9.0, dim9 == 9);

        const ConvexDomain& dom = *sd.domain;
        double worst = 0;
        try {
            LimitSetSample ls = limit_set_sample(rho_t, dom, 4, 40, scene.seed);
            const AffineChart& chart = dom.chart();
            ProjPoint anchor = dom.anchor();
            Vec ya = chart.project(anchor);
            for (const auto& p : ls.points) {
                ProjPoint hit;
                if (sd.bend) {
                    hit = sd.bend->domain
                              ->chord(anchor, p, BentDomain::Membership::Equivariant)
                              .second;
                } else {
                    hit = dom.chord(anchor, p).second;
                }
                worst = std::max(worst, (chart.project(hit) - chart.project(p)).norm());
            }
            add_below("groups/limit-set-on-boundary", worst, 1e-6);
        } catch (const Error&) {
            add("groups/limit-set-on-boundary", 1.0, 1e-6, false);
        }

        const QuadricDomain& base = sd.bend ? sd.bend->domain->base() : *sd.quadric;
        ProjPoint x0 = base.chart().embed(v2(0.013, 0.027));
        DirichletDomain dd = dirichlet_domain(sd.rep, base, x0, 3);
        Rng rng = Rng::split(scene.seed, 11);
        std::vector<ProjMap> trans;
        for (const auto& w : reduced_words(sd.rep.generators, 2))
            trans.push_back(sd.rep.evaluate(w));
        int bad = 0;
        for (int i = 0; i < 500; ++i) {
            ProjPoint z = base.sample_interior(rng);
            int inside = 0;
            for (const auto& g : trans)
                if (dd.margin(g.inverse().apply(z)) < -1e-7) ++inside;
            if (inside > 1) ++bad;
        }
        add("groups/dirichlet-disjoint", static_cast<double>(bad), 0.0, bad == 0);
    }

    // ---- hyperbolicity suite --------------------------------------------------
    void hyperbolicity() {
        const ConvexDomain& dom = *sd.domain;
        MetricContext ctx(dom);
        DeltaOptions fast;
        fast.side_samples = 30;
        fast.segment_grid = 12;

        if (scene.kind == Scene::DomainKind::Polytope) {
            // Flat control: triangles pushed toward the corners grow without
            // bound (bounding-box corner directions work for the square).
            DeltaOptions push = fast;
            push.vertex_directions = {v2(1, 1), v2(-1, 1), v2(1, -1)};
            double first = 0, last = 0;
            for (double frac : {0.9, 0.99, 0.999, 0.9999}) {
                push.vertex_push = frac;
                double d = delta_estimate(ctx, 6, scene.seed, push);
                if (first == 0) first = d;
                last = d;
            }
            double growth = last / std::max(first, 1e-9);
            add("hyperbolicity/delta-flat-control", growth, 1.5, growth > 1.5);
            return;
        }

        double d1 = delta_estimate(ctx, 8, scene.seed, fast);
        double d2 = delta_estimate(ctx, 16, scene.seed, fast);
        double change = std::abs(d2 - d1) / std::max(d2, 1e-9);
        bool ok = std::isfinite(d1) && std::isfinite(d2) && d1 > 0 && change < 0.25;
        add("hyperbolicity/delta-stable", change, 0.25, ok);
    }
};

} // namespace

bool CheckReport::all_pass() const {
    for (const auto& e : entries)
        if (!e.pass) return false;
    return true;
}

std::string CheckReport::to_jsonl() const {
    std::ostringstream out;
    for (const auto& e : entries) {
        nlohmann::ordered_json j;
        j["id"] = e.id;
        j["residual"] = e.residual;
        j["threshold"] = e.threshold;
        j["pass"] = e.pass;
        out << j.dump() << "\n";
    }
    return out.str();
}

CheckReport run_checks(const Scene& scene, const std::string& suite) {
    Runner runner(scene);
    bool all = suite == "all";
    if (!all && suite != "metric" && suite != "bending" && suite != "groups" &&
        suite != "volume" && suite != "hyperbolicity")
        throw Error(ErrorCode::SchemaError, "unknown suite: " + suite);
    if (all || suite == "metric") runner.metric();
    if (all || suite == "volume") runner.volume();
    if (all || suite == "bending") runner.bending();
    if (all || suite == "groups") runner.groups();
    if (all || suite == "hyperbolicity") runner.hyperbolicity();
    return runner.report;
}

} // namespace hb

#include "hb/scene.hpp"

#include <json.hpp>

#include <cstdlib>
#include <fstream>
#include <sstream>

namespace hb {

namespace {

using Json = nlohmann::ordered_json;

[[noreturn]] void schema_error(const std::string& where, const std::string& what) {
    throw Error(ErrorCode::SchemaError, where + ": " + what);
}

Mat parse_form(const Json& j, int n, const std::string& where) {
    const int n1 = n + 1;
    Mat m = Mat::Zero(n1, n1);
    if (j.is_array() && !j.empty() && j[0].is_array()) {
        if (static_cast<int>(j.size()) != n1) schema_error(where, "expected (n+1) rows");
        for (int r = 0; r < n1; ++r) {
            if (static_cast<int>(j[r].size()) != n1)
                schema_error(where, "expected (n+1) columns");
            for (int c = 0; c < n1; ++c) m(r, c) = j[r][c].get<double>();
        }
        return m;
    }
    if (j.is_array()) { // diagonal shorthand
        if (static_cast<int>(j.size()) != n1)
            schema_error(where, "diagonal needs n+1 entries");
        for (int i = 0; i < n1; ++i) m(i, i) = j[i].get<double>();
        return m;
    }
    schema_error(where, "expected a matrix or diagonal array");
}

void check_signature(const Mat& form, const std::string& where) {
    try {
        QuadricDomain probe(form);
    } catch (const Error& e) {
        if (e.code() == ErrorCode::InvalidSignature)
            schema_error(where, "quadratic form must have signature (n,1)");
        throw;
    }
}

} // namespace

Scene parse_scene(const std::string& text) {
    Json j;
    try {
        j = Json::parse(text);
    } catch (const std::exception& e) {
        schema_error("/", e.what());
    }
    Scene s;
    if (!j.is_object()) schema_error("/", "scene must be a JSON object");
    for (auto& [key, value] : j.items()) {
        if (key != "version" && key != "dimension" && key != "domain" && key != "probe" &&
            key != "render")
            schema_error("/" + key, "unknown field");
        (void)value;
    }
    s.version = j.value("version", 1);
    if (s.version != 1) schema_error("/version", "unsupported schema version");
    s.dimension = j.value("dimension", 2);
    if (s.dimension < 2 || s.dimension > 8) schema_error("/dimension", "out of range");

    if (!j.contains("domain")) schema_error("/domain", "missing");
    const Json& dom = j["domain"];
    std::string type = dom.value("type", "");
    if (type == "ellipsoid") {
        s.kind = Scene::DomainKind::Ellipsoid;
        if (dom.contains("form"))
            s.form = parse_form(dom["form"], s.dimension, "/domain/form");
        else if (dom.contains("diag"))
            s.form = parse_form(dom["diag"], s.dimension, "/domain/diag");
        else {
            Vec d = Vec::Ones(s.dimension + 1);
            d[s.dimension] = -1;
            s.form = Mat(d.asDiagonal());
        }
        check_signature(s.form, dom.contains("form") ? "/domain/form" : "/domain/diag");
    } else if (type == "polytope") {
        s.kind = Scene::DomainKind::Polytope;
        if (!dom.contains("halfspaces")) schema_error("/domain/halfspaces", "missing");
        for (const auto& h : dom["halfspaces"]) {
            if (!h.contains("normal") || !h.contains("offset"))
                schema_error("/domain/halfspaces", "each entry needs normal and offset");
            if (static_cast<int>(h["normal"].size()) != s.dimension)
                schema_error("/domain/halfspaces/normal", "wrong arity");
            Vec a(s.dimension);
            for (int i = 0; i < s.dimension; ++i) a[i] = h["normal"][i].get<double>();
            s.halfspaces.emplace_back(a, h["offset"].get<double>());
        }
    } else if (type == "bend") {
        s.kind = Scene::DomainKind::Bend;
        if (s.dimension != 2) schema_error("/dimension", "bend scenes are 2-dimensional");
        s.base_rep = dom.value("base", "punctured-torus");
        if (s.base_rep != "punctured-torus")
            schema_error("/domain/base", "unknown base representation");
        s.bend_t = dom.value("t", 0.2);
        s.bend_depth = dom.value("depth", 6);
        s.bend_wall_words = dom.value("wall_words", 7);
        if (s.bend_depth < 1 || s.bend_depth > 12) schema_error("/domain/depth", "out of range");
        if (s.bend_wall_words < 1 || s.bend_wall_words > 9)
            schema_error("/domain/wall_words", "out of range");
    } else {
        schema_error("/domain/type", "expected ellipsoid, polytope or bend");
    }

    if (j.contains("probe")) {
        const Json& p = j["probe"];
        s.samples = p.value("samples", s.samples);
        s.seed = p.value("seed", s.seed);
        s.tol_geometry = p.value("tol_geometry", s.tol_geometry);
        s.tol_linear = p.value("tol_linear", s.tol_linear);
        if (s.samples < 1) schema_error("/probe/samples", "must be positive");
    }
    if (j.contains("render")) {
        const Json& r = j["render"];
        s.viewport_min = r.value("viewport_min", s.viewport_min);
        s.viewport_max = r.value("viewport_max", s.viewport_max);
        s.image_size = r.value("size", s.image_size);
        s.stroke_width = r.value("stroke_width", s.stroke_width);
        s.color_boundary = r.value("color_boundary", s.color_boundary);
        s.color_walls = r.value("color_walls", s.color_walls);
        s.color_tiles = r.value("color_tiles", s.color_tiles);
        s.orbit_words = r.value("orbit_words", s.orbit_words);
        s.boundary_samples = r.value("boundary_samples", s.boundary_samples);
        if (s.viewport_min >= s.viewport_max)
            schema_error("/render/viewport_min", "empty viewport");
    }

    // Environment override for the probe seed.
    if (const char* env = std::getenv("HB_SEED")) s.seed = std::strtoull(env, nullptr, 10);
    return s;
}

Scene load_scene_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::SchemaError, "cannot open scene file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_scene(buf.str());
}

std::string serialize_scene(const Scene& s) {
    Json j;
    j["version"] = s.version;
    j["dimension"] = s.dimension;
    Json dom;
    switch (s.kind) {
        case Scene::DomainKind::Ellipsoid: {
            dom["type"] = "ellipsoid";
            Json rows = Json::array();
            for (int r = 0; r < s.form.rows(); ++r) {
                Json row = Json::array();
                for (int c = 0; c < s.form.cols(); ++c) row.push_back(s.form(r, c));
                rows.push_back(row);
            }
            dom["form"] = rows;
            break;
        }
        case Scene::DomainKind::Polytope: {
            dom["type"] = "polytope";
            Json hs = Json::array();
            for (const auto& [a, b] : s.halfspaces) {
                Json h;
                Json normal = Json::array();
                for (int i = 0; i < a.size(); ++i) normal.push_back(a[i]);
                h["normal"] = normal;
                h["offset"] = b;
                hs.push_back(h);
            }
            dom["halfspaces"] = hs;
            break;
        }
        case Scene::DomainKind::Bend: {
            dom["type"] = "bend";
            dom["base"] = s.base_rep;
            dom["t"] = s.bend_t;
            dom["depth"] = s.bend_depth;
            dom["wall_words"] = s.bend_wall_words;
            break;
        }
    }
    j["domain"] = dom;
    Json probe;
    probe["samples"] = s.samples;
    probe["seed"] = s.seed;
    probe["tol_geometry"] = s.tol_geometry;
    probe["tol_linear"] = s.tol_linear;
    j["probe"] = probe;
    Json render;
    render["viewport_min"] = s.viewport_min;
    render["viewport_max"] = s.viewport_max;
    render["size"] = s.image_size;
    render["stroke_width"] = s.stroke_width;
    render["color_boundary"] = s.color_boundary;
    render["color_walls"] = s.color_walls;
    render["color_tiles"] = s.color_tiles;
    render["orbit_words"] = s.orbit_words;
    render["boundary_samples"] = s.boundary_samples;
    j["render"] = render;
    return j.dump(2) + "\n";
}

SceneDomain realize_scene(const Scene& scene) {
    SceneDomain out;
    switch (scene.kind) {
        case Scene::DomainKind::Ellipsoid: {
            AffineChart chart = AffineChart::standard(scene.dimension);
            auto q = std::make_shared<QuadricDomain>(scene.form, chart, scene.tol_geometry);
            out.quadric = q;
            out.domain = q;
            break;
        }
        case Scene::DomainKind::Polytope: {
            out.domain = std::make_shared<Polytope>(scene.halfspaces,
                                                    AffineChart::standard(scene.dimension),
                                                    scene.tol_geometry);
            break;
        }
        case Scene::DomainKind::Bend: {
            PuncturedTorus pt = punctured_torus_rep();
            auto base = std::make_shared<QuadricDomain>(pt.base_form, AffineChart::standard(2),
                                                        scene.tol_geometry);
            WallSpec wall;
            wall.plane = pt.wall;
            wall.pole_point = pt.wall_pole;
            BendParams params;
            params.t = scene.bend_t;
            params.depth = scene.bend_depth;
            params.wall_words = scene.bend_wall_words;
            params.seed = scene.seed;
            out.bend = std::make_shared<BendResult>(
                build_bent_domain(pt.rep, *pt.rep.decomposition, *base, wall, params));
            out.domain = out.bend->domain;
            out.quadric = std::make_shared<QuadricDomain>(out.bend->domain->base());
            out.rep = pt.rep;
            out.has_rep = true;
            break;
        }
    }
    return out;
}

} // namespace hb

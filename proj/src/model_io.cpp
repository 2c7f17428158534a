#include "psbfem/model_io.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include <json.hpp>

#include "psbfem/errors.hpp"

namespace psb {

namespace {

using nlohmann::json;
using ordered = nlohmann::ordered_json;

[[noreturn]] void fail(const std::string& msg, int line = -1) {
    throw Error(ErrorCode::parse, msg, line);
}

int byte_to_line(const std::string& text, std::size_t byte) {
    int line = 1;
    for (std::size_t i = 0; i < byte && i < text.size(); ++i)
        if (text[i] == '\n') ++line;
    return line;
}

const json& member(const json& obj, const char* key, const std::string& where) {
    if (!obj.is_object()) fail(where + " must be an object");
    auto it = obj.find(key);
    if (it == obj.end()) fail(where + " is missing \"" + key + "\"");
    return *it;
}

double num(const json& v, const std::string& where) {
    if (!v.is_number()) fail(where + " must be a number");
    return v.get<double>();
}

int integer(const json& v, const std::string& where) {
    if (!v.is_number_integer()) fail(where + " must be an integer");
    return v.get<int>();
}

std::string str(const json& v, const std::string& where) {
    if (!v.is_string()) fail(where + " must be a string");
    return v.get<std::string>();
}

Point point(const json& v, const std::string& where) {
    if (!v.is_array() || v.size() != 2) fail(where + " must be [x, y]");
    return {num(v[0], where), num(v[1], where)};
}

std::vector<Point> polygon(const json& v, const std::string& where) {
    if (!v.is_array() || v.size() < 3) fail(where + " must list at least 3 [x, y] points");
    std::vector<Point> poly;
    for (const auto& p : v) poly.push_back(point(p, where));
    return poly;
}

PolygonMesh parse_inline_mesh(const json& jm) {
    PolygonMesh mesh;
    for (const auto& jn : member(jm, "nodes", "mesh")) {
        if (!jn.is_array() || jn.size() != 3) fail("mesh.nodes entries must be [id, x, y]");
        mesh.nodes.push_back(
            {integer(jn[0], "node id"), {num(jn[1], "node x"), num(jn[2], "node y")}});
    }
    mesh.sort_nodes();
    for (const auto& je : member(jm, "elements", "mesh")) {
        if (!je.is_array() || je.size() != 3)
            fail("mesh.elements entries must be [id, material_id, [node ids]]");
        PolygonElement e;
        e.id = integer(je[0], "element id");
        e.material_id = integer(je[1], "element material_id");
        if (!je[2].is_array()) fail("element node list must be an array");
        for (const auto& id : je[2]) e.node_ids.push_back(integer(id, "element node id"));
        mesh.elements.push_back(std::move(e));
    }
    if (jm.contains("boundary_edges"))
        for (const auto& jb : jm["boundary_edges"]) {
            if (!jb.is_array() || jb.size() != 3)
                fail("mesh.boundary_edges entries must be [a, b, tag]");
            mesh.boundary_edges.push_back({integer(jb[0], "boundary edge a"),
                                           integer(jb[1], "boundary edge b"),
                                           str(jb[2], "boundary edge tag")});
        }
    return mesh;
}

PolygonMesh parse_quadtree_mesh(const json& jq) {
    QuadtreeSpec spec;
    spec.domain = polygon(member(jq, "domain", "mesh.quadtree"), "quadtree domain");
    spec.max_depth = integer(member(jq, "max_depth", "mesh.quadtree"), "quadtree max_depth");
    if (jq.contains("holes"))
        for (const auto& jh : jq["holes"]) spec.holes.push_back(polygon(jh, "quadtree hole"));
    if (jq.contains("base_depth")) spec.base_depth = integer(jq["base_depth"], "base_depth");
    if (jq.contains("balance")) {
        if (!jq["balance"].is_boolean()) fail("quadtree balance must be a boolean");
        spec.balance = jq["balance"].get<bool>();
    }
    if (jq.contains("root_origin")) spec.root_origin = point(jq["root_origin"], "root_origin");
    if (jq.contains("root_size")) spec.root_size = num(jq["root_size"], "root_size");
    if (jq.contains("refine_regions"))
        for (const auto& jr : jq["refine_regions"]) {
            RefineRegion r;
            r.a = point(member(jr, "a", "refine region"), "refine region a");
            r.b = jr.contains("b") ? point(jr["b"], "refine region b") : r.a;
            r.depth = integer(member(jr, "depth", "refine region"), "refine region depth");
            spec.refine_regions.push_back(r);
        }
    PolygonMesh mesh = generate_quadtree(spec);
    polygonize_hanging_nodes(mesh);
    return mesh;
}

std::vector<int> resolve_node_selector(const json& jd, const PolygonMesh& mesh,
                                       const std::string& where) {
    std::set<int> out;
    const int selectors =
        int(jd.contains("nodes")) + int(jd.contains("tag")) + int(jd.contains("box"));
    if (selectors != 1) fail(where + " needs exactly one of \"nodes\", \"tag\", \"box\"");
    if (jd.contains("nodes")) {
        for (const auto& id : jd["nodes"]) out.insert(integer(id, where + " node id"));
    } else if (jd.contains("tag")) {
        const std::string tag = str(jd["tag"], where + " tag");
        for (const auto& be : mesh.boundary_edges)
            if (be.tag == tag) {
                out.insert(be.a);
                out.insert(be.b);
            }
        if (out.empty()) fail(where + ": no boundary edge carries tag \"" + tag + "\"");
    } else {
        const auto& jb = jd["box"];
        if (!jb.is_array() || jb.size() != 2) fail(where + " box must be [[x0,y0],[x1,y1]]");
        const Point a = point(jb[0], where + " box corner");
        const Point b = point(jb[1], where + " box corner");
        const double tol = kCoincidenceRel * std::max(mesh.diameter(), 1.0);
        const double x0 = std::min(a.x, b.x) - tol, x1 = std::max(a.x, b.x) + tol;
        const double y0 = std::min(a.y, b.y) - tol, y1 = std::max(a.y, b.y) + tol;
        for (const auto& n : mesh.nodes)
            if (n.p.x >= x0 && n.p.x <= x1 && n.p.y >= y0 && n.p.y <= y1) out.insert(n.id);
        if (out.empty()) fail(where + ": box selects no nodes");
    }
    return {out.begin(), out.end()};
}

std::vector<std::pair<int, int>> resolve_edge_selector(const json& jf, const PolygonMesh& mesh,
                                                       const std::string& where) {
    std::vector<std::pair<int, int>> out;
    const int selectors = int(jf.contains("edges")) + int(jf.contains("tag"));
    if (selectors != 1) fail(where + " needs exactly one of \"edges\", \"tag\"");
    if (jf.contains("edges")) {
        for (const auto& je : jf["edges"]) {
            if (!je.is_array() || je.size() != 2) fail(where + " edges entries must be [a, b]");
            out.emplace_back(integer(je[0], where), integer(je[1], where));
        }
    } else {
        const std::string tag = str(jf["tag"], where + " tag");
        for (const auto& be : mesh.boundary_edges)
            if (be.tag == tag) out.emplace_back(be.a, be.b);
        if (out.empty()) fail(where + ": no boundary edge carries tag \"" + tag + "\"");
    }
    return out;
}

}  // namespace

SeepageModel parse_native_model(const std::string& text) {
    json root;
    try {
        root = json::parse(text);
    } catch (const json::parse_error& e) {
        throw Error(ErrorCode::parse, e.what(), byte_to_line(text, e.byte));
    }
    if (!root.is_object()) fail("model file must be a JSON object");
    const int version = integer(member(root, "format_version", "model"), "format_version");
    if (version != 1) fail("unsupported format_version " + std::to_string(version));

    SeepageModel model;
    if (root.contains("unit_note")) model.unit_note = str(root["unit_note"], "unit_note");

    const json& jm = member(root, "mesh", "model");
    if (jm.contains("quadtree"))
        model.mesh = parse_quadtree_mesh(jm["quadtree"]);
    else
        model.mesh = parse_inline_mesh(jm);
    {
        ValidationReport report = validate_mesh(model.mesh);
        if (!report.pass()) throw Error(ErrorCode::model, report.to_string());
    }

    for (const auto& [key, jmat] : member(root, "materials", "model").items()) {
        int id = 0;
        try {
            std::size_t pos = 0;
            id = std::stoi(key, &pos);
            if (pos != key.size()) throw std::invalid_argument(key);
        } catch (...) {
            fail("material keys must be integer ids, got \"" + key + "\"");
        }
        Material mat;
        mat.kx = num(member(jmat, "kx", "material " + key), "kx");
        mat.ky = num(member(jmat, "ky", "material " + key), "ky");
        if (jmat.contains("Ss")) mat.Ss = num(jmat["Ss"], "Ss");
        model.materials[id] = mat;
    }

    if (root.contains("schedules"))
        for (const auto& [name, jknots] : root["schedules"].items()) {
            Schedule s;
            if (!jknots.is_array()) fail("schedule \"" + name + "\" must be [[t, value], ...]");
            for (const auto& jk : jknots) {
                if (!jk.is_array() || jk.size() != 2)
                    fail("schedule \"" + name + "\" knots must be [t, value]");
                s.knots.emplace_back(num(jk[0], "schedule t"), num(jk[1], "schedule value"));
            }
            model.schedules[name] = std::move(s);
        }

    if (root.contains("boundary_conditions")) {
        const json& jbc = root["boundary_conditions"];
        if (jbc.contains("dirichlet")) {
            int idx = 0;
            for (const auto& jd : jbc["dirichlet"]) {
                DirichletSet ds;
                ds.name = jd.contains("name") ? str(jd["name"], "dirichlet name")
                                              : "dirichlet_" + std::to_string(idx);
                const std::string where = "dirichlet set \"" + ds.name + "\"";
                ds.nodes = resolve_node_selector(jd, model.mesh, where);
                const bool has_head = jd.contains("head"), has_sched = jd.contains("schedule");
                if (int(has_head) + int(has_sched) != 1)
                    fail(where + " needs exactly one of \"head\", \"schedule\"");
                if (has_head)
                    ds.head = num(jd["head"], where + " head");
                else
                    ds.schedule_id = str(jd["schedule"], where + " schedule");
                model.dirichlet.push_back(std::move(ds));
                ++idx;
            }
        }
        if (jbc.contains("flux")) {
            int idx = 0;
            for (const auto& jf : jbc["flux"]) {
                FluxSet fs;
                fs.name = jf.contains("name") ? str(jf["name"], "flux name")
                                              : "flux_" + std::to_string(idx);
                const std::string where = "flux set \"" + fs.name + "\"";
                fs.edges = resolve_edge_selector(jf, model.mesh, where);
                fs.inflow = num(member(jf, "inflow", where), where + " inflow");
                model.flux.push_back(std::move(fs));
                ++idx;
            }
        }
    }

    if (root.contains("transient")) {
        const json& jt = root["transient"];
        TransientSpec ts;
        ts.dt = num(member(jt, "dt", "transient"), "transient dt");
        ts.t_end = num(member(jt, "t_end", "transient"), "transient t_end");
        const json& ji = member(jt, "initial", "transient");
        if (ji.is_string()) {
            if (ji.get<std::string>() != "steady")
                fail("transient initial must be \"steady\", a number, or an array");
            ts.init = TransientSpec::Init::steady;
        } else if (ji.is_number()) {
            ts.init = TransientSpec::Init::constant;
            ts.init_value = ji.get<double>();
        } else if (ji.is_array()) {
            ts.init = TransientSpec::Init::field;
            for (const auto& v : ji) ts.init_field.push_back(num(v, "initial field value"));
        } else {
            fail("transient initial must be \"steady\", a number, or an array");
        }
        if (jt.contains("output_stride"))
            ts.output_stride = integer(jt["output_stride"], "output_stride");
        model.transient = std::move(ts);
    }

    if (root.contains("monitors"))
        for (const auto& [name, jp] : root["monitors"].items())
            model.monitors.push_back({name, point(jp, "monitor \"" + name + "\"")});

    model.validate();
    return model;
}

std::string serialize_model(const SeepageModel& model) {
    ordered root;
    root["format_version"] = 1;
    if (!model.unit_note.empty()) root["unit_note"] = model.unit_note;

    ordered jm;
    jm["nodes"] = ordered::array();
    for (const auto& n : model.mesh.nodes) jm["nodes"].push_back({n.id, n.p.x, n.p.y});
    jm["elements"] = ordered::array();
    for (const auto& e : model.mesh.elements) {
        ordered ids = ordered::array();
        for (int id : e.node_ids) ids.push_back(id);
        jm["elements"].push_back(ordered::array({e.id, e.material_id, ids}));
    }
    if (!model.mesh.boundary_edges.empty()) {
        jm["boundary_edges"] = ordered::array();
        for (const auto& be : model.mesh.boundary_edges)
            jm["boundary_edges"].push_back({be.a, be.b, be.tag});
    }
    root["mesh"] = std::move(jm);

    ordered jmat = ordered::object();
    for (const auto& [id, mat] : model.materials) {
        ordered jv;
        jv["kx"] = mat.kx;
        jv["ky"] = mat.ky;
        if (mat.Ss != 0.0) jv["Ss"] = mat.Ss;
        jmat[std::to_string(id)] = std::move(jv);
    }
    root["materials"] = std::move(jmat);

    if (!model.dirichlet.empty() || !model.flux.empty()) {
        ordered jbc;
        if (!model.dirichlet.empty()) {
            jbc["dirichlet"] = ordered::array();
            for (const auto& ds : model.dirichlet) {
                ordered jd;
                jd["name"] = ds.name;
                jd["nodes"] = ds.nodes;
                if (ds.schedule_id.empty())
                    jd["head"] = ds.head;
                else
                    jd["schedule"] = ds.schedule_id;
                jbc["dirichlet"].push_back(std::move(jd));
            }
        }
        if (!model.flux.empty()) {
            jbc["flux"] = ordered::array();
            for (const auto& fs : model.flux) {
                ordered jf;
                jf["name"] = fs.name;
                jf["edges"] = ordered::array();
                for (const auto& [a, b] : fs.edges) jf["edges"].push_back({a, b});
                jf["inflow"] = fs.inflow;
                jbc["flux"].push_back(std::move(jf));
            }
        }
        root["boundary_conditions"] = std::move(jbc);
    }

    if (!model.schedules.empty()) {
        ordered js = ordered::object();
        for (const auto& [name, sched] : model.schedules) {
            ordered jk = ordered::array();
            for (const auto& [t, v] : sched.knots) jk.push_back({t, v});
            js[name] = std::move(jk);
        }
        root["schedules"] = std::move(js);
    }

    if (model.transient) {
        const TransientSpec& ts = *model.transient;
        ordered jt;
        jt["dt"] = ts.dt;
        jt["t_end"] = ts.t_end;
        switch (ts.init) {
            case TransientSpec::Init::steady: jt["initial"] = "steady"; break;
            case TransientSpec::Init::constant: jt["initial"] = ts.init_value; break;
            case TransientSpec::Init::field: jt["initial"] = ts.init_field; break;
        }
        if (ts.output_stride != 1) jt["output_stride"] = ts.output_stride;
        root["transient"] = std::move(jt);
    }

    if (!model.monitors.empty()) {
        ordered jmon = ordered::object();
        for (const auto& m : model.monitors) jmon[m.name] = {m.p.x, m.p.y};
        root["monitors"] = std::move(jmon);
    }

    return root.dump(2) + "\n";
}

bool model_identical(const SeepageModel& a, const SeepageModel& b) {
    const auto pt_eq = [](Point p, Point q) { return p.x == q.x && p.y == q.y; };
    if (a.mesh.nodes.size() != b.mesh.nodes.size() ||
        a.mesh.elements.size() != b.mesh.elements.size() ||
        a.mesh.boundary_edges.size() != b.mesh.boundary_edges.size())
        return false;
    for (std::size_t i = 0; i < a.mesh.nodes.size(); ++i)
        if (a.mesh.nodes[i].id != b.mesh.nodes[i].id ||
            !pt_eq(a.mesh.nodes[i].p, b.mesh.nodes[i].p))
            return false;
    for (std::size_t i = 0; i < a.mesh.elements.size(); ++i) {
        const auto& ea = a.mesh.elements[i];
        const auto& eb = b.mesh.elements[i];
        if (ea.id != eb.id || ea.material_id != eb.material_id || ea.node_ids != eb.node_ids)
            return false;
    }
    for (std::size_t i = 0; i < a.mesh.boundary_edges.size(); ++i) {
        const auto& ba = a.mesh.boundary_edges[i];
        const auto& bb = b.mesh.boundary_edges[i];
        if (ba.a != bb.a || ba.b != bb.b || ba.tag != bb.tag) return false;
    }
    if (a.materials.size() != b.materials.size()) return false;
    for (auto ia = a.materials.begin(), ib = b.materials.begin(); ia != a.materials.end();
         ++ia, ++ib)
        if (ia->first != ib->first || ia->second.kx != ib->second.kx ||
            ia->second.ky != ib->second.ky || ia->second.Ss != ib->second.Ss)
            return false;
    if (a.dirichlet.size() != b.dirichlet.size() || a.flux.size() != b.flux.size()) return false;
    for (std::size_t i = 0; i < a.dirichlet.size(); ++i) {
        const auto& da = a.dirichlet[i];
        const auto& db = b.dirichlet[i];
        if (da.name != db.name || da.nodes != db.nodes || da.head != db.head ||
            da.schedule_id != db.schedule_id)
            return false;
    }
    for (std::size_t i = 0; i < a.flux.size(); ++i) {
        const auto& fa = a.flux[i];
        const auto& fb = b.flux[i];
        if (fa.name != fb.name || fa.edges != fb.edges || fa.inflow != fb.inflow) return false;
    }
    if (a.schedules.size() != b.schedules.size()) return false;
    for (auto ia = a.schedules.begin(), ib = b.schedules.begin(); ia != a.schedules.end();
         ++ia, ++ib)
        if (ia->first != ib->first || ia->second.knots != ib->second.knots) return false;
    if (a.transient.has_value() != b.transient.has_value()) return false;
    if (a.transient) {
        const auto& ta = *a.transient;
        const auto& tb = *b.transient;
        if (ta.dt != tb.dt || ta.t_end != tb.t_end || ta.init != tb.init ||
            ta.init_value != tb.init_value || ta.init_field != tb.init_field ||
            ta.output_stride != tb.output_stride)
            return false;
    }
    if (a.monitors.size() != b.monitors.size()) return false;
    for (std::size_t i = 0; i < a.monitors.size(); ++i)
        if (a.monitors[i].name != b.monitors[i].name || !pt_eq(a.monitors[i].p, b.monitors[i].p))
            return false;
    return a.unit_note == b.unit_note;
}

}  // namespace psb

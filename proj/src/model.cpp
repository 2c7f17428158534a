#include "psbfem/model.hpp"

#include <algorithm>
#include <cmath>

#include "psbfem/errors.hpp"

namespace psb {

double Schedule::eval(double t) const {
    if (knots.empty()) throw Error(ErrorCode::model, "schedule has no knots");
    if (t <= knots.front().first) return knots.front().second;
    if (t >= knots.back().first) return knots.back().second;
    auto it = std::upper_bound(knots.begin(), knots.end(), t,
                               [](double v, const auto& k) { return v < k.first; });
    const auto& [t1, v1] = *it;
    const auto& [t0, v0] = *(it - 1);
    return v0 + (v1 - v0) * (t - t0) / (t1 - t0);
}

double Schedule::rate(double t) const {
    if (knots.empty()) throw Error(ErrorCode::model, "schedule has no knots");
    if (t < knots.front().first || t >= knots.back().first) return 0.0;
    auto it = std::upper_bound(knots.begin(), knots.end(), t,
                               [](double v, const auto& k) { return v < k.first; });
    const auto& [t1, v1] = *it;
    const auto& [t0, v0] = *(it - 1);
    return (v1 - v0) / (t1 - t0);
}

const Material& SeepageModel::material(int id) const {
    auto it = materials.find(id);
    if (it == materials.end())
        throw Error(ErrorCode::model, "unknown material id " + std::to_string(id));
    return it->second;
}

void SeepageModel::validate() const {
    for (const auto& [id, mat] : materials) {
        if (!(mat.kx > 0.0) || !(mat.ky > 0.0))
            throw Error(ErrorCode::model,
                        "material " + std::to_string(id) + " needs kx > 0 and ky > 0");
        if (mat.Ss < 0.0)
            throw Error(ErrorCode::model, "material " + std::to_string(id) + " has Ss < 0");
    }
    for (const auto& e : mesh.elements)
        if (!materials.count(e.material_id))
            throw Error(ErrorCode::model, "element " + std::to_string(e.id) +
                                              " references unknown material " +
                                              std::to_string(e.material_id));
    for (const auto& ds : dirichlet) {
        for (int id : ds.nodes)
            if (!mesh.has_node(id))
                throw Error(ErrorCode::model, "dirichlet set \"" + ds.name +
                                                  "\" references unknown node " +
                                                  std::to_string(id));
        if (!ds.schedule_id.empty() && !schedules.count(ds.schedule_id))
            throw Error(ErrorCode::model, "dirichlet set \"" + ds.name +
                                              "\" references unknown schedule \"" +
                                              ds.schedule_id + "\"");
    }
    for (const auto& fs : flux)
        for (const auto& [a, b] : fs.edges)
            if (!mesh.has_node(a) || !mesh.has_node(b))
                throw Error(ErrorCode::model,
                            "flux set \"" + fs.name + "\" references an unknown node");
    for (const auto& [name, sched] : schedules) {
        if (sched.knots.empty())
            throw Error(ErrorCode::model, "schedule \"" + name + "\" has no knots");
        for (std::size_t i = 1; i < sched.knots.size(); ++i)
            if (!(sched.knots[i].first > sched.knots[i - 1].first))
                throw Error(ErrorCode::model,
                            "schedule \"" + name + "\" knots must increase in time");
    }
    for (const auto& mon : monitors) {
        bool inside = false;
        for (const auto& e : mesh.elements)
            if (point_in_polygon(mon.p, mesh.element_polygon(e))) {
                inside = true;
                break;
            }
        if (!inside)
            throw Error(ErrorCode::model, "monitor \"" + mon.name + "\" at (" +
                                              std::to_string(mon.p.x) + ", " +
                                              std::to_string(mon.p.y) + ") lies outside the mesh");
    }
    if (transient) {
        if (!(transient->dt > 0.0)) throw Error(ErrorCode::model, "transient dt must be > 0");
        if (!(transient->t_end >= transient->dt))
            throw Error(ErrorCode::model, "transient t_end must be >= dt");
        if (transient->init == TransientSpec::Init::field &&
            transient->init_field.size() != mesh.nodes.size())
            throw Error(ErrorCode::model, "initial field length does not match node count");
        if (transient->output_stride < 1)
            throw Error(ErrorCode::model, "output stride must be >= 1");
    }
}

}  // namespace psb

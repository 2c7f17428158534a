#include "psbfem/vtk_io.hpp"

#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>

#include "psbfem/errors.hpp"
#include "psbfem/recovery.hpp"

namespace psb {

std::string format_double(double v) {
    // shortest string that parses back to the identical double ("10" beats
    // the equally exact "1e+01" that a lower %g precision would emit)
    std::string best;
    char buf[40];
    for (int prec = 1; prec <= 17; ++prec) {
        std::snprintf(buf, sizeof(buf), "%.*g", prec, v);
        if (std::strtod(buf, nullptr) != v) continue;
        if (best.empty() || std::strlen(buf) < best.size()) best = buf;
    }
    return best;
}

namespace {

void write_or_throw(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::io, "cannot open " + path + " for writing");
    out << content;
    out.flush();
    if (!out) throw Error(ErrorCode::io, "write to " + path + " failed");
}

}  // namespace

void export_vtk(const PolygonMesh& mesh,
                const std::vector<std::pair<std::string, Eigen::VectorXd>>& nodal_fields,
                const std::string& path, const std::vector<SElementOperator>* ops,
                const GlobalSystem* sys) {
    for (const auto& [name, field] : nodal_fields)
        if (field.size() != static_cast<Eigen::Index>(mesh.nodes.size()))
            throw Error(ErrorCode::invalid_argument,
                        "field \"" + name + "\" length does not match node count");

    std::string s;
    s += "# vtk DataFile Version 3.0\n";
    s += "psbfem output\n";
    s += "ASCII\n";
    s += "DATASET UNSTRUCTURED_GRID\n";
    s += "POINTS " + std::to_string(mesh.nodes.size()) + " double\n";
    for (const Node& n : mesh.nodes)
        s += format_double(n.p.x) + " " + format_double(n.p.y) + " 0\n";

    std::size_t total = 0;
    for (const auto& e : mesh.elements) total += e.node_ids.size() + 1;
    s += "CELLS " + std::to_string(mesh.elements.size()) + " " + std::to_string(total) + "\n";
    for (const auto& e : mesh.elements) {
        s += std::to_string(e.node_ids.size());
        for (int id : e.node_ids) s += " " + std::to_string(mesh.node_index(id));
        s += "\n";
    }
    s += "CELL_TYPES " + std::to_string(mesh.elements.size()) + "\n";
    for (std::size_t i = 0; i < mesh.elements.size(); ++i) s += "7\n";

    if (!nodal_fields.empty()) {
        s += "POINT_DATA " + std::to_string(mesh.nodes.size()) + "\n";
        for (const auto& [name, field] : nodal_fields) {
            s += "SCALARS " + name + " double 1\n";
            s += "LOOKUP_TABLE default\n";
            for (Eigen::Index i = 0; i < field.size(); ++i) s += format_double(field[i]) + "\n";
        }
    }

    if (ops && sys && !nodal_fields.empty()) {
        const FieldSampler sampler(mesh, *ops, *sys, nodal_fields.front().second);
        s += "CELL_DATA " + std::to_string(mesh.elements.size()) + "\n";
        s += "VECTORS flux double\n";
        for (int e = 0; e < sampler.n_elements(); ++e) {
            const SElementOperator& op = sampler.op(e);
            Eigen::Vector2d q = Eigen::Vector2d::Zero();
            for (int edge = 0; edge < op.geometry.n(); ++edge)
                q += recover_with_participation(op, sampler.participation(e), 0.5, edge, 0.0).flux;
            q /= static_cast<double>(op.geometry.n());
            s += format_double(q.x()) + " " + format_double(q.y()) + " 0\n";
        }
    }
    write_or_throw(path, s);
}

std::string monitor_csv_text(const std::vector<std::string>& names,
                             const std::vector<double>& times,
                             const std::vector<std::vector<double>>& values) {
    if (values.size() != names.size())
        throw Error(ErrorCode::invalid_argument, "one value trace required per monitor name");
    for (const auto& trace : values)
        if (trace.size() != times.size())
            throw Error(ErrorCode::invalid_argument, "trace length does not match time count");
    std::string s = "t";
    for (const auto& n : names) s += "," + n;
    s += "\n";
    for (std::size_t i = 0; i < times.size(); ++i) {
        s += format_double(times[i]);
        for (const auto& trace : values) s += "," + format_double(trace[i]);
        s += "\n";
    }
    return s;
}

void export_monitor_csv(const std::vector<std::string>& names, const std::vector<double>& times,
                        const std::vector<std::vector<double>>& values, const std::string& path) {
    write_or_throw(path, monitor_csv_text(names, times, values));
}

}  // namespace psb

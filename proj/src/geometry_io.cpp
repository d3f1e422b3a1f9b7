#include "modetrack/geometry_io.hpp"

#include <fstream>
#include <stdexcept>

#include "json.hpp"

namespace modetrack {

namespace {

using nlohmann::json;

ControlMesh mesh_from_json(const json& arr, int nu, int nv) {
  if (static_cast<int>(arr.size()) != nv)
    throw std::runtime_error("geometry fixture: mesh has wrong row count");
  ControlMesh mesh(nu, nv);
  for (int j = 0; j < nv; ++j) {
    const json& row = arr.at(j);
    if (static_cast<int>(row.size()) != nu)
      throw std::runtime_error("geometry fixture: mesh row has wrong length");
    for (int i = 0; i < nu; ++i) {
      const json& pt = row.at(i);
      mesh.at(i, j) = Eigen::Vector2d(pt.at(0).get<double>(),
                                      pt.at(1).get<double>());
    }
  }
  return mesh;
}

json mesh_to_json(const ControlMesh& mesh) {
  json arr = json::array();
  for (int j = 0; j < mesh.nv; ++j) {
    json row = json::array();
    for (int i = 0; i < mesh.nu; ++i)
      row.push_back({mesh.at(i, j).x(), mesh.at(i, j).y()});
    arr.push_back(std::move(row));
  }
  return arr;
}

}  // namespace

GeometryFixture load_geometry_fixture(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open geometry fixture: " + path.string());
  json doc = json::parse(in);

  KnotVector bu(doc.at("knots_u").get<std::vector<double>>(),
                doc.at("degree_u").get<int>());
  KnotVector bv(doc.at("knots_v").get<std::vector<double>>(),
                doc.at("degree_v").get<int>());
  const int nu = bu.num_basis(), nv = bv.num_basis();
  GeometryMorph morph(bu, bv, mesh_from_json(doc.at("mesh_start"), nu, nv),
                      mesh_from_json(doc.at("mesh_end"), nu, nv));

  std::optional<DiskReference> ref;
  if (doc.contains("reference")) {
    const json& r = doc.at("reference");
    if (r.at("type").get<std::string>() != "disk")
      throw std::runtime_error("geometry fixture: unknown reference type");
    DiskReference d;
    d.radius = r.at("radius").get<double>();
    d.bc = r.at("bc").get<std::string>() == "neumann"
               ? BoundaryCondition::Neumann
               : BoundaryCondition::Dirichlet;
    if (r.contains("rel_tol")) d.rel_tol = r.at("rel_tol").get<double>();
    if (r.contains("refine_levels"))
      d.refine_levels = r.at("refine_levels").get<int>();
    ref = d;
  }
  return GeometryFixture{std::move(morph), ref};
}

void save_geometry_fixture(const std::filesystem::path& path,
                           const GeometryFixture& fixture,
                           const std::string& comment) {
  json doc;
  if (!comment.empty()) doc["comment"] = comment;
  doc["degree_u"] = fixture.morph.basis_u.degree();
  doc["degree_v"] = fixture.morph.basis_v.degree();
  doc["knots_u"] = fixture.morph.basis_u.knots();
  doc["knots_v"] = fixture.morph.basis_v.knots();
  doc["mesh_start"] = mesh_to_json(fixture.morph.mesh_start);
  doc["mesh_end"] = mesh_to_json(fixture.morph.mesh_end);
  if (fixture.reference) {
    doc["reference"] = {
        {"type", "disk"},
        {"radius", fixture.reference->radius},
        {"bc", fixture.reference->bc == BoundaryCondition::Neumann
                   ? "neumann"
                   : "dirichlet"},
        {"rel_tol", fixture.reference->rel_tol},
        {"refine_levels", fixture.reference->refine_levels}};
  }
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write geometry fixture: " + path.string());
  out << doc.dump(2) << "\n";
}

}  // namespace modetrack

#include "objrecon/mesh/ply.hpp"

#include <algorithm>
#include <cstring>
#include <fstream>
#include <sstream>

namespace objrecon::mesh {

namespace {

uint8_t to_u8(double c) {
  return static_cast<uint8_t>(std::clamp(std::lround(c * 255.0), 0l, 255l));
}

struct PlyProperty {
  std::string type;
  std::string name;
  bool is_list = false;
  std::string count_type;
};

size_t scalar_size(const std::string& type) {
  if (type == "char" || type == "uchar" || type == "int8" || type == "uint8") return 1;
  if (type == "short" || type == "ushort" || type == "int16" || type == "uint16") return 2;
  if (type == "int" || type == "uint" || type == "int32" || type == "uint32" || type == "float" ||
      type == "float32")
    return 4;
  if (type == "double" || type == "float64") return 8;
  throw std::runtime_error("unsupported ply scalar type: " + type);
}

double read_scalar(std::istream& in, const std::string& type) {
  char buf[8];
  in.read(buf, scalar_size(type));
  if (type == "char" || type == "int8") return *reinterpret_cast<int8_t*>(buf);
  if (type == "uchar" || type == "uint8") return *reinterpret_cast<uint8_t*>(buf);
  if (type == "short" || type == "int16") return *reinterpret_cast<int16_t*>(buf);
  if (type == "ushort" || type == "uint16") return *reinterpret_cast<uint16_t*>(buf);
  if (type == "int" || type == "int32") { int32_t v; std::memcpy(&v, buf, 4); return v; }
  if (type == "uint" || type == "uint32") { uint32_t v; std::memcpy(&v, buf, 4); return v; }
  if (type == "float" || type == "float32") { float v; std::memcpy(&v, buf, 4); return v; }
  double v;
  std::memcpy(&v, buf, 8);
  return v;
}

}  // namespace

void write_ply(const TriangleMesh& mesh, const std::string& path, bool binary) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  bool with_colors = mesh.has_colors();

  out << "ply\nformat " << (binary ? "binary_little_endian" : "ascii") << " 1.0\n";
  out << "element vertex " << mesh.vertices.size() << "\n";
  out << "property float x\nproperty float y\nproperty float z\n";
  if (with_colors)
    out << "property uchar red\nproperty uchar green\nproperty uchar blue\n";
  out << "element face " << mesh.triangles.size() << "\n";
  out << "property list uchar int vertex_indices\n";
  out << "end_header\n";

  if (binary) {
    for (size_t i = 0; i < mesh.vertices.size(); ++i) {
      float xyz[3] = {static_cast<float>(mesh.vertices[i].x()),
                      static_cast<float>(mesh.vertices[i].y()),
                      static_cast<float>(mesh.vertices[i].z())};
      out.write(reinterpret_cast<const char*>(xyz), sizeof(xyz));
      if (with_colors) {
        uint8_t rgb[3] = {to_u8(mesh.colors[i].x()), to_u8(mesh.colors[i].y()),
                          to_u8(mesh.colors[i].z())};
        out.write(reinterpret_cast<const char*>(rgb), sizeof(rgb));
      }
    }
    for (const auto& t : mesh.triangles) {
      uint8_t n = 3;
      int32_t idx[3] = {t[0], t[1], t[2]};
      out.write(reinterpret_cast<const char*>(&n), 1);
      out.write(reinterpret_cast<const char*>(idx), sizeof(idx));
    }
  } else {
    for (size_t i = 0; i < mesh.vertices.size(); ++i) {
      out << static_cast<float>(mesh.vertices[i].x()) << " "
          << static_cast<float>(mesh.vertices[i].y()) << " "
          << static_cast<float>(mesh.vertices[i].z());
      if (with_colors)
        out << " " << int(to_u8(mesh.colors[i].x())) << " " << int(to_u8(mesh.colors[i].y()))
            << " " << int(to_u8(mesh.colors[i].z()));
      out << "\n";
    }
    for (const auto& t : mesh.triangles) out << "3 " << t[0] << " " << t[1] << " " << t[2] << "\n";
  }
  if (!out) throw std::runtime_error("write failed: " + path);
}

TriangleMesh read_ply(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open: " + path);

  std::string line;
  std::getline(in, line);
  if (line.rfind("ply", 0) != 0) throw std::runtime_error("not a ply file: " + path);

  bool binary = false;
  size_t n_vertices = 0, n_faces = 0;
  std::vector<PlyProperty> vertex_props, face_props;
  std::vector<PlyProperty>* current = nullptr;

  while (std::getline(in, line)) {
    std::istringstream ss(line);
    std::string tok;
    ss >> tok;
    if (tok == "format") {
      std::string fmt;
      ss >> fmt;
      if (fmt == "binary_little_endian") binary = true;
      else if (fmt != "ascii") throw std::runtime_error("unsupported ply format: " + fmt);
    } else if (tok == "element") {
      std::string name;
      size_t count;
      ss >> name >> count;
      if (name == "vertex") { n_vertices = count; current = &vertex_props; }
      else if (name == "face") { n_faces = count; current = &face_props; }
      else current = nullptr;
    } else if (tok == "property" && current) {
      PlyProperty prop;
      std::string type;
      ss >> type;
      if (type == "list") {
        prop.is_list = true;
        ss >> prop.count_type >> prop.type >> prop.name;
      } else {
        prop.type = type;
        ss >> prop.name;
      }
      current->push_back(prop);
    } else if (tok == "end_header") {
      break;
    }
  }

  TriangleMesh mesh;
  mesh.vertices.reserve(n_vertices);
  int xi = -1, yi = -1, zi = -1, ri = -1, gi = -1, bi = -1;
  for (size_t i = 0; i < vertex_props.size(); ++i) {
    const std::string& n = vertex_props[i].name;
    if (n == "x") xi = static_cast<int>(i);
    else if (n == "y") yi = static_cast<int>(i);
    else if (n == "z") zi = static_cast<int>(i);
    else if (n == "red") ri = static_cast<int>(i);
    else if (n == "green") gi = static_cast<int>(i);
    else if (n == "blue") bi = static_cast<int>(i);
  }
  if (xi < 0 || yi < 0 || zi < 0) throw std::runtime_error("ply has no xyz vertices: " + path);
  bool with_colors = ri >= 0 && gi >= 0 && bi >= 0;

  std::vector<double> row(vertex_props.size());
  for (size_t v = 0; v < n_vertices; ++v) {
    if (binary) {
      for (size_t p = 0; p < vertex_props.size(); ++p) row[p] = read_scalar(in, vertex_props[p].type);
    } else {
      for (size_t p = 0; p < vertex_props.size(); ++p) in >> row[p];
    }
    mesh.vertices.emplace_back(row[xi], row[yi], row[zi]);
    if (with_colors) mesh.colors.emplace_back(row[ri] / 255.0, row[gi] / 255.0, row[bi] / 255.0);
  }

  mesh.triangles.reserve(n_faces);
  for (size_t f = 0; f < n_faces; ++f) {
    for (const PlyProperty& prop : face_props) {
      size_t count;
      if (binary) {
        count = static_cast<size_t>(read_scalar(in, prop.count_type));
      } else {
        in >> count;
      }
      std::vector<int> idx(count);
      for (size_t i = 0; i < count; ++i) {
        if (binary) idx[i] = static_cast<int>(read_scalar(in, prop.type));
        else in >> idx[i];
      }
      if (prop.name == "vertex_indices" || prop.name == "vertex_index") {
        for (size_t i = 2; i < count; ++i)
          mesh.triangles.push_back({idx[0], idx[i - 1], idx[i]});
      }
    }
  }
  if (!in) throw std::runtime_error("truncated ply: " + path);
  return mesh;
}

}  // namespace objrecon::mesh

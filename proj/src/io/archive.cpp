#include "objrecon/io/archive.hpp"

#include <fstream>
#include <sstream>

namespace objrecon::io {

namespace {

constexpr const char* kMagic = "objrecon-model";
constexpr int kVersion = 1;

void write_tensor(std::ostream& out, const std::vector<double>& values) {
  std::vector<float> f32(values.begin(), values.end());
  out.write(reinterpret_cast<const char*>(f32.data()),
            static_cast<std::streamsize>(f32.size() * sizeof(float)));
}

void read_tensor(std::istream& in, std::vector<double>& values, size_t count) {
  std::vector<float> f32(count);
  in.read(reinterpret_cast<char*>(f32.data()),
          static_cast<std::streamsize>(count * sizeof(float)));
  values.assign(f32.begin(), f32.end());
}

std::string mlp_sizes_line(const field::TinyMlp& mlp) {
  std::ostringstream out;
  for (size_t i = 0; i < mlp.sizes.size(); ++i) out << (i ? " " : "") << mlp.sizes[i];
  return out.str();
}

}  // namespace

void save_model(const field::ObjectModel& model, std::ostream& out, bool with_optimizer_state) {
  auto infos = field::tensor_infos(model);
  auto ptrs = field::tensor_ptrs(model);

  out.precision(17);
  out << kMagic << " v" << kVersion << "\n";
  out << "grid " << model.geo_grid.config.levels << " " << model.geo_grid.config.n0 << " "
      << model.geo_grid.config.gamma << "\n";
  out << "mlp_geo " << mlp_sizes_line(model.geo_mlp) << "\n";
  out << "mlp_col " << mlp_sizes_line(model.col_mlp) << "\n";
  out << "box";
  for (int i = 0; i < 3; ++i) out << " " << model.box.center[i];
  for (int i = 0; i < 3; ++i) out << " " << model.box.extent[i];
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) out << " " << model.box.rotation(r, c);
  out << "\n";
  out << "frozen " << model.frozen_geo_grid << " " << model.frozen_geo_mlp << " "
      << model.frozen_col_grid << " " << model.frozen_col_mlp << "\n";
  out << "optimizer " << (with_optimizer_state ? 1 : 0) << "\n";
  if (with_optimizer_state) {
    out << "steps";
    for (long s : model.opt.steps) out << " " << s;
    out << "\n";
  }
  for (size_t t = 0; t < infos.size(); ++t)
    out << "tensor " << infos[t].name << " " << ptrs[t]->size() << "\n";
  out << "data\n";

  for (const auto* t : ptrs) write_tensor(out, *t);
  if (with_optimizer_state) {
    for (const auto& m : model.opt.m) write_tensor(out, m);
    for (const auto& v : model.opt.v) write_tensor(out, v);
  }
  if (!out) throw std::runtime_error("model archive write failed");
}

void save_model(const field::ObjectModel& model, const std::string& path,
                bool with_optimizer_state) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  save_model(model, out, with_optimizer_state);
}

field::ObjectModel load_model(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line.rfind(kMagic, 0) != 0)
    throw std::runtime_error("not a model archive");

  field::ObjectModel model;
  bool with_optimizer = false;
  std::vector<std::pair<std::string, size_t>> tensor_dir;
  std::vector<long> steps;
  std::vector<int> geo_sizes, col_sizes;

  while (std::getline(in, line)) {
    std::istringstream ss(line);
    std::string tok;
    ss >> tok;
    if (tok == "grid") {
      ss >> model.geo_grid.config.levels >> model.geo_grid.config.n0 >> model.geo_grid.config.gamma;
      model.col_grid.config = model.geo_grid.config;
    } else if (tok == "mlp_geo" || tok == "mlp_col") {
      std::vector<int>& sizes = tok == "mlp_geo" ? geo_sizes : col_sizes;
      int v;
      while (ss >> v) sizes.push_back(v);
    } else if (tok == "box") {
      for (int i = 0; i < 3; ++i) ss >> model.box.center[i];
      for (int i = 0; i < 3; ++i) ss >> model.box.extent[i];
      for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c) ss >> model.box.rotation(r, c);
    } else if (tok == "frozen") {
      ss >> model.frozen_geo_grid >> model.frozen_geo_mlp >> model.frozen_col_grid >>
          model.frozen_col_mlp;
    } else if (tok == "optimizer") {
      int flag;
      ss >> flag;
      with_optimizer = flag != 0;
    } else if (tok == "steps") {
      long s;
      while (ss >> s) steps.push_back(s);
    } else if (tok == "tensor") {
      std::string name;
      size_t count;
      ss >> name >> count;
      tensor_dir.emplace_back(name, count);
    } else if (tok == "data") {
      break;
    } else if (!tok.empty()) {
      throw std::runtime_error("unknown archive header line: " + line);
    }
  }

  if (geo_sizes.size() < 2 || col_sizes.size() < 2)
    throw std::runtime_error("archive missing MLP layer sizes");

  // Rebuild the structure, then overwrite every tensor from the directory.
  auto build_side = [&](field::FeatureGrid& grid, field::TinyMlp& mlp,
                        const std::vector<int>& sizes) {
    grid.levels.resize(grid.config.levels);
    mlp.sizes = sizes;
    mlp.weights.resize(sizes.size() - 1);
    mlp.biases.resize(sizes.size() - 1);
    for (size_t l = 0; l + 1 < sizes.size(); ++l) {
      mlp.weights[l].resize(static_cast<size_t>(sizes[l]) * sizes[l + 1]);
      mlp.biases[l].resize(sizes[l + 1]);
    }
  };
  build_side(model.geo_grid, model.geo_mlp, geo_sizes);
  build_side(model.col_grid, model.col_mlp, col_sizes);

  auto ptrs = field::tensor_ptrs(model);
  auto infos = field::tensor_infos(model);
  if (tensor_dir.size() != ptrs.size())
    throw std::runtime_error("archive tensor directory does not match model structure");
  for (size_t t = 0; t < ptrs.size(); ++t) {
    if (tensor_dir[t].first != infos[t].name)
      throw std::runtime_error("unexpected tensor order in archive: " + tensor_dir[t].first);
    ptrs[t]->resize(tensor_dir[t].second);
    read_tensor(in, *ptrs[t], tensor_dir[t].second);
  }

  // Grid level sizes must agree with the declared config.
  for (int l = 0; l < model.geo_grid.config.levels; ++l) {
    size_t side = model.geo_grid.config.level_side(l);
    if (model.geo_grid.levels[l].size() != side * side * side ||
        model.col_grid.levels[l].size() != side * side * side)
      throw std::runtime_error("archive grid tensor size mismatch");
  }

  model.opt = field::AdamMoments::like(model);
  if (with_optimizer) {
    if (steps.size() != ptrs.size()) throw std::runtime_error("archive step counters mismatch");
    model.opt.steps = steps;
    for (size_t t = 0; t < ptrs.size(); ++t) read_tensor(in, model.opt.m[t], ptrs[t]->size());
    for (size_t t = 0; t < ptrs.size(); ++t) read_tensor(in, model.opt.v[t], ptrs[t]->size());
  }
  if (!in) throw std::runtime_error("model archive truncated");
  return model;
}

field::ObjectModel load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open: " + path);
  return load_model(in);
}

}  // namespace objrecon::io

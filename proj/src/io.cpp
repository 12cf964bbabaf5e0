#include "mpet/io.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <ostream>

#include <json.hpp>

namespace mpet {

std::string format_double(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

void write_matrix_market(std::ostream& out, const SpMat& M, bool symmetric) {
  out << "%%MatrixMarket matrix coordinate real " << (symmetric ? "symmetric" : "general") << "\n";
  long long count = 0;
  for (int k = 0; k < M.outerSize(); ++k)
    for (SpMat::InnerIterator it(M, k); it; ++it)
      if (!symmetric || it.row() >= it.col()) ++count;
  out << M.rows() << " " << M.cols() << " " << count << "\n";
  for (int k = 0; k < M.outerSize(); ++k)
    for (SpMat::InnerIterator it(M, k); it; ++it) {
      if (symmetric && it.row() < it.col()) continue;
      out << (it.row() + 1) << " " << (it.col() + 1) << " " << format_double(it.value()) << "\n";
    }
}

void write_matrix_market_file(const std::string& path, const SpMat& M, bool symmetric) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  write_matrix_market(out, M, symmetric);
}

std::string block_sidecar_json(const BlockSystem& sys) {
  nlohmann::json j;
  j["mesh"] = {sys.mesh.nx, sys.mesh.ny};
  j["networks"] = sys.layout.n;
  j["total_dofs"] = sys.layout.total;
  nlohmann::json blocks = nlohmann::json::array();
  auto add = [&](const std::string& name, int offset, int size) {
    blocks.push_back({{"name", name}, {"offset", offset}, {"size", size}});
  };
  add("u", sys.layout.u(), sys.layout.nb);
  for (int i = 0; i < sys.layout.n; ++i) add("v" + std::to_string(i + 1), sys.layout.v(i), sys.layout.nb);
  add("udot", sys.layout.ud(), sys.layout.nr);
  for (int i = 0; i < sys.layout.n; ++i)
    add("vdot" + std::to_string(i + 1), sys.layout.vd(i), sys.layout.nr);
  for (int i = 0; i < sys.layout.n; ++i) add("p" + std::to_string(i + 1), sys.layout.p(i), sys.layout.np);
  j["blocks"] = blocks;
  j["matrices"] = {{"A", "A.mtx"}, {"W", "W.mtx"}, {"B_uv", "Buv.mtx"}, {"B_p", "Bp.mtx"}};
  return j.dump(2);
}

void export_system(const BlockSystem& sys, const std::string& directory) {
  namespace fs = std::filesystem;
  fs::create_directories(directory);
  write_matrix_market_file(directory + "/A.mtx", sys.A, true);
  write_matrix_market_file(directory + "/W.mtx", sys.W, true);
  write_matrix_market_file(directory + "/Buv.mtx", sys.Buv, true);
  write_matrix_market_file(directory + "/Bp.mtx", sys.Bp, true);
  std::ofstream side(directory + "/blocks.json");
  if (!side) throw std::runtime_error("cannot write sidecar in '" + directory + "'");
  side << block_sidecar_json(sys) << "\n";
}

}  // namespace mpet

#include "orthonet/trajectory_io.hpp"

#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <string>

#include "orthonet/errors.hpp"
#include "orthonet/matrix_io.hpp"

namespace orthonet {

void write_trajectory_csv(std::ostream& out, const Trajectory& trajectory) {
  std::ostringstream buffer;
  buffer.imbue(std::locale::classic());
  buffer << std::setprecision(17);
  buffer << "step,t,loss,generator_norm,max_layer_defect,product_defect\n";
  for (const auto& r : trajectory) {
    buffer << r.step << ',' << r.time << ',' << r.loss << ',' << r.generator_norm << ','
           << r.max_layer_defect << ',' << r.product_defect << '\n';
  }
  out << buffer.str();
}

void save_trajectory_csv(const std::filesystem::path& path, const Trajectory& trajectory) {
  std::ofstream out(path);
  if (!out) throw InvalidInput("cannot write " + path.string());
  write_trajectory_csv(out, trajectory);
}

void save_trajectory_checkpoints(const std::filesystem::path& dir, std::string_view prefix,
                                 const Trajectory& trajectory) {
  std::filesystem::create_directories(dir);
  for (const auto& r : trajectory) {
    save_matrix(dir / (std::string(prefix) + "_" + std::to_string(r.step) + ".txt"),
                r.product.matrix());
  }
}

}  // namespace orthonet

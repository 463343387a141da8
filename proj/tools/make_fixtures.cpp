// Regenerates the mesh files shipped under data/.
#include <cstdio>
#include <filesystem>

#include "shapeflow/generators.hpp"
#include "shapeflow/mesh_io.hpp"

using namespace shapeflow::mesh;

int main(int argc, char** argv) {
  const std::filesystem::path out = argc > 1 ? argv[1] : SHAPEFLOW_DATA_DIR;
  std::filesystem::create_directories(out);
  write_off(out / "disk_2842.off", disk_with_triangles(1.0, 2842));
  write_off(out / "lshape.off", l_shape(16));
  write_off(out / "unit_square.off", unit_square(22));
  write_node_ele(out / "obstacle_channel", rectangle_with_hole(-0.5, 1.5, -0.5, 0.5, -0.2, 0.2, -0.15, 0.15, 0.025));
  write_off(out / "icosphere_r3.off", icosphere(1.0, 3));
  std::printf("fixtures written to %s\n", out.c_str());
  return 0;
}

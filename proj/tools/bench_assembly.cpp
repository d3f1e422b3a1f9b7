// Compares the OpenMP-parallel assembly kernel against the serial reference
// on progressively refined solution spaces, and checks that both produce
// identical matrices.

#include <chrono>
#include <cstdio>
#include <cstring>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "modetrack/discretize.hpp"
#include "modetrack/geometry_io.hpp"

using namespace modetrack;
using Clock = std::chrono::steady_clock;

namespace {

double time_assembly(const GeometryMorph& g, const DiscreteSpace& space,
                     AssemblyMode mode, int reps) {
  double best = 1e300;
  for (int r = 0; r < reps; ++r) {
    const auto t0 = Clock::now();
    const MatrixPencil p = assemble_pencil(g, 0.5, space, 0, mode);
    const auto t1 = Clock::now();
    best = std::min(best, std::chrono::duration<double>(t1 - t0).count());
    if (p.dim() == 0) std::abort();
  }
  return best;
}

}  // namespace

int main(int argc, char** argv) {
  const char* fixture_path =
      argc > 1 ? argv[1] : "fixtures/ellipse_to_disk.json";
  const GeometryFixture fixture = load_geometry_fixture(fixture_path);

#ifdef _OPENMP
  std::printf("OpenMP threads: %d\n", omp_get_max_threads());
#else
  std::printf("built without OpenMP; parallel mode falls back to serial\n");
#endif
  std::printf("%-8s %-8s %12s %12s %8s %10s\n", "levels", "DoFs", "serial[s]",
              "parallel[s]", "speedup", "identical");

  for (int levels = 0; levels <= 3; ++levels) {
    const DiscreteSpace space = DiscreteSpace::from_geometry(
        fixture.morph, BoundaryCondition::Dirichlet, levels);
    const int reps = levels >= 3 ? 1 : 3;
    const double ts =
        time_assembly(fixture.morph, space, AssemblyMode::Serial, reps);
    const double tp =
        time_assembly(fixture.morph, space, AssemblyMode::Parallel, reps);

    const MatrixPencil a =
        assemble_pencil(fixture.morph, 0.5, space, 0, AssemblyMode::Serial);
    const MatrixPencil b =
        assemble_pencil(fixture.morph, 0.5, space, 0, AssemblyMode::Parallel);
    const bool same = std::memcmp(a.K.data(), b.K.data(),
                                  sizeof(double) * a.K.size()) == 0 &&
                      std::memcmp(a.M.data(), b.M.data(),
                                  sizeof(double) * a.M.size()) == 0;

    std::printf("%-8d %-8d %12.4f %12.4f %8.2f %10s\n", levels,
                space.num_active(), ts, tp, ts / tp, same ? "yes" : "NO");
  }
  return 0;
}

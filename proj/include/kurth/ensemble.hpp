#ifndef KURTH_ENSEMBLE_HPP
#define KURTH_ENSEMBLE_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <random>
#include <vector>

#include "kurth/moments.hpp"

namespace kurth {

// 53-bit uniform deviate in [0, 1); independent of library distribution code,
// so streams are reproducible across standard libraries
inline double uniform01(std::mt19937_64& g) {
  return static_cast<double>(g() >> 11) * 0x1.0p-53;
}

// Cartesian phase-space point with the invariants of the radial state
// (|x| = r, x.v = r p_r, |x ^ v|^2 = beta) and a random orientation
PhaseVec embed_isotropic(const RadialState& s, std::mt19937_64& g);

// Radial phase-space ensemble: per-particle (r, p_r, beta) with weights
// summing to total_mass. beta is an exact invariant of the dynamics.
struct ParticleEnsemble {
  Eigen::ArrayXd r, p_r, beta, w;
  double total_mass = 1.0;
  std::uint64_t seed = 0;
  Eigen::Index size() const { return r.size(); }
};

// Exact sampler of the steady model, layered through closed-form marginals:
// r cubic in a uniform deviate, p_r a scaled semicircle, beta by inversion of
// its conditional law. Deterministic for a given seed.
ParticleEnsemble sample_kurth(Eigen::Index n, std::uint64_t seed);

// initial conditions of the family member at t = 0: a steady sample pushed
// through the inverse rescaling, p_r -> p_r + eps r
ParticleEnsemble sample_family_initial(double eps, Eigen::Index n,
                                       std::uint64_t seed);

struct PushPolicy {
  bool subcycle = false;  // per-particle adaptive substeps near the centre
  double eta = 0.05;      // max fractional radius change per substep
  int max_substeps = 4096;
  int threads = 1;
};

// One kick-drift-kick step of size dt for every particle in the frozen field;
// orbits reflect at the centre: (r, p_r) -> (-r, -p_r). With policy.subcycle
// a particle whose radius would change by more than policy.eta per substep is
// advanced in shorter substeps of its own.
void push_particles(ParticleEnsemble& ens, const RadialField& field, double dt,
                    const PushPolicy& policy = {});

struct PicConfig {
  double dt = 1e-3;
  long steps = 1000;
  int grid_cells = 256;
  double grid_max = 3.0;
  long snapshot_every = 0;  // 0: keep only the first and last states
  PushPolicy policy{true, 0.05, 4096, 1};
};

struct PicSnapshot {
  double t = 0.0;
  Eigen::ArrayXd r;  // particle radii
  double kinetic = 0.0, potential = 0.0;
};

struct PicResult {
  std::vector<PicSnapshot> snapshots;
  Eigen::ArrayXd grid;
};

// Self-consistent loop: bin shell masses on the mesh, rebuild the enclosed-mass
// field, push. The ensemble is advanced in place through steps * dt.
PicResult evolve_selfconsistent(ParticleEnsemble& ens, const PicConfig& cfg);

// mass per mesh cell (cell j spans [grid[j], grid[j+1])); mass beyond the mesh
// is dropped from the field
Eigen::ArrayXd bin_cell_mass(const ParticleEnsemble& ens,
                             const Eigen::ArrayXd& grid);

// cloud-in-cell density at the mesh nodes; node masses are divided by the
// exact shell volume of each tent function, so a uniform distribution is
// reproduced without bias
Eigen::ArrayXd deposit_density(const ParticleEnsemble& ens,
                               const Eigen::ArrayXd& grid);

// smallest radius enclosing fraction q of the total weight
double radius_percentile(const ParticleEnsemble& ens, double q);
double radius_percentile(const Eigen::ArrayXd& r, double q);

// exact 1-Wasserstein distance between two empirical distributions with
// uniform weights (sizes may differ)
double w1_distance(const Eigen::ArrayXd& a, const Eigen::ArrayXd& b);

double kinetic_energy(const ParticleEnsemble& ens);
// exact pairwise shell potential energy, O(n log n)
double potential_energy(const ParticleEnsemble& ens);

}  // namespace kurth

#endif

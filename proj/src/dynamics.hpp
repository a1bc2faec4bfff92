#pragma once

#include <array>
#include <vector>

#include <Eigen/Core>

#include "actuation.hpp"
#include "robot_model.hpp"

namespace vibrosheet {

struct ContactParams {
  double normal_stiffness = 5000.0;  // N/m
  double normal_damping = 5.0;       // N*s/m
  double friction = 0.36;            // mu, marble tile measurement
  double stiction_velocity = 1e-3;   // m/s, Coulomb regularization knee
};

struct IntegratorParams {
  double dt = 1e-4;      // s, semi-implicit Euler step
  double gravity = 9.8;  // m/s^2, downward
};

struct SimProtocol {
  double transient_s = 5.0;  // settle to periodic steady state
  double measure_s = 5.0;    // velocity measurement window
  int sample_stride = 10;    // trajectory sample every N steps
};

// Reduced coordinates: q = [x_com, z_com, phi0, alpha_1 .. alpha_{n-1}]
// where (x_com, z_com) is the whole-body center of mass, phi0 the absolute
// angle of link 0, and alpha_j the joint deflection between links j and
// j+1. Positive alpha arches the body upward (concave down), the direction
// a positive drive voltage bends it. Chain connectivity is exact by
// construction. Anchoring the translational dofs at the center of mass
// keeps the mirror reflection of a symmetric robot an affine map on q, so
// the fixed-step integrator commutes with it; anchoring at a link end would
// break left/right antisymmetry at O(dt).
struct BodyState {
  Eigen::VectorXd q;
  Eigen::VectorXd v;
  double time = 0.0;
};

struct FootSample {
  double x = 0.0;           // contact point world x
  double normal = 0.0;      // N
  double tangential = 0.0;  // N
};

struct TrajectorySample {
  double t = 0.0;
  double x_com = 0.0;
  double z_com = 0.0;
  Eigen::VectorXd q;
  Eigen::VectorXd v;
  std::array<FootSample, 2> feet;
};

struct Trajectory {
  std::vector<TrajectorySample> samples;
  int n_links = 0;
  double dt = 0.0;
  int sample_stride = 0;
  double transient_s = 0.0;
  double measure_s = 0.0;
};

// tau = -k*theta - b*omega + g_v * V
double joint_torque(double theta, double omega, double voltage,
                    const MaterialParams& materials);

class ChainDynamics {
 public:
  ChainDynamics(const ChainModel& chain, const ContactParams& contact,
                const IntegratorParams& integ);

  // Flat pose, feet bottoms exactly on the ground, zero velocity.
  BodyState initial_state() const;

  // One semi-implicit Euler step; throws NumericalBlowup on divergence.
  void step(BodyState& state, const ActuationPattern& pattern);

  // Per-foot (normal, tangential) force in the given state.
  std::vector<std::pair<double, double>> contact_forces(const BodyState& state) const;
  std::vector<FootSample> foot_samples(const BodyState& state) const;

  // Generalized mass matrix at the given configuration; the kinetic energy
  // is exactly 0.5 * v' M v.
  Eigen::MatrixXd mass_matrix(const BodyState& state) const;

  double com_x(const BodyState& state) const;
  double com_z(const BodyState& state) const;
  // Kinetic + gravitational + joint elastic + contact penalty energy.
  double total_energy(const BodyState& state) const;
  std::vector<double> link_angles(const BodyState& state) const;
  // World positions of the n+1 link endpoints.
  std::vector<std::array<double, 2>> link_endpoints(const BodyState& state) const;

  int dof() const { return ndof_; }
  int links() const { return n_links_; }
  double total_mass() const { return total_mass_; }

 private:
  struct Kinematics;
  void compute_kinematics(const BodyState& state, Kinematics& kin) const;
  void build_mass(const Kinematics& kin, Eigen::MatrixXd& M) const;
  double channel_voltage(int channel, double t, const ActuationPattern& p) const;

  const ChainModel chain_;
  ContactParams contact_;
  IntegratorParams integ_;
  int n_links_;
  int ndof_;
  double total_mass_;
  // Per-link composites: rod plus any feet riding on it.
  std::vector<double> comp_mass_;
  std::vector<Eigen::Vector2d> comp_com_;  // link frame, origin at low-x end
  std::vector<double> comp_inertia_;
};

// Full run from the flat resting pose over transient + measurement windows.
Trajectory simulate(const ChainModel& chain, const ActuationPattern& pattern,
                    const SimProtocol& protocol, const IntegratorParams& integ,
                    const ContactParams& contact);

// Mean COM velocity over an integer number of periods after the transient,
// leftward positive. Requires >= 10 periods in the window (WindowTooShort).
double steady_state_velocity(const Trajectory& traj,
                             const ActuationPattern& pattern);

// Joint angles minimizing elastic energy minus voltage work (no gravity or
// contact): theta_i = g_v * V(channel) / k. Oracle for the damped long-time
// limit of the dynamic solver.
std::vector<double> static_equilibrium(const ChainModel& chain, double v_left,
                                       double v_right);

void write_trajectory_csv(const Trajectory& traj, const ChainModel& chain,
                          const std::string& path);

}  // namespace vibrosheet

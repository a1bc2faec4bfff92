#include "dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <Eigen/Cholesky>

#include "error.hpp"
#include "numfmt.hpp"

namespace vibrosheet {

double joint_torque(double theta, double omega, double voltage,
                    const MaterialParams& materials) {
  return -materials.torsional_stiffness * theta -
         materials.joint_damping * omega +
         materials.voltage_torque_gain * voltage;
}

namespace {
inline Eigen::Vector2d perp(const Eigen::Vector2d& a) {
  return {-a.y(), a.x()};
}
}  // namespace

struct ChainDynamics::Kinematics {
  std::vector<double> phi, phid;
  std::vector<Eigen::Vector2d> p;   // n+1 link endpoints
  std::vector<Eigen::Vector2d> S;   // prefix sums of l*perp(u)
  std::vector<Eigen::Vector2d> Vp;  // prefix sums of phid*l*perp(u)
  std::vector<Eigen::Vector2d> B;   // prefix sums of phid^2*l*u
  std::vector<Eigen::Vector2d> rc;  // world offset endpoint -> composite COM
  std::vector<Eigen::Vector2d> c;   // composite COM positions
  // Mass-weighted means over link COMs: any point Jacobian column in COM
  // coordinates is its link-anchored column minus the matching mean.
  Eigen::Vector2d Ebar;               // phi0 column of the COM
  std::vector<Eigen::Vector2d> Ca;    // alpha_a columns of the COM
  Eigen::Vector2d W;                  // COM velocity from angle motion alone
  Eigen::Vector2d Abar;               // mass-mean of B[i] + phid_i^2 rc[i]

  void resize(int n) {
    phi.resize(n);
    phid.resize(n);
    p.resize(n + 1);
    S.resize(n + 1);
    Vp.resize(n + 1);
    B.resize(n + 1);
    rc.resize(n);
    c.resize(n);
    Ca.resize(n > 0 ? n - 1 : 0);
  }
};

ChainDynamics::ChainDynamics(const ChainModel& chain,
                             const ContactParams& contact,
                             const IntegratorParams& integ)
    : chain_(chain), contact_(contact), integ_(integ) {
  n_links_ = static_cast<int>(chain_.links.size());
  ndof_ = n_links_ + 2;
  total_mass_ = chain_.total_mass;

  // Fold each foot into its host link as a point mass.
  comp_mass_.resize(n_links_);
  comp_com_.resize(n_links_);
  comp_inertia_.resize(n_links_);
  for (int k = 0; k < n_links_; ++k) {
    const auto& l = chain_.links[k];
    double m = l.mass;
    Eigen::Vector2d com(l.length / 2.0, 0.0);
    com *= m;
    for (const auto& f : chain_.feet)
      if (f.host_link == k) {
        m += f.mass;
        com += f.mass * Eigen::Vector2d(f.local_x, f.local_z);
      }
    com /= m;
    double inertia =
        l.inertia +
        l.mass * (Eigen::Vector2d(l.length / 2.0, 0.0) - com).squaredNorm();
    for (const auto& f : chain_.feet)
      if (f.host_link == k)
        inertia +=
            f.mass * (Eigen::Vector2d(f.local_x, f.local_z) - com).squaredNorm();
    comp_mass_[k] = m;
    comp_com_[k] = com;
    comp_inertia_[k] = inertia;
  }
}

BodyState ChainDynamics::initial_state() const {
  BodyState s;
  s.q = Eigen::VectorXd::Zero(ndof_);
  s.v = Eigen::VectorXd::Zero(ndof_);
  // Flat pose with every foot bottom exactly on the ground plane, expressed
  // through the COM translational dofs.
  double x = 0.0, sx = 0.0, sy = 0.0;
  for (int i = 0; i < n_links_; ++i) {
    sx += comp_mass_[i] * (x + comp_com_[i].x());
    sy += comp_mass_[i] * comp_com_[i].y();
    x += chain_.links[i].length;
  }
  s.q[0] = sx / total_mass_;
  s.q[1] = chain_.foot_height + sy / total_mass_;
  s.time = 0.0;
  return s;
}

void ChainDynamics::compute_kinematics(const BodyState& state,
                                       Kinematics& kin) const {
  kin.resize(n_links_);
  const auto& q = state.q;
  const auto& v = state.v;
  double phi = q[2];
  double phid = v[2];
  kin.p[0].setZero();  // link-0 anchored; shifted to the COM frame below
  kin.S[0].setZero();
  kin.Vp[0].setZero();
  kin.B[0].setZero();
  for (int i = 0; i < n_links_; ++i) {
    if (i > 0) {
      // positive joint angle arches the body upward: phi decreases along
      // the chain
      phi -= q[3 + i - 1];
      phid -= v[3 + i - 1];
    }
    kin.phi[i] = phi;
    kin.phid[i] = phid;
    double l = chain_.links[i].length;
    Eigen::Vector2d u(std::cos(phi), std::sin(phi));
    Eigen::Vector2d w = l * perp(u);
    kin.p[i + 1] = kin.p[i] + l * u;
    kin.S[i + 1] = kin.S[i] + w;
    kin.Vp[i + 1] = kin.Vp[i] + phid * w;
    kin.B[i + 1] = kin.B[i] + phid * phid * l * u;
    Eigen::Matrix2d R;
    R << u.x(), -u.y(), u.y(), u.x();
    kin.rc[i] = R * comp_com_[i];
    kin.c[i] = kin.p[i] + kin.rc[i];
  }

  // Mass-weighted means that turn link-anchored Jacobian columns and bias
  // terms into COM-frame ones.
  Eigen::Vector2d relcom = Eigen::Vector2d::Zero();
  kin.Ebar.setZero();
  kin.W.setZero();
  kin.Abar.setZero();
  for (int i = 0; i < n_links_; ++i) {
    double m = comp_mass_[i];
    relcom += m * kin.c[i];
    kin.Ebar += m * (kin.S[i] + perp(kin.rc[i]));
    kin.W += m * (kin.Vp[i] + kin.phid[i] * perp(kin.rc[i]));
    kin.Abar += m * (kin.B[i] + kin.phid[i] * kin.phid[i] * kin.rc[i]);
  }
  relcom /= total_mass_;
  kin.Ebar /= total_mass_;
  kin.W /= total_mass_;
  kin.Abar /= total_mass_;
  // Ca[a] = mass-mean of the alpha_a column, suffix sums since only links
  // past joint a feel it.
  Eigen::Vector2d mE = Eigen::Vector2d::Zero();
  double msuf = 0.0;
  for (int a = n_links_ - 2; a >= 0; --a) {
    int i = a + 1;
    double m = comp_mass_[i];
    mE += m * (kin.S[i] + perp(kin.rc[i]));
    msuf += m;
    kin.Ca[a] = (msuf * kin.S[a + 1] - mE) / total_mass_;
  }

  // Place the chain so the stored COM coordinates are honored.
  Eigen::Vector2d shift = Eigen::Vector2d(q[0], q[1]) - relcom;
  for (auto& p : kin.p) p += shift;
  for (auto& c : kin.c) c += shift;
}

double ChainDynamics::channel_voltage(int channel, double t,
                                      const ActuationPattern& p) const {
  Channel side =
      chain_.channel_is_left[channel] ? Channel::Left : Channel::Right;
  return voltage_at(p, side, t);
}

void ChainDynamics::build_mass(const Kinematics& kin,
                               Eigen::MatrixXd& M) const {
  M = Eigen::MatrixXd::Zero(ndof_, ndof_);
  Eigen::MatrixXd J(2, ndof_);
  Eigen::VectorXd grow(ndof_);
  for (int i = 0; i < n_links_; ++i) {
    Eigen::Vector2d E = kin.S[i] + perp(kin.rc[i]);
    // Translational part from the link COM Jacobian (COM frame), rotational
    // part from the (0/1) angle-selector row.
    J.col(0) = Eigen::Vector2d(1.0, 0.0);
    J.col(1) = Eigen::Vector2d(0.0, 1.0);
    J.col(2) = E - kin.Ebar;
    for (int a = 0; a < n_links_ - 1; ++a)
      J.col(3 + a) = (a < i ? (kin.S[a + 1] - E).eval()
                            : Eigen::Vector2d::Zero().eval()) -
                     kin.Ca[a];
    M.noalias() += comp_mass_[i] * J.transpose() * J;
    grow.setZero();
    grow[2] = 1.0;
    for (int a = 0; a < i; ++a) grow[3 + a] = -1.0;
    M.noalias() += comp_inertia_[i] * grow * grow.transpose();
  }
}

Eigen::MatrixXd ChainDynamics::mass_matrix(const BodyState& state) const {
  Kinematics kin;
  compute_kinematics(state, kin);
  Eigen::MatrixXd M;
  build_mass(kin, M);
  return M;
}

void ChainDynamics::step(BodyState& state, const ActuationPattern& pattern) {
  static thread_local Kinematics kin;
  compute_kinematics(state, kin);
  const auto& q = state.q;
  const auto& v = state.v;
  const double g = integ_.gravity;

  Eigen::MatrixXd M;
  build_mass(kin, M);
  Eigen::VectorXd Q = Eigen::VectorXd::Zero(ndof_);

  // Applies generalized force J_point^T f for a point riding link i whose
  // link-anchored Jacobian angle columns are E (phi0) and S[a+1]-E
  // (alpha_a, a<i); the COM-frame correction subtracts the mass means.
  auto add_point_force = [&](int i, const Eigen::Vector2d& E,
                             const Eigen::Vector2d& f) {
    Q[0] += f.x();
    Q[1] += f.y();
    Q[2] += (E - kin.Ebar).dot(f);
    for (int a = 0; a < n_links_ - 1; ++a)
      Q[3 + a] += ((a < i ? (kin.S[a + 1] - E).eval()
                          : Eigen::Vector2d::Zero().eval()) -
                   kin.Ca[a])
                      .dot(f);
  };

  for (int i = 0; i < n_links_; ++i) {
    double m = comp_mass_[i];
    Eigen::Vector2d E = kin.S[i] + perp(kin.rc[i]);
    // Gravity and the centripetal bias -J^T (Jdot v).
    Eigen::Vector2d f =
        m * (kin.B[i] + kin.phid[i] * kin.phid[i] * kin.rc[i] - kin.Abar);
    f.y() -= m * g;
    add_point_force(i, E, f);
  }

  // Joint spring and voltage torques act directly on the relative
  // coordinates. The damper is folded into the solve below and evaluated at
  // the end-of-step velocity; the effective modal mass of the sharpest
  // bending mode is tiny, so an explicit damper term would be unstable at
  // any practical dt.
  for (int j = 0; j < n_links_ - 1; ++j) {
    const auto& jp = chain_.joints[j];
    double V = channel_voltage(jp.channel, state.time, pattern);
    Q[3 + j] += -jp.stiffness * q[3 + j] + jp.voltage_gain * V;
  }

  // Penalty contact with regularized Coulomb friction at the foot cylinders.
  for (const auto& foot : chain_.feet) {
    int h = foot.host_link;
    double phi = kin.phi[h];
    Eigen::Matrix2d R;
    R << std::cos(phi), -std::sin(phi), std::sin(phi), std::cos(phi);
    Eigen::Vector2d rd = R * Eigen::Vector2d(foot.local_x, foot.local_z);
    Eigen::Vector2d center = kin.p[h] + rd;
    double pen = foot.radius - center.y();
    if (pen <= 0.0) continue;
    Eigen::Vector2d cdot = Eigen::Vector2d(v[0], v[1]) - kin.W + kin.Vp[h] +
                           kin.phid[h] * perp(rd);
    double N = contact_.normal_stiffness * pen +
               contact_.normal_damping * (-cdot.y());
    if (N <= 0.0) continue;
    // Contact point is the cylinder bottom; its world offset from the
    // center is constant (0, -r), but the material point still spins with
    // the link, hence the phid*r term and the (r, 0) Jacobian correction.
    double vt = cdot.x() + kin.phid[h] * foot.radius;
    double sat = std::clamp(vt / contact_.stiction_velocity, -1.0, 1.0);
    double Ft = -contact_.friction * N * sat;
    Eigen::Vector2d E =
        kin.S[h] + perp(rd) + Eigen::Vector2d(foot.radius, 0.0);
    add_point_force(h, E, Eigen::Vector2d(Ft, N));
  }

  // (M + dt*B) v' = M v + dt*Q, with B the diagonal joint damping.
  Eigen::MatrixXd A = M;
  for (int j = 0; j < n_links_ - 1; ++j)
    A(3 + j, 3 + j) += integ_.dt * chain_.joints[j].damping;
  state.v = A.ldlt().solve(M * v + integ_.dt * Q);
  state.q += integ_.dt * state.v;
  state.time += integ_.dt;

  if (!state.q.allFinite() || !state.v.allFinite() ||
      state.q.head<2>().cwiseAbs().maxCoeff() > 1e3) {
    std::ostringstream msg;
    msg << "numerical blowup at t=" << state.time << " s (reduce dt)";
    fail(ErrorCode::NumericalBlowup, msg.str());
  }
}

std::vector<std::pair<double, double>> ChainDynamics::contact_forces(
    const BodyState& state) const {
  Kinematics kin;
  compute_kinematics(state, kin);
  std::vector<std::pair<double, double>> out;
  for (const auto& foot : chain_.feet) {
    int h = foot.host_link;
    double phi = kin.phi[h];
    Eigen::Matrix2d R;
    R << std::cos(phi), -std::sin(phi), std::sin(phi), std::cos(phi);
    Eigen::Vector2d rd = R * Eigen::Vector2d(foot.local_x, foot.local_z);
    Eigen::Vector2d center = kin.p[h] + rd;
    double pen = foot.radius - center.y();
    if (pen <= 0.0) {
      out.emplace_back(0.0, 0.0);
      continue;
    }
    Eigen::Vector2d cdot = Eigen::Vector2d(state.v[0], state.v[1]) - kin.W +
                           kin.Vp[h] + kin.phid[h] * perp(rd);
    double N = std::max(0.0, contact_.normal_stiffness * pen +
                                 contact_.normal_damping * (-cdot.y()));
    double vt = cdot.x() + kin.phid[h] * foot.radius;
    double sat = std::clamp(vt / contact_.stiction_velocity, -1.0, 1.0);
    double Ft = N > 0.0 ? -contact_.friction * N * sat : 0.0;
    out.emplace_back(N, Ft);
  }
  return out;
}

std::vector<FootSample> ChainDynamics::foot_samples(
    const BodyState& state) const {
  Kinematics kin;
  compute_kinematics(state, kin);
  auto forces = contact_forces(state);
  std::vector<FootSample> out;
  for (size_t fi = 0; fi < chain_.feet.size(); ++fi) {
    const auto& foot = chain_.feet[fi];
    int h = foot.host_link;
    double phi = kin.phi[h];
    Eigen::Matrix2d R;
    R << std::cos(phi), -std::sin(phi), std::sin(phi), std::cos(phi);
    Eigen::Vector2d center =
        kin.p[h] + R * Eigen::Vector2d(foot.local_x, foot.local_z);
    FootSample s;
    s.x = center.x();  // contact point sits straight below the center
    s.normal = forces[fi].first;
    s.tangential = forces[fi].second;
    out.push_back(s);
  }
  return out;
}

double ChainDynamics::com_x(const BodyState& state) const { return state.q[0]; }

double ChainDynamics::com_z(const BodyState& state) const { return state.q[1]; }

double ChainDynamics::total_energy(const BodyState& state) const {
  Kinematics kin;
  compute_kinematics(state, kin);
  const auto& v = state.v;
  double ke = 0.0;
  for (int i = 0; i < n_links_; ++i) {
    Eigen::Vector2d cdot = Eigen::Vector2d(v[0], v[1]) - kin.W + kin.Vp[i] +
                           kin.phid[i] * perp(kin.rc[i]);
    ke += 0.5 * comp_mass_[i] * cdot.squaredNorm() +
          0.5 * comp_inertia_[i] * kin.phid[i] * kin.phid[i];
  }
  double pe = 0.0;
  for (int i = 0; i < n_links_; ++i)
    pe += comp_mass_[i] * integ_.gravity * kin.c[i].y();
  double elastic = 0.0;
  for (int j = 0; j < n_links_ - 1; ++j)
    elastic += 0.5 * chain_.joints[j].stiffness * state.q[3 + j] * state.q[3 + j];
  double penalty = 0.0;
  for (const auto& foot : chain_.feet) {
    int h = foot.host_link;
    double phi = kin.phi[h];
    Eigen::Matrix2d R;
    R << std::cos(phi), -std::sin(phi), std::sin(phi), std::cos(phi);
    Eigen::Vector2d center =
        kin.p[h] + R * Eigen::Vector2d(foot.local_x, foot.local_z);
    double pen = std::max(0.0, foot.radius - center.y());
    penalty += 0.5 * contact_.normal_stiffness * pen * pen;
  }
  return ke + pe + elastic + penalty;
}

std::vector<double> ChainDynamics::link_angles(const BodyState& state) const {
  Kinematics kin;
  compute_kinematics(state, kin);
  return kin.phi;
}

std::vector<std::array<double, 2>> ChainDynamics::link_endpoints(
    const BodyState& state) const {
  Kinematics kin;
  compute_kinematics(state, kin);
  std::vector<std::array<double, 2>> out;
  for (const auto& p : kin.p) out.push_back({p.x(), p.y()});
  return out;
}

Trajectory simulate(const ChainModel& chain, const ActuationPattern& pattern,
                    const SimProtocol& protocol, const IntegratorParams& integ,
                    const ContactParams& contact) {
  check_pattern(pattern);
  ChainDynamics dyn(chain, contact, integ);
  BodyState state = dyn.initial_state();

  Trajectory traj;
  traj.n_links = dyn.links();
  traj.dt = integ.dt;
  traj.sample_stride = protocol.sample_stride;
  traj.transient_s = protocol.transient_s;
  traj.measure_s = protocol.measure_s;

  auto record = [&]() {
    TrajectorySample s;
    s.t = state.time;
    s.x_com = dyn.com_x(state);
    s.z_com = dyn.com_z(state);
    s.q = state.q;
    s.v = state.v;
    auto feet = dyn.foot_samples(state);
    for (size_t i = 0; i < feet.size() && i < s.feet.size(); ++i)
      s.feet[i] = feet[i];
    traj.samples.push_back(std::move(s));
  };

  long steps = std::lround((protocol.transient_s + protocol.measure_s) / integ.dt);
  record();
  for (long k = 1; k <= steps; ++k) {
    dyn.step(state, pattern);
    if (k % protocol.sample_stride == 0) record();
  }
  return traj;
}

double steady_state_velocity(const Trajectory& traj,
                             const ActuationPattern& pattern) {
  double T = pattern.period();
  long n_periods = static_cast<long>(std::floor(traj.measure_s / T + 1e-9));
  if (n_periods < 10)
    fail(ErrorCode::WindowTooShort,
         "measurement window holds " + std::to_string(n_periods) +
             " periods; need >= 10");
  if (traj.samples.size() < 2)
    fail(ErrorCode::WindowTooShort, "trajectory has fewer than two samples");
  double sample_dt = traj.dt * traj.sample_stride;
  double t0 = traj.transient_s;
  double t1 = t0 + n_periods * T;
  auto idx = [&](double t) {
    long i = std::lround(t / sample_dt);
    return std::clamp<long>(i, 0, static_cast<long>(traj.samples.size()) - 1);
  };
  const auto& s0 = traj.samples[idx(t0)];
  const auto& s1 = traj.samples[idx(t1)];
  if (!(s1.t > s0.t))
    fail(ErrorCode::WindowTooShort, "degenerate measurement window");
  return (s1.x_com - s0.x_com) / (s1.t - s0.t);
}

std::vector<double> static_equilibrium(const ChainModel& chain, double v_left,
                                       double v_right) {
  std::vector<double> angles;
  angles.reserve(chain.joints.size());
  for (const auto& j : chain.joints) {
    double V = chain.channel_is_left[j.channel] ? v_left : v_right;
    angles.push_back(j.voltage_gain * V / j.stiffness);
  }
  return angles;
}

void write_trajectory_csv(const Trajectory& traj, const ChainModel& chain,
                          const std::string& path) {
  ChainDynamics dyn(chain, ContactParams{}, IntegratorParams{});
  std::string out = "t,x_com,z_com";
  for (int i = 1; i <= traj.n_links; ++i)
    out += ",theta_" + std::to_string(i);
  out += ",foot1_x,foot1_N,foot1_Ft,foot2_x,foot2_N,foot2_Ft\n";
  for (const auto& s : traj.samples) {
    out += format_num(s.t);
    out += ',' + format_num(s.x_com);
    out += ',' + format_num(s.z_com);
    BodyState st{s.q, s.v, s.t};
    for (double a : dyn.link_angles(st)) out += ',' + format_num(a);
    for (const auto& f : s.feet) {
      out += ',' + format_num(f.x);
      out += ',' + format_num(f.normal);
      out += ',' + format_num(f.tangential);
    }
    out += '\n';
  }
  write_file_atomic(path, out);
}

}  // namespace vibrosheet

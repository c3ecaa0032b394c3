#include "omav/telemetry.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace omav {

namespace {

void add_vector(std::vector<std::string>& cols, const std::string& name, int n) {
  for (int i = 0; i < n; ++i) cols.push_back(name + "_" + std::to_string(i + 1));
}

// 17 significant digits round-trip every double
void put(std::string& line, double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  if (!line.empty()) line += ',';
  line += buf;
}

template <typename Derived>
void put(std::string& line, const Eigen::MatrixBase<Derived>& v) {
  for (Eigen::Index i = 0; i < v.size(); ++i) put(line, v(i));
}

void write_header(std::ostream& os, const std::vector<std::string>& cols) {
  for (std::size_t i = 0; i < cols.size(); ++i) os << (i ? "," : "") << cols[i];
  os << '\n';
}

template <typename Derived>
std::vector<double> to_list(const Eigen::MatrixBase<Derived>& v) {
  return std::vector<double>(v.derived().data(), v.derived().data() + v.size());
}

nlohmann::json optional_number(const std::optional<double>& v) {
  return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

}  // namespace

std::vector<std::string> telemetry_columns() {
  std::vector<std::string> c{"t"};
  add_vector(c, "e_phi", 3);
  add_vector(c, "e_p", 3);
  add_vector(c, "V", 6);
  add_vector(c, "q", 6);
  add_vector(c, "qd", 6);
  add_vector(c, "q5", 2);
  add_vector(c, "f", 4);
  add_vector(c, "u_v", 2);
  add_vector(c, "beta", 6);
  c.push_back("sum_f");
  c.push_back("det_D2");
  c.push_back("cond_D2");
  add_vector(c, "v", 6);
  add_vector(c, "w", 6);
  return c;
}

std::vector<std::string> zero_dynamics_columns() {
  std::vector<std::string> c{"t"};
  add_vector(c, "q", 6);
  add_vector(c, "qd", 6);
  add_vector(c, "V", 6);
  add_vector(c, "z", 4);
  add_vector(c, "q5", 2);
  c.push_back("lyapunov");
  c.push_back("bound_ok");
  return c;
}

void write_telemetry_csv(std::ostream& os, const std::vector<TelemetryRecord>& records) {
  write_header(os, telemetry_columns());
  std::string line;
  for (const TelemetryRecord& r : records) {
    line.clear();
    put(line, r.t);
    put(line, r.e_phi);
    put(line, r.e_p);
    put(line, r.V);
    put(line, r.q);
    put(line, r.qd);
    put(line, r.q5);
    put(line, r.f);
    put(line, r.u_v);
    put(line, r.beta);
    put(line, r.sum_f);
    put(line, r.det_D2);
    put(line, r.cond_D2);
    put(line, r.v);
    put(line, r.w);
    os << line << '\n';
  }
}

void write_zero_dynamics_csv(std::ostream& os, const std::vector<ZeroDynamicsRecord>& records) {
  write_header(os, zero_dynamics_columns());
  std::string line;
  for (const ZeroDynamicsRecord& r : records) {
    line.clear();
    put(line, r.t);
    put(line, r.q);
    put(line, r.qd);
    put(line, r.V);
    put(line, r.z);
    put(line, r.q5);
    put(line, r.lyapunov);
    line += r.bound_ok ? ",1" : ",0";
    os << line << '\n';
  }
}

nlohmann::json summary_json(const RunSummary& s) {
  nlohmann::json j;
  j["completed"] = s.completed;
  j["abort_reason"] = s.abort_reason;
  j["abort_time"] = optional_number(s.abort_time);
  j["seed"] = s.seed;
  j["final_sum_f"] = s.final_sum_f;
  j["min_abs_det_D2"] = s.min_abs_det_D2;
  j["max_cond_D2"] = s.max_cond_D2;
  j["phases"] = nlohmann::json::array();
  for (const PhaseSummary& ph : s.phases) {
    j["phases"].push_back({{"t_start", ph.t_start},
                           {"t_end", ph.t_end},
                           {"final_e_p", ph.final_e_p},
                           {"final_e_phi", ph.final_e_phi},
                           {"mean_e_p_last5", ph.mean_e_p_last5},
                           {"mean_e_phi_last5", ph.mean_e_phi_last5},
                           {"mean_sum_f_last5", ph.mean_sum_f_last5},
                           {"settling_time", optional_number(ph.settling_time)}});
  }
  return j;
}

nlohmann::json zero_dynamics_json(const ZeroDynamicsResult& r) {
  nlohmann::json j;
  j["completed"] = r.completed;
  j["abort_reason"] = r.abort_reason;
  j["max_V_norm"] = r.max_V_norm;
  if (!r.records.empty()) {
    const ZeroDynamicsRecord& last = r.records.back();
    j["t_end"] = last.t;
    j["final_q_inf"] = last.q.cwiseAbs().maxCoeff();
    j["final_qd_inf"] = last.qd.cwiseAbs().maxCoeff();
    j["final_z"] = to_list(last.z);
    std::size_t ok = 0;
    for (const ZeroDynamicsRecord& rec : r.records) ok += rec.bound_ok;
    j["bound_ok_fraction"] = double(ok) / double(r.records.size());
  }
  return j;
}

nlohmann::json equilibrium_json(const EquilibriumSolution& sol, const RobotParams& p,
                                const Pose& C) {
  const InternalForce inf = internal_force(sol.f, p);
  nlohmann::json j;
  j["pjd"] = static_cast<int>(sol.pjd);
  j["q_t"] = to_list(sol.q);
  j["q5"] = to_list(sol.q5);
  j["f"] = to_list(sol.f);
  j["sum_f"] = sol.f.sum();
  j["weight"] = p.total_mass() * p.g;
  j["thrust_ratio"] = sol.f.sum() / (p.total_mass() * p.g);
  j["internal_force"] = inf.excess;
  j["force_class"] = inf.cls == ForceClass::Minimal    ? "minimal"
                     : inf.cls == ForceClass::Internal ? "internal"
                                                       : "deficit";
  j["vertical"] = verify_vertical(p, C, sol.q, sol.q5);
  j["residual_norm"] = sol.residual_norm;
  j["iterations"] = sol.iterations;
  return j;
}

void write_text_file(const std::string& path, const std::string& text) {
  const std::filesystem::path parent = std::filesystem::path(path).parent_path();
  std::error_code ec;
  if (!parent.empty()) std::filesystem::create_directories(parent, ec);
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open " + path + " for writing");
  os << text;
  if (!os) throw std::runtime_error("failed writing " + path);
}

}  // namespace omav

#include "omav/config.hpp"

#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

#include <toml.hpp>

#include "omav/errors.hpp"

namespace omav {

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

struct Reader {
  std::string source;

  [[noreturn]] void fail(const std::string& where, const std::string& msg) const {
    throw ConfigError(source + ": " + where + ": " + msg);
  }

  void check_keys(const toml::table& t, const std::string& where,
                  const std::set<std::string>& allowed) const {
    for (const auto& [k, v] : t) {
      if (!allowed.count(std::string(k.str()))) fail(where, "unknown key '" + std::string(k.str()) + "'");
    }
  }

  const toml::table* table(const toml::table& t, const std::string& key,
                           const std::string& where) const {
    const toml::node* n = t.get(key);
    if (!n) return nullptr;
    if (!n->is_table()) fail(where + "." + key, "expected a table");
    return n->as_table();
  }

  double number(const toml::node& n, const std::string& where) const {
    if (auto v = n.value<double>(); v && (n.is_floating_point() || n.is_integer())) return *v;
    fail(where, "expected a number");
  }

  void get(const toml::table& t, const std::string& key, const std::string& where,
           double& out) const {
    if (const toml::node* n = t.get(key)) out = number(*n, where + "." + key);
  }

  void get(const toml::table& t, const std::string& key, const std::string& where,
           bool& out) const {
    const toml::node* n = t.get(key);
    if (!n) return;
    if (!n->is_boolean()) fail(where + "." + key, "expected a boolean");
    out = *n->value<bool>();
  }

  void get(const toml::table& t, const std::string& key, const std::string& where,
           std::string& out) const {
    const toml::node* n = t.get(key);
    if (!n) return;
    if (!n->is_string()) fail(where + "." + key, "expected a string");
    out = *n->value<std::string>();
  }

  std::uint64_t seed(const toml::node& n, const std::string& where) const {
    const auto v = n.value<std::int64_t>();
    if (!n.is_integer() || !v || *v < 0) fail(where, "expected a non-negative integer");
    return static_cast<std::uint64_t>(*v);
  }

  Eigen::VectorXd vector(const toml::node& n, const std::string& where, int size) const {
    const toml::array* a = n.as_array();
    if (!a || static_cast<int>(a->size()) != size) {
      fail(where, "expected an array of " + std::to_string(size) + " numbers");
    }
    Eigen::VectorXd v(size);
    for (int i = 0; i < size; ++i) v(i) = number((*a)[i], where);
    return v;
  }

  template <int N>
  void get(const toml::table& t, const std::string& key, const std::string& where,
           Eigen::Matrix<double, N, 1>& out) const {
    if (const toml::node* n = t.get(key)) out = vector(*n, where + "." + key, N);
  }

  // scalar or 6-array, stored as a diagonal gain
  void gain(const toml::table& t, const std::string& key, Mat6& out) const {
    const toml::node* n = t.get(key);
    if (!n) return;
    const std::string where = "gains." + key;
    if (n->is_array()) {
      out = Vec6(vector(*n, where, 6)).asDiagonal();
    } else {
      out = Mat6::Identity() * number(*n, where);
    }
  }

  Pose pose(const toml::table& t, const std::string& where, const Pose& fallback) const {
    Vec3 rpy = euler_xyz(fallback.topLeftCorner<3, 3>()) / kDeg;
    Vec3 pos = fallback.topRightCorner<3, 1>();
    get(t, "rpy_deg", where, rpy);
    get(t, "position", where, pos);
    return make_pose(from_euler_xyz(rpy * kDeg), pos);
  }
};

void read_params(const Reader& rd, const toml::table& t, RobotParams& p) {
  const std::string w = "params";
  rd.check_keys(t, w, {"m_b", "m_p", "m_a", "a", "c", "g", "I_px", "I_py", "I_pz", "I_bx",
                       "I_by", "I_bz", "b_fx", "b_fy", "k"});
  const std::pair<const char*, double*> fields[] = {
      {"m_b", &p.m_b},   {"m_p", &p.m_p},   {"m_a", &p.m_a},   {"a", &p.a},
      {"c", &p.c},       {"g", &p.g},       {"I_px", &p.I_px}, {"I_py", &p.I_py},
      {"I_pz", &p.I_pz}, {"I_bx", &p.I_bx}, {"I_by", &p.I_by}, {"I_bz", &p.I_bz},
      {"b_fx", &p.b_fx}, {"b_fy", &p.b_fy}};
  for (const auto& [key, dst] : fields) rd.get(t, key, w, *dst);
  if (const toml::node* n = t.get("k")) {
    const Eigen::VectorXd k = rd.vector(*n, w + ".k", 4);
    for (int i = 0; i < 4; ++i) p.k[i] = k(i);
  }
}

void read_gains(const Reader& rd, const toml::table& t, Gains& g) {
  rd.check_keys(t, "gains", {"Kp", "Ka", "Kd", "Ki", "integral"});
  rd.gain(t, "Kp", g.Kp);
  rd.gain(t, "Ka", g.Ka);
  rd.gain(t, "Kd", g.Kd);
  rd.gain(t, "Ki", g.Ki);
  rd.get(t, "integral", "gains", g.integral);
}

double thrust_scale(const Reader& rd, const toml::table& sc) {
  double scale = 1.05;
  if (const toml::table* init = rd.table(sc, "initial", "scenario")) {
    rd.get(*init, "thrust_scale", "scenario.initial", scale);
  }
  return scale;
}

void read_scenario(const Reader& rd, const toml::table& t, Config& cfg) {
  Scenario& sc = cfg.scenario;
  rd.check_keys(t, "scenario", {"duration", "dt", "sample_rate", "pjd", "noise", "perturbation",
                                "seed", "seeds", "initial", "setpoint"});
  rd.get(t, "duration", "scenario", sc.duration);
  rd.get(t, "dt", "scenario", sc.dt);
  rd.get(t, "sample_rate", "scenario", sc.sample_rate);
  rd.get(t, "noise", "scenario", sc.noise);
  rd.get(t, "perturbation", "scenario", sc.perturbation);
  if (const toml::node* n = t.get("pjd")) {
    const auto v = n->value<std::int64_t>();
    if (!n->is_integer() || !v || (*v != 1 && *v != 2)) rd.fail("scenario.pjd", "expected 1 or 2");
    sc.params.pjd = *v == 1 ? Pjd::One : Pjd::Two;
  }
  if (t.get("seed") && t.get("seeds")) rd.fail("scenario", "give either seed or seeds");
  if (const toml::node* n = t.get("seed")) cfg.seeds = {rd.seed(*n, "scenario.seed")};
  if (const toml::node* n = t.get("seeds")) {
    const toml::array* a = n->as_array();
    if (!a || a->empty()) rd.fail("scenario.seeds", "expected a non-empty array");
    cfg.seeds.clear();
    for (const toml::node& s : *a) cfg.seeds.push_back(rd.seed(s, "scenario.seeds"));
  }
  if (const toml::table* init = rd.table(t, "initial", "scenario")) {
    const std::string w = "scenario.initial";
    rd.check_keys(*init, w, {"rpy_deg", "position", "q_t_deg", "q5_deg", "thrust_scale"});
    sc.initial.C = rd.pose(*init, w, sc.initial.C);
    Vec6 q = sc.initial.q / kDeg;
    Vec2 q5 = sc.initial.q5 / kDeg;
    rd.get(*init, "q_t_deg", w, q);
    rd.get(*init, "q5_deg", w, q5);
    sc.initial.q = q * kDeg;
    sc.initial.q5 = q5 * kDeg;
  }
  if (const toml::node* n = t.get("setpoint")) {
    const toml::array* a = n->as_array();
    if (!a || a->empty()) rd.fail("scenario.setpoint", "expected an array of tables");
    sc.schedule.clear();
    for (const toml::node& e : *a) {
      const toml::table* sp = e.as_table();
      if (!sp) rd.fail("scenario.setpoint", "expected an array of tables");
      rd.check_keys(*sp, "scenario.setpoint", {"t", "rpy_deg", "position"});
      Setpoint s;
      rd.get(*sp, "t", "scenario.setpoint", s.t_start);
      s.pose = rd.pose(*sp, "scenario.setpoint", Pose::Identity());
      sc.schedule.push_back(s);
    }
  }
}

void read_noise(const Reader& rd, const toml::table& t, NoiseParams& np) {
  rd.check_keys(t, "noise", {"l", "k"});
  rd.get(t, "l", "noise", np.l);
  rd.get(t, "k", "noise", np.k);
}

void read_zero_dynamics(const Reader& rd, const toml::table& t, ZeroDynamicsSetup& zd) {
  const std::string w = "zero_dynamics";
  rd.check_keys(t, w, {"rpy_deg", "position", "q_t_deg", "qd_t_deg_s", "duration", "dt",
                       "sample_rate"});
  zd.C = rd.pose(t, w, zd.C);
  Vec6 q = zd.q / kDeg;
  Vec6 qd = zd.qd / kDeg;
  rd.get(t, "q_t_deg", w, q);
  rd.get(t, "qd_t_deg_s", w, qd);
  zd.q = q * kDeg;
  zd.qd = qd * kDeg;
  rd.get(t, "duration", w, zd.duration);
  rd.get(t, "dt", w, zd.dt);
  rd.get(t, "sample_rate", w, zd.sample_rate);
  if (!(zd.duration > 0.0) || !(zd.dt > 0.0) || !(zd.sample_rate > 0.0)) {
    rd.fail(w, "duration, dt and sample_rate must be positive");
  }
}

void validate(const Reader& rd, const Config& cfg) {
  const Scenario& sc = cfg.scenario;
  if (!(sc.duration > 0.0) || !(sc.dt > 0.0) || !(sc.sample_rate > 0.0)) {
    rd.fail("scenario", "duration, dt and sample_rate must be positive");
  }
  if (!(sc.perturbation > -1.0)) rd.fail("scenario.perturbation", "must be greater than -1");
  if (sc.schedule.empty()) rd.fail("scenario", "at least one set-point is required");
  for (std::size_t i = 1; i < sc.schedule.size(); ++i) {
    if (!(sc.schedule[i].t_start > sc.schedule[i - 1].t_start)) {
      rd.fail("scenario.setpoint", "times must be increasing");
    }
  }
  if (!(sc.noise_params.l >= 0.0) || !(sc.noise_params.k > 0.0)) {
    rd.fail("noise", "l must be non-negative and k positive");
  }
  if (cfg.output_dir.empty() || cfg.name.empty()) rd.fail("output", "dir and name must be non-empty");
  try {
    sc.params.validate();
  } catch (const ConfigError& e) {
    rd.fail("params", e.what());
  }
  if (!sc.gains.hurwitz()) rd.fail("gains", "gains must be positive, diagonal and Hurwitz");
}

}  // namespace

Config parse_config(const std::string& text, const std::string& source) {
  const Reader rd{source};
  toml::table root;
  try {
    root = toml::parse(text, source);
  } catch (const toml::parse_error& e) {
    std::ostringstream os;
    os << e.description() << " at line " << e.source().begin.line;
    rd.fail("syntax", os.str());
  }
  rd.check_keys(root, "root",
                {"params", "gains", "scenario", "noise", "zero_dynamics", "output"});

  Config cfg;
  cfg.scenario = default_scenario(Pjd::Two);
  if (const toml::table* t = rd.table(root, "params", "root")) read_params(rd, *t, cfg.scenario.params);
  if (const toml::table* t = rd.table(root, "gains", "root")) read_gains(rd, *t, cfg.scenario.gains);
  double scale = 1.05;
  if (const toml::table* t = rd.table(root, "scenario", "root")) {
    read_scenario(rd, *t, cfg);
    scale = thrust_scale(rd, *t);
  }
  if (const toml::table* t = rd.table(root, "noise", "root")) read_noise(rd, *t, cfg.scenario.noise_params);
  if (const toml::table* t = rd.table(root, "zero_dynamics", "root")) {
    cfg.zero_dynamics.emplace();
    read_zero_dynamics(rd, *t, *cfg.zero_dynamics);
  }
  if (const toml::table* t = rd.table(root, "output", "root")) {
    rd.check_keys(*t, "output", {"dir", "name"});
    rd.get(*t, "dir", "output", cfg.output_dir);
    rd.get(*t, "name", "output", cfg.name);
  }
  validate(rd, cfg);
  try {
    cfg.scenario.z0 = scale * pjd2_thrust(cfg.scenario.params);
  } catch (const ConfigError& e) {
    rd.fail("params.k", e.what());
  }
  cfg.scenario.seed = cfg.seeds.front();
  return cfg;
}

Config load_config(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ConfigError("cannot open config file " + path);
  std::ostringstream ss;
  ss << is.rdbuf();
  return parse_config(ss.str(), path);
}

}  // namespace omav

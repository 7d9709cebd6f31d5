#include "tvgames/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <map>
#include <random>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "tvgames/error.hpp"
#include "tvgames/rate_fit.hpp"

namespace tvgames {

using Json = nlohmann::ordered_json;

namespace {

[[noreturn]] void config_fail(const std::string& path, const std::string& what) {
  throw Error(ErrorKind::ConfigError, path + ": " + what);
}

const Json& field(const Json& obj, const std::string& key, const std::string& path) {
  if (!obj.is_object()) config_fail(path, "expected an object");
  auto it = obj.find(key);
  if (it == obj.end()) config_fail(path + "." + key, "missing field");
  return *it;
}

double read_number(const Json& j, const std::string& path) {
  if (!j.is_number()) config_fail(path, "expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) config_fail(path, "not finite");
  return v;
}

std::string read_string(const Json& j, const std::string& path) {
  if (!j.is_string()) config_fail(path, "expected a string");
  return j.get<std::string>();
}

RealVector read_vector(const Json& j, const std::string& path) {
  if (!j.is_array() || j.empty()) config_fail(path, "expected a nonempty array of numbers");
  RealVector v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    v(static_cast<Eigen::Index>(i)) = read_number(j[i], path + "[" + std::to_string(i) + "]");
  }
  return v;
}

RealMatrix read_matrix(const Json& j, const std::string& path) {
  if (!j.is_array() || j.empty()) config_fail(path, "expected a nonempty array of rows");
  const std::size_t rows = j.size();
  std::size_t cols = 0;
  std::vector<double> data;
  for (std::size_t r = 0; r < rows; ++r) {
    const std::string row_path = path + "[" + std::to_string(r) + "]";
    const RealVector row = read_vector(j[r], row_path);
    if (r == 0) cols = static_cast<std::size_t>(row.size());
    if (static_cast<std::size_t>(row.size()) != cols) config_fail(row_path, "ragged row");
    data.insert(data.end(), row.begin(), row.end());
  }
  return make_matrix(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols), data);
}

std::vector<RealMatrix> read_matrix_list(const Json& j, const std::string& path) {
  if (!j.is_array() || j.empty()) config_fail(path, "expected a nonempty array of matrices");
  std::vector<RealMatrix> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    out.push_back(read_matrix(j[i], path + "[" + std::to_string(i) + "]"));
  }
  return out;
}

Json write_vector(const RealVector& v) {
  Json out = Json::array();
  for (double x : v) out.push_back(x);
  return out;
}

Json write_matrix(const RealMatrix& m) {
  Json out = Json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) out.push_back(write_vector(m.row(r).transpose()));
  return out;
}

std::string_view schedule_kind_name(ScheduleSpec::Kind k) {
  switch (k) {
    case ScheduleSpec::Kind::Periodic: return "periodic";
    case ScheduleSpec::Kind::Perturbed: return "perturbed";
    case ScheduleSpec::Kind::Explicit: return "explicit";
  }
  return "periodic";
}

ScheduleSpec read_schedule(const Json& j, const std::string& path) {
  ScheduleSpec spec;
  const std::string kind = read_string(field(j, "kind", path), path + ".kind");
  if (kind == "periodic") {
    spec.kind = ScheduleSpec::Kind::Periodic;
    spec.matrices = read_matrix_list(field(j, "matrices", path), path + ".matrices");
  } else if (kind == "perturbed") {
    spec.kind = ScheduleSpec::Kind::Perturbed;
    spec.stable = read_matrix(field(j, "stable", path), path + ".stable");
    spec.base = read_matrix(field(j, "base", path), path + ".base");
    const std::string decay = read_string(field(j, "decay", path), path + ".decay");
    try {
      spec.decay = parse_decay_kind(decay);
    } catch (const Error& e) {
      config_fail(path + ".decay", e.what());
    }
    spec.exponent = read_number(field(j, "exponent", path), path + ".exponent");
  } else if (kind == "explicit") {
    spec.kind = ScheduleSpec::Kind::Explicit;
    spec.matrices = read_matrix_list(field(j, "matrices", path), path + ".matrices");
    spec.tail = read_matrix(field(j, "tail", path), path + ".tail");
  } else {
    config_fail(path + ".kind", "unknown schedule kind '" + kind + "'");
  }
  return spec;
}

Json write_schedule(const ScheduleSpec& spec) {
  Json j;
  j["kind"] = schedule_kind_name(spec.kind);
  switch (spec.kind) {
    case ScheduleSpec::Kind::Periodic: {
      Json list = Json::array();
      for (const auto& m : spec.matrices) list.push_back(write_matrix(m));
      j["matrices"] = list;
      break;
    }
    case ScheduleSpec::Kind::Perturbed:
      j["stable"] = write_matrix(spec.stable);
      j["base"] = write_matrix(spec.base);
      j["decay"] = to_string(spec.decay);
      j["exponent"] = spec.exponent;
      break;
    case ScheduleSpec::Kind::Explicit: {
      Json list = Json::array();
      for (const auto& m : spec.matrices) list.push_back(write_matrix(m));
      j["matrices"] = list;
      j["tail"] = write_matrix(spec.tail);
      break;
    }
  }
  return j;
}

DynamicsConfig read_dynamics(const Json& j, const std::string& path) {
  DynamicsConfig cfg;
  const std::string method = read_string(field(j, "method", path), path + ".method");
  try {
    cfg.method = parse_method(method);
  } catch (const Error& e) {
    config_fail(path + ".method", e.what());
  }
  const bool defaults = j.contains("params");
  if (defaults && read_string(j["params"], path + ".params") != "paper-defaults") {
    config_fail(path + ".params", "only \"paper-defaults\" is recognised");
  }
  auto opt = [&](const char* key) -> std::optional<double> {
    if (!j.contains(key)) return std::nullopt;
    if (defaults) config_fail(path + "." + key, "conflicts with paper-defaults");
    return read_number(j[key], path + "." + key);
  };
  if (auto step = opt("step")) {
    if (cfg.method == Method::EG) {
      cfg.alpha = step;
      cfg.gamma = step;
    } else {
      cfg.eta = step;
    }
  }
  if (auto v = opt("eta")) cfg.eta = v;
  if (auto v = opt("alpha")) cfg.alpha = v;
  if (auto v = opt("gamma")) cfg.gamma = v;
  if (auto v = opt("beta1")) cfg.beta1 = v;
  if (auto v = opt("beta2")) cfg.beta2 = v;
  return cfg;
}

Json write_dynamics(const DynamicsConfig& cfg) {
  Json j;
  j["method"] = to_string(cfg.method);
  bool any = false;
  auto put = [&](const char* key, const std::optional<double>& v) {
    if (v) {
      j[key] = *v;
      any = true;
    }
  };
  put("eta", cfg.eta);
  put("alpha", cfg.alpha);
  put("gamma", cfg.gamma);
  put("beta1", cfg.beta1);
  put("beta2", cfg.beta2);
  if (!any) j["params"] = "paper-defaults";
  return j;
}

InitSpec read_init(const Json& j, const std::string& path) {
  InitSpec init;
  if (!j.is_object()) config_fail(path, "expected an object");
  if (j.contains("type")) {
    const std::string type = read_string(j["type"], path + ".type");
    if (type == "eigvec-top") {
      init.kind = InitSpec::Kind::EigvecTop;
    } else if (type == "random-unit") {
      init.kind = InitSpec::Kind::RandomUnit;
    } else if (type == "explicit") {
      init.kind = InitSpec::Kind::Explicit;
    } else {
      config_fail(path + ".type", "unknown init type '" + type + "'");
    }
    if (init.kind != InitSpec::Kind::Explicit) return init;
  }
  init.kind = InitSpec::Kind::Explicit;
  init.x0 = read_vector(field(j, "x0", path), path + ".x0");
  init.y0 = read_vector(field(j, "y0", path), path + ".y0");
  if (j.contains("x_prev")) init.x_prev = read_vector(j["x_prev"], path + ".x_prev");
  if (j.contains("y_prev")) init.y_prev = read_vector(j["y_prev"], path + ".y_prev");
  return init;
}

Json write_init(const InitSpec& init) {
  Json j;
  switch (init.kind) {
    case InitSpec::Kind::EigvecTop: j["type"] = "eigvec-top"; break;
    case InitSpec::Kind::RandomUnit: j["type"] = "random-unit"; break;
    case InitSpec::Kind::Explicit:
      j["x0"] = write_vector(init.x0);
      j["y0"] = write_vector(init.y0);
      if (init.x_prev) j["x_prev"] = write_vector(*init.x_prev);
      if (init.y_prev) j["y_prev"] = write_vector(*init.y_prev);
      break;
  }
  return j;
}

void validate_series(const SeriesSpec& spec, const std::string& path) {
  PayoffSchedule s = [&] {
    try {
      return spec.schedule.build();
    } catch (const Error& e) {
      config_fail(path + ".schedule", e.what());
    }
  }();
  try {
    (void)spec.dynamics.resolved(s);
  } catch (const Error& e) {
    config_fail(path + ".dynamics", e.what());
  }
  const auto& init = spec.init;
  if (init.kind == InitSpec::Kind::Explicit) {
    auto check = [&](const RealVector& v, Eigen::Index want, const char* name) {
      if (v.size() != want) {
        config_fail(path + ".init." + name, "length " + std::to_string(v.size()) +
                                                " does not match the schedule (" +
                                                std::to_string(want) + ")");
      }
    };
    check(init.x0, s.n(), "x0");
    check(init.y0, s.m(), "y0");
    if (init.x_prev) check(*init.x_prev, s.n(), "x_prev");
    if (init.y_prev) check(*init.y_prev, s.m(), "y_prev");
  }
  if (init.kind == InitSpec::Kind::EigvecTop && !s.is_periodic()) {
    config_fail(path + ".init", "eigvec-top needs a periodic schedule");
  }
  for (std::size_t i = 0; i < spec.measures.size(); ++i) {
    const std::string mpath = path + ".measures[" + std::to_string(i) + "]";
    try {
      (void)measure_matrix(s, Measure::parse(spec.measures[i]));
    } catch (const Error& e) {
      config_fail(mpath, e.what());
    }
  }
}

ExperimentConfig read_config(const Json& j) {
  ExperimentConfig c;
  const std::string root = "config";
  c.name = read_string(field(j, "name", root), "name");
  if (c.name.empty()) config_fail("name", "must not be empty");
  const Json& rounds = field(j, "rounds", root);
  if (!rounds.is_number_integer() || rounds.get<long long>() < 1) {
    config_fail("rounds", "expected a positive integer");
  }
  c.rounds = rounds.get<Round>();
  if (j.contains("seed")) {
    if (!j["seed"].is_number_unsigned()) config_fail("seed", "expected a nonnegative integer");
    c.seed = j["seed"].get<std::uint64_t>();
  }
  if (j.contains("stride")) {
    if (!j["stride"].is_number_integer() || j["stride"].get<long long>() < 1) {
      config_fail("stride", "expected a positive integer");
    }
    c.stride = j["stride"].get<Round>();
  }
  if (j.contains("note")) c.note = read_string(j["note"], "note");
  if (j.contains("svg")) {
    if (!j["svg"].is_boolean()) config_fail("svg", "expected a boolean");
    c.svg = j["svg"].get<bool>();
  }
  if (j.contains("spectral_report")) {
    if (!j["spectral_report"].is_boolean()) config_fail("spectral_report", "expected a boolean");
    c.spectral_report = j["spectral_report"].get<bool>();
  }
  const Json& series = field(j, "series", root);
  if (!series.is_array() || series.empty()) config_fail("series", "expected a nonempty array");
  for (std::size_t i = 0; i < series.size(); ++i) {
    const std::string path = "series[" + std::to_string(i) + "]";
    const Json& sj = series[i];
    SeriesSpec spec;
    spec.label = read_string(field(sj, "label", path), path + ".label");
    if (spec.label.empty()) config_fail(path + ".label", "must not be empty");
    for (const auto& other : c.series) {
      if (other.label == spec.label) config_fail(path + ".label", "duplicate label");
    }
    spec.schedule = read_schedule(field(sj, "schedule", path), path + ".schedule");
    spec.dynamics = read_dynamics(field(sj, "dynamics", path), path + ".dynamics");
    spec.init = read_init(field(sj, "init", path), path + ".init");
    if (sj.contains("measures")) {
      const Json& ms = sj["measures"];
      if (!ms.is_array()) config_fail(path + ".measures", "expected an array of ids");
      for (std::size_t k = 0; k < ms.size(); ++k) {
        spec.measures.push_back(read_string(ms[k], path + ".measures[" + std::to_string(k) + "]"));
      }
    }
    validate_series(spec, path);
    c.series.push_back(std::move(spec));
  }
  return c;
}

std::string line_col(std::string_view text, std::size_t byte) {
  std::size_t line = 1;
  std::size_t col = 1;
  for (std::size_t i = 0; i + 1 < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

}  // namespace

PayoffSchedule ScheduleSpec::build() const {
  switch (kind) {
    case Kind::Periodic: return PayoffSchedule::periodic(matrices);
    case Kind::Perturbed: return PayoffSchedule::perturbed(stable, PerturbationLaw{base, decay, exponent});
    case Kind::Explicit: return PayoffSchedule::explicit_sequence(matrices, tail);
  }
  throw Error(ErrorKind::InvalidArgument, "unknown schedule kind");
}

ExperimentConfig parse_config(std::string_view json_text) {
  Json j;
  try {
    j = Json::parse(json_text.begin(), json_text.end());
  } catch (const Json::parse_error& e) {
    throw Error(ErrorKind::ConfigError,
                "parse error at " + line_col(json_text, e.byte) + ": " + e.what());
  }
  return read_config(j);
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::ConfigError, "cannot open " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_config(buffer.str());
}

std::string dump_config(const ExperimentConfig& c) {
  Json j;
  j["name"] = c.name;
  if (!c.note.empty()) j["note"] = c.note;
  j["rounds"] = c.rounds;
  j["seed"] = c.seed;
  if (c.stride) j["stride"] = *c.stride;
  j["svg"] = c.svg;
  j["spectral_report"] = c.spectral_report;
  Json series = Json::array();
  for (const auto& s : c.series) {
    Json sj;
    sj["label"] = s.label;
    sj["schedule"] = write_schedule(s.schedule);
    sj["dynamics"] = write_dynamics(s.dynamics);
    sj["init"] = write_init(s.init);
    if (!s.measures.empty()) sj["measures"] = s.measures;
    series.push_back(sj);
  }
  j["series"] = series;
  return j.dump(2) + "\n";
}

// ---------------------------------------------------------------- presets

namespace {

ScheduleSpec periodic_spec(const PayoffSchedule& s) {
  ScheduleSpec spec;
  spec.kind = ScheduleSpec::Kind::Periodic;
  spec.matrices = std::get<PeriodicGame>(s.kind()).matrices;
  return spec;
}

ScheduleSpec perturbed_spec(RealMatrix stable, RealMatrix base, DecayKind decay, double exponent) {
  ScheduleSpec spec;
  spec.kind = ScheduleSpec::Kind::Perturbed;
  spec.stable = std::move(stable);
  spec.base = std::move(base);
  spec.decay = decay;
  spec.exponent = exponent;
  return spec;
}

InitSpec explicit_init(RealVector x0, RealVector y0, RealVector x_prev, RealVector y_prev) {
  InitSpec init;
  init.kind = InitSpec::Kind::Explicit;
  init.x0 = std::move(x0);
  init.y0 = std::move(y0);
  init.x_prev = std::move(x_prev);
  init.y_prev = std::move(y_prev);
  return init;
}

RealVector vec(std::initializer_list<double> v) {
  RealVector out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

InitSpec perturbed_example_init() {
  return explicit_init(vec({15.0, 13.0}), vec({35.0, 1.0}), vec({11.0, 3.0}), vec({35.0, 1.0}));
}

RealMatrix stable_game() { return make_matrix({{2.0, 3.0}, {4.0, 6.0}}); }

DynamicsConfig with_step(Method method, double step) {
  switch (method) {
    case Method::EG: return DynamicsConfig::eg(step);
    case Method::OGDA: return DynamicsConfig::ogda(step);
    case Method::NM: {
      DynamicsConfig cfg;
      cfg.method = Method::NM;
      cfg.eta = step;
      return cfg;
    }
  }
  return DynamicsConfig::eg(step);
}

std::string lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

ExperimentConfig fig1(Method method) {
  ExperimentConfig c;
  c.name = "fig1-" + lower(to_string(method));
  c.note =
      "alternating-sign period-2 game; step 0.1 for every method; "
      "EG starts from a seeded random unit vector, OGDA and NM from the "
      "dominant eigenvector of the period product";
  c.rounds = method == Method::NM ? 30'000 : 20'000;
  c.svg = true;
  c.spectral_report = true;
  SeriesSpec s;
  s.label = lower(to_string(method));
  s.schedule = periodic_spec(alternating_sign_game());
  s.dynamics = with_step(method, 0.1);
  s.init.kind = method == Method::EG ? InitSpec::Kind::RandomUnit : InitSpec::Kind::EigvecTop;
  c.series.push_back(std::move(s));
  return c;
}

ExperimentConfig fig2(Method method) {
  ExperimentConfig c;
  c.name = method == Method::EG ? "fig2-pe" : "fig2-po";
  c.note = method == Method::EG
               ? "period-3 game, extra-gradient with step 0.01; Delta_1..3 decrease"
               : "period-3 game, optimistic gradient with step 0.01; Delta_1..3 grow and the run "
                 "stops as diverged (exit code 2)";
  c.rounds = method == Method::EG ? 100'000 : 1'000'000;
  c.svg = true;
  c.spectral_report = true;
  SeriesSpec s;
  s.label = lower(to_string(method));
  s.schedule = periodic_spec(three_cycle_game());
  s.dynamics = with_step(method, 0.01);
  s.init.kind = InitSpec::Kind::RandomUnit;
  c.series.push_back(std::move(s));
  return c;
}

ExperimentConfig fig3(Method method) {
  ExperimentConfig c;
  c.name = "fig3-" + lower(to_string(method));
  c.note = "A=[[2,3],[4,6]] plus B t^-p with B=[[-15,70],[-90,90]], p in {1.1,4,8}; step 0.005";
  c.rounds = 100'000;
  c.svg = true;
  const RealMatrix base = make_matrix({{-15.0, 70.0}, {-90.0, 90.0}});
  for (double p : {1.1, 4.0, 8.0}) {
    SeriesSpec s;
    std::ostringstream label;
    label << "p" << p;
    s.label = label.str();
    s.schedule = perturbed_spec(stable_game(), base, DecayKind::PowerLaw, p);
    s.dynamics = with_step(method, 0.005);
    s.init = perturbed_example_init();
    c.series.push_back(std::move(s));
  }
  return c;
}

ExperimentConfig fig4(DecayKind decay) {
  ExperimentConfig c;
  const bool power = decay == DecayKind::PowerLaw;
  c.name = power ? "fig4-power" : "fig4-log";
  c.note = power ? "extra-gradient, A=[[2,3],[4,6]], B=[[-10,10],[-10,10]] t^-p, p in "
                   "{0.4,0.3,0.2}; default step 0.9/(2 sigma)"
                 : "extra-gradient, A=[[2,3],[4,6]], B=[[-10,10],[-10,10]] log(t)^-p, p in "
                   "{1.8,1.5,1.3}; default step 0.9/(2 sigma)";
  c.rounds = 1'000'000;
  c.svg = true;
  const RealMatrix base = make_matrix({{-10.0, 10.0}, {-10.0, 10.0}});
  const std::vector<double> exps = power ? std::vector<double>{0.4, 0.3, 0.2}
                                         : std::vector<double>{1.8, 1.5, 1.3};
  for (double p : exps) {
    SeriesSpec s;
    std::ostringstream label;
    label << (power ? "t" : "log") << "-" << p;
    s.label = label.str();
    s.schedule = perturbed_spec(stable_game(), base, decay, p);
    s.dynamics.method = Method::EG;
    s.init = perturbed_example_init();
    c.series.push_back(std::move(s));
  }
  return c;
}

ExperimentConfig fig_g(bool second) {
  ExperimentConfig c;
  c.svg = true;
  if (!second) {
    c.name = "figG1";
    c.note = "A=[[2,3],[4,6]] plus B t^-0.9 with B=[[-15,70],[-90,90]] (no BAP); step 0.005; "
             "all three methods converge slowly";
    c.rounds = 1'000'000;
  } else {
    c.name = "figG2";
    c.note = "A=[[1,0],[0,0]], A + t^-0.1 B on even rounds with B=[[0,8],[0,0]]; step 0.015; "
             "EG converges, OGDA and NM diverge (exit code 2)";
    c.rounds = 3'500'000;
  }
  for (Method method : {Method::EG, Method::OGDA, Method::NM}) {
    SeriesSpec s;
    s.label = lower(to_string(method));
    if (!second) {
      s.schedule = perturbed_spec(stable_game(), make_matrix({{-15.0, 70.0}, {-90.0, 90.0}}),
                                  DecayKind::PowerLaw, 0.9);
      s.dynamics = with_step(method, 0.005);
    } else {
      s.schedule = perturbed_spec(make_matrix({{1.0, 0.0}, {0.0, 0.0}}),
                                  make_matrix({{0.0, 8.0}, {0.0, 0.0}}), DecayKind::Alternating,
                                  0.1);
      s.dynamics = with_step(method, 0.015);
    }
    s.init = perturbed_example_init();
    c.series.push_back(std::move(s));
  }
  return c;
}

ExperimentConfig thm33() {
  ExperimentConfig c;
  c.name = "thm33-nm-converging-init";
  c.note =
      "negative momentum on the alternating-sign game from x0=x_prev=0, y0=(-0.4,1), "
      "y_prev=(1,-1) with step 0.01; this start is not on the stable subspace of the period "
      "product here, so Delta_1 grows slowly instead of converging";
  c.rounds = 20'000;
  c.svg = true;
  c.spectral_report = true;
  SeriesSpec s;
  s.label = "nm";
  s.schedule = periodic_spec(alternating_sign_game());
  s.dynamics = DynamicsConfig::nm(0.01);
  s.init = explicit_init(vec({0.0}), vec({-0.4, 1.0}), vec({0.0}), vec({1.0, -1.0}));
  s.measures = {"delta_1"};
  c.series.push_back(std::move(s));
  return c;
}

}  // namespace

const std::vector<std::string>& preset_ids() {
  static const std::vector<std::string> ids{
      "fig1-eg",   "fig1-ogda",  "fig1-nm",  "fig2-pe", "fig2-po", "fig3-eg", "fig3-ogda",
      "fig3-nm",   "fig4-power", "fig4-log", "figG1",   "figG2",   "thm33-nm-converging-init"};
  return ids;
}

ExperimentConfig preset(std::string_view id) {
  if (id == "fig1-eg") return fig1(Method::EG);
  if (id == "fig1-ogda") return fig1(Method::OGDA);
  if (id == "fig1-nm") return fig1(Method::NM);
  if (id == "fig2-pe") return fig2(Method::EG);
  if (id == "fig2-po") return fig2(Method::OGDA);
  if (id == "fig3-eg") return fig3(Method::EG);
  if (id == "fig3-ogda") return fig3(Method::OGDA);
  if (id == "fig3-nm") return fig3(Method::NM);
  if (id == "fig4-power") return fig4(DecayKind::PowerLaw);
  if (id == "fig4-log") return fig4(DecayKind::LogPower);
  if (id == "figG1") return fig_g(false);
  if (id == "figG2") return fig_g(true);
  if (id == "thm33-nm-converging-init") return thm33();
  throw Error(ErrorKind::ConfigError, "unknown preset '" + std::string(id) + "'");
}

// ---------------------------------------------------------------- run

JointState initial_state(const SeriesSpec& spec, std::uint64_t seed, std::size_t series_index) {
  const PayoffSchedule s = spec.schedule.build();
  const InitSpec& init = spec.init;
  switch (init.kind) {
    case InitSpec::Kind::Explicit: {
      JointState state = JointState::from_current(init.x0, init.y0);
      if (init.x_prev) state.x_prev = *init.x_prev;
      if (init.y_prev) state.y_prev = *init.y_prev;
      return state;
    }
    case InitSpec::Kind::EigvecTop: return divergent_init(spec.dynamics, s);
    case InitSpec::Kind::RandomUnit: {
      std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                        static_cast<std::uint32_t>(series_index)};
      std::mt19937_64 rng(seq);
      std::normal_distribution<double> normal;
      RealVector v(s.n() + s.m());
      for (auto& x : v) x = normal(rng);
      v /= v.norm();
      return JointState::from_current(v.head(s.n()), v.tail(s.m()));
    }
  }
  throw Error(ErrorKind::InvalidArgument, "unknown init kind");
}

std::filesystem::path default_out_dir() {
  if (const char* env = std::getenv("TVG_OUT_DIR"); env != nullptr && *env != '\0') return env;
  return "tvg_out";
}

namespace {

std::vector<Measure> series_measures(const SeriesSpec& spec, const PayoffSchedule& s) {
  if (spec.measures.empty()) return default_measures(s);
  std::vector<Measure> out;
  for (const auto& id : spec.measures) out.push_back(Measure::parse(id));
  return out;
}

std::string file_stem(std::string_view label) {
  std::string out;
  for (char c : label) {
    out += std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' || c == '.' ? c : '_';
  }
  return out;
}

// Alternating perturbations are not periodic, so they get the explicit
// treatment: no Floquet data.
bool has_floquet_data(const PayoffSchedule& s) {
  if (s.is_periodic()) return true;
  const auto* game = std::get_if<PerturbedGame>(&s.kind());
  return game != nullptr && game->perturbation.kind != DecayKind::Alternating;
}

}  // namespace

RunResult run_experiment(const ExperimentConfig& config, const std::filesystem::path& out_dir,
                         const RunOptions& options) {
  RunResult result;
  const std::filesystem::path dir = out_dir / config.name;
  if (options.write_files) std::filesystem::create_directories(dir);
  const Round stride = config.stride.value_or(default_stride(config.rounds));

  for (std::size_t i = 0; i < config.series.size(); ++i) {
    const SeriesSpec& spec = config.series[i];
    const PayoffSchedule s = spec.schedule.build();
    SimulationOptions sim;
    sim.measures = series_measures(spec, s);
    const JointState init = initial_state(spec, config.seed, i);
    Trajectory traj = simulate(spec.dynamics, s, init, config.rounds, sim);

    SeriesResult out;
    out.label = spec.label;
    out.dynamics = spec.dynamics.resolved(s);
    out.measures = traj.measures;
    out.status = traj.status;
    out.status_round = traj.status_round;
    out.rounds_completed = traj.rounds_completed();
    for (const auto& d : traj.deltas) out.final_deltas.push_back(d.empty() ? 0.0 : d.back());
    out.sample_rounds = sampled_rounds(out.rounds_completed, stride);
    for (const auto& d : traj.deltas) {
      std::vector<double> picked;
      picked.reserve(out.sample_rounds.size());
      for (Round t : out.sample_rounds) picked.push_back(d[static_cast<std::size_t>(t - 1)]);
      out.samples.push_back(std::move(picked));
    }
    if (options.write_files) {
      out.csv_path = dir / (file_stem(spec.label) + ".csv");
      write_trajectory_csv(out.csv_path, traj, stride);
      result.files.push_back(out.csv_path);
      if (config.spectral_report && has_floquet_data(s)) {
        const AnalysisResult analysis = analyze_series(spec);
        const auto spectrum = dir / (file_stem(spec.label) + "_spectrum.csv");
        const auto summary = dir / (file_stem(spec.label) + "_summary.csv");
        write_spectrum_csv(spectrum, analysis);
        write_summary_csv(summary, analysis);
        result.files.push_back(spectrum);
        result.files.push_back(summary);
      }
    }
    if (out.status == TrajectoryStatus::Diverged) result.exit_code = 2;
    if (options.keep_trajectories) out.trajectory = std::move(traj);
    result.series.push_back(std::move(out));
  }

  if (options.write_files && config.svg) {
    std::vector<SvgLine> lines;
    for (const auto& sr : result.series) {
      for (std::size_t k = 0; k < sr.measures.size(); ++k) {
        lines.push_back({sr.label + " " + sr.measures[k].id(), sr.sample_rounds, sr.samples[k]});
      }
    }
    const auto svg = dir / (config.name + ".svg");
    write_svg(svg, config.name, lines);
    result.files.push_back(svg);
  }
  return result;
}

// ---------------------------------------------------------------- sweep

std::string_view to_string(SweepParam p) {
  switch (p) {
    case SweepParam::Eta: return "eta";
    case SweepParam::Alpha: return "alpha";
    case SweepParam::Gamma: return "gamma";
    case SweepParam::Step: return "step";
    case SweepParam::Beta1: return "beta1";
    case SweepParam::Beta2: return "beta2";
    case SweepParam::Exponent: return "exponent";
  }
  return "eta";
}

SweepParam parse_sweep_param(std::string_view name) {
  for (SweepParam p : {SweepParam::Eta, SweepParam::Alpha, SweepParam::Gamma, SweepParam::Step,
                       SweepParam::Beta1, SweepParam::Beta2, SweepParam::Exponent}) {
    if (to_string(p) == name) return p;
  }
  throw Error(ErrorKind::InvalidArgument, "unknown sweep parameter '" + std::string(name) + "'");
}

namespace {

double parse_double(std::string_view text) {
  std::string s(text);
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size() || !std::isfinite(v)) {
    throw Error(ErrorKind::InvalidArgument, "not a number: '" + s + "'");
  }
  return v;
}

std::vector<std::string_view> split(std::string_view text, char sep) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (true) {
    const auto pos = text.find(sep, start);
    parts.push_back(text.substr(start, pos == std::string_view::npos ? pos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return parts;
}

void apply_param(SeriesSpec& spec, SweepParam p, double v) {
  auto& d = spec.dynamics;
  switch (p) {
    case SweepParam::Eta: d.eta = v; break;
    case SweepParam::Alpha: d.alpha = v; break;
    case SweepParam::Gamma: d.gamma = v; break;
    case SweepParam::Step:
      if (d.method == Method::EG) {
        d.alpha = v;
        d.gamma = v;
      } else {
        d.eta = v;
      }
      break;
    case SweepParam::Beta1: d.beta1 = v; break;
    case SweepParam::Beta2: d.beta2 = v; break;
    case SweepParam::Exponent:
      if (spec.schedule.kind != ScheduleSpec::Kind::Perturbed) {
        throw Error(ErrorKind::InvalidArgument, "exponent sweeps need a perturbed schedule");
      }
      spec.schedule.exponent = v;
      break;
  }
}

SweepRow run_cell(const ExperimentConfig& base, const std::vector<double>& params,
                  const std::vector<GridAxis>& axes) {
  SeriesSpec spec = base.series.front();
  for (std::size_t a = 0; a < axes.size(); ++a) apply_param(spec, axes[a].param, params[a]);
  const PayoffSchedule s = spec.schedule.build();
  SimulationOptions sim;
  sim.measures = {series_measures(spec, s).front()};
  const JointState init = initial_state(spec, base.seed, 0);
  const Trajectory traj = simulate(spec.dynamics, s, init, base.rounds, sim);

  SweepRow row;
  row.params = params;
  row.status = traj.status;
  const auto& series = traj.deltas.front();
  row.final_delta = series.empty() ? 0.0 : series.back();
  row.fitted_rate = std::numeric_limits<double>::quiet_NaN();
  const Round completed = traj.rounds_completed();
  const Round stride = std::max<Round>(1, completed / 400);
  try {
    row.fitted_rate = fit_rate(traj, sim.measures.front(), stride).log_rate_per_round;
  } catch (const Error&) {
    // too few usable samples; leave NaN
  }
  row.relative_gap = std::numeric_limits<double>::quiet_NaN();
  if (s.is_periodic()) {
    const RealMatrix product = period_product(spec.dynamics, s);
    const double ls = lambda_star(eigenvalues(product));
    if (ls > 0.0) {
      const double theory = std::log(ls) / static_cast<double>(s.period());
      row.theoretical_rate = theory;
      if (theory != 0.0) row.relative_gap = std::abs(row.fitted_rate - theory) / std::abs(theory);
    }
  }
  return row;
}

}  // namespace

std::vector<double> parse_grid_values(std::string_view text) {
  std::vector<double> out;
  if (text.empty()) return out;
  if (text.find(':') != std::string_view::npos) {
    const auto parts = split(text, ':');
    if (parts.size() != 3) {
      throw Error(ErrorKind::InvalidArgument, "range must be start:stop:step");
    }
    const double start = parse_double(parts[0]);
    const double stop = parse_double(parts[1]);
    const double step = parse_double(parts[2]);
    if (!(step > 0.0)) throw Error(ErrorKind::InvalidArgument, "range step must be positive");
    if (stop < start) return out;
    const double count = std::floor((stop - start) / step + 1e-9);
    if (count + 1 > static_cast<double>(kMaxSweepCells)) {
      throw Error(ErrorKind::InvalidArgument, "grid exceeds the cell limit");
    }
    for (long long k = 0; k <= static_cast<long long>(count); ++k) {
      out.push_back(start + static_cast<double>(k) * step);
    }
    return out;
  }
  for (auto part : split(text, ',')) out.push_back(parse_double(part));
  return out;
}

GridAxis parse_grid_axis(std::string_view text) {
  const auto eq = text.find('=');
  if (eq == std::string_view::npos) {
    throw Error(ErrorKind::InvalidArgument, "grid axis must look like name=values");
  }
  GridAxis axis;
  axis.param = parse_sweep_param(text.substr(0, eq));
  axis.values = parse_grid_values(text.substr(eq + 1));
  return axis;
}

std::vector<SweepRow> sweep(const ExperimentConfig& base, const std::vector<GridAxis>& axes,
                            unsigned threads) {
  if (axes.empty() || axes.size() > 2) {
    throw Error(ErrorKind::InvalidArgument, "sweep takes one or two grid axes");
  }
  if (base.series.empty()) throw Error(ErrorKind::ConfigError, "config has no series");
  std::size_t cells = 1;
  for (const auto& a : axes) cells *= a.values.size();
  if (cells > kMaxSweepCells) throw Error(ErrorKind::InvalidArgument, "grid exceeds the cell limit");

  std::vector<std::vector<double>> grid;
  grid.reserve(cells);
  for (std::size_t c = 0; c < cells; ++c) {
    std::vector<double> params;
    std::size_t rest = c;
    std::size_t inner = cells;
    for (const auto& a : axes) {
      inner /= a.values.size();
      params.push_back(a.values[rest / inner]);
      rest %= inner;
    }
    grid.push_back(std::move(params));
  }

  std::vector<SweepRow> rows(cells);
  std::vector<std::exception_ptr> errors(cells);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t c = next++; c < cells; c = next++) {
      try {
        rows[c] = run_cell(base, grid[c], axes);
      } catch (...) {
        errors[c] = std::current_exception();
      }
    }
  };
  unsigned n = threads != 0 ? threads : std::max(1u, std::thread::hardware_concurrency());
  n = static_cast<unsigned>(std::min<std::size_t>(n, std::max<std::size_t>(cells, 1)));
  std::vector<std::thread> pool;
  for (unsigned k = 1; k < n; ++k) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return rows;
}

// ---------------------------------------------------------------- analyze

AnalysisResult analyze_series(const SeriesSpec& spec) {
  const PayoffSchedule s = spec.schedule.build();
  if (!has_floquet_data(s)) {
    throw Error(ErrorKind::WrongScheduleKind,
                "analysis needs a periodic schedule or a non-alternating perturbed one");
  }
  const DynamicsConfig cfg = spec.dynamics.resolved(s);
  AnalysisResult out;
  out.label = spec.label;
  if (s.is_periodic()) {
    out.period = s.period();
    out.report = analyze_product(period_product(cfg, s), out.period);
  } else {
    out.period = 1;
    out.report = analyze_product(iterative_matrix(cfg, s.reference_matrix()), 1);
  }
  out.family = static_eigen_family(cfg, s.reference_matrix());
  out.threshold = step_size_threshold(cfg.method, s);
  out.configured_step = cfg.method == Method::EG ? *cfg.alpha : *cfg.eta;
  out.spectral_radius = out.report.spectrum.max_modulus;

  const bool all_negative = std::all_of(out.report.floquet_exponents.begin(),
                                        out.report.floquet_exponents.end(),
                                        [](double e) { return e < 0.0; });
  if (out.spectral_radius > 1.0 + kUnitBand) {
    out.verdict = "diverges: spectral radius " + format_double(out.spectral_radius) + " > 1";
  } else if (all_negative) {
    out.verdict = "converges: all Floquet exponents negative";
  } else {
    out.verdict = "neutral: multipliers on the unit circle";
  }
  return out;
}

std::vector<AnalysisResult> analyze_experiment(const ExperimentConfig& config,
                                               const std::filesystem::path& out_dir) {
  std::vector<AnalysisResult> results;
  const std::filesystem::path dir = out_dir / config.name;
  std::filesystem::create_directories(dir);
  for (const auto& spec : config.series) {
    AnalysisResult a = analyze_series(spec);
    write_spectrum_csv(dir / (file_stem(spec.label) + "_spectrum.csv"), a);
    write_summary_csv(dir / (file_stem(spec.label) + "_summary.csv"), a);
    results.push_back(std::move(a));
  }
  return results;
}

}  // namespace tvgames

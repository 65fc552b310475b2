#include "hobs/config.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

namespace hobs {
namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) out.push_back(trim(item));
  return out;
}

double parse_number(const std::string& text, const std::string& what) {
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used != text.size()) throw std::invalid_argument(text);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("invalid number '" + text + "' for " + what);
  }
}

bool parse_bool(const std::string& text, const std::string& what) {
  if (text == "true" || text == "1" || text == "yes") return true;
  if (text == "false" || text == "0" || text == "no") return false;
  throw ConfigError("invalid boolean '" + text + "' for " + what);
}

Group parse_group(const std::string& text, const std::string& what,
                  std::vector<std::string>* log) {
  const Mat3 m = parse_matrix(text);
  const double det = m.determinant();
  Group g;
  try {
    g = project_sl3<double>(m);
  } catch (const Error& e) {
    throw ConfigError(what + ": " + e.what());
  }
  if (log && std::abs(det - 1.0) > 1e-15) {
    log->push_back(what + " projected onto SL(3) (det was " + format_double(det) +
                   ", scaled by " + format_double(1.0 / std::cbrt(det)) + ")");
  }
  return g;
}

Algebra parse_algebra(const std::string& text, const std::string& what) {
  try {
    return Algebra(parse_matrix(text));
  } catch (const InvariantViolation&) {
    throw ConfigError(what + " must be traceless");
  }
}

std::vector<double> parse_list(const std::string& text, const std::string& what) {
  std::vector<double> out;
  if (trim(text).empty()) return out;
  for (const auto& item : split(text, ',')) out.push_back(parse_number(item, what));
  return out;
}

}  // namespace

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

Mat3 parse_matrix(const std::string& text) {
  const auto rows = split(text, ';');
  if (rows.size() != 3) throw ConfigError("matrix '" + text + "' must have 3 rows");
  Mat3 m;
  for (int r = 0; r < 3; ++r) {
    std::istringstream in(rows[r]);
    std::vector<std::string> cells;
    std::string cell;
    while (in >> cell) cells.push_back(cell);
    if (cells.size() != 3) {
      throw ConfigError("matrix row '" + rows[r] + "' must have 3 entries");
    }
    for (int c = 0; c < 3; ++c) m(r, c) = parse_number(cells[c], "matrix entry");
  }
  return m;
}

std::string format_matrix(const Mat3& m) {
  std::string out;
  for (int r = 0; r < 3; ++r) {
    if (r) out += "; ";
    for (int c = 0; c < 3; ++c) {
      if (c) out += ' ';
      out += format_double(m(r, c));
    }
  }
  return out;
}

const Algebra& SimulationConfig::velocity_at(double t) const {
  const VelocitySegment* active = &velocity.front();
  for (const auto& seg : velocity) {
    if (seg.t_start <= t + 1e-12) active = &seg;
  }
  return active->u;
}

Calibration SimulationConfig::calibration(int width, int height) const {
  const Calibration def = Calibration::default_for(width, height);
  const double f = focal.value_or(def.matrix()(0, 0));
  return Calibration::pinhole(f, f, cu.value_or(def.matrix()(0, 2)),
                              cv.value_or(def.matrix()(1, 2)));
}

void SimulationConfig::validate() const {
  if (reference_image.empty()) throw ConfigError("[reference] image is required");
  if (!(dt > 0.0)) throw ConfigError("dt must be positive");
  if (!(duration >= dt)) throw ConfigError("duration must be at least dt");
  if (focal && !(*focal > 0.0)) throw ConfigError("focal must be positive");
  if (velocity.empty() || velocity.front().t_start != 0.0) {
    throw ConfigError("velocity schedule must start at t = 0");
  }
  for (std::size_t i = 1; i < velocity.size(); ++i) {
    if (!(velocity[i].t_start > velocity[i - 1].t_start)) {
      throw ConfigError("velocity schedule times must increase");
    }
  }
}

SimulationConfig parse_config(const std::string& text,
                              const std::filesystem::path& base_dir,
                              std::vector<std::string>* log) {
  SimulationConfig cfg;
  std::string section;
  std::map<std::string, int> seen;
  std::istringstream in(text);
  std::string raw;
  int line_no = 0;
  auto resolve = [&](const std::string& p) {
    std::filesystem::path path(p);
    return path.is_relative() && !base_dir.empty() ? base_dir / path : path;
  };
  while (std::getline(in, raw)) {
    ++line_no;
    const auto hash = raw.find('#');
    const std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (line.empty()) continue;
    const std::string where = "line " + std::to_string(line_no);
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError(where + ": malformed section header");
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(where + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    const std::string full = section + "." + key;
    if (seen[full]++) throw ConfigError(where + ": duplicate key " + full);

    if (full == "reference.image") {
      cfg.reference_image = resolve(value);
    } else if (full == "reference.focal") {
      cfg.focal = parse_number(value, full);
    } else if (full == "reference.cu") {
      cfg.cu = parse_number(value, full);
    } else if (full == "reference.cv") {
      cfg.cv = parse_number(value, full);
    } else if (full == "truth.h0") {
      cfg.h0 = parse_group(value, "h0", log);
    } else if (full == "truth.u") {
      cfg.velocity.front().u = parse_algebra(value, full);
    } else if (full == "truth.u_schedule") {
      // t1: matrix | t2: matrix  (segments after the initial `u`)
      for (const auto& seg : split(value, '|')) {
        const auto colon = seg.find(':');
        if (colon == std::string::npos) {
          throw ConfigError(where + ": u_schedule entries are 't: matrix'");
        }
        cfg.velocity.push_back({parse_number(trim(seg.substr(0, colon)), full),
                                parse_algebra(seg.substr(colon + 1), full)});
      }
    } else if (full == "observer.h_hat0") {
      cfg.h_hat0 = parse_group(value, "h_hat0", log);
    } else if (full == "observer.gain") {
      cfg.gain = GainConfig::parse(value);
    } else if (full == "integration.dt") {
      cfg.dt = parse_number(value, full);
    } else if (full == "integration.duration") {
      cfg.duration = parse_number(value, full);
    } else if (full == "output.dir") {
      cfg.output_dir = resolve(value);
    } else if (full == "output.quadrature") {
      cfg.quadrature = parse_quadrature(value);
    } else if (full == "output.snapshot_times") {
      cfg.snapshot_times = parse_list(value, full);
    } else if (full == "output.deterministic") {
      cfg.deterministic = parse_bool(value, full);
    } else if (full == "compare.variants") {
      cfg.compare_variants.clear();
      for (const auto& v : split(value, ',')) cfg.compare_variants.push_back(GainConfig::parse(v));
    } else {
      throw ConfigError(where + ": unknown key " + full);
    }
  }
  cfg.validate();
  return cfg;
}

SimulationConfig load_config(const std::filesystem::path& path,
                             std::vector<std::string>* log) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config '" + path.string() + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path.parent_path(), log);
}

std::string dump_config(const SimulationConfig& c) {
  std::ostringstream os;
  os << "[reference]\n";
  os << "image = " << c.reference_image.string() << "\n";
  if (c.focal) os << "focal = " << format_double(*c.focal) << "\n";
  if (c.cu) os << "cu = " << format_double(*c.cu) << "\n";
  if (c.cv) os << "cv = " << format_double(*c.cv) << "\n";
  os << "\n[truth]\n";
  os << "h0 = " << format_matrix(c.h0.matrix()) << "\n";
  os << "u = " << format_matrix(c.velocity.front().u.matrix()) << "\n";
  if (c.velocity.size() > 1) {
    os << "u_schedule = ";
    for (std::size_t i = 1; i < c.velocity.size(); ++i) {
      if (i > 1) os << " | ";
      os << format_double(c.velocity[i].t_start) << ": "
         << format_matrix(c.velocity[i].u.matrix());
    }
    os << "\n";
  }
  os << "\n[observer]\n";
  os << "h_hat0 = " << format_matrix(c.h_hat0.matrix()) << "\n";
  os << "gain = " << c.gain.to_string() << "\n";
  os << "\n[integration]\n";
  os << "dt = " << format_double(c.dt) << "\n";
  os << "duration = " << format_double(c.duration) << "\n";
  os << "\n[output]\n";
  os << "dir = " << c.output_dir.string() << "\n";
  os << "quadrature = " << to_string(c.quadrature) << "\n";
  os << "snapshot_times = ";
  for (std::size_t i = 0; i < c.snapshot_times.size(); ++i) {
    if (i) os << ", ";
    os << format_double(c.snapshot_times[i]);
  }
  os << "\n";
  os << "deterministic = " << (c.deterministic ? "true" : "false") << "\n";
  if (!c.compare_variants.empty()) {
    os << "\n[compare]\nvariants = ";
    for (std::size_t i = 0; i < c.compare_variants.size(); ++i) {
      if (i) os << ", ";
      os << c.compare_variants[i].to_string();
    }
    os << "\n";
  }
  return os.str();
}

}  // namespace hobs

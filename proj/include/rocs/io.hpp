#pragma once

// On-disk formats for feature data and scene descriptions.
//
// Bundle directory layout:
//   bundle.txt   key = value metadata (class, instance, repetition, d_r, d_h, scale_grams, has_table)
//   side.ply     ASCII PLY, lateral view
//   top.ply      ASCII PLY, top view
//   press.log    whitespace table: t z <joint names...>
//   ramp.log     whitespace table: t angle slide   (slide is 0/1; first 1 marks the event)
//
// Scene file: INI; each section is one object named by its instance id.
// [noise] and [simulation] are reserved sections.

#include "rocs/core.hpp"
#include "rocs/interaction.hpp"
#include "rocs/simulator.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

namespace rocs::io {

namespace fs = std::filesystem;

namespace detail {

inline std::vector<std::string> tokens(const std::string& line) {
  std::istringstream ss(line);
  std::vector<std::string> t;
  std::string w;
  while (ss >> w) t.push_back(w);
  return t;
}

inline double num(const std::string& s, const std::string& where) {
  auto v = parse_double(s);
  if (!v) fail(ErrorCode::parse_error, where + ": not a number '" + s + "'");
  return *v;
}

inline std::ifstream open_in(const fs::path& p) {
  std::ifstream in(p);
  if (!in) fail(ErrorCode::io_error, "cannot open '" + p.string() + "'");
  return in;
}

inline std::ofstream open_out(const fs::path& p) {
  std::ofstream out(p, std::ios::binary);
  if (!out) fail(ErrorCode::io_error, "cannot write '" + p.string() + "'");
  return out;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// PLY

inline void write_ply(std::ostream& out, const Cloud& cloud) {
  out << "ply\nformat ascii 1.0\nelement vertex " << cloud.size()
      << "\nproperty double x\nproperty double y\nproperty double z\nend_header\n";
  for (const auto& p : cloud)
    out << format_double(p.x()) << ' ' << format_double(p.y()) << ' ' << format_double(p.z()) << '\n';
}

inline Cloud read_ply(std::istream& in, const std::string& name = "ply") {
  std::string line;
  if (!std::getline(in, line) || detail::tokens(line) != std::vector<std::string>{"ply"})
    fail(ErrorCode::parse_error, name + ": missing 'ply' magic");
  std::size_t count = 0;
  bool vertex = false, ascii = false;
  std::vector<std::string> props;
  while (std::getline(in, line)) {
    auto t = detail::tokens(line);
    if (t.empty() || t[0] == "comment" || t[0] == "obj_info") continue;
    if (t[0] == "end_header") break;
    if (t[0] == "format") ascii = t.size() >= 2 && t[1] == "ascii";
    if (t[0] == "element") {
      vertex = t.size() == 3 && t[1] == "vertex";
      if (vertex) {
        auto c = parse_int(t[2]);
        if (!c || *c < 0) fail(ErrorCode::parse_error, name + ": bad vertex count");
        count = static_cast<std::size_t>(*c);
      } else if (t.size() == 3 && t[2] != "0") {
        fail(ErrorCode::parse_error, name + ": only vertex elements are supported");
      }
    }
    if (t[0] == "property" && vertex && t.size() >= 3) props.push_back(t.back());
  }
  if (!ascii) fail(ErrorCode::parse_error, name + ": only ASCII PLY is supported");
  auto idx = [&](const char* axis) {
    auto it = std::find(props.begin(), props.end(), axis);
    if (it == props.end()) fail(ErrorCode::parse_error, name + ": vertex property '" + axis + "' missing");
    return static_cast<std::size_t>(it - props.begin());
  };
  const std::size_t ix = idx("x"), iy = idx("y"), iz = idx("z");
  Cloud cloud;
  cloud.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    if (!std::getline(in, line)) fail(ErrorCode::parse_error, name + ": truncated vertex list");
    auto t = detail::tokens(line);
    if (t.size() != props.size()) fail(ErrorCode::parse_error, name + ": vertex " + std::to_string(i) + " has wrong arity");
    cloud.emplace_back(detail::num(t[ix], name), detail::num(t[iy], name), detail::num(t[iz], name));
  }
  return cloud;
}

// ---------------------------------------------------------------------------
// Logs

inline void write_press_log(std::ostream& out, const interaction::PressLog& log) {
  out << "t z";
  for (const auto& n : log.joint_names) out << ' ' << n;
  out << '\n';
  for (const auto& s : log.samples) {
    out << format_double(s.t) << ' ' << format_double(s.z);
    for (double e : s.efforts) out << ' ' << format_double(e);
    out << '\n';
  }
}

inline interaction::PressLog read_press_log(std::istream& in, const std::string& name = "press.log") {
  interaction::PressLog log;
  std::string line;
  if (!std::getline(in, line)) fail(ErrorCode::parse_error, name + ": empty press log");
  auto head = detail::tokens(line);
  if (head.size() < 3 || head[0] != "t" || head[1] != "z")
    fail(ErrorCode::parse_error, name + ": header must be 't z <joint...>'");
  log.joint_names.assign(head.begin() + 2, head.end());
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    auto t = detail::tokens(line);
    if (t.empty()) continue;
    std::string where = name + ":" + std::to_string(lineno);
    if (t.size() != head.size()) fail(ErrorCode::parse_error, where + ": expected " + std::to_string(head.size()) + " columns");
    interaction::PressSample s{detail::num(t[0], where), detail::num(t[1], where), {}};
    for (std::size_t j = 2; j < t.size(); ++j) s.efforts.push_back(detail::num(t[j], where));
    log.samples.push_back(std::move(s));
  }
  interaction::validate(log);
  return log;
}

inline void write_ramp_log(std::ostream& out, const interaction::RampLog& log) {
  out << "t angle slide\n";
  for (const auto& s : log.samples) {
    bool slid = log.slide_detected_at && s.t >= *log.slide_detected_at;
    out << format_double(s.t) << ' ' << format_double(s.angle) << ' ' << (slid ? 1 : 0) << '\n';
  }
}

inline interaction::RampLog read_ramp_log(std::istream& in, const std::string& name = "ramp.log") {
  interaction::RampLog log;
  std::string line;
  if (!std::getline(in, line) || detail::tokens(line) != std::vector<std::string>{"t", "angle", "slide"})
    fail(ErrorCode::parse_error, name + ": header must be 't angle slide'");
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    auto t = detail::tokens(line);
    if (t.empty()) continue;
    std::string where = name + ":" + std::to_string(lineno);
    if (t.size() != 3 || (t[2] != "0" && t[2] != "1")) fail(ErrorCode::parse_error, where + ": expected 't angle 0|1'");
    double ts = detail::num(t[0], where);
    log.samples.push_back({ts, detail::num(t[1], where)});
    if (t[2] == "1" && !log.slide_detected_at) log.slide_detected_at = ts;
  }
  return log;
}

// ---------------------------------------------------------------------------
// Bundle directories

inline fs::path bundle_path(const fs::path& root, const std::string& cls, const std::string& inst, int rep) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "rep_%02d", rep);
  return root / cls / inst / buf;
}

inline void write_bundle(const fs::path& dir, const sim::FeatureBundle& b) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) fail(ErrorCode::io_error, "cannot create '" + dir.string() + "': " + ec.message());
  {
    auto out = detail::open_out(dir / "bundle.txt");
    out << "class = " << b.class_label << "\ninstance = " << b.instance_id << "\nrepetition = " << b.repetition
        << "\nd_r = " << format_double(b.d_r) << "\nd_h = " << format_double(b.d_h)
        << "\nscale_grams = " << format_double(b.scale_reading) << "\nhas_table = " << (b.has_table ? 1 : 0) << '\n';
  }
  {
    auto out = detail::open_out(dir / "side.ply");
    write_ply(out, b.side_cloud);
  }
  {
    auto out = detail::open_out(dir / "top.ply");
    write_ply(out, b.top_cloud);
  }
  {
    auto out = detail::open_out(dir / "press.log");
    write_press_log(out, b.press);
  }
  if (b.ramp) {
    auto out = detail::open_out(dir / "ramp.log");
    write_ramp_log(out, *b.ramp);
  } else {
    fs::remove(dir / "ramp.log", ec);
  }
}

inline sim::FeatureBundle read_bundle(const fs::path& dir) {
  sim::FeatureBundle b;
  std::map<std::string, std::string> meta;
  {
    auto in = detail::open_in(dir / "bundle.txt");
    std::string line;
    while (std::getline(in, line)) {
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.empty() || line[0] == '#') continue;
      auto eq = line.find('=');
      if (eq == std::string::npos) fail(ErrorCode::parse_error, (dir / "bundle.txt").string() + ": expected key = value");
      auto trim = [](std::string s) {
        auto a = s.find_first_not_of(" \t");
        auto z = s.find_last_not_of(" \t");
        return a == std::string::npos ? std::string{} : s.substr(a, z - a + 1);
      };
      meta[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
    }
  }
  auto need = [&](const std::string& k) -> const std::string& {
    auto it = meta.find(k);
    if (it == meta.end()) fail(ErrorCode::parse_error, (dir / "bundle.txt").string() + ": missing '" + k + "'");
    return it->second;
  };
  std::string where = (dir / "bundle.txt").string();
  b.class_label = need("class");
  b.instance_id = need("instance");
  auto rep = parse_int(need("repetition"));
  if (!rep || *rep < 1) fail(ErrorCode::parse_error, where + ": repetition must be >= 1");
  b.repetition = static_cast<int>(*rep);
  b.d_r = detail::num(need("d_r"), where);
  b.d_h = detail::num(need("d_h"), where);
  b.scale_reading = detail::num(need("scale_grams"), where);
  b.has_table = meta.count("has_table") ? need("has_table") != "0" : true;
  if (!(b.scale_reading >= 0.0)) fail(ErrorCode::out_of_range, where + ": scale reading must be non-negative");
  {
    auto in = detail::open_in(dir / "side.ply");
    b.side_cloud = read_ply(in, (dir / "side.ply").string());
  }
  {
    auto in = detail::open_in(dir / "top.ply");
    b.top_cloud = read_ply(in, (dir / "top.ply").string());
  }
  {
    auto in = detail::open_in(dir / "press.log");
    b.press = read_press_log(in, (dir / "press.log").string());
  }
  if (fs::exists(dir / "ramp.log")) {
    auto in = detail::open_in(dir / "ramp.log");
    b.ramp = read_ramp_log(in, (dir / "ramp.log").string());
  }
  return b;
}

/// All bundle directories below root, in lexicographic path order.
inline std::vector<fs::path> find_bundles(const fs::path& root) {
  if (!fs::is_directory(root)) fail(ErrorCode::io_error, "'" + root.string() + "' is not a directory");
  std::vector<fs::path> dirs;
  if (fs::exists(root / "bundle.txt")) dirs.push_back(root);
  for (const auto& e : fs::recursive_directory_iterator(root))
    if (e.is_regular_file() && e.path().filename() == "bundle.txt") dirs.push_back(e.path().parent_path());
  std::sort(dirs.begin(), dirs.end());
  dirs.erase(std::unique(dirs.begin(), dirs.end()), dirs.end());
  return dirs;
}

// ---------------------------------------------------------------------------
// Scene files

struct Scene {
  std::vector<sim::SyntheticObject> objects;
  sim::NoiseSpec noise;
  sim::SimulationParams params;
  int repetitions = 1;
};

inline Scene scene_from_ptree(const boost::property_tree::ptree& pt, const std::string& name) {
  Scene sc;
  auto number = [&](const boost::property_tree::ptree& sec, const std::string& sname, const std::string& key,
                    double fallback, bool required) {
    auto v = sec.get_optional<std::string>(key);
    if (!v) {
      if (required) fail(ErrorCode::parse_error, name + ": [" + sname + "] missing '" + key + "'");
      return fallback;
    }
    auto d = parse_double(*v);
    if (!d) fail(ErrorCode::parse_error, name + ": [" + sname + "] " + key + " is not a number");
    return *d;
  };
  static const std::vector<std::string> object_keys{"class", "shape", "length", "width", "height", "cavity_depth",
                                                    "wall_thickness", "rigidity", "slide_angle", "mass"};
  for (const auto& [sname, sec] : pt) {
    if (sname == "noise") {
      for (const auto& [k, _] : sec)
        if (k != "point_sigma" && k != "marker_sigma" && k != "effort_sigma")
          fail(ErrorCode::parse_error, name + ": [noise] unknown key '" + k + "'");
      sc.noise.point_sigma = number(sec, sname, "point_sigma", 0.0, false);
      sc.noise.marker_sigma = number(sec, sname, "marker_sigma", 0.0, false);
      sc.noise.effort_sigma = number(sec, sname, "effort_sigma", 0.0, false);
      sim::validate(sc.noise);
      continue;
    }
    if (sname == "simulation") {
      for (const auto& [k, _] : sec)
        if (k != "repetitions" && k != "density" && k != "with_table")
          fail(ErrorCode::parse_error, name + ": [simulation] unknown key '" + k + "'");
      double reps = number(sec, sname, "repetitions", 1.0, false);
      if (reps < 1.0 || reps != std::floor(reps) || reps > 1000)
        fail(ErrorCode::parse_error, name + ": repetitions must be an integer in [1, 1000]");
      sc.repetitions = static_cast<int>(reps);
      sc.params.density = number(sec, sname, "density", sc.params.density, false);
      if (!(sc.params.density > 0.0)) fail(ErrorCode::out_of_range, name + ": density must be positive");
      sc.params.with_table = number(sec, sname, "with_table", 1.0, false) != 0.0;
      continue;
    }
    for (const auto& [k, _] : sec)
      if (std::find(object_keys.begin(), object_keys.end(), k) == object_keys.end())
        fail(ErrorCode::parse_error, name + ": [" + sname + "] unknown key '" + k + "'");
    sim::SyntheticObject o;
    o.instance_id = sname;
    o.class_label = sec.get<std::string>("class", "object");
    auto shape = sec.get_optional<std::string>("shape");
    if (!shape) fail(ErrorCode::parse_error, name + ": [" + sname + "] missing 'shape'");
    auto k = sim::parse_shape(*shape);
    if (!k) fail(ErrorCode::parse_error, name + ": [" + sname + "] unknown shape '" + *shape + "'");
    o.shape = *k;
    o.length = number(sec, sname, "length", 0.0, true);
    o.width = number(sec, sname, "width", o.length, o.shape != sim::ShapeKind::sphere && o.shape != sim::ShapeKind::cylinder_cup);
    o.height = number(sec, sname, "height", o.length, o.shape != sim::ShapeKind::sphere);
    o.cavity_depth = number(sec, sname, "cavity_depth", 0.0, false);
    o.wall_thickness = number(sec, sname, "wall_thickness", o.wall_thickness, false);
    o.true_rigidity = number(sec, sname, "rigidity", o.true_rigidity, false);
    o.true_slide_angle = number(sec, sname, "slide_angle", o.true_slide_angle, false);
    o.mass = number(sec, sname, "mass", o.mass, false);
    sim::validate(o);
    sc.objects.push_back(std::move(o));
  }
  return sc;
}

inline Scene parse_scene(std::istream& in, const std::string& name = "scene") {
  boost::property_tree::ptree pt;
  try {
    boost::property_tree::ini_parser::read_ini(in, pt);
  } catch (const boost::property_tree::ini_parser_error& e) {
    fail(ErrorCode::parse_error, name + ": " + e.message() + " at line " + std::to_string(e.line()));
  }
  return scene_from_ptree(pt, name);
}

inline Scene load_scene(const fs::path& path) {
  auto in = detail::open_in(path);
  return parse_scene(in, path.string());
}

inline void write_scene(std::ostream& out, const Scene& sc) {
  out << "[simulation]\nrepetitions = " << sc.repetitions << "\ndensity = " << format_double(sc.params.density)
      << "\nwith_table = " << (sc.params.with_table ? 1 : 0) << "\n\n";
  out << "[noise]\npoint_sigma = " << format_double(sc.noise.point_sigma)
      << "\nmarker_sigma = " << format_double(sc.noise.marker_sigma)
      << "\neffort_sigma = " << format_double(sc.noise.effort_sigma) << '\n';
  for (const auto& o : sc.objects) {
    out << "\n[" << o.instance_id << "]\nclass = " << o.class_label << "\nshape = " << sim::shape_name(o.shape)
        << "\nlength = " << format_double(o.length) << "\nwidth = " << format_double(o.width)
        << "\nheight = " << format_double(o.height) << "\ncavity_depth = " << format_double(o.cavity_depth)
        << "\nwall_thickness = " << format_double(o.wall_thickness) << "\nrigidity = " << format_double(o.true_rigidity)
        << "\nslide_angle = " << format_double(o.true_slide_angle) << "\nmass = " << format_double(o.mass) << '\n';
  }
}

}  // namespace rocs::io

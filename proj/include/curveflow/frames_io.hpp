#pragma once

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "json.hpp"

#include "curveflow/scheme.hpp"

namespace curveflow {

/// Run-wide settings stored with every frame so a frame file can be audited on its own.
struct FrameMeta {
  int degree = 3;
  EnergyModel energy = ElasticEnergy{0.1};
  int quadrature_points = 5;
  LineElement line_element = LineElement::Mid;
};

struct FrameRecord {
  Frame frame;
  FrameMeta meta;
};

class FrameIoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

/// 17 significant digits round-trip every double.
inline void append_number(std::string& out, double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  out += buf;
}

}  // namespace detail

/// One self-contained JSON document, no trailing newline.
inline std::string frame_to_line(const Frame& f, const FrameMeta& meta) {
  using detail::append_number;
  std::string s;
  s.reserve(64 + 48 * static_cast<std::size_t>(f.curve.size()));
  s += "{\"n\":" + std::to_string(f.n);
  s += ",\"t\":";
  append_number(s, f.t);
  s += ",\"dt\":";
  append_number(s, f.dt);
  s += ",\"N\":" + std::to_string(f.curve.size());
  s += ",\"energy\":";
  append_number(s, f.energy);
  s += ",\"dissipation_lhs\":";
  append_number(s, f.dissipation_lhs);
  s += ",\"dissipation_rhs\":";
  append_number(s, f.dissipation_rhs);
  s += ",\"turning_number\":" + std::to_string(f.turning_number);
  s += ",\"control_points\":[";
  for (int i = 0; i < f.curve.size(); ++i) {
    if (i > 0) s += ',';
    s += '[';
    append_number(s, f.curve.control_point(i).x);
    s += ',';
    append_number(s, f.curve.control_point(i).y);
    s += ']';
  }
  s += "],\"p\":" + std::to_string(meta.degree);
  s += ",\"energy_model\":{\"kind\":\"" + energy_name(meta.energy) + "\"";
  if (const auto* e = std::get_if<ElasticEnergy>(&meta.energy)) {
    s += ",\"epsilon\":";
    append_number(s, e->epsilon);
  }
  s += "},\"quadrature_points\":" + std::to_string(meta.quadrature_points);
  s += ",\"line_element\":\"" + to_string(meta.line_element) + "\"}";
  return s;
}

inline FrameRecord parse_frame_line(std::string_view line) {
  using json = nlohmann::json;
  json j;
  try {
    j = json::parse(line);
  } catch (const json::parse_error& e) {
    throw FrameIoError(std::string("malformed frame: ") + e.what());
  }
  try {
    FrameRecord r;
    r.meta.degree = j.at("p").get<int>();
    const json& em = j.at("energy_model");
    const std::string kind = em.at("kind").get<std::string>();
    if (kind == "elastic") {
      r.meta.energy = ElasticEnergy{em.at("epsilon").get<double>()};
    } else if (kind == "length") {
      r.meta.energy = LengthEnergy{};
    } else {
      throw FrameIoError("unknown energy kind \"" + kind + "\"");
    }
    r.meta.quadrature_points = j.at("quadrature_points").get<int>();
    r.meta.line_element = parse_line_element(j.at("line_element").get<std::string>());

    std::vector<Vec2> pts;
    for (const auto& p : j.at("control_points")) pts.push_back({p.at(0).get<double>(), p.at(1).get<double>()});
    if (static_cast<int>(pts.size()) != j.at("N").get<int>()) throw FrameIoError("N disagrees with control_points");

    Frame& f = r.frame;
    f.n = j.at("n").get<long>();
    f.t = j.at("t").get<double>();
    f.dt = j.at("dt").get<double>();
    f.energy = j.at("energy").get<double>();
    f.dissipation_lhs = j.at("dissipation_lhs").get<double>();
    f.dissipation_rhs = j.at("dissipation_rhs").get<double>();
    f.turning_number = j.at("turning_number").get<int>();
    f.curve = ClosedBSplineCurve::on_unit_interval(r.meta.degree, std::move(pts));
    return r;
  } catch (const json::exception& e) {
    throw FrameIoError(std::string("malformed frame: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw FrameIoError(std::string("invalid frame: ") + e.what());
  }
}

/// Appends frames to a file as they arrive, one line each.
class FrameWriter {
 public:
  FrameWriter(const std::string& path, FrameMeta meta) : path_(path), meta_(std::move(meta)), out_(path) {
    if (!out_) throw FrameIoError(path + ": cannot open for writing");
  }

  void write(const Frame& f) {
    out_ << frame_to_line(f, meta_) << '\n';
    if (!out_) throw FrameIoError(path_ + ": write failed");
  }

  void close() {
    out_.close();
    if (out_.fail()) throw FrameIoError(path_ + ": close failed");
  }

 private:
  std::string path_;
  FrameMeta meta_;
  std::ofstream out_;
};

inline void emit_frames(const std::vector<Frame>& frames, const FrameMeta& meta, const std::string& path) {
  FrameWriter w(path, meta);
  for (const auto& f : frames) w.write(f);
  w.close();
}

inline std::vector<FrameRecord> load_frames(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FrameIoError(path + ": cannot open");
  std::vector<FrameRecord> out;
  std::string line;
  long lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      out.push_back(parse_frame_line(line));
    } catch (const FrameIoError& e) {
      throw FrameIoError(path + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

/// Header "n,t,dt,N,energy", one row per frame.
inline void emit_energy_csv(const std::vector<Frame>& frames, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw FrameIoError(path + ": cannot open for writing");
  out << "n,t,dt,N,energy\n";
  for (const auto& f : frames) {
    std::string row = std::to_string(f.n) + ",";
    detail::append_number(row, f.t);
    row += ',';
    detail::append_number(row, f.dt);
    row += "," + std::to_string(f.curve.size()) + ",";
    detail::append_number(row, f.energy);
    out << row << '\n';
  }
  out.close();
  if (out.fail()) throw FrameIoError(path + ": write failed");
}

}  // namespace curveflow

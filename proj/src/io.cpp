#include "srvf/io.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "srvf/errors.hpp"

namespace fs = std::filesystem;

namespace srvf {

namespace {

std::string trim(const std::string& s) {
  size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, ',')) out.push_back(trim(field));
  if (!line.empty() && line.back() == ',') out.push_back("");
  return out;
}

double parse_double(const std::string& s, const std::string& what, int lineno) {
  double v = 0.0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size())
    throw DataError("line " + std::to_string(lineno) + ": bad " + what + " '" +
                    s + "'");
  return v;
}

struct Builder {
  std::vector<Eigen::Vector2d> pts;
  std::optional<int> label;
  std::string id;
};

PlanarCurve finish(const Builder& b, bool closed) {
  if (b.pts.size() < 3)
    throw DataError("shape '" + b.id + "' has " + std::to_string(b.pts.size()) +
                    " points; at least 3 required");
  PlanarCurve c;
  c.closed = closed;
  c.label = b.label;
  c.id = b.id;
  c.points.resize(2, static_cast<Eigen::Index>(b.pts.size()));
  for (size_t i = 0; i < b.pts.size(); ++i)
    c.points.col(static_cast<Eigen::Index>(i)) = b.pts[i];
  return c;
}

std::vector<PlanarCurve> load_csv(const std::string& path, bool closed) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path + "'");

  std::string line;
  if (!std::getline(in, line)) throw DataError("no curves found in '" + path + "'");
  auto header = split_csv(line);
  const std::vector<std::string> expect = {"shape_id", "label", "x", "y"};
  if (header.size() != 4 ||
      !std::equal(header.begin(), header.end(), expect.begin()))
    throw DataError("'" + path + "': expected header 'shape_id,label,x,y'");

  std::vector<std::string> order;
  std::map<std::string, Builder> shapes;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    auto f = split_csv(line);
    if (f.size() != 4)
      throw DataError("line " + std::to_string(lineno) +
                      ": expected 4 fields, got " + std::to_string(f.size()));
    auto& b = shapes[f[0]];
    if (b.pts.empty()) {
      b.id = f[0];
      order.push_back(f[0]);
      if (!f[1].empty()) {
        int lab = 0;
        auto [p, ec] = std::from_chars(f[1].data(), f[1].data() + f[1].size(), lab);
        if (ec != std::errc() || p != f[1].data() + f[1].size())
          throw DataError("line " + std::to_string(lineno) + ": bad label '" +
                          f[1] + "'");
        b.label = lab;
      }
    }
    b.pts.emplace_back(parse_double(f[2], "x", lineno),
                       parse_double(f[3], "y", lineno));
  }
  if (order.empty()) throw DataError("no curves found in '" + path + "'");

  std::vector<PlanarCurve> out;
  out.reserve(order.size());
  for (const auto& id : order) out.push_back(finish(shapes.at(id), closed));
  return out;
}

std::optional<int> label_from_directory(const fs::path& file) {
  const std::string dir = file.parent_path().filename().string();
  // trailing integer, e.g. "class12" -> 12
  size_t end = dir.size();
  while (end > 0 && std::isdigit(static_cast<unsigned char>(dir[end - 1])))
    --end;
  if (end == dir.size()) return std::nullopt;
  return std::stoi(dir.substr(end));
}

PlanarCurve load_txt_file(const fs::path& path, bool closed) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path.string() + "'");
  Builder b;
  b.id = path.stem().string();
  b.label = label_from_directory(path);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty()) continue;
    std::istringstream ss(t);
    double x = 0, y = 0;
    std::string rest;
    if (!(ss >> x >> y) || (ss >> rest))
      throw DataError(path.string() + " line " + std::to_string(lineno) +
                      ": expected 'x y'");
    b.pts.emplace_back(x, y);
  }
  if (b.pts.empty())
    throw DataError("no curves found in '" + path.string() + "'");
  return finish(b, closed);
}

}  // namespace

OutlineFormat parse_outline_format(const std::string& name) {
  if (name == "csv") return OutlineFormat::Csv;
  if (name == "txt") return OutlineFormat::Txt;
  throw UsageError("unknown outline format '" + name + "' (csv|txt)");
}

std::vector<PlanarCurve> load_outlines(const std::string& path,
                                       OutlineFormat format, bool closed) {
  if (format == OutlineFormat::Csv) return load_csv(path, closed);

  if (fs::is_directory(path)) {
    std::vector<fs::path> files;
    for (const auto& e : fs::recursive_directory_iterator(path))
      if (e.is_regular_file() && e.path().extension() == ".txt")
        files.push_back(e.path());
    std::sort(files.begin(), files.end());
    if (files.empty()) throw DataError("no curves found in '" + path + "'");
    std::vector<PlanarCurve> out;
    out.reserve(files.size());
    for (const auto& f : files) out.push_back(load_txt_file(f, closed));
    return out;
  }
  return {load_txt_file(path, closed)};
}

void write_outlines(const std::string& path,
                    const std::vector<PlanarCurve>& curves) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write '" + path + "'");
  out << "shape_id,label,x,y\n";
  out.precision(17);
  for (size_t s = 0; s < curves.size(); ++s) {
    const auto& c = curves[s];
    const std::string id = c.id.empty() ? "shape" + std::to_string(s) : c.id;
    for (Eigen::Index i = 0; i < c.size(); ++i) {
      out << id << ',';
      if (c.label) out << *c.label;
      out << ',' << c.points(0, i) << ',' << c.points(1, i) << '\n';
    }
  }
  if (!out) throw DataError("write failed for '" + path + "'");
}

}  // namespace srvf

#include "shapeflow/mesh_io.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>

#include "shapeflow/error.hpp"

namespace shapeflow::mesh {

namespace {

namespace fs = std::filesystem;

// Line source that skips blank lines and '#' comments and remembers where it is.
class LineReader {
 public:
  explicit LineReader(const fs::path& path) : in_(path), path_(path) {
    if (!in_) throw ParseError("cannot open " + path.string(), 0);
  }

  bool next(std::vector<std::string>& tokens, char sep = ' ') {
    std::string line;
    while (std::getline(in_, line)) {
      ++line_no_;
      if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
      if (sep != ' ') std::replace(line.begin(), line.end(), sep, ' ');
      tokens.clear();
      std::istringstream ss(line);
      for (std::string tok; ss >> tok;) tokens.push_back(tok);
      if (!tokens.empty()) return true;
    }
    return false;
  }

  int line() const { return line_no_; }
  [[noreturn]] void fail(const std::string& what) const {
    throw ParseError(path_.filename().string() + ": " + what, line_no_);
  }

 private:
  std::ifstream in_;
  fs::path path_;
  int line_no_ = 0;
};

double to_double(const std::string& s, const LineReader& r) {
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) r.fail("expected a number, got '" + s + "'");
  return v;
}

long to_int(const std::string& s, const LineReader& r) {
  long v = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) r.fail("expected an integer, got '" + s + "'");
  return v;
}

struct OffData {
  std::vector<Vec3> vertices;
  std::vector<Triangle> faces;
};

OffData parse_off(const fs::path& path) {
  LineReader r(path);
  std::vector<std::string> tok;
  if (!r.next(tok) || tok[0] != "OFF") r.fail("missing OFF header");
  // counts may share the header line
  tok.erase(tok.begin());
  if (tok.empty() && !r.next(tok)) r.fail("missing counts line");
  if (tok.size() < 2) r.fail("counts line needs vertex and face counts");
  const long nv = to_int(tok[0], r), nf = to_int(tok[1], r);
  if (nv < 0 || nf < 0) r.fail("negative element count");

  OffData d;
  d.vertices.reserve(nv);
  for (long i = 0; i < nv; ++i) {
    if (!r.next(tok)) r.fail("unexpected end of file in vertex list");
    if (tok.size() < 3) r.fail("vertex line needs 3 coordinates");
    d.vertices.emplace_back(to_double(tok[0], r), to_double(tok[1], r), to_double(tok[2], r));
  }
  d.faces.reserve(nf);
  for (long f = 0; f < nf; ++f) {
    if (!r.next(tok)) r.fail("unexpected end of file in face list");
    if (to_int(tok[0], r) != 3 || tok.size() < 4) r.fail("only triangular faces are supported");
    Triangle t{};
    for (int k = 0; k < 3; ++k) {
      const long idx = to_int(tok[k + 1], r);
      if (idx < 0 || idx >= nv) r.fail("vertex index " + std::to_string(idx) + " out of range");
      t[k] = static_cast<int>(idx);
    }
    d.faces.push_back(t);
  }
  return d;
}

std::ofstream open_out(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << std::setprecision(17);
  return out;
}

template <class V>
void off_body(std::ofstream& out, const std::vector<V>& x, const std::vector<Triangle>& tris) {
  out << "OFF\n" << x.size() << ' ' << tris.size() << " 0\n";
  for (const auto& v : x) {
    if constexpr (V::RowsAtCompileTime == 2)
      out << v.x() << ' ' << v.y() << " 0\n";
    else
      out << v.x() << ' ' << v.y() << ' ' << v.z() << '\n';
  }
  for (const auto& t : tris) out << "3 " << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
}

bool ends_with(const std::string& s, const std::string& suffix) {
  return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

fs::path stem_of(const fs::path& p) {
  std::string s = p.string();
  for (const char* suf : {".node.csv", ".ele.csv"})
    if (ends_with(s, suf)) return s.substr(0, s.size() - std::string(suf).size());
  return p;
}

}  // namespace

SimplicialMesh2D read_off_2d(const fs::path& path) {
  OffData d = parse_off(path);
  std::vector<Vec2> x;
  x.reserve(d.vertices.size());
  for (const auto& v : d.vertices) x.emplace_back(v.x(), v.y());
  for (auto& t : d.faces) {
    const Vec2 a = x[t[0]], b = x[t[1]], c = x[t[2]];
    if ((b - a).x() * (c - a).y() - (b - a).y() * (c - a).x() < 0.0) std::swap(t[1], t[2]);
  }
  return SimplicialMesh2D(std::move(x), std::move(d.faces));
}

SurfaceMesh3D read_off_surface(const fs::path& path) {
  OffData d = parse_off(path);
  return SurfaceMesh3D(std::move(d.vertices), std::move(d.faces));
}

void write_off(const fs::path& path, const SimplicialMesh2D& mesh) {
  auto out = open_out(path);
  off_body(out, mesh.vertices(), mesh.triangles());
}

void write_off(const fs::path& path, const SurfaceMesh3D& mesh) {
  auto out = open_out(path);
  off_body(out, mesh.vertices(), mesh.triangles());
}

SimplicialMesh2D read_node_ele(const fs::path& stem_in) {
  const fs::path stem = stem_of(stem_in);
  std::vector<Vec2> x;
  std::vector<int> markers;
  bool has_marker = false;
  {
    LineReader r(stem.string() + ".node.csv");
    std::vector<std::string> tok;
    if (!r.next(tok, ',') || tok.size() < 2 || tok[0] != "x" || tok[1] != "y")
      r.fail("node header must be x,y[,marker]");
    has_marker = tok.size() >= 3 && tok[2] == "marker";
    while (r.next(tok, ',')) {
      if (tok.size() < (has_marker ? 3u : 2u)) r.fail("short node row");
      x.emplace_back(to_double(tok[0], r), to_double(tok[1], r));
      if (has_marker) markers.push_back(static_cast<int>(to_int(tok[2], r)));
    }
  }
  std::vector<Triangle> tris;
  {
    LineReader r(stem.string() + ".ele.csv");
    std::vector<std::string> tok;
    if (!r.next(tok, ',') || tok.size() < 3 || tok[0] != "v0") r.fail("element header must be v0,v1,v2");
    while (r.next(tok, ',')) {
      if (tok.size() < 3) r.fail("short element row");
      Triangle t{};
      for (int k = 0; k < 3; ++k) {
        const long idx = to_int(tok[k], r);
        if (idx < 0 || idx >= static_cast<long>(x.size()))
          r.fail("vertex index " + std::to_string(idx) + " out of range");
        t[k] = static_cast<int>(idx);
      }
      tris.push_back(t);
    }
  }
  SimplicialMesh2D mesh(std::move(x), std::move(tris));
  return has_marker ? mesh.with_node_markers(markers) : mesh;
}

void write_node_ele(const fs::path& stem_in, const SimplicialMesh2D& mesh) {
  const fs::path stem = stem_of(stem_in);
  {
    auto out = open_out(stem.string() + ".node.csv");
    const auto nm = mesh.node_markers();
    out << (mesh.has_markers() ? "x,y,marker\n" : "x,y\n");
    for (int i = 0; i < mesh.num_vertices(); ++i) {
      out << mesh.vertices()[i].x() << ',' << mesh.vertices()[i].y();
      if (mesh.has_markers()) out << ',' << nm[i];
      out << '\n';
    }
  }
  auto out = open_out(stem.string() + ".ele.csv");
  out << "v0,v1,v2\n";
  for (const auto& t : mesh.triangles()) out << t[0] << ',' << t[1] << ',' << t[2] << '\n';
}

SimplicialMesh2D read_mesh(const fs::path& path) {
  if (ends_with(path.string(), ".off")) return read_off_2d(path);
  return read_node_ele(path);
}

void write_mesh(const fs::path& path, const SimplicialMesh2D& mesh) {
  if (ends_with(path.string(), ".off"))
    write_off(path, mesh);
  else
    write_node_ele(path, mesh);
}

}  // namespace shapeflow::mesh

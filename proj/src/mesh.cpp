#include "pnewton/mesh.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

#include <Eigen/LU>

namespace pnewton {

ParseError::ParseError(const std::string& file, std::size_t line, const std::string& what)
    : std::runtime_error(file + (line ? ":" + std::to_string(line) : std::string()) + ": " + what),
      line_(line) {}

Mat3 edge_matrix(const Vec3& p0, const Vec3& p1, const Vec3& p2, const Vec3& p3) {
  Mat3 D;
  D.col(0) = p1 - p0;
  D.col(1) = p2 - p0;
  D.col(2) = p3 - p0;
  return D;
}

double signed_volume(const Vec3& p0, const Vec3& p1, const Vec3& p2, const Vec3& p3) {
  return edge_matrix(p0, p1, p2, p3).determinant() / 6.0;
}

TetMesh::TetMesh(std::vector<Vec3> rest_positions, std::vector<Tet> tets)
    : rest_positions_(std::move(rest_positions)), tets_(std::move(tets)) {
  const int n = static_cast<int>(rest_positions_.size());
  rest_shape_inv_.reserve(tets_.size());
  rest_volume_.reserve(tets_.size());
  for (std::size_t i = 0; i < tets_.size(); ++i) {
    const Tet& t = tets_[i];
    for (int a = 0; a < 4; ++a) {
      if (t[a] < 0 || t[a] >= n)
        throw std::invalid_argument("tet " + std::to_string(i) + ": vertex index " +
                                    std::to_string(t[a]) + " out of range");
      for (int b = 0; b < a; ++b)
        if (t[a] == t[b])
          throw std::invalid_argument("tet " + std::to_string(i) + ": repeated vertex " +
                                      std::to_string(t[a]));
    }
    const Mat3 Dm = edge_matrix(rest_positions_[t[0]], rest_positions_[t[1]],
                                rest_positions_[t[2]], rest_positions_[t[3]]);
    const double vol = Dm.determinant() / 6.0;
    if (!(vol > 0.0))
      throw std::invalid_argument("tet " + std::to_string(i) + ": non-positive rest volume");
    rest_shape_inv_.push_back(Dm.inverse());
    rest_volume_.push_back(vol);
  }
}

double TetMesh::total_volume() const {
  double v = 0.0;
  for (double vol : rest_volume_) v += vol;
  return v;
}

std::pair<Vec3, Vec3> TetMesh::bounds() const {
  Vec3 lo = Vec3::Constant(std::numeric_limits<double>::infinity());
  Vec3 hi = -lo;
  for (const Vec3& p : rest_positions_) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  return {lo, hi};
}

Eigen::VectorXd TetMesh::rest_vector() const {
  Eigen::VectorXd x(3 * rest_positions_.size());
  for (std::size_t v = 0; v < rest_positions_.size(); ++v) x.segment<3>(3 * v) = rest_positions_[v];
  return x;
}

TetMesh generate_beam(int nx, int ny, int nz, const Vec3& dims) {
  if (nx < 1 || ny < 1 || nz < 1)
    throw std::invalid_argument("generate_beam: cell counts must be >= 1");
  if (!(dims.array() > 0.0).all() || !dims.allFinite())
    throw std::invalid_argument("generate_beam: extents must be positive");

  auto vid = [&](int i, int j, int k) { return i + (nx + 1) * (j + (ny + 1) * k); };

  std::vector<Vec3> pts;
  pts.reserve(static_cast<std::size_t>(nx + 1) * (ny + 1) * (nz + 1));
  for (int k = 0; k <= nz; ++k)
    for (int j = 0; j <= ny; ++j)
      for (int i = 0; i <= nx; ++i)
        pts.emplace_back(dims.x() * i / nx, dims.y() * j / ny, dims.z() * k / nz);

  // Kuhn split: one tet per axis permutation, walking 000 -> 111.
  static constexpr std::array<std::array<int, 3>, 6> kPerms{{
      {0, 1, 2}, {0, 2, 1}, {1, 0, 2}, {1, 2, 0}, {2, 0, 1}, {2, 1, 0}}};

  std::vector<Tet> tets;
  tets.reserve(static_cast<std::size_t>(6) * nx * ny * nz);
  for (int k = 0; k < nz; ++k)
    for (int j = 0; j < ny; ++j)
      for (int i = 0; i < nx; ++i)
        for (const auto& perm : kPerms) {
          std::array<int, 3> c{i, j, k};
          Tet t;
          t[0] = vid(c[0], c[1], c[2]);
          for (int s = 0; s < 3; ++s) {
            ++c[perm[s]];
            t[s + 1] = vid(c[0], c[1], c[2]);
          }
          if (signed_volume(pts[t[0]], pts[t[1]], pts[t[2]], pts[t[3]]) < 0.0)
            std::swap(t[2], t[3]);
          tets.push_back(t);
        }
  return TetMesh(std::move(pts), std::move(tets));
}

namespace {

struct Line {
  std::size_t number;
  std::vector<std::string_view> tokens;
};

// Non-empty, non-comment lines split on whitespace. Trailing '#' comments
// are stripped as well.
std::vector<Line> tokenize(std::string_view text) {
  std::vector<Line> lines;
  std::size_t number = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view raw = text.substr(pos, end - pos);
    ++number;
    if (auto hash = raw.find('#'); hash != std::string_view::npos) raw = raw.substr(0, hash);
    Line line{number, {}};
    std::size_t i = 0;
    while (i < raw.size()) {
      while (i < raw.size() && std::isspace(static_cast<unsigned char>(raw[i]))) ++i;
      std::size_t j = i;
      while (j < raw.size() && !std::isspace(static_cast<unsigned char>(raw[j]))) ++j;
      if (j > i) line.tokens.push_back(raw.substr(i, j - i));
      i = j;
    }
    if (!line.tokens.empty()) lines.push_back(std::move(line));
    if (end == text.size()) break;
    pos = end + 1;
  }
  return lines;
}

long parse_int(std::string_view tok, const char* file, std::size_t line) {
  long v = 0;
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc() || ptr != tok.data() + tok.size())
    throw ParseError(file, line, "expected integer, got '" + std::string(tok) + "'");
  return v;
}

double parse_double(std::string_view tok, const char* file, std::size_t line) {
  std::string s(tok);
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end != s.c_str() + s.size() || !std::isfinite(v))
    throw ParseError(file, line, "expected number, got '" + s + "'");
  return v;
}

}  // namespace

TetMesh load_tetgen(std::string_view node_text, std::string_view ele_text) {
  const auto node_lines = tokenize(node_text);
  const auto ele_lines = tokenize(ele_text);
  if (node_lines.empty()) throw ParseError(".node", 0, "missing header");
  if (ele_lines.empty()) throw ParseError(".ele", 0, "missing header");

  const Line& nh = node_lines.front();
  if (nh.tokens.size() < 2) throw ParseError(".node", nh.number, "malformed header");
  const long num_nodes = parse_int(nh.tokens[0], ".node", nh.number);
  const long dim = parse_int(nh.tokens[1], ".node", nh.number);
  const long num_attrs = nh.tokens.size() > 2 ? parse_int(nh.tokens[2], ".node", nh.number) : 0;
  const long markers = nh.tokens.size() > 3 ? parse_int(nh.tokens[3], ".node", nh.number) : 0;
  if (num_nodes < 0 || dim != 3 || num_attrs < 0 || (markers != 0 && markers != 1))
    throw ParseError(".node", nh.number, "malformed header");
  if (static_cast<long>(node_lines.size()) - 1 < num_nodes)
    throw ParseError(".node", 0, "expected " + std::to_string(num_nodes) + " node records");

  std::vector<long> ids(num_nodes);
  std::vector<Vec3> raw(num_nodes);
  for (long i = 0; i < num_nodes; ++i) {
    const Line& l = node_lines[i + 1];
    if (static_cast<long>(l.tokens.size()) < 4 + num_attrs + markers)
      throw ParseError(".node", l.number, "too few fields");
    ids[i] = parse_int(l.tokens[0], ".node", l.number);
    for (int a = 0; a < 3; ++a) raw[i][a] = parse_double(l.tokens[1 + a], ".node", l.number);
  }
  const long base = num_nodes ? *std::min_element(ids.begin(), ids.end()) : 0;
  if (base != 0 && base != 1) throw ParseError(".node", node_lines[1].number, "node indices must start at 0 or 1");
  std::vector<Vec3> pts(num_nodes);
  std::vector<bool> seen(num_nodes, false);
  for (long i = 0; i < num_nodes; ++i) {
    const long slot = ids[i] - base;
    if (slot < 0 || slot >= num_nodes || seen[slot])
      throw ParseError(".node", node_lines[i + 1].number, "node index out of range or repeated");
    seen[slot] = true;
    pts[slot] = raw[i];
  }

  const Line& eh = ele_lines.front();
  if (eh.tokens.size() < 2) throw ParseError(".ele", eh.number, "malformed header");
  const long num_tets = parse_int(eh.tokens[0], ".ele", eh.number);
  const long per_tet = parse_int(eh.tokens[1], ".ele", eh.number);
  const long region = eh.tokens.size() > 2 ? parse_int(eh.tokens[2], ".ele", eh.number) : 0;
  if (num_tets < 0 || per_tet != 4 || region < 0)
    throw ParseError(".ele", eh.number, "malformed header (only 4-node tets are supported)");
  if (static_cast<long>(ele_lines.size()) - 1 < num_tets)
    throw ParseError(".ele", 0, "expected " + std::to_string(num_tets) + " tet records");

  Vec3 lo = Vec3::Zero(), hi = Vec3::Zero();
  if (!pts.empty()) {
    lo = hi = pts.front();
    for (const Vec3& p : pts) {
      lo = lo.cwiseMin(p);
      hi = hi.cwiseMax(p);
    }
  }
  const double bbox_volume = (hi - lo).prod();
  const double degenerate = num_tets ? 1e-14 * bbox_volume / static_cast<double>(num_tets) : 0.0;

  std::vector<Tet> tets(num_tets);
  for (long i = 0; i < num_tets; ++i) {
    const Line& l = ele_lines[i + 1];
    if (l.tokens.size() < 5) throw ParseError(".ele", l.number, "too few fields");
    Tet t;
    for (int a = 0; a < 4; ++a) {
      const long idx = parse_int(l.tokens[1 + a], ".ele", l.number) - base;
      if (idx < 0 || idx >= num_nodes)
        throw ParseError(".ele", l.number, "vertex index " + std::string(l.tokens[1 + a]) + " out of range");
      t[a] = static_cast<int>(idx);
    }
    double vol = signed_volume(pts[t[0]], pts[t[1]], pts[t[2]], pts[t[3]]);
    if (std::abs(vol) <= degenerate) throw ParseError(".ele", l.number, "degenerate tet");
    if (vol < 0.0) std::swap(t[2], t[3]);
    tets[i] = t;
  }
  return TetMesh(std::move(pts), std::move(tets));
}

TetMesh load_tetgen_files(const std::string& stem) {
  auto slurp = [](const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
  };
  return load_tetgen(slurp(stem + ".node"), slurp(stem + ".ele"));
}

TetgenText write_tetgen(const TetMesh& mesh) {
  std::ostringstream node;
  node << std::setprecision(std::numeric_limits<double>::max_digits10);
  node << mesh.num_vertices() << " 3 0 0\n";
  for (std::size_t v = 0; v < mesh.num_vertices(); ++v) {
    const Vec3& p = mesh.rest_positions()[v];
    node << v << ' ' << p.x() << ' ' << p.y() << ' ' << p.z() << '\n';
  }
  std::ostringstream ele;
  ele << mesh.num_tets() << " 4 0\n";
  for (std::size_t i = 0; i < mesh.num_tets(); ++i) {
    const Tet& t = mesh.tets()[i];
    ele << i << ' ' << t[0] << ' ' << t[1] << ' ' << t[2] << ' ' << t[3] << '\n';
  }
  return {node.str(), ele.str()};
}

std::vector<int> select_vertices(const TetMesh& mesh, const VertexPredicate& pred) {
  if (pred.axis < 0 || pred.axis > 2) throw std::invalid_argument("select_vertices: axis must be 0, 1 or 2");
  if (!(pred.fraction >= 0.0 && pred.fraction <= 1.0))
    throw std::invalid_argument("select_vertices: fraction must lie in [0, 1]");
  const auto [lo, hi] = mesh.bounds();
  const double extent = hi[pred.axis] - lo[pred.axis];
  const double threshold = lo[pred.axis] + pred.fraction * extent;
  const double slack = 1e-9 * extent;
  std::vector<int> out;
  for (std::size_t v = 0; v < mesh.num_vertices(); ++v) {
    const double c = mesh.rest_positions()[v][pred.axis];
    const bool inside = pred.cmp == Comparison::LessEqual ? c <= threshold + slack : c >= threshold - slack;
    if (inside) out.push_back(static_cast<int>(v));
  }
  return out;
}

std::vector<int> select_vertices(const TetMesh& mesh, const std::vector<VertexPredicate>& preds) {
  std::vector<int> out;
  for (const auto& p : preds) {
    auto s = select_vertices(mesh, p);
    out.insert(out.end(), s.begin(), s.end());
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

}  // namespace pnewton

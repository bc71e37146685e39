#pragma once

#include <array>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

namespace pnewton {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Tet = std::array<int, 4>;

/// Thrown by the TetGen reader; carries the 1-based line number of the
/// offending record (0 when the error is not tied to a line).
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& file, std::size_t line, const std::string& what);
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

/// Tetrahedral rest geometry with per-element precomputed rest data.
///
/// Every tet is positively oriented: rest_volume[i] = det(Dm)/6 > 0 where
/// Dm = [x1 - x0, x2 - x0, x3 - x0].
class TetMesh {
 public:
  TetMesh() = default;
  /// Validates connectivity and computes rest data. Throws
  /// std::invalid_argument on out-of-range/repeated indices or
  /// non-positive volumes.
  TetMesh(std::vector<Vec3> rest_positions, std::vector<Tet> tets);

  const std::vector<Vec3>& rest_positions() const { return rest_positions_; }
  const std::vector<Tet>& tets() const { return tets_; }
  const std::vector<Mat3>& rest_shape_inv() const { return rest_shape_inv_; }
  const std::vector<double>& rest_volume() const { return rest_volume_; }

  std::size_t num_vertices() const { return rest_positions_.size(); }
  std::size_t num_tets() const { return tets_.size(); }
  double total_volume() const;

  /// Axis-aligned bounding box of the rest positions.
  std::pair<Vec3, Vec3> bounds() const;

  /// Rest positions flattened as [x0 y0 z0 x1 ...].
  Eigen::VectorXd rest_vector() const;

 private:
  std::vector<Vec3> rest_positions_;
  std::vector<Tet> tets_;
  std::vector<Mat3> rest_shape_inv_;
  std::vector<double> rest_volume_;
};

/// Edge matrix [p1 - p0, p2 - p0, p3 - p0].
Mat3 edge_matrix(const Vec3& p0, const Vec3& p1, const Vec3& p2, const Vec3& p3);

/// Signed volume det(edge_matrix)/6.
double signed_volume(const Vec3& p0, const Vec3& p1, const Vec3& p2, const Vec3& p3);

/// Hex-grid beam spanning [0, dims] with each cell split into 6 tets
/// (Kuhn triangulation). Vertex (i, j, k) has index i + (nx+1)*(j + (ny+1)*k).
TetMesh generate_beam(int nx, int ny, int nz, const Vec3& dims);

/// Reads TetGen .node/.ele text. Node indices may be 0- or 1-based; the
/// base is the smallest node index. Negatively oriented tets are repaired
/// by swapping their last two vertices.
TetMesh load_tetgen(std::string_view node_text, std::string_view ele_text);

/// Reads `<stem>.node` and `<stem>.ele` from disk.
TetMesh load_tetgen_files(const std::string& stem);

struct TetgenText {
  std::string node;
  std::string ele;
};

/// Writes 0-based TetGen text with full round-trip precision.
TetgenText write_tetgen(const TetMesh& mesh);

enum class Comparison { LessEqual, GreaterEqual };

/// Half-space test against a fraction of the bounding box along one axis:
/// the threshold is lo + fraction * (hi - lo), compared with a slack of
/// 1e-9 * (hi - lo) so grid layers land on the intended side.
struct VertexPredicate {
  int axis = 0;
  Comparison cmp = Comparison::GreaterEqual;
  double fraction = 1.0;
};

/// Sorted indices of vertices satisfying the predicate.
std::vector<int> select_vertices(const TetMesh& mesh, const VertexPredicate& pred);

/// Union of several predicates, sorted and unique.
std::vector<int> select_vertices(const TetMesh& mesh, const std::vector<VertexPredicate>& preds);

}  // namespace pnewton

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "pnewton/deformation.hpp"
#include "pnewton/mesh.hpp"
#include "test_support.hpp"

using namespace pnewton;

namespace {

// Independent determinant: scalar triple product written out.
double triple_volume(const Vec3& a, const Vec3& b, const Vec3& c, const Vec3& d) {
  const Vec3 u = b - a, v = c - a, w = d - a;
  return (u.x() * (v.y() * w.z() - v.z() * w.y()) - u.y() * (v.x() * w.z() - v.z() * w.x()) +
          u.z() * (v.x() * w.y() - v.y() * w.x())) /
         6.0;
}

const char* kNode0 =
    "# five points\n"
    "5 3 0 0\n"
    "0 0 0 0\n"
    "1 1 0 0\n"
    "2 0 1 0\n"
    "3 0 0 1\n"
    "4 1 1 1\n";

// Second tet is listed with negative orientation on purpose.
const char* kEle0 =
    "2 4 0\n"
    "0 0 1 2 3\n"
    "1 1 3 2 4  # flipped\n";

const char* kNode1 =
    "5 3 0 1\n"
    "1 0 0 0 7\n"
    "2 1 0 0 7\n"
    "3 0 1 0 7\n"
    "4 0 0 1 7\n"
    "5 1 1 1 7\n";

const char* kEle1 =
    "2 4 1\n"
    "1 1 2 3 4 9\n"
    "2 2 4 3 5 9\n";

}  // namespace

TEST_CASE("generate_beam: unit cube splits into six tets") {
  const TetMesh m = generate_beam(1, 1, 1, Vec3(1, 1, 1));
  CHECK(m.num_vertices() == 8);
  CHECK(m.num_tets() == 6);
  CHECK(m.total_volume() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("generate_beam: two cells") {
  const TetMesh m = generate_beam(2, 1, 1, Vec3(2, 1, 1));
  CHECK(m.num_vertices() == 12);
  CHECK(m.num_tets() == 12);
  CHECK(m.total_volume() == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("generate_beam: 4x4x12 tets are all positive with equal volume") {
  const TetMesh m = generate_beam(4, 4, 12, Vec3(1, 1, 3));
  REQUIRE(m.num_tets() == 1152);
  const double cell = 0.25 * 0.25 * 0.25;
  double vmin = 1e300;
  for (const Tet& t : m.tets()) {
    const auto& p = m.rest_positions();
    const double v = triple_volume(p[t[0]], p[t[1]], p[t[2]], p[t[3]]);
    CHECK(v > 0.0);
    vmin = std::min(vmin, v);
  }
  CHECK(vmin == doctest::Approx(cell / 6.0).epsilon(1e-12));
  CHECK(std::abs(m.total_volume() - 3.0) < 1e-10 * 3.0);
}

TEST_CASE("generate_beam: invalid arguments") {
  CHECK_THROWS_AS(generate_beam(0, 1, 1, Vec3(1, 1, 1)), std::invalid_argument);
  CHECK_THROWS_AS(generate_beam(1, -2, 1, Vec3(1, 1, 1)), std::invalid_argument);
  CHECK_THROWS_AS(generate_beam(1, 1, 1, Vec3(1, 0, 1)), std::invalid_argument);
  CHECK_THROWS_AS(generate_beam(1, 1, 1, Vec3(1, 1, -3)), std::invalid_argument);
}

TEST_CASE("rest data: volume = det(Dm)/6 and rest_shape_inv * Dm = I") {
  const TetMesh m = generate_beam(2, 3, 2, Vec3(0.7, 1.3, 0.4));
  const auto& p = m.rest_positions();
  for (std::size_t i = 0; i < m.num_tets(); ++i) {
    const Tet& t = m.tets()[i];
    const Mat3 Dm = edge_matrix(p[t[0]], p[t[1]], p[t[2]], p[t[3]]);
    CHECK(m.rest_volume()[i] == doctest::Approx(triple_volume(p[t[0]], p[t[1]], p[t[2]], p[t[3]])).epsilon(1e-12));
    CHECK((m.rest_shape_inv()[i] * Dm - Mat3::Identity()).norm() < 1e-12);
  }
}

TEST_CASE("TetMesh rejects bad connectivity") {
  std::vector<Vec3> pts{{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {0, 0, 1}};
  CHECK_THROWS_AS(TetMesh(pts, {{0, 1, 2, 4}}), std::invalid_argument);
  CHECK_THROWS_AS(TetMesh(pts, {{0, 1, 1, 3}}), std::invalid_argument);
  CHECK_THROWS_AS(TetMesh(pts, {{0, 2, 1, 3}}), std::invalid_argument);  // negative volume
  CHECK_NOTHROW(TetMesh(pts, {{0, 1, 2, 3}}));
}

TEST_CASE("load_tetgen: hand-written two-tet file") {
  const TetMesh m = load_tetgen(kNode0, kEle0);
  REQUIRE(m.num_tets() == 2);
  // Hand-evaluated determinants: the corner tet is 1/6, the other 2/6.
  CHECK(m.rest_volume()[0] == doctest::Approx(1.0 / 6.0).epsilon(1e-14));
  CHECK(m.rest_volume()[1] == doctest::Approx(1.0 / 3.0).epsilon(1e-14));
  for (double v : m.rest_volume()) CHECK(v > 0.0);
}

TEST_CASE("load_tetgen: 1-based input equals its 0-based rewrite") {
  const TetMesh a = load_tetgen(kNode0, kEle0);
  const TetMesh b = load_tetgen(kNode1, kEle1);
  REQUIRE(a.num_vertices() == b.num_vertices());
  for (std::size_t v = 0; v < a.num_vertices(); ++v) CHECK(a.rest_positions()[v] == b.rest_positions()[v]);
  CHECK(a.tets() == b.tets());
}

TEST_CASE("load_tetgen: errors carry line numbers") {
  SUBCASE("repeated vertex is degenerate") {
    try {
      load_tetgen(kNode0, "1 4 0\n0 0 1 1 3\n");
      FAIL("expected ParseError");
    } catch (const ParseError& e) {
      CHECK(e.line() == 2);
      CHECK(std::string(e.what()).find("degenerate") != std::string::npos);
    }
  }
  SUBCASE("coplanar points are degenerate") {
    const char* node = "4 3 0 0\n0 0 0 0\n1 1 0 0\n2 0 1 0\n3 1 1 0\n";
    CHECK_THROWS_AS(load_tetgen(node, "1 4 0\n0 0 1 2 3\n"), ParseError);
  }
  SUBCASE("index out of range") {
    try {
      load_tetgen(kNode0, "2 4 0\n0 0 1 2 3\n\n1 1 2 3 9\n");
      FAIL("expected ParseError");
    } catch (const ParseError& e) {
      CHECK(e.line() == 4);
    }
  }
  SUBCASE("malformed header") {
    CHECK_THROWS_AS(load_tetgen("5 2 0 0\n", kEle0), ParseError);
    CHECK_THROWS_AS(load_tetgen(kNode0, "2 10 0\n"), ParseError);
    CHECK_THROWS_AS(load_tetgen("abc\n", kEle0), ParseError);
    CHECK_THROWS_AS(load_tetgen("", kEle0), ParseError);
  }
  SUBCASE("missing records") { CHECK_THROWS_AS(load_tetgen(kNode0, "3 4 0\n0 0 1 2 3\n"), ParseError); }
}

TEST_CASE("write_tetgen / load_tetgen round trip") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> jitter(-0.05, 0.05);
  const TetMesh beam = generate_beam(2, 2, 3, Vec3(1.1, 0.9, 2.3));
  std::vector<Vec3> pts = beam.rest_positions();
  for (Vec3& p : pts) p += Vec3(jitter(rng), jitter(rng), jitter(rng)) / 3.0;
  const TetMesh mesh(pts, beam.tets());
  const TetgenText text = write_tetgen(mesh);
  const TetMesh back = load_tetgen(text.node, text.ele);
  CHECK(back.tets() == mesh.tets());
  for (std::size_t v = 0; v < mesh.num_vertices(); ++v)
    CHECK((back.rest_positions()[v] - mesh.rest_positions()[v]).norm() < 1e-12);
}

TEST_CASE("select_vertices") {
  const TetMesh cube = generate_beam(1, 1, 1, Vec3(1, 1, 1));
  auto lo = select_vertices(cube, VertexPredicate{0, Comparison::LessEqual, 0.0 + 1e-9});
  auto hi = select_vertices(cube, VertexPredicate{0, Comparison::GreaterEqual, 1.0 - 1e-9});
  REQUIRE(lo.size() == 4);
  REQUIRE(hi.size() == 4);
  for (int v : lo) CHECK(cube.rest_positions()[v].x() == 0.0);
  for (int v : hi) CHECK(cube.rest_positions()[v].x() == 1.0);

  const TetMesh beam = generate_beam(4, 4, 12, Vec3(1, 1, 3));
  const auto top = select_vertices(beam, VertexPredicate{2, Comparison::GreaterEqual, 0.98});
  CHECK(top.size() == 25);
  for (int v : top) CHECK(beam.rest_positions()[v].z() == doctest::Approx(3.0));

  const auto both = select_vertices(beam, std::vector<VertexPredicate>{{2, Comparison::LessEqual, 0.0},
                                                                       {2, Comparison::GreaterEqual, 1.0}});
  CHECK(both.size() == 50);
  CHECK(std::is_sorted(both.begin(), both.end()));

  CHECK_THROWS_AS(select_vertices(beam, VertexPredicate{3, Comparison::LessEqual, 0.5}), std::invalid_argument);
  CHECK_THROWS_AS(select_vertices(beam, VertexPredicate{0, Comparison::LessEqual, 1.5}), std::invalid_argument);
}

TEST_CASE("apply_initial_deformation: stretch") {
  const TetMesh cube = generate_beam(1, 1, 1, Vec3(1, 1, 1));
  const auto handles = select_vertices(cube, VertexPredicate{0, Comparison::GreaterEqual, 1.0});
  const auto init = apply_initial_deformation(cube, Stretch{0, 3.0}, handles);
  for (std::size_t v = 0; v < cube.num_vertices(); ++v) {
    const Vec3& r = cube.rest_positions()[v];
    CHECK(init.initial_positions[v].x() == doctest::Approx(3.0 * r.x()));
    CHECK(init.initial_positions[v].y() == r.y());
  }
  REQUIRE(init.handle_targets.size() == 4);
  for (const Vec3& t : init.handle_targets) CHECK(t.x() == doctest::Approx(3.0));
}

TEST_CASE("apply_initial_deformation: identity stretch is exact") {
  const TetMesh beam = generate_beam(3, 2, 5, Vec3(0.3, 0.7, 1.9));
  const auto init = apply_initial_deformation(beam, Stretch{2, 1.0}, {0, 5});
  for (std::size_t v = 0; v < beam.num_vertices(); ++v) CHECK(init.initial_positions[v] == beam.rest_positions()[v]);
}

TEST_CASE("apply_initial_deformation: twist about z") {
  const TetMesh cube = generate_beam(1, 1, 1, Vec3(1, 1, 1));
  const auto init = apply_initial_deformation(cube, Twist{2, 90.0, Vec3::Zero()}, {0});
  for (std::size_t v = 0; v < cube.num_vertices(); ++v) {
    const Vec3& r = cube.rest_positions()[v];
    if (r == Vec3(1, 0, 1)) CHECK((init.initial_positions[v] - Vec3(0, 1, 1)).norm() < 1e-12);
    if (r == Vec3(1, 0, 0)) CHECK((init.initial_positions[v] - Vec3(1, 0, 0)).norm() < 1e-15);
  }
}

TEST_CASE("apply_initial_deformation: stretch composition") {
  const TetMesh beam = generate_beam(2, 2, 4, Vec3(1, 1, 2));
  const auto [lo, hi] = beam.bounds();
  const auto once = apply_transform(Stretch{0, 1.7 * 2.3}, beam.rest_positions(), lo, hi);
  const auto first = apply_transform(Stretch{0, 1.7}, beam.rest_positions(), lo, hi);
  // Bounding box min is a fixed point of the stretch, so composing with the
  // original box is the same as recomputing it.
  const auto twice = apply_transform(Stretch{0, 2.3}, first, lo, hi);
  for (std::size_t v = 0; v < once.size(); ++v) CHECK((once[v] - twice[v]).norm() < 1e-12);
}

TEST_CASE("apply_initial_deformation: handles pinned, free vertices optionally warped") {
  const TetMesh beam = generate_beam(2, 2, 4, Vec3(1, 1, 2));
  const auto handles = select_vertices(beam, VertexPredicate{2, Comparison::GreaterEqual, 1.0});
  const auto warped = apply_initial_deformation(beam, Compress{2, 0.5}, handles, true);
  const auto still = apply_initial_deformation(beam, Compress{2, 0.5}, handles, false);
  for (std::size_t i = 0; i < handles.size(); ++i) {
    CHECK(warped.initial_positions[handles[i]] == warped.handle_targets[i]);
    CHECK(still.initial_positions[handles[i]] == still.handle_targets[i]);
    CHECK(warped.handle_targets[i].z() == doctest::Approx(1.0));
  }
  int moved = 0;
  for (std::size_t v = 0; v < beam.num_vertices(); ++v) {
    if (std::binary_search(handles.begin(), handles.end(), static_cast<int>(v))) continue;
    CHECK(still.initial_positions[v] == beam.rest_positions()[v]);
    if (warped.initial_positions[v] != beam.rest_positions()[v]) ++moved;
  }
  CHECK(moved > 0);
  CHECK_THROWS_AS(apply_initial_deformation(beam, Stretch{2, 2.0}, {-1}), std::invalid_argument);
}

TEST_CASE("shear, bend and translate") {
  const TetMesh cube = generate_beam(1, 1, 1, Vec3(1, 1, 1));
  const auto [lo, hi] = cube.bounds();
  const std::vector<Vec3> pts{{0, 0, 0}, {0, 0, 1}, {1, 1, 0.5}};
  const auto sheared = apply_transform(Shear{0, 2, 0.5}, pts, lo, hi);
  CHECK(sheared[0] == Vec3(0, 0, 0));
  CHECK(sheared[1] == Vec3(0.5, 0, 1));
  CHECK(sheared[2] == Vec3(1.25, 1, 0.5));

  // Bend about x by t * 180 degrees with t along z: the top face flips.
  const auto bent = apply_transform(Bend{2, 0, 180.0, Vec3(0, 0.5, 0)}, pts, lo, hi);
  CHECK((bent[0] - pts[0]).norm() < 1e-15);
  CHECK((bent[1] - Vec3(0, 1, -1)).norm() < 1e-12);

  const auto moved = apply_transform(Translate{Vec3(1, -2, 3)}, pts, lo, hi);
  CHECK(moved[2] == Vec3(2, -1, 3.5));

  CHECK_THROWS_AS(validate(Stretch{0, 0.0}), std::invalid_argument);
  CHECK_THROWS_AS(validate(Compress{1, -1.0}), std::invalid_argument);
  CHECK_THROWS_AS(validate(Twist{2, std::nan(""), Vec3::Zero()}), std::invalid_argument);
  CHECK_THROWS_AS(validate(Shear{1, 1, 0.2}), std::invalid_argument);
}

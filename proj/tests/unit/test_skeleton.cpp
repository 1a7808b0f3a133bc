#include "chromstraight/skeleton.hpp"
#include "fixtures.hpp"
#include "reference_thinning.hpp"

#include <doctest.h>

#include <cmath>
#include <random>
#include <set>

using namespace chromstraight;

namespace {

BinaryMask rect(int w, int h, int x0, int y0, int x1, int y1) {
  BinaryMask m(w, h);
  for (int y = y0; y < y1; ++y)
    for (int x = x0; x < x1; ++x) m.set(x, y, true);
  return m;
}

Skeleton from_points(int w, int h, const std::vector<Point>& pts) {
  Skeleton s{BinaryMask(w, h)};
  for (const Point& p : pts) s.pixels.set(p.x, p.y, true);
  return s;
}

std::vector<Point> vline(int x, int y0, int y1) {
  std::vector<Point> pts;
  for (int y = y0; y <= y1; ++y) pts.push_back({x, y});
  return pts;
}

std::vector<Point> hline(int y, int x0, int x1) {
  std::vector<Point> pts;
  for (int x = x0; x <= x1; ++x) pts.push_back({x, y});
  return pts;
}

std::vector<Point> concat(std::vector<Point> a, const std::vector<Point>& b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

bool subset(const BinaryMask& a, const BinaryMask& b) {
  for (int y = 0; y < a.height(); ++y)
    for (int x = 0; x < a.width(); ++x)
      if (a(x, y) && !b(x, y)) return false;
  return true;
}

int neighbours(const BinaryMask& m, int x, int y) {
  int n = 0;
  for (int dy = -1; dy <= 1; ++dy)
    for (int dx = -1; dx <= 1; ++dx)
      if ((dx || dy) && m.at(x + dx, y + dy)) ++n;
  return n;
}

bool connected8(const BinaryMask& m) {
  std::vector<Point> stack;
  std::set<std::pair<int, int>> seen;
  for (int y = 0; y < m.height() && stack.empty(); ++y)
    for (int x = 0; x < m.width() && stack.empty(); ++x)
      if (m(x, y)) {
        stack.push_back({x, y});
        seen.insert({x, y});
      }
  while (!stack.empty()) {
    const Point p = stack.back();
    stack.pop_back();
    for (int dy = -1; dy <= 1; ++dy)
      for (int dx = -1; dx <= 1; ++dx)
        if (m.at(p.x + dx, p.y + dy) && seen.insert({p.x + dx, p.y + dy}).second)
          stack.push_back({p.x + dx, p.y + dy});
  }
  return seen.size() == m.count();
}

oracle::Grid to_grid(const BinaryMask& m) {
  oracle::Grid g(m.height(), std::vector<int>(m.width()));
  for (int y = 0; y < m.height(); ++y)
    for (int x = 0; x < m.width(); ++x) g[y][x] = m(x, y);
  return g;
}

void check_simple_path(const MedialAxis& axis) {
  std::set<std::pair<int, int>> seen;
  for (std::size_t i = 0; i < axis.size(); ++i) {
    CHECK(seen.insert({axis.points[i].x, axis.points[i].y}).second);
    if (i > 0) {
      CHECK(std::abs(axis.points[i].x - axis.points[i - 1].x) <= 1);
      CHECK(std::abs(axis.points[i].y - axis.points[i - 1].y) <= 1);
    }
  }
}

} // namespace

TEST_SUITE("skeleton") {

TEST_CASE("thinning a 3-wide vertical bar gives a centre line") {
  const BinaryMask bar = rect(9, 26, 3, 3, 6, 23);
  const Skeleton s = zhang_suen_thin(bar);
  CHECK(to_grid(s.pixels) == oracle::zhang_suen_reference(to_grid(bar)));
  // Both subpasses nibble the ends: 20 rows thin to 17 pixels.
  CHECK(s.count() == 17);
  for (int y = 0; y < 26; ++y)
    for (int x = 0; x < 9; ++x)
      if (s.pixels(x, y)) CHECK(x == 4);
}

TEST_CASE("a single pixel is a fixpoint") {
  BinaryMask m(5, 5);
  m.set(2, 2, true);
  CHECK(zhang_suen_thin(m).pixels == m);
}

TEST_CASE("a solid square thins to a small connected skeleton") {
  const BinaryMask sq = rect(26, 26, 3, 3, 23, 23);
  const Skeleton s = zhang_suen_thin(sq);
  CHECK(to_grid(s.pixels) == oracle::zhang_suen_reference(to_grid(sq)));
  CHECK(s.count() > 0);
  CHECK(subset(s.pixels, sq));
  CHECK(connected8(s.pixels));
  int ends = 0;
  for (int y = 0; y < 26; ++y)
    for (int x = 0; x < 26; ++x)
      if (s.pixels(x, y) && neighbours(s.pixels, x, y) == 1) ++ends;
  CHECK(ends <= 4);
}

TEST_CASE("thinning an empty mask raises") {
  CHECK_THROWS_AS(zhang_suen_thin(BinaryMask(4, 4)), Error);
}

TEST_CASE("thinning matches the reference and is idempotent on random blobs") {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 25; ++trial) {
    BinaryMask m(30, 30);
    const int blobs = 1 + static_cast<int>(rng() % 4);
    for (int b = 0; b < blobs; ++b) {
      const int cx = 5 + static_cast<int>(rng() % 20), cy = 5 + static_cast<int>(rng() % 20);
      const int rx = 2 + static_cast<int>(rng() % 6), ry = 2 + static_cast<int>(rng() % 6);
      for (int y = cy - ry; y <= cy + ry; ++y)
        for (int x = cx - rx; x <= cx + rx; ++x)
          if (m.contains(x, y)) m.set(x, y, true);
    }
    const Skeleton s = zhang_suen_thin(m);
    CHECK(to_grid(s.pixels) == oracle::zhang_suen_reference(to_grid(m)));
    CHECK(subset(s.pixels, m));
    CHECK(zhang_suen_thin(s.pixels) == s);
  }
}

TEST_CASE("trace a straight line") {
  const auto r = trace_axis(from_points(12, 5, hline(2, 1, 10)));
  REQUIRE(std::holds_alternative<MedialAxis>(r));
  const MedialAxis& axis = std::get<MedialAxis>(r);
  CHECK(axis.size() == 10);
  check_simple_path(axis);
  CHECK(axis.arc_length() == doctest::Approx(9.0));
}

TEST_CASE("trace a Y reports one junction and three branches") {
  std::vector<Point> pts = vline(10, 10, 20);
  for (int i = 1; i <= 6; ++i) {
    pts.push_back({10 - i, 10 - i});
    pts.push_back({10 + i, 10 - i});
  }
  const auto r = trace_axis(from_points(21, 22, pts));
  REQUIRE(std::holds_alternative<BranchReport>(r));
  const BranchReport& rep = std::get<BranchReport>(r);
  CHECK(rep.junctions.size() == 1);
  CHECK(rep.branches.size() == 3);
  CHECK_FALSE(rep.describe().empty());
}

TEST_CASE("trace an L through its corner") {
  const std::vector<Point> pts = concat(vline(2, 2, 10), hline(10, 3, 9));
  const auto r = trace_axis(from_points(12, 12, pts));
  REQUIRE(std::holds_alternative<MedialAxis>(r));
  const MedialAxis& axis = std::get<MedialAxis>(r);
  CHECK(axis.size() == pts.size());
  check_simple_path(axis);
  // Starts at the top end and passes the corner.
  CHECK(axis.points.front() == Point{2, 2});
  CHECK(axis.points.back() == Point{9, 10});
  CHECK(axis.points[8] == Point{2, 10});
}

TEST_CASE("trace rejects cycles and disconnected skeletons") {
  std::vector<Point> square = concat(hline(2, 2, 8), hline(8, 2, 8));
  square = concat(square, vline(2, 3, 7));
  square = concat(square, vline(8, 3, 7));
  CHECK_THROWS_AS(trace_axis(from_points(11, 11, square)), Error);
  CHECK_THROWS_AS(trace_axis(from_points(20, 5, concat(hline(1, 1, 5), hline(3, 10, 15)))),
                  Error);
}

TEST_CASE("pruning a simple path changes nothing") {
  const Skeleton s = from_points(30, 30, concat(vline(3, 2, 20), hline(20, 4, 25)));
  for (double ratio : {0.0, 0.1, 0.5}) CHECK(prune_branches(s, ratio) == s);
}

TEST_CASE("a short spur is pruned") {
  const std::vector<Point> main = vline(20, 0, 99);
  const std::vector<Point> spur = hline(50, 21, 25);
  const Skeleton s = from_points(40, 100, concat(main, spur));
  const Skeleton pruned = prune_branches(s, 0.1);
  CHECK(pruned == from_points(40, 100, main));
  CHECK(subset(pruned.pixels, s.pixels));
}

TEST_CASE("a long branch cannot be pruned") {
  const Skeleton s = from_points(70, 100, concat(vline(20, 0, 99), hline(50, 21, 60)));
  try {
    prune_branches(s, 0.1);
    FAIL("expected PruneError");
  } catch (const PruneError& e) {
    CHECK(e.report().junctions.size() == 1);
    CHECK(e.report().branches.size() == 3);
    bool has_long = false;
    for (const Branch& b : e.report().branches) has_long |= b.length() == 40;
    CHECK(has_long);
  }
}

TEST_CASE("extend leaves an axis that already reaches both ends") {
  const BinaryMask bar = rect(30, 70, 10, 5, 19, 65);
  MedialAxis axis{vline(14, 5, 64)};
  const MedialAxis out = extend_axis(axis, bar);
  CHECK(out.points == axis.points);
}

TEST_CASE("extend grows a short end down to the bar end") {
  const BinaryMask bar = rect(30, 70, 10, 5, 19, 65);
  MedialAxis axis{vline(14, 5, 54)};
  const MedialAxis out = extend_axis(axis, bar);
  const auto added = static_cast<long>(out.size()) - static_cast<long>(axis.size());
  CHECK(added >= 9);
  CHECK(added <= 11);
  CHECK(out.points.back().y >= 63);
  CHECK(out.arc_length() >= axis.arc_length());
  for (const Point& p : out.points) CHECK(bar.at(p.x, p.y));
  check_simple_path(out);
}

TEST_CASE("short gaps are left alone") {
  const BinaryMask bar = rect(30, 70, 10, 5, 19, 65);
  MedialAxis axis{vline(14, 5, 59)};  // 5 px short
  CHECK(extend_axis(axis, bar).size() == axis.size());
  CHECK(extend_axis(axis, bar, 0).size() == axis.size() + 5);
}

TEST_CASE("extending a single point raises") {
  const BinaryMask bar = rect(10, 10, 2, 2, 8, 8);
  CHECK_THROWS_AS(extend_axis(MedialAxis{{{5, 5}}}, bar), Error);
}

TEST_CASE("extension stays inside the mask on tilted bars") {
  for (int k = 0; k < 12; ++k) {
    const double a = 0.2 * k;
    const double cx = 40, cy = 40, r = 28;
    const GrayImage img = testing::capsule(81, 81, cx - r * std::sin(a), cy - r * std::cos(a),
                                           cx + r * std::sin(a), cy + r * std::cos(a), 4.5);
    BinaryMask mask(81, 81);
    for (int y = 0; y < 81; ++y)
      for (int x = 0; x < 81; ++x) mask.set(x, y, img(x, y) < 125);
    const Skeleton s = prune_branches(zhang_suen_thin(mask));
    const auto traced = trace_axis(s);
    REQUIRE(std::holds_alternative<MedialAxis>(traced));
    const MedialAxis& axis = std::get<MedialAxis>(traced);
    const MedialAxis ext = extend_axis(axis, mask);
    CHECK(ext.arc_length() >= axis.arc_length());
    for (const Point& p : ext.points) CHECK(mask.at(p.x, p.y));
  }
}

TEST_CASE("axis of a straight bar lies on its centre line") {
  const GrayImage img = testing::capsule(41, 101, 20, 15, 20, 85, 5.5);
  BinaryMask mask(41, 101);
  for (int y = 0; y < 101; ++y)
    for (int x = 0; x < 41; ++x) mask.set(x, y, img(x, y) < 125);
  const MedialAxis axis = extract_axis(mask);
  REQUIRE(axis.size() > 60);
  double sq = 0.0;
  for (const Point& p : axis.points) sq += (p.x - 20.0) * (p.x - 20.0);
  CHECK(std::sqrt(sq / static_cast<double>(axis.size())) <= 1.0);
  check_simple_path(axis);
}

TEST_CASE("end direction points outward") {
  const MedialAxis axis{vline(5, 0, 9)};
  const Direction tail = end_direction(axis, false);
  const Direction head = end_direction(axis, true);
  CHECK(tail.dx == doctest::Approx(0.0));
  CHECK(tail.dy == doctest::Approx(1.0));
  CHECK(head.dy == doctest::Approx(-1.0));
}

TEST_CASE("foreground run counts steps to the background") {
  const BinaryMask bar = rect(10, 30, 2, 0, 8, 20);
  CHECK(foreground_run(bar, {4, 10}, {0.0, 1.0}) == 9);
  CHECK(foreground_run(bar, {4, 19}, {0.0, 1.0}) == 0);
}

TEST_CASE("arc length parameterization") {
  const MedialAxis axis{vline(3, 0, 10)};
  const ArcLength arc(axis);
  CHECK(arc.length() == doctest::Approx(10.0));
  CHECK(arc.at(4.5).y == doctest::Approx(4.5));
  CHECK(arc.at(4.5).x == doctest::Approx(3.0));
  // Past the ends the parameterization continues straight.
  CHECK(arc.at(13.0).y == doctest::Approx(13.0));
  CHECK(arc.at(-2.0).y == doctest::Approx(-2.0));
}

TEST_CASE("smoothed arc length shortens a staircase") {
  std::vector<Point> stairs;
  for (int i = 0; i < 40; ++i) stairs.push_back({i / 2, i});  // slope 1/2 in pixel steps
  const MedialAxis axis{stairs};
  const double truth = std::hypot(19.5, 39.0);
  CHECK(ArcLength(axis, 5, 5).length() < ArcLength(axis).length());
  CHECK(ArcLength(axis, 5, 5).length() == doctest::Approx(truth).epsilon(0.03));
  CHECK_THROWS_AS(ArcLength(axis, 5, 2), Error);
}

}

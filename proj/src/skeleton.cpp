#include "chromstraight/skeleton.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <set>
#include <sstream>
#include <unordered_map>

namespace chromstraight {

double MedialAxis::arc_length() const {
  double length = 0.0;
  for (std::size_t i = 1; i < points.size(); ++i) {
    length += std::hypot(points[i].x - points[i - 1].x, points[i].y - points[i - 1].y);
  }
  return length;
}

std::string BranchReport::describe() const {
  std::ostringstream out;
  out << junctions.size() << " junction(s), " << branches.size() << " branch(es):";
  for (const Branch& b : branches) {
    out << " [" << b.length() << " px at (" << b.junction.x << "," << b.junction.y << ")]";
  }
  return out.str();
}

// ---------------------------------------------------------------------------
// Thinning

namespace {

// Neighbors P2..P9, clockwise from north.
constexpr int kNx[8] = {0, 1, 1, 1, 0, -1, -1, -1};
constexpr int kNy[8] = {-1, -1, 0, 1, 1, 1, 0, -1};

bool thinning_pass(BinaryMask& img, bool first) {
  std::vector<Point> doomed;
  for (int y = 0; y < img.height(); ++y) {
    for (int x = 0; x < img.width(); ++x) {
      if (!img(x, y)) {
        continue;
      }
      int p[8];
      int b = 0;
      for (int k = 0; k < 8; ++k) {
        p[k] = img.at(x + kNx[k], y + kNy[k]) ? 1 : 0;
        b += p[k];
      }
      if (b < 2 || b > 6) {
        continue;
      }
      int a = 0;
      for (int k = 0; k < 8; ++k) {
        a += (p[k] == 0 && p[(k + 1) % 8] == 1) ? 1 : 0;
      }
      if (a != 1) {
        continue;
      }
      // p[0]=P2 (N), p[2]=P4 (E), p[4]=P6 (S), p[6]=P8 (W)
      const bool c1 = first ? (p[0] * p[2] * p[4]) == 0 : (p[0] * p[2] * p[6]) == 0;
      const bool c2 = first ? (p[2] * p[4] * p[6]) == 0 : (p[0] * p[4] * p[6]) == 0;
      if (c1 && c2) {
        doomed.push_back({x, y});
      }
    }
  }
  for (const Point& q : doomed) {
    img.set(q.x, q.y, false);
  }
  return !doomed.empty();
}

} // namespace

Skeleton zhang_suen_thin(const BinaryMask& mask) {
  if (mask.count() == 0) {
    throw Error("cannot thin an empty mask");
  }
  BinaryMask img = mask;
  bool changed = true;
  while (changed) {
    changed = thinning_pass(img, true);
    changed = thinning_pass(img, false) || changed;
  }
  return Skeleton{std::move(img)};
}

// ---------------------------------------------------------------------------
// Skeleton graph

namespace {

// 8-adjacency without diagonal links that are already bridged by a shared
// 4-neighbor; this keeps staircase corners from reading as junctions.
class SkeletonGraph {
public:
  explicit SkeletonGraph(const BinaryMask& pixels) : width_(pixels.width()) {
    for (int y = 0; y < pixels.height(); ++y) {
      for (int x = 0; x < pixels.width(); ++x) {
        if (pixels(x, y)) {
          index_[key(x, y)] = static_cast<int>(nodes_.size());
          nodes_.push_back({x, y});
        }
      }
    }
    adjacency_.resize(nodes_.size());
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
      const Point p = nodes_[i];
      for (int k = 0; k < 8; ++k) {
        const int nx = p.x + kNx[k];
        const int ny = p.y + kNy[k];
        if (!pixels.at(nx, ny)) {
          continue;
        }
        const bool diagonal = kNx[k] != 0 && kNy[k] != 0;
        if (diagonal && (pixels.at(p.x + kNx[k], p.y) || pixels.at(p.x, p.y + kNy[k]))) {
          continue;
        }
        adjacency_[i].push_back(index_.at(key(nx, ny)));
      }
    }
  }

  std::size_t size() const { return nodes_.size(); }
  Point point(int i) const { return nodes_[static_cast<std::size_t>(i)]; }
  const std::vector<int>& neighbors(int i) const {
    return adjacency_[static_cast<std::size_t>(i)];
  }
  int degree(int i) const { return static_cast<int>(neighbors(i).size()); }

  std::vector<int> nodes_with_degree(bool (*pred)(int)) const {
    std::vector<int> out;
    for (int i = 0; i < static_cast<int>(size()); ++i) {
      if (pred(degree(i))) {
        out.push_back(i);
      }
    }
    return out;
  }
  std::vector<int> endpoints() const {
    return nodes_with_degree([](int d) { return d == 1; });
  }
  std::vector<int> junctions() const {
    return nodes_with_degree([](int d) { return d >= 3; });
  }

  std::vector<int> bfs(int source) const {
    std::vector<int> dist(size(), -1);
    std::deque<int> queue{source};
    dist[static_cast<std::size_t>(source)] = 0;
    while (!queue.empty()) {
      const int u = queue.front();
      queue.pop_front();
      for (const int v : neighbors(u)) {
        if (dist[static_cast<std::size_t>(v)] < 0) {
          dist[static_cast<std::size_t>(v)] = dist[static_cast<std::size_t>(u)] + 1;
          queue.push_back(v);
        }
      }
    }
    return dist;
  }

  bool connected() const {
    if (size() == 0) {
      return false;
    }
    const auto dist = bfs(0);
    return std::none_of(dist.begin(), dist.end(), [](int d) { return d < 0; });
  }

  // Walks from an endpoint until a junction or another endpoint.
  Branch walk(int endpoint) const {
    Branch branch;
    int prev = -1;
    int cur = endpoint;
    while (true) {
      if (degree(cur) >= 3) {
        branch.junction = point(cur);
        return branch;
      }
      branch.pixels.push_back(point(cur));
      int next = -1;
      for (const int v : neighbors(cur)) {
        if (v != prev) {
          next = v;
          break;
        }
      }
      if (next < 0) {
        branch.junction = point(cur);
        return branch;
      }
      prev = cur;
      cur = next;
    }
  }

  BranchReport report() const {
    BranchReport r;
    for (const int j : junctions()) {
      r.junctions.push_back(point(j));
    }
    for (const int e : endpoints()) {
      r.branches.push_back(walk(e));
    }
    return r;
  }

private:
  long long key(int x, int y) const {
    return static_cast<long long>(y) * width_ + x;
  }

  int width_;
  std::vector<Point> nodes_;
  std::vector<std::vector<int>> adjacency_;
  std::unordered_map<long long, int> index_;
};

bool is_simple_path(const SkeletonGraph& g) {
  if (g.size() == 1) {
    return true;
  }
  int ends = 0;
  for (int i = 0; i < static_cast<int>(g.size()); ++i) {
    const int d = g.degree(i);
    if (d == 1) {
      ++ends;
    } else if (d != 2) {
      return false;
    }
  }
  return ends == 2;
}

// Top-most, then left-most endpoint first so traversal order is canonical.
int first_endpoint(const SkeletonGraph& g, const std::vector<int>& ends) {
  return *std::min_element(ends.begin(), ends.end(), [&](int a, int b) {
    const Point pa = g.point(a);
    const Point pb = g.point(b);
    return pa.y != pb.y ? pa.y < pb.y : pa.x < pb.x;
  });
}

} // namespace

std::variant<MedialAxis, BranchReport> trace_axis(const Skeleton& skeleton) {
  const SkeletonGraph g(skeleton.pixels);
  if (g.size() == 0) {
    throw Error("skeleton is empty");
  }
  if (!g.connected()) {
    throw Error("skeleton is disconnected");
  }
  if (!is_simple_path(g)) {
    if (g.junctions().empty()) {
      throw Error("skeleton is cyclic (no endpoints)");
    }
    return g.report();
  }
  MedialAxis axis;
  if (g.size() == 1) {
    axis.points.push_back(g.point(0));
    return axis;
  }
  int prev = -1;
  int cur = first_endpoint(g, g.endpoints());
  while (cur >= 0) {
    axis.points.push_back(g.point(cur));
    int next = -1;
    for (const int v : g.neighbors(cur)) {
      if (v != prev) {
        next = v;
        break;
      }
    }
    prev = cur;
    cur = next;
  }
  return axis;
}

Skeleton prune_branches(const Skeleton& skeleton, double prune_ratio) {
  if (prune_ratio < 0.0 || prune_ratio >= 1.0) {
    throw Error("prune ratio must lie in [0, 1)");
  }
  const double limit = prune_ratio * static_cast<double>(skeleton.count());
  Skeleton current = skeleton;
  while (true) {
    const SkeletonGraph g(current.pixels);
    if (g.size() == 0) {
      throw Error("skeleton is empty");
    }
    if (!g.connected()) {
      throw Error("skeleton is disconnected");
    }
    if (is_simple_path(g)) {
      return current;
    }
    const auto ends = g.endpoints();
    if (g.junctions().empty() || ends.size() < 2) {
      throw PruneError("skeleton contains a cycle that pruning cannot remove",
                       g.report());
    }

    // Longest endpoint-to-endpoint route.
    int main_a = ends[0];
    int main_b = ends[1];
    int longest = -1;
    for (const int a : ends) {
      const auto dist = g.bfs(a);
      for (const int b : ends) {
        if (b != a && dist[static_cast<std::size_t>(b)] > longest) {
          longest = dist[static_cast<std::size_t>(b)];
          main_a = a;
          main_b = b;
        }
      }
    }

    const Branch* shortest = nullptr;
    std::vector<Branch> candidates;
    for (const int e : ends) {
      if (e != main_a && e != main_b) {
        candidates.push_back(g.walk(e));
      }
    }
    for (const Branch& b : candidates) {
      if (shortest == nullptr || b.length() < shortest->length()) {
        shortest = &b;
      }
    }
    if (shortest == nullptr || static_cast<double>(shortest->length()) > limit) {
      const BranchReport report = g.report();
      throw PruneError("cannot prune skeleton to a simple path: " + report.describe(),
                       report);
    }
    for (const Point& p : shortest->pixels) {
      current.pixels.set(p.x, p.y, false);
    }
  }
}

// ---------------------------------------------------------------------------
// Axis extension

Direction end_direction(const MedialAxis& axis, bool at_front, int window) {
  if (axis.size() < 2) {
    throw Error("axis direction is undefined for fewer than two points");
  }
  const std::size_t n = std::min<std::size_t>(static_cast<std::size_t>(std::max(window, 2)),
                                              axis.size());
  std::vector<Point> tail;
  for (std::size_t i = 0; i < n; ++i) {
    tail.push_back(at_front ? axis.points[i] : axis.points[axis.size() - 1 - i]);
  }
  double mx = 0.0;
  double my = 0.0;
  for (const Point& p : tail) {
    mx += p.x;
    my += p.y;
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxx = 0.0;
  double syy = 0.0;
  double sxy = 0.0;
  for (const Point& p : tail) {
    sxx += (p.x - mx) * (p.x - mx);
    syy += (p.y - my) * (p.y - my);
    sxy += (p.x - mx) * (p.y - my);
  }
  const double theta = 0.5 * std::atan2(2.0 * sxy, sxx - syy);
  Direction dir{std::cos(theta), std::sin(theta)};
  // tail[0] is the end point; orient away from the rest of the axis.
  if (dir.dx * (tail[0].x - mx) + dir.dy * (tail[0].y - my) < 0.0) {
    dir.dx = -dir.dx;
    dir.dy = -dir.dy;
  }
  return dir;
}

std::vector<Point> march(Point from, Direction dir, int max_steps,
                         const std::function<bool(Point)>& keep) {
  std::vector<Point> out;
  Point prev = from;
  for (int k = 1; k <= max_steps; ++k) {
    const Point p{static_cast<int>(std::lround(from.x + k * dir.dx)),
                  static_cast<int>(std::lround(from.y + k * dir.dy))};
    if (p == prev) {
      continue;
    }
    if (!keep(p)) {
      break;
    }
    out.push_back(p);
    prev = p;
  }
  return out;
}

int foreground_run(const BinaryMask& mask, Point from, Direction dir) {
  const int limit = mask.width() + mask.height();
  return static_cast<int>(
      march(from, dir, limit, [&](Point p) { return mask.at(p.x, p.y); }).size());
}

MedialAxis extend_axis(const MedialAxis& axis, const BinaryMask& mask,
                       int gap_threshold, int direction_window) {
  if (axis.size() < 2) {
    throw Error("cannot extend an axis with fewer than two points");
  }
  for (const Point& end : {axis.points.front(), axis.points.back()}) {
    if (!mask.at(end.x, end.y)) {
      throw Error("axis endpoint lies outside the mask");
    }
  }
  const Direction front_dir = end_direction(axis, true, direction_window);
  const Direction back_dir = end_direction(axis, false, direction_window);

  std::set<std::pair<int, int>> used;
  for (const Point& p : axis.points) {
    used.insert({p.x, p.y});
  }
  const int limit = mask.width() + mask.height();
  auto grow = [&](Point end, Direction dir) {
    if (foreground_run(mask, end, dir) <= gap_threshold) {
      return std::vector<Point>{};
    }
    auto added = march(end, dir, limit, [&](Point p) {
      return mask.at(p.x, p.y) && !used.contains({p.x, p.y});
    });
    for (const Point& p : added) {
      used.insert({p.x, p.y});
    }
    return added;
  };

  const auto tail = grow(axis.points.back(), back_dir);
  const auto head = grow(axis.points.front(), front_dir);
  MedialAxis out;
  out.points.assign(head.rbegin(), head.rend());
  out.points.insert(out.points.end(), axis.points.begin(), axis.points.end());
  out.points.insert(out.points.end(), tail.begin(), tail.end());
  return out;
}

MedialAxis extract_axis(const BinaryMask& mask, const AxisOptions& options) {
  const Skeleton pruned = prune_branches(zhang_suen_thin(mask), options.prune_ratio);
  auto traced = trace_axis(pruned);
  if (auto* report = std::get_if<BranchReport>(&traced)) {
    throw PruneError("skeleton is not a simple path after pruning", *report);
  }
  MedialAxis axis = std::get<MedialAxis>(std::move(traced));
  if (axis.size() < 2) {
    return axis;
  }
  return extend_axis(axis, mask, options.gap_threshold, options.direction_window);
}

} // namespace chromstraight

namespace chromstraight {

ArcLength::ArcLength(const MedialAxis& axis, int end_window, int smoothing) {
  if (axis.size() == 0) {
    throw Error("cannot parameterize an empty axis");
  }
  if (smoothing < 1 || smoothing % 2 == 0) {
    throw Error("smoothing window must be odd and positive");
  }
  const int n = static_cast<int>(axis.size());
  double total = 0.0;
  for (int i = 0; i < n; ++i) {
    const int r = std::min({smoothing / 2, i, n - 1 - i});
    PointF p{0.0, 0.0};
    for (int j = i - r; j <= i + r; ++j) {
      p.x += axis.points[static_cast<std::size_t>(j)].x;
      p.y += axis.points[static_cast<std::size_t>(j)].y;
    }
    p.x /= 2 * r + 1;
    p.y /= 2 * r + 1;
    if (i > 0) {
      total += std::hypot(p.x - points_.back().x, p.y - points_.back().y);
    }
    points_.push_back(p);
    cumulative_.push_back(total);
  }
  if (axis.size() >= 2) {
    const Direction head = end_direction(axis, true, end_window);
    const Direction tail = end_direction(axis, false, end_window);
    head_dir_ = {head.dx, head.dy};
    tail_dir_ = {tail.dx, tail.dy};
  }
}

PointF ArcLength::at(double s) const {
  if (s <= 0.0) {
    return {points_.front().x - s * head_dir_.x, points_.front().y - s * head_dir_.y};
  }
  if (s >= length()) {
    const double over = s - length();
    return {points_.back().x + over * tail_dir_.x, points_.back().y + over * tail_dir_.y};
  }
  const auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), s);
  const auto i = static_cast<std::size_t>(it - cumulative_.begin());
  const double span = cumulative_[i] - cumulative_[i - 1];
  const double t = span > 0.0 ? (s - cumulative_[i - 1]) / span : 0.0;
  return {points_[i - 1].x + t * (points_[i].x - points_[i - 1].x),
          points_[i - 1].y + t * (points_[i].y - points_[i - 1].y)};
}

} // namespace chromstraight

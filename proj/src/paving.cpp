#include "doakit/paving.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

#include "json.hpp"

#include "doakit/errors.hpp"

namespace doakit {

namespace {

using Coords = std::vector<Interval>;

bool degenerate(const Coords& c) {
  return std::any_of(c.begin(), c.end(),
                     [](const Interval& i) { return i.is_empty() || !(i.lo() < i.hi()); });
}

bool coords_less(const Coords& a, const Coords& b) {
  for (std::size_t i = 0; i < a.size() && i < b.size(); ++i) {
    if (a[i].lo() != b[i].lo()) return a[i].lo() < b[i].lo();
    if (a[i].hi() != b[i].hi()) return a[i].hi() < b[i].hi();
  }
  return a.size() < b.size();
}

// Merge of closed intervals; touching intervals fuse.
std::vector<Coords> merge_1d(std::vector<Coords> boxes) {
  std::sort(boxes.begin(), boxes.end(), coords_less);
  std::vector<Coords> out;
  for (auto& b : boxes) {
    if (!out.empty() && b[0].lo() <= out.back()[0].hi()) {
      const double hi = std::max(out.back()[0].hi(), b[0].hi());
      out.back()[0] = Interval(out.back()[0].lo(), hi);
    } else {
      out.push_back(std::move(b));
    }
  }
  return out;
}

// Slab decomposition along the first coordinate: between consecutive
// breakpoints the cross-section is constant and normalized recursively;
// neighbouring slabs with identical cross-sections are fused. The result
// depends only on the union, which makes it canonical.
std::vector<Coords> normalize_rec(const std::vector<Coords>& boxes) {
  if (boxes.empty()) return {};
  const std::size_t dims = boxes.front().size();
  if (dims == 1) return merge_1d(boxes);

  std::vector<double> cuts;
  cuts.reserve(boxes.size() * 2);
  for (const auto& b : boxes) {
    cuts.push_back(b[0].lo());
    cuts.push_back(b[0].hi());
  }
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

  // Boxes sorted by lower bound so each slab only scans candidates.
  std::vector<const Coords*> order;
  order.reserve(boxes.size());
  for (const auto& b : boxes) order.push_back(&b);
  std::sort(order.begin(), order.end(),
            [](const Coords* a, const Coords* b) { return a->at(0).lo() < b->at(0).lo(); });

  struct Slab {
    double lo;
    double hi;
    std::vector<Coords> cross;
  };
  std::vector<Slab> slabs;
  for (std::size_t c = 0; c + 1 < cuts.size(); ++c) {
    const double a = cuts[c];
    const double b = cuts[c + 1];
    std::vector<Coords> tails;
    for (const Coords* box : order) {
      if ((*box)[0].lo() > a) break;
      if ((*box)[0].hi() >= b) tails.emplace_back(box->begin() + 1, box->end());
    }
    if (tails.empty()) continue;
    auto cross = normalize_rec(tails);
    if (!slabs.empty() && slabs.back().hi == a && slabs.back().cross == cross) {
      slabs.back().hi = b;
    } else {
      slabs.push_back({a, b, std::move(cross)});
    }
  }

  std::vector<Coords> out;
  for (const auto& s : slabs) {
    for (const auto& tail : s.cross) {
      Coords box;
      box.reserve(dims);
      box.emplace_back(s.lo, s.hi);
      box.insert(box.end(), tail.begin(), tail.end());
      out.push_back(std::move(box));
    }
  }
  return out;
}

}  // namespace

Paving::Paving(int n_state, int m_ctrl) : n_state_(n_state), m_ctrl_(m_ctrl) {
  if (n_state < 0 || m_ctrl < 0 || n_state + m_ctrl == 0) {
    throw ConfigError("paving needs a positive dimension");
  }
}

Paving Paving::from_disjoint(int n_state, int m_ctrl, std::vector<IvBox> boxes) {
  Paving p(n_state, m_ctrl);
  for (const auto& b : boxes) {
    if (b.dim() != n_state + m_ctrl) throw ConfigError("box dimension does not match paving");
  }
  std::sort(boxes.begin(), boxes.end(), canonical_less);
  p.boxes_ = std::move(boxes);
  return p;
}

bool Paving::contains_point(std::span<const double> p) const {
  return std::any_of(boxes_.begin(), boxes_.end(),
                     [&](const IvBox& b) { return b.contains_point(p); });
}

Paving normalize(std::vector<IvBox> boxes, int n_state, int m_ctrl) {
  std::vector<Coords> coords;
  coords.reserve(boxes.size());
  for (auto& b : boxes) {
    if (b.dim() != n_state + m_ctrl) throw ConfigError("box dimension does not match paving");
    Coords c(b.dims().begin(), b.dims().end());
    if (!degenerate(c)) coords.push_back(std::move(c));
  }
  std::vector<IvBox> out;
  for (auto& c : normalize_rec(coords)) out.emplace_back(std::move(c), n_state, m_ctrl);
  return Paving::from_disjoint(n_state, m_ctrl, std::move(out));
}

Paving unite(const Paving& a, const Paving& b) {
  if (a.n_state() != b.n_state() || a.m_ctrl() != b.m_ctrl()) {
    throw ConfigError("uniting pavings of different shape");
  }
  std::vector<IvBox> all = a.boxes();
  all.insert(all.end(), b.boxes().begin(), b.boxes().end());
  return normalize(std::move(all), a.n_state(), a.m_ctrl());
}

Paving project(const Paving& p) {
  if (p.m_ctrl() == 0) throw InvalidProjection("paving has no control coordinates to project out");
  std::vector<IvBox> shadows;
  shadows.reserve(p.size());
  for (const auto& b : p.boxes()) shadows.push_back(b.state_box());
  std::sort(shadows.begin(), shadows.end(), canonical_less);
  shadows.erase(std::unique(shadows.begin(), shadows.end()), shadows.end());
  return normalize(std::move(shadows), p.n_state(), 0);
}

double measure(const Paving& p) {
  double total = 0.0;
  for (const auto& b : p.boxes()) total += b.volume();
  return total;
}

std::vector<IvBox> subtract(const IvBox& a, const IvBox& b) {
  if (!a.intersects(b)) return {a};
  std::vector<IvBox> pieces;
  IvBox cur = a;
  for (int d = 0; d < a.dim(); ++d) {
    if (cur[d].lo() < b[d].lo()) {
      IvBox piece = cur;
      piece[d] = Interval(cur[d].lo(), b[d].lo());
      pieces.push_back(std::move(piece));
      cur[d] = Interval(b[d].lo(), cur[d].hi());
    }
    if (cur[d].hi() > b[d].hi()) {
      IvBox piece = cur;
      piece[d] = Interval(b[d].hi(), cur[d].hi());
      pieces.push_back(std::move(piece));
      cur[d] = Interval(cur[d].lo(), b[d].hi());
    }
  }
  return pieces;
}

bool covers_box(const Paving& p, const IvBox& b) {
  if (b.dim() != p.dim()) throw ConfigError("box dimension does not match paving");
  if (b.is_empty()) return true;
  std::vector<IvBox> remainder{b};
  std::vector<IvBox> next;
  for (const auto& q : p.boxes()) {
    if (!q.intersects(b)) continue;
    next.clear();
    for (const auto& r : remainder) {
      if (r.intersects(q)) {
        auto pieces = subtract(r, q);
        next.insert(next.end(), std::make_move_iterator(pieces.begin()),
                    std::make_move_iterator(pieces.end()));
      } else {
        next.push_back(r);
      }
    }
    remainder.swap(next);
    if (remainder.empty()) return true;
  }
  return remainder.empty();
}

bool intersects_box(const Paving& p, const IvBox& b) {
  if (b.dim() != p.dim()) throw ConfigError("box dimension does not match paving");
  return std::any_of(p.boxes().begin(), p.boxes().end(),
                     [&](const IvBox& q) { return q.intersects(b); });
}

bool equals(const Paving& a, const Paving& b) { return a == b; }

IvBox origin_gap(const Paving& p, const IvBox& cons) {
  const int n = cons.dim();
  if (p.dim() != n) throw ConfigError("origin_gap: paving and constraint box differ in dimension");
  const std::vector<double> origin(n, 0.0);
  if (!cons.contains_point(origin)) throw ConfigError("origin_gap: constraint box misses the origin");
  if (p.contains_point(origin)) throw OriginCoveredError("the origin is covered by the paving");

  IvBox gap(std::vector<Interval>(n, Interval(0.0)));

  // Does q lie across the current gap in every coordinate other than d?
  // Degenerate gap coordinates use the closed test, grown ones the open one.
  auto spans_others = [&](const IvBox& q, int d) {
    for (int j = 0; j < n; ++j) {
      if (j == d) continue;
      const Interval& g = gap[j];
      if (g.lo() == g.hi()) {
        if (!q[j].contains(g.lo())) return false;
      } else if (!(q[j].lo() < g.hi() && g.lo() < q[j].hi())) {
        return false;
      }
    }
    return true;
  };

  for (int d = 0; d < n; ++d) {
    double lo = cons[d].lo();
    for (const auto& q : p.boxes()) {
      if (spans_others(q, d) && q[d].hi() <= gap[d].lo()) lo = std::max(lo, q[d].hi());
    }
    gap[d] = Interval(lo, gap[d].hi());
    double hi = cons[d].hi();
    for (const auto& q : p.boxes()) {
      if (spans_others(q, d) && q[d].lo() >= gap[d].hi()) hi = std::min(hi, q[d].lo());
    }
    gap[d] = Interval(gap[d].lo(), hi);
  }
  return gap;
}

bool audit_disjoint(const Paving& p) {
  const auto& boxes = p.boxes();
  for (std::size_t i = 0; i < boxes.size(); ++i) {
    for (std::size_t j = i + 1; j < boxes.size(); ++j) {
      if (boxes[i].overlaps_interior(boxes[j])) return false;
    }
  }
  return true;
}

std::vector<Interval> components_1d(const Paving& p) {
  if (p.dim() != 1) throw ConfigError("components_1d needs a one-dimensional paving");
  std::vector<Interval> out;
  for (const auto& b : p.boxes()) {
    if (!out.empty() && b[0].lo() <= out.back().hi()) {
      out.back() = Interval(out.back().lo(), std::max(out.back().hi(), b[0].hi()));
    } else {
      out.push_back(b[0]);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------

namespace {

nlohmann::json box_json(const IvBox& b, const char* label) {
  nlohmann::json lo = nlohmann::json::array();
  nlohmann::json hi = nlohmann::json::array();
  for (const auto& d : b.dims()) {
    lo.push_back(d.lo());
    hi.push_back(d.hi());
  }
  return {{"lo", lo}, {"hi", hi}, {"label", label}};
}

}  // namespace

void write_paving(std::ostream& os, const Paving& inner, const PavingHeader& header,
                  const Paving* boundary) {
  nlohmann::json head = {{"dim", header.dim},
                         {"n_state", header.n_state},
                         {"m_ctrl", header.m_ctrl},
                         {"epsilon", header.epsilon},
                         {"alpha", header.alpha}};
  os << head.dump() << '\n';
  for (const auto& b : inner.boxes()) os << box_json(b, "inner").dump() << '\n';
  if (boundary != nullptr) {
    for (const auto& b : boundary->boxes()) os << box_json(b, "boundary").dump() << '\n';
  }
}

void write_paving(const std::string& path, const Paving& inner, const PavingHeader& header,
                  const Paving* boundary) {
  std::ofstream os(path);
  if (!os) throw ConfigError("cannot open " + path + " for writing");
  write_paving(os, inner, header, boundary);
}

PavingFile read_paving(std::istream& is) {
  PavingFile file;
  std::string line;
  if (!std::getline(is, line)) throw ConfigError("paving file is empty");
  try {
    const auto head = nlohmann::json::parse(line);
    file.header.dim = head.at("dim").get<int>();
    file.header.n_state = head.at("n_state").get<int>();
    file.header.m_ctrl = head.at("m_ctrl").get<int>();
    file.header.epsilon = head.value("epsilon", 0.0);
    file.header.alpha = head.value("alpha", 0.0);
    if (file.header.dim != file.header.n_state + file.header.m_ctrl) {
      throw ConfigError("paving header: dim != n_state + m_ctrl");
    }
    std::vector<IvBox> inner;
    std::vector<IvBox> boundary;
    while (std::getline(is, line)) {
      if (line.empty()) continue;
      const auto j = nlohmann::json::parse(line);
      const auto lo = j.at("lo").get<std::vector<double>>();
      const auto hi = j.at("hi").get<std::vector<double>>();
      if (static_cast<int>(lo.size()) != file.header.dim || lo.size() != hi.size()) {
        throw ConfigError("paving box has the wrong dimension");
      }
      std::vector<Interval> dims;
      for (std::size_t i = 0; i < lo.size(); ++i) dims.emplace_back(lo[i], hi[i]);
      IvBox box(std::move(dims), file.header.n_state, file.header.m_ctrl);
      const std::string label = j.value("label", "inner");
      if (label == "inner") {
        inner.push_back(std::move(box));
      } else if (label == "boundary") {
        boundary.push_back(std::move(box));
      } else {
        throw ConfigError("unknown box label '" + label + "'");
      }
    }
    file.inner = Paving::from_disjoint(file.header.n_state, file.header.m_ctrl, std::move(inner));
    file.boundary =
        Paving::from_disjoint(file.header.n_state, file.header.m_ctrl, std::move(boundary));
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed paving file: ") + e.what());
  }
  return file;
}

PavingFile read_paving(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open " + path);
  return read_paving(is);
}

}  // namespace doakit

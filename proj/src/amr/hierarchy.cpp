#include "tapestry/amr/hierarchy.hpp"

#include <cmath>
#include <sstream>

namespace tapestry::amr {

namespace {

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream is(s);
  while (std::getline(is, cur, sep)) out.push_back(cur);
  return out;
}

std::int64_t floor_even(std::int64_t v) { return 2 * floor_div(v, 2); }
std::int64_t ceil_even(std::int64_t v) { return -2 * floor_div(-v, 2); }

}  // namespace

std::vector<Centre> parse_centres(const std::string& text) {
  std::vector<Centre> out;
  for (const auto& item : split(text, ';')) {
    if (item.find_first_not_of(" \t") == std::string::npos) continue;
    const auto colon = item.find(':');
    if (colon == std::string::npos) throw std::invalid_argument("centre '" + item + "' lacks ':half-widths'");
    const auto pos = split(item.substr(0, colon), ',');
    if (pos.size() != 3) throw std::invalid_argument("centre '" + item + "' needs three coordinates");
    Centre c;
    for (int d = 0; d < 3; ++d) c.position[d] = std::stod(pos[static_cast<std::size_t>(d)]);
    for (const auto& w : split(item.substr(colon + 1), ',')) c.half_widths.push_back(std::stoll(w));
    out.push_back(c);
  }
  return out;
}

std::string format_centres(const std::vector<Centre>& centres) {
  std::ostringstream os;
  os.precision(17);
  for (std::size_t i = 0; i < centres.size(); ++i) {
    if (i) os << ';';
    const auto& c = centres[i];
    os << c.position[0] << ',' << c.position[1] << ',' << c.position[2] << ':';
    for (std::size_t l = 0; l < c.half_widths.size(); ++l) os << (l ? "," : "") << c.half_widths[l];
  }
  return os.str();
}

void InterpSpec::validate() const {
  if (spatial_order < 1 || spatial_order > 7 || spatial_order % 2 == 0)
    throw std::invalid_argument("spatial interpolation order must be one of 1, 3, 5, 7");
  if (time_order < 0 || time_order > 4) throw std::invalid_argument("time interpolation order must lie in [0, 4]");
}

NestingError::NestingError(int l, const std::string& what)
    : std::runtime_error("refinement level " + std::to_string(l) + ": " + what), level(l) {}

int buffer_width(int factor, int substeps, int stencil_radius) { return factor * substeps * stencil_radius; }

IndexBox coarsen(const IndexBox& fine) {
  IndexBox c;
  for (int d = 0; d < 3; ++d) {
    c.lo[d] = floor_div(fine.lo[d], 2);
    c.hi[d] = -floor_div(-fine.hi[d], 2);
  }
  return c;
}

IndexBox refine(const IndexBox& coarse) {
  IndexBox f;
  for (int d = 0; d < 3; ++d) {
    f.lo[d] = 2 * coarse.lo[d];
    f.hi[d] = 2 * coarse.hi[d];
  }
  return f;
}

RefinementHierarchy build_hierarchy(const unigrid::DomainSpec& domain, const HierarchySpec& spec) {
  if (spec.nlevels < 1) throw std::invalid_argument("a hierarchy needs at least one level");
  spec.interp.validate();
  if (spec.buffer_width < 0 || spec.ghost_width < 0) throw std::invalid_argument("negative buffer or ghost width");
  RefinementHierarchy h;
  h.domain = domain;
  h.spec = spec;
  h.levels.push_back({domain.h, {domain.box()}, {domain.box()}});
  for (int l = 1; l < spec.nlevels; ++l) {
    if (spec.centres.empty()) throw NestingError(l, "no centre of interest to refine around");
    const double hl = domain.h / static_cast<double>(std::int64_t{1} << l);
    std::vector<IndexBox> boxes;
    for (const auto& c : spec.centres) {
      if (c.half_widths.size() < static_cast<std::size_t>(spec.nlevels - 1))
        throw NestingError(l, "centre lacks a half-width for this level");
      const auto w = c.half_widths[static_cast<std::size_t>(l - 1)];
      if (w < 1) throw NestingError(l, "half-width must be positive");
      if (l > 1 && w > c.half_widths[static_cast<std::size_t>(l - 2)])
        throw NestingError(l, "half-widths must not grow with level");
      IndexBox b;
      for (int d = 0; d < 3; ++d) {
        const auto ci = static_cast<std::int64_t>(std::llround((c.position[d] - domain.origin[d]) / hl));
        b.lo[d] = floor_even(ci - w);
        b.hi[d] = ceil_even(ci + w);
      }
      boxes.push_back(b);
    }
    LevelRegions lr;
    lr.h = hl;
    lr.refined = normalize_union(boxes);
    std::vector<IndexBox> grown;
    for (const auto& b : lr.refined) grown.push_back(b.grown(spec.buffer_width));
    lr.evolved = normalize_union(grown);
    h.levels.push_back(std::move(lr));
  }
  check_nesting(h);
  return h;
}

void check_nesting(const RefinementHierarchy& h) {
  const int halo = h.spec.interp.stencil_halo();
  for (std::size_t l = 1; l < h.levels.size(); ++l) {
    const auto& parent = l == 1 ? std::vector<IndexBox>{h.domain.box()} : h.levels[l - 1].refined;
    for (const auto& e : h.levels[l].evolved) {
      const IndexBox need = coarsen(e.grown(h.spec.ghost_width)).grown(halo);
      if (!region_contains(parent, need)) {
        std::ostringstream os;
        os << "evolved box " << e << " with ghosts and interpolation stencil needs coarse points " << need
           << ", which leave the " << (l == 1 ? "domain" : "refined region of the next coarser level");
        throw NestingError(static_cast<int>(l), os.str());
      }
    }
  }
}

}  // namespace tapestry::amr

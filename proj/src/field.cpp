#include "mixedweak/field.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace mw {

namespace {

bool is_power_of_two(double x) {
  if (!(x > 0.0) || !std::isfinite(x)) return false;
  int e = 0;
  return std::frexp(x, &e) == 0.5;
}

void require_same_mesh(const Mesh& a, const Mesh& b) {
  if (!(a == b)) throw InputError("fields live on different meshes");
}

}  // namespace

Mesh::Mesh(int d, double L, int n) : dim(d), half_width(L), cells(n) {
  if (d < 1 || d > kMaxDim) throw InputError("mesh dimension must be 1, 2 or 3");
  if (!is_power_of_two(L)) throw InputError("box half-width must be a power of two");
  if (n < 2 || (n & (n - 1)) != 0) throw InputError("cells per axis must be a power of two >= 2");
  double total = 1.0;
  for (int i = 0; i < d; ++i) total *= n;
  if (total > 1e9) throw InputError("mesh too large");
}

int Mesh::cell_level() const {
  int e = 0;
  std::frexp(h(), &e);
  return e - 1;
}

std::size_t Mesh::size() const {
  std::size_t s = 1;
  for (int i = 0; i < dim; ++i) s *= static_cast<std::size_t>(cells);
  return s;
}

double Mesh::cell_volume() const { return std::pow(h(), dim); }

std::array<int, kMaxDim> Mesh::unflatten(std::size_t flat) const {
  std::array<int, kMaxDim> idx{};
  const auto N = static_cast<std::size_t>(cells);
  for (int d = 0; d < dim; ++d) {
    idx[static_cast<std::size_t>(d)] = static_cast<int>(flat % N);
    flat /= N;
  }
  return idx;
}

std::size_t Mesh::flatten(const std::array<int, kMaxDim>& idx) const {
  std::size_t flat = 0;
  const auto N = static_cast<std::size_t>(cells);
  for (int d = dim - 1; d >= 0; --d) flat = flat * N + static_cast<std::size_t>(idx[static_cast<std::size_t>(d)]);
  return flat;
}

Point Mesh::center(std::size_t flat) const {
  const auto idx = unflatten(flat);
  Point p{};
  for (int d = 0; d < dim; ++d) p[static_cast<std::size_t>(d)] = axis_center(idx[static_cast<std::size_t>(d)]);
  return p;
}

std::size_t Mesh::locate(std::span<const double> x) const {
  std::array<int, kMaxDim> idx{};
  for (int d = 0; d < dim; ++d) {
    const double t = std::floor((x[static_cast<std::size_t>(d)] + half_width) / h());
    idx[static_cast<std::size_t>(d)] = static_cast<int>(std::clamp(t, 0.0, static_cast<double>(cells - 1)));
  }
  return flatten(idx);
}

CellRange CellRange::whole(const Mesh& m) {
  CellRange r;
  r.dim = m.dim;
  for (int d = 0; d < m.dim; ++d) r.hi[static_cast<std::size_t>(d)] = m.cells;
  return r;
}

std::size_t CellRange::count() const {
  std::size_t c = 1;
  for (int d = 0; d < dim; ++d) {
    const auto i = static_cast<std::size_t>(d);
    if (hi[i] <= lo[i]) return 0;
    c *= static_cast<std::size_t>(hi[i] - lo[i]);
  }
  return c;
}

bool CellRange::contains(const std::array<int, kMaxDim>& idx) const {
  for (int d = 0; d < dim; ++d) {
    const auto i = static_cast<std::size_t>(d);
    if (idx[i] < lo[i] || idx[i] >= hi[i]) return false;
  }
  return true;
}

bool CellRange::contains(const CellRange& o) const {
  for (int d = 0; d < dim; ++d) {
    const auto i = static_cast<std::size_t>(d);
    if (o.lo[i] < lo[i] || o.hi[i] > hi[i]) return false;
  }
  return true;
}

bool CellRange::touches_boundary(const Mesh& m) const {
  for (int d = 0; d < dim; ++d) {
    const auto i = static_cast<std::size_t>(d);
    if (lo[i] <= 0 || hi[i] >= m.cells) return true;
  }
  return false;
}

SampledField SampledField::function(const Mesh& mesh, std::vector<double> values) {
  if (values.size() != mesh.size()) throw InputError("field value count does not match the mesh");
  for (double v : values)
    if (!std::isfinite(v)) throw DomainError("function field has a non-finite cell");
  return SampledField(mesh, std::move(values), FieldKind::Function);
}

SampledField SampledField::weight(const Mesh& mesh, std::vector<double> values) {
  if (values.size() != mesh.size()) throw InputError("field value count does not match the mesh");
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!(values[i] > 0.0) || !std::isfinite(values[i])) {
      std::ostringstream os;
      os << "not a weight: cell " << i << " has value " << values[i];
      throw DomainError(os.str());
    }
  }
  return SampledField(mesh, std::move(values), FieldKind::Weight);
}

SampledField SampledField::constant(const Mesh& mesh, double value, FieldKind kind) {
  std::vector<double> v(mesh.size(), value);
  return kind == FieldKind::Weight ? weight(mesh, std::move(v)) : function(mesh, std::move(v));
}

SampledField SampledField::sample(const Mesh& mesh, const std::function<double(const Point&)>& g, FieldKind kind,
                                  int sub) {
  sub = std::max(sub, 1);
  std::vector<double> v(mesh.size());
  const double h = mesh.h();
  int pts = 1;
  for (int d = 0; d < mesh.dim; ++d) pts *= sub;
  for (std::size_t c = 0; c < v.size(); ++c) {
    const auto idx = mesh.unflatten(c);
    double acc = 0.0;
    for (int s = 0; s < pts; ++s) {
      Point p{};
      int rest = s;
      for (int d = 0; d < mesh.dim; ++d) {
        const int j = rest % sub;
        rest /= sub;
        p[static_cast<std::size_t>(d)] = -mesh.half_width + (idx[static_cast<std::size_t>(d)] + (j + 0.5) / sub) * h;
      }
      acc += g(p);
    }
    v[c] = acc / pts;
  }
  return kind == FieldKind::Weight ? weight(mesh, std::move(v)) : function(mesh, std::move(v));
}

double SampledField::integral() const {
  long double s = 0.0L;
  for (double v : values_) s += v;
  return static_cast<double>(s) * mesh_.cell_volume();
}

double SampledField::sup_abs() const {
  double m = 0.0;
  for (double v : values_) m = std::max(m, std::abs(v));
  return m;
}

CellRange SampledField::support() const {
  CellRange r;
  r.dim = mesh_.dim;
  for (int d = 0; d < mesh_.dim; ++d) {
    r.lo[static_cast<std::size_t>(d)] = mesh_.cells;
    r.hi[static_cast<std::size_t>(d)] = 0;
  }
  for (std::size_t c = 0; c < values_.size(); ++c) {
    if (values_[c] == 0.0) continue;
    const auto idx = mesh_.unflatten(c);
    for (int d = 0; d < mesh_.dim; ++d) {
      const auto i = static_cast<std::size_t>(d);
      r.lo[i] = std::min(r.lo[i], idx[i]);
      r.hi[i] = std::max(r.hi[i], idx[i] + 1);
    }
  }
  return r;
}

SampledField SampledField::map(const std::function<double(double)>& f, FieldKind kind) const {
  std::vector<double> v(values_.size());
  std::transform(values_.begin(), values_.end(), v.begin(), f);
  return kind == FieldKind::Weight ? weight(mesh_, std::move(v)) : function(mesh_, std::move(v));
}

SampledField SampledField::pow(double e) const {
  return map([e](double x) { return std::pow(x, e); }, kind_);
}

SampledField SampledField::scaled(double c) const {
  const FieldKind k = (kind_ == FieldKind::Weight && c > 0.0) ? FieldKind::Weight : FieldKind::Function;
  return map([c](double x) { return c * x; }, k);
}

SampledField SampledField::times(const SampledField& other, FieldKind kind) const {
  require_same_mesh(mesh_, other.mesh_);
  std::vector<double> v(values_.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = values_[i] * other.values_[i];
  return kind == FieldKind::Weight ? weight(mesh_, std::move(v)) : function(mesh_, std::move(v));
}

SampledField SampledField::divided_by(const SampledField& other, FieldKind kind) const {
  require_same_mesh(mesh_, other.mesh_);
  std::vector<double> v(values_.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = values_[i] / other.values_[i];
  return kind == FieldKind::Weight ? weight(mesh_, std::move(v)) : function(mesh_, std::move(v));
}

SampledField SampledField::coarsened() const {
  if (mesh_.cells < 4) throw DomainError("coarsened: mesh too coarse");
  const Mesh coarse(mesh_.dim, mesh_.half_width, mesh_.cells / 2);
  std::vector<double> v(coarse.size(), 0.0);
  for (std::size_t i = 0; i < values_.size(); ++i) {
    auto idx = mesh_.unflatten(i);
    for (int d = 0; d < mesh_.dim; ++d) idx[static_cast<std::size_t>(d)] /= 2;
    v[coarse.flatten(idx)] += values_[i];
  }
  const double share = 1.0 / static_cast<double>(std::size_t{1} << mesh_.dim);
  for (double& x : v) x *= share;
  return SampledField(coarse, std::move(v), kind_);
}

std::size_t PrefixSums::stride(int axis) const {
  std::size_t s = 1;
  for (int d = 0; d < axis; ++d) s *= static_cast<std::size_t>(mesh_.cells + 1);
  return s;
}

PrefixSums::PrefixSums(const Mesh& mesh, std::span<const double> values) : mesh_(mesh) {
  const auto M = static_cast<std::size_t>(mesh.cells + 1);
  std::size_t total = 1;
  for (int d = 0; d < mesh.dim; ++d) total *= M;
  table_.assign(total, 0.0L);
  // Scatter values at offset +1 on every axis, then run cumulative sums axis by axis.
  for (std::size_t c = 0; c < values.size(); ++c) {
    const auto idx = mesh.unflatten(c);
    std::size_t t = 0;
    for (int d = 0; d < mesh.dim; ++d) t += static_cast<std::size_t>(idx[static_cast<std::size_t>(d)] + 1) * stride(d);
    table_[t] = values[c];
  }
  for (int d = 0; d < mesh.dim; ++d) {
    const std::size_t s = stride(d);
    for (std::size_t t = 0; t < total; ++t) {
      if ((t / s) % M == 0) continue;
      table_[t] += table_[t - s];
    }
  }
}

double PrefixSums::sum(const CellRange& r) const {
  if (r.count() == 0) return 0.0;
  long double acc = 0.0L;
  const int corners = 1 << mesh_.dim;
  for (int b = 0; b < corners; ++b) {
    std::size_t t = 0;
    int sign = 1;
    for (int d = 0; d < mesh_.dim; ++d) {
      const auto i = static_cast<std::size_t>(d);
      if ((b >> d) & 1) {
        t += static_cast<std::size_t>(r.lo[i]) * stride(d);
        sign = -sign;
      } else {
        t += static_cast<std::size_t>(r.hi[i]) * stride(d);
      }
    }
    acc += sign * table_[t];
  }
  return static_cast<double>(acc);
}

double range_min(const SampledField& f, const CellRange& r) {
  double m = std::numeric_limits<double>::infinity();
  r.for_each(f.mesh(), [&](std::size_t i) { m = std::min(m, f[i]); });
  return m;
}

double range_max(const SampledField& f, const CellRange& r) {
  double m = -std::numeric_limits<double>::infinity();
  r.for_each(f.mesh(), [&](std::size_t i) { m = std::max(m, f[i]); });
  return m;
}

double range_sum(const SampledField& f, const CellRange& r) {
  long double s = 0.0L;
  r.for_each(f.mesh(), [&](std::size_t i) { s += f[i]; });
  return static_cast<double>(s);
}

}  // namespace mw

#include "aplab/grid.hpp"

#include "aplab/report.hpp"

#include <json.hpp>

#include <bit>
#include <complex>
#include <cstring>
#include <fstream>
#include <iterator>

namespace aplab {

PeriodicGrid::PeriodicGrid(int d, double L, long n, double max_h) : d_(d), L_(L), n_(n) {
  if (d < 1 || d > 3) throw ValidationError("PeriodicGrid: d must lie in [1, 3]");
  if (!(L > 0.0) || !std::isfinite(L)) throw ValidationError("PeriodicGrid: L must be positive");
  if (n < 4 || !std::has_single_bit(static_cast<unsigned long>(n)))
    throw ValidationError("PeriodicGrid: n must be a power of two >= 4");
  if (h() > max_h * (1.0 + 1e-12))
    throw ValidationError("PeriodicGrid: h = " + std::to_string(h()) + " exceeds " +
                          std::to_string(max_h));
  size_ = 1;
  strides_.assign(static_cast<std::size_t>(d), 1);
  for (int a = d - 1; a >= 0; --a) {
    strides_[static_cast<std::size_t>(a)] = size_;
    size_ *= n;
  }
}

PeriodicGrid PeriodicGrid::for_eps(int d, double eps, double epsL, double h_max) {
  if (!(eps > 0.0)) throw ValidationError("PeriodicGrid::for_eps: eps must be > 0");
  const double L = epsL / eps;
  long n = 4;
  while (L / static_cast<double>(n) > h_max * (1.0 + 1e-12)) n *= 2;
  return PeriodicGrid(d, L, n, h_max);
}

VectorXd PeriodicGrid::point(long idx) const {
  VectorXd x(d_);
  for (int a = 0; a < d_; ++a) x[a] = coord(axis_index(idx, a));
  return x;
}

long PeriodicGrid::neighbor(long idx, int axis, long steps) const {
  const long j = axis_index(idx, axis);
  const long moved = ((j + steps) % n_ + n_) % n_;
  return idx + (moved - j) * stride(axis);
}

bool PeriodicGrid::in_window(long idx, double fraction) const {
  const double limit = fraction * 0.5 * L_ * (1.0 + 1e-12);
  for (int a = 0; a < d_; ++a)
    if (std::abs(coord(axis_index(idx, a))) > limit) return false;
  return true;
}

GridField::GridField(PeriodicGrid grid, int components)
    : grid_(std::move(grid)), components_(components),
      values_(VectorXd::Zero(grid_.size() * components)) {
  if (components < 1) throw ValidationError("GridField: components must be >= 1");
}

GridField::GridField(PeriodicGrid grid, VectorXd values, int components)
    : grid_(std::move(grid)), components_(components), values_(std::move(values)) {
  if (components < 1) throw ValidationError("GridField: components must be >= 1");
  if (values_.size() != grid_.size() * components)
    throw ValidationError("GridField: value count does not match the grid");
  if (!values_.allFinite()) throw ValidationError("GridField: non-finite values");
}

double GridField::sup(double window) const {
  double best = 0.0;
  for (long i = 0; i < grid_.size(); ++i) {
    if (window < 1.0 && !grid_.in_window(i, window)) continue;
    for (int c = 0; c < components_; ++c) best = std::max(best, std::abs((*this)(i, c)));
  }
  return best;
}

double GridField::mean() const { return values_.mean(); }

void GridField::save(const std::string& path) const {
  static_assert(std::endian::native == std::endian::little, "binary format is little-endian");
  std::string bytes(static_cast<std::size_t>(values_.size()) * sizeof(double), '\0');
  std::memcpy(bytes.data(), values_.data(), bytes.size());
  write_file_atomic(path, bytes);
  nlohmann::json meta = {{"d", grid_.dim()},
                         {"L", grid_.side()},
                         {"n", grid_.n()},
                         {"components", components_},
                         {"dtype", "float64-le"},
                         {"ordering", "component-major, row-major, last index fastest"}};
  write_file_atomic(path + ".json", meta.dump(2) + "\n");
}

GridField GridField::load(const std::string& path) {
  std::ifstream meta_in(path + ".json");
  if (!meta_in) throw ValidationError("GridField::load: cannot read " + path + ".json");
  nlohmann::json meta;
  try {
    meta = nlohmann::json::parse(meta_in);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("GridField::load: bad sidecar: ") + e.what());
  }
  PeriodicGrid grid(meta.at("d").get<int>(), meta.at("L").get<double>(), meta.at("n").get<long>(),
                    std::numeric_limits<double>::infinity());
  const int comps = meta.at("components").get<int>();
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("GridField::load: cannot read " + path);
  const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  VectorXd values(grid.size() * comps);
  if (bytes.size() != static_cast<std::size_t>(values.size()) * sizeof(double))
    throw ValidationError("GridField::load: size mismatch in " + path);
  std::memcpy(values.data(), bytes.data(), bytes.size());
  return GridField(grid, std::move(values), comps);
}

VectorXd sample_on_grid(const QuasiperiodicField& f, const PeriodicGrid& grid,
                        const VectorXd& offset) {
  const int d = grid.dim();
  if (f.dim() != d || offset.size() != d)
    throw ValidationError("sample_on_grid: dimension mismatch");
  const long n = grid.n();
  VectorXd out = VectorXd::Zero(grid.size());
  std::vector<std::vector<std::complex<double>>> tables(static_cast<std::size_t>(d));
  for (const auto& term : f.lifted().terms()) {
    if (term.k.isZero()) {
      out.array() += term.c;
      continue;
    }
    // exp(2 pi i xi.x) factorizes over the physical axes.
    const VectorXd xi = f.winding().matrix().transpose() * term.k.cast<double>();
    for (int a = 0; a < d; ++a) {
      auto& t = tables[static_cast<std::size_t>(a)];
      t.resize(static_cast<std::size_t>(n));
      for (long j = 0; j < n; ++j) {
        const double x = grid.coord(j) + offset[a] * grid.h();
        const double phase = xi[a] * x;
        t[static_cast<std::size_t>(j)] = std::polar(1.0, kTwoPi * (phase - std::floor(phase)));
      }
    }
    const std::complex<double> amp(term.c, -term.s);
    for (long idx = 0; idx < grid.size(); ++idx) {
      std::complex<double> e = amp;
      for (int a = 0; a < d; ++a) e *= tables[static_cast<std::size_t>(a)][static_cast<std::size_t>(grid.axis_index(idx, a))];
      out[idx] += e.real();
    }
  }
  return out;
}

}  // namespace aplab

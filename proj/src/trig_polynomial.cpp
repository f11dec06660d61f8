#include "aplab/trig_polynomial.hpp"

#include <algorithm>
#include <complex>
#include <map>

namespace aplab {

namespace {

using Key = std::vector<int>;

Key key_of(const VectorXi& k) { return Key(k.data(), k.data() + k.size()); }

// Sign of the first nonzero entry; 0 for the zero vector.
int leading_sign(const VectorXi& k) {
  for (Index i = 0; i < k.size(); ++i) {
    if (k[i] > 0) return 1;
    if (k[i] < 0) return -1;
  }
  return 0;
}

}  // namespace

TrigPolynomial::TrigPolynomial(int m) : m_(m) {
  if (m < 1) throw ValidationError("TrigPolynomial: torus dimension must be >= 1");
}

TrigPolynomial::TrigPolynomial(int m, std::vector<TrigTerm> terms) : TrigPolynomial(m) {
  std::map<Key, bool> seen;
  for (auto& t : terms) {
    if (t.k.size() != m) throw ValidationError("TrigPolynomial: frequency length != torus dimension");
    if (!std::isfinite(t.c) || !std::isfinite(t.s))
      throw ValidationError("TrigPolynomial: non-finite amplitude");
    if (leading_sign(t.k) < 0) {
      t.k = -t.k;
      t.s = -t.s;
    }
    if (leading_sign(t.k) == 0) t.s = 0.0;
    if (!seen.emplace(key_of(t.k), true).second)
      throw ValidationError("TrigPolynomial: duplicate frequency");
    terms_.push_back(std::move(t));
  }
}

TrigPolynomial TrigPolynomial::constant(int m, double value) {
  TrigPolynomial p(m);
  p.add_term(VectorXi::Zero(m), value, 0.0);
  return p;
}

TrigPolynomial TrigPolynomial::mode(const VectorXi& k, double c, double s) {
  return TrigPolynomial(static_cast<int>(k.size()), {TrigTerm{k, c, s}});
}

double TrigPolynomial::mean() const {
  for (const auto& t : terms_)
    if (leading_sign(t.k) == 0) return t.c;
  return 0.0;
}

void TrigPolynomial::add_term(const VectorXi& k_in, double c, double s) {
  VectorXi k = k_in;
  const int sign = leading_sign(k);
  if (sign < 0) {
    k = -k;
    s = -s;
  }
  if (sign == 0) s = 0.0;
  for (auto& t : terms_) {
    if (t.k == k) {
      t.c += c;
      t.s += s;
      return;
    }
  }
  terms_.push_back(TrigTerm{k, c, s});
}

TrigPolynomial TrigPolynomial::shifted(const VectorXd& beta) const {
  TrigPolynomial out(m_);
  out.terms_.reserve(terms_.size());
  for (const auto& t : terms_) {
    const double phase = kTwoPi * t.k.cast<double>().dot(beta);
    const double cp = std::cos(phase), sp = std::sin(phase);
    // c cos(th + p) + s sin(th + p) expanded in cos th, sin th.
    out.terms_.push_back(TrigTerm{t.k, t.c * cp + t.s * sp, t.s * cp - t.c * sp});
  }
  return out;
}

TrigPolynomial TrigPolynomial::difference(const VectorXd& beta, const VectorXd& gamma) const {
  TrigPolynomial out(m_);
  out.terms_.reserve(terms_.size());
  for (const auto& t : terms_) {
    if (leading_sign(t.k) == 0) continue;
    const double pb = kTwoPi * t.k.cast<double>().dot(beta);
    const double pg = kTwoPi * t.k.cast<double>().dot(gamma);
    const double dc = 0.5 * (std::cos(pb) - std::cos(pg));
    const double ds = 0.5 * (std::sin(pb) - std::sin(pg));
    out.terms_.push_back(TrigTerm{t.k, t.c * dc + t.s * ds, t.s * dc - t.c * ds});
  }
  return out;
}

TrigPolynomial TrigPolynomial::derivative(int axis) const {
  if (axis < 0 || axis >= m_) throw ValidationError("TrigPolynomial::derivative: axis out of range");
  TrigPolynomial out(m_);
  for (const auto& t : terms_) {
    if (t.k[axis] == 0) continue;
    const double w = kTwoPi * t.k[axis];
    out.terms_.push_back(TrigTerm{t.k, w * t.s, -w * t.c});
  }
  return out;
}

TrigPolynomial TrigPolynomial::pruned(double tol) const {
  TrigPolynomial out(m_);
  for (const auto& t : terms_)
    if (std::abs(t.c) > tol || std::abs(t.s) > tol) out.terms_.push_back(t);
  return out;
}

TrigPolynomial& TrigPolynomial::operator+=(const TrigPolynomial& other) {
  if (m_ == 0) m_ = other.m_;
  if (other.m_ != m_) throw ValidationError("TrigPolynomial: torus dimension mismatch");
  for (const auto& t : other.terms_) add_term(t.k, t.c, t.s);
  return *this;
}

TrigPolynomial& TrigPolynomial::operator*=(double factor) {
  for (auto& t : terms_) {
    t.c *= factor;
    t.s *= factor;
  }
  return *this;
}

TrigPolynomial operator*(const TrigPolynomial& a, const TrigPolynomial& b) {
  if (a.m_ != b.m_) throw ValidationError("TrigPolynomial: torus dimension mismatch");
  using C = std::complex<double>;
  // Expand into two-sided exponential amplitudes, convolve, fold back.
  auto expand = [](const TrigPolynomial& p) {
    std::vector<std::pair<VectorXi, C>> out;
    for (const auto& t : p.terms_) {
      if (leading_sign(t.k) == 0) {
        out.emplace_back(t.k, C(t.c, 0.0));
      } else {
        out.emplace_back(t.k, C(0.5 * t.c, -0.5 * t.s));
        out.emplace_back(-t.k, C(0.5 * t.c, 0.5 * t.s));
      }
    }
    return out;
  };
  std::map<Key, C> acc;
  for (const auto& [ka, ca] : expand(a))
    for (const auto& [kb, cb] : expand(b)) acc[key_of(ka + kb)] += ca * cb;

  TrigPolynomial out(a.m_);
  for (const auto& [key, amp] : acc) {
    VectorXi k = Eigen::Map<const VectorXi>(key.data(), static_cast<Index>(key.size()));
    const int sign = leading_sign(k);
    if (sign == 0) out.add_term(k, amp.real(), 0.0);
    else if (sign > 0) out.add_term(k, 2.0 * amp.real(), -2.0 * amp.imag());
  }
  return out;
}

VectorXd TrigPolynomial::sample_lattice(int n) const {
  if (n < 1) throw ValidationError("sample_lattice: n must be >= 1");
  Index total = 1;
  for (int i = 0; i < m_; ++i) total *= n;
  VectorXd values = VectorXd::Zero(total);
  VectorXd cos_table(n), sin_table(n);
  for (int j = 0; j < n; ++j) {
    cos_table[j] = std::cos(kTwoPi * j / n);
    sin_table[j] = std::sin(kTwoPi * j / n);
  }
  std::vector<int> idx(static_cast<std::size_t>(m_), 0);
  for (const auto& t : terms_) {
    std::vector<int> step(static_cast<std::size_t>(m_));
    for (int i = 0; i < m_; ++i) step[i] = ((t.k[i] % n) + n) % n;
    std::fill(idx.begin(), idx.end(), 0);
    int phase = 0;
    for (Index p = 0; p < total; ++p) {
      values[p] += t.c * cos_table[phase] + t.s * sin_table[phase];
      // Odometer increment, last index fastest. A full wrap of index i adds
      // n * step[i] to the phase, which is 0 mod n.
      for (int i = m_ - 1; i >= 0; --i) {
        phase = (phase + step[i]) % n;
        if (++idx[i] < n) break;
        idx[i] = 0;
      }
    }
  }
  return values;
}

double lifted_eval(const TrigPolynomial& F, const VectorXd& alpha) { return F(alpha); }

double derivative_norm_bound(const TrigPolynomial& F, int order) {
  if (order < 0) throw ValidationError("derivative_norm_bound: order must be >= 0");
  double bound = 0.0;
  for (const auto& t : F.terms()) {
    const double amp = std::abs(t.c) + std::abs(t.s);
    const double w = kTwoPi * t.k.cwiseAbs().sum();
    if (order > 0 && w == 0.0) continue;
    bound += amp * std::pow(w, order);
  }
  return bound;
}

double chi_m(const TrigPolynomial& F, int m_cut) {
  if (m_cut < 0 || m_cut > F.torus_dim()) throw ValidationError("chi_m: m_cut out of range");
  double tail = 0.0;
  for (const auto& t : F.terms()) {
    if (t.k.tail(F.torus_dim() - m_cut).cwiseAbs().sum() != 0)
      tail += std::abs(t.c) + std::abs(t.s);
  }
  return tail;
}

}  // namespace aplab

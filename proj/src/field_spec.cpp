#include "aplab/field_spec.hpp"

#include <toml.hpp>

#include <cstdio>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace aplab {

namespace {

[[noreturn]] void fail(const std::string& origin, const std::string& what) {
  throw ValidationError(origin + ": " + what);
}

double number(const toml::node* node, const std::string& origin, const std::string& what) {
  if (!node) fail(origin, "missing " + what);
  if (auto v = node->value<double>()) return *v;  // integers convert too
  fail(origin, what + " must be a number");
}

long integer(const toml::node* node, const std::string& origin, const std::string& what) {
  if (!node) fail(origin, "missing " + what);
  if (auto v = node->value_exact<int64_t>()) return static_cast<long>(*v);
  fail(origin, what + " must be an integer");
}

const toml::array& array(const toml::node* node, const std::string& origin, const std::string& what) {
  if (!node || !node->is_array()) fail(origin, what + " must be an array");
  return *node->as_array();
}

std::string format(double x) {
  std::ostringstream out;
  out << std::setprecision(17) << x;
  std::string s = out.str();
  if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
  return s;
}

}  // namespace

std::string fnv1a_hex(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

FieldSpec parse_field_spec(std::string_view text, const std::string& origin) {
  toml::table root;
  try {
    root = toml::parse(text, origin);
  } catch (const toml::parse_error& e) {
    std::ostringstream msg;
    msg << "line " << e.source().begin.line << ": " << e.description();
    fail(origin, msg.str());
  }

  const toml::array& rows = array(root["winding"]["rows"].node(), origin, "winding.rows");
  if (rows.empty()) fail(origin, "winding.rows is empty");
  const long m = static_cast<long>(rows.size());
  long d = -1;
  MatrixXd M;
  for (long r = 0; r < m; ++r) {
    const toml::array& row = array(rows.get(static_cast<std::size_t>(r)), origin, "winding.rows[" + std::to_string(r) + "]");
    if (d < 0) {
      d = static_cast<long>(row.size());
      if (d < 1) fail(origin, "winding rows must be non-empty");
      M = MatrixXd::Zero(m, d);
    }
    if (static_cast<long>(row.size()) != d) fail(origin, "winding rows have different lengths");
    for (long c = 0; c < d; ++c) M(r, c) = number(row.get(static_cast<std::size_t>(c)), origin, "winding entry");
  }
  WindingMatrix winding(M);

  const double lambda = number(root["lambda"].node(), origin, "lambda");
  FieldSpec spec{CoefficientField::constant(MatrixXd::Identity(1, 1), 1.0)};
  spec.origin = origin;
  spec.hash = fnv1a_hex(text);
  if (root.contains("theta")) spec.theta = number(root["theta"].node(), origin, "theta");
  if (!(spec.theta > 0.0)) fail(origin, "theta must be positive");
  HolderRecord holder;
  if (const toml::table* h = root["holder"].as_table()) {
    holder.gamma = number(h->get("gamma"), origin, "holder.gamma");
    holder.K = number(h->get("K"), origin, "holder.K");
  }
  const double kappa = root.contains("kappa") ? number(root["kappa"].node(), origin, "kappa") : 0.0;

  MatrixXd shift = MatrixXd::Zero(d, d);
  std::vector<std::vector<TrigTerm>> terms(static_cast<std::size_t>(d * d));
  std::vector<char> seen(static_cast<std::size_t>(d * d), 0);
  const toml::array* entries = root["entry"].as_array();
  if (!entries || entries->empty()) fail(origin, "no [[entry]] tables");
  for (const toml::node& node : *entries) {
    const toml::table* e = node.as_table();
    if (!e) fail(origin, "entry must be a table");
    const long i = integer(e->get("i"), origin, "entry.i");
    const long j = integer(e->get("j"), origin, "entry.j");
    if (i < 0 || i >= d || j < 0 || j >= d) fail(origin, "entry index out of range");
    const std::size_t slot = static_cast<std::size_t>(i * d + j);
    if (seen[slot]) fail(origin, "entry (" + std::to_string(i) + ", " + std::to_string(j) + ") given twice");
    seen[slot] = 1;
    if (e->contains("shift")) shift(i, j) = number(e->get("shift"), origin, "entry.shift");
    if (!e->contains("terms")) continue;
    for (const toml::node& tn : array(e->get("terms"), origin, "entry.terms")) {
      const toml::array& t = array(&tn, origin, "term");
      if (static_cast<long>(t.size()) != m + 2)
        fail(origin, "each term needs m integer frequencies plus cos and sin amplitudes");
      TrigTerm term{VectorXi(m)};
      for (long a = 0; a < m; ++a) term.k[a] = static_cast<int>(integer(t.get(static_cast<std::size_t>(a)), origin, "frequency"));
      term.c = number(t.get(static_cast<std::size_t>(m)), origin, "cos amplitude");
      term.s = number(t.get(static_cast<std::size_t>(m + 1)), origin, "sin amplitude");
      terms[slot].push_back(term);
    }
  }
  std::vector<TrigPolynomial> polys;
  for (auto& t : terms) polys.emplace_back(static_cast<int>(m), std::move(t));
  // The constructor validates ellipticity on its lattice.
  spec.field = CoefficientField(winding, shift, std::move(polys), lambda, holder, kappa);
  return spec;
}

FieldSpec load_field_spec(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot read field spec " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_field_spec(buf.str(), path);
}

std::string field_spec_toml(const CoefficientField& field, double theta) {
  std::ostringstream out;
  const int d = field.dim();
  const MatrixXd& M = field.winding().matrix();
  out << "lambda = " << format(field.lambda()) << "\n";
  out << "theta = " << format(theta) << "\n";
  if (field.kappa() != 0.0) out << "kappa = " << format(field.kappa()) << "\n";
  out << "\n[holder]\ngamma = " << format(field.holder().gamma) << "\nK = " << format(field.holder().K) << "\n";
  out << "\n[winding]\nrows = [";
  for (Index r = 0; r < M.rows(); ++r) {
    out << (r ? ", [" : "[");
    for (Index c = 0; c < M.cols(); ++c) out << (c ? ", " : "") << format(M(r, c));
    out << "]";
  }
  out << "]\n";
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) {
      const TrigPolynomial& p = field.lifted_entry(i, j);
      const double s = field.shift()(i, j);
      if (p.empty() && s == 0.0) continue;
      out << "\n[[entry]]\ni = " << i << "\nj = " << j << "\nshift = " << format(s) << "\nterms = [";
      bool first = true;
      for (const TrigTerm& t : p.terms()) {
        out << (first ? "[" : ", [");
        first = false;
        for (Index a = 0; a < t.k.size(); ++a) out << t.k[a] << ", ";
        out << format(t.c) << ", " << format(t.s) << "]";
      }
      out << "]\n";
    }
  return out.str();
}

}  // namespace aplab
